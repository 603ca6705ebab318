"""Hamming-based diversity metrics over solution sets.

``ham`` is the normalized Hamming distance between two equal-length binary
vectors. ``dbin`` averages it over all unordered pairs of a set, so a set
duplicated element-for-element scores lower while relabeling solutions
changes nothing. ``dall`` extends to mixed sets via range-scaled
per-variable variances.
"""

import numpy as np


def project_binary(x, binary_index, int_tol: float = 1e-6):
    """0/1 vector of x restricted to the binary columns, in index order.

    Values are rounded to the nearest integer first; LP noise up to int_tol
    is expected, larger deviations raise.
    """
    vals = np.asarray([x[j] for j in binary_index], dtype=float)
    bits = np.rint(vals)
    if np.any(np.abs(vals - bits) > int_tol):
        worst = int(np.argmax(np.abs(vals - bits)))
        raise ValueError(
            f"binary column {binary_index[worst]} has non-integral value {vals[worst]!r}"
        )
    return bits.astype(np.int8)


def ham(a, b) -> float:
    """Normalized Hamming distance: mean absolute difference of two bit vectors."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError(f"ham needs two equal-length vectors, got {a.shape} and {b.shape}")
    if a.size == 0:
        raise ValueError("ham is undefined for empty vectors")
    return float(np.abs(a - b).mean())


def dbin(projections) -> float:
    """Mean pairwise normalized Hamming distance over a set of bit vectors.

    Undefined for fewer than two solutions (callers report singleton
    diversity as 0 where a number is needed).
    """
    p = np.asarray(projections, dtype=float)
    if p.ndim != 2 or p.shape[0] < 2:
        raise ValueError("dbin needs at least two solutions")
    n, width = p.shape
    if width == 0:
        raise ValueError("dbin is undefined for zero-length projections")
    # sum over pairs of mean |a - b| equals, per bit, ones * (n - ones)
    ones = p.sum(axis=0)
    pair_total = float((ones * (n - ones)).sum()) / width
    return 2.0 * pair_total / (n * (n - 1))


def dall(solutions, ranges, per_variable: bool = True) -> float:
    """Range-scaled population-variance diversity of full solution vectors.

    ``ranges`` gives the scaling R per variable; variables with R <= 0 are
    skipped (an error if none remain). The default normalizes by the number
    of included variables; ``per_variable=False`` keeps the literal
    sum-over-variables divided by the set size.
    """
    s = np.asarray(solutions, dtype=float)
    if s.ndim != 2 or s.shape[0] < 2:
        raise ValueError("dall needs at least two solutions")
    r = np.asarray(ranges, dtype=float)
    if r.shape != (s.shape[1],):
        raise ValueError(f"need one range per variable, got {r.shape} for {s.shape[1]} variables")
    keep = r > 0
    if not np.any(keep):
        raise ValueError("all variables have zero range")
    var = s[:, keep].var(axis=0)  # population variance, ddof=0
    scaled = var / r[keep]
    if per_variable:
        return float(scaled.mean())
    return float(scaled.sum() / s.shape[0])


def pairwise_ham(projections):
    """Dense matrix of pairwise normalized Hamming distances."""
    p = np.asarray(projections, dtype=float)
    if p.ndim != 2:
        raise ValueError("pairwise_ham needs a 2-d array of projections")
    n, width = p.shape
    if width == 0:
        raise ValueError("pairwise_ham is undefined for zero-length projections")
    q = 1.0 - p
    d = (p @ q.T + q @ p.T) / width
    np.fill_diagonal(d, 0.0)
    return d


class DiversityReport:
    """DBin/DAll summary of a solution set."""

    def __init__(self, set_size: int, dbin_value, dall_value=None):
        self.set_size = set_size
        self.pair_count = set_size * (set_size - 1) // 2
        self.dbin = dbin_value
        self.dall = dall_value

    @classmethod
    def compute(cls, projections, solutions=None, ranges=None):
        p = np.asarray(projections)
        n = p.shape[0]
        d = dbin(p) if n >= 2 else 0.0
        a = None
        if solutions is not None and ranges is not None and n >= 2:
            a = dall(solutions, ranges)
        return cls(n, d, a)
