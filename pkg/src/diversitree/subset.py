"""Pick a maximally diverse p-subset of a solution pool.

The objective is the pair-sum of normalized Hamming distances, whose argmax
coincides with maximizing the mean pairwise distance of the subset.

Methods:

* ``greedy``: seed with a farthest pair, then repeatedly add the solution
  with the largest summed distance to the chosen set.
* ``greedy_swap``: best-improvement single swaps to a local optimum
  (iteration cap 50 * p per start), restarted from the greedy pick, a
  greedy-drop pick, and one farthest-partner pick per pool member; the
  best local optimum wins.
* ``exact``: brute force over all combinations, permitted only while
  C(n, p) stays at or below two million.

Greedy variants break ties toward the lowest solution index; exact breaks
ties on canonical content so pool order cannot change the answer.
"""

import itertools
import math

import numpy as np

from .diversity import pairwise_ham

EXACT_LIMIT = 2_000_000
SWAP_CAP_FACTOR = 50
METHODS = ("greedy", "greedy_swap", "exact")


def _projection_matrix(pool_or_projections) -> np.ndarray:
    if hasattr(pool_or_projections, "projection_matrix"):
        return np.asarray(pool_or_projections.projection_matrix(), dtype=float)
    return np.asarray(pool_or_projections, dtype=float)


def pair_sum(dist: np.ndarray, chosen) -> float:
    idx = list(chosen)
    sub = dist[np.ix_(idx, idx)]
    return float(sub.sum() / 2.0)


def dbin_delta(dist: np.ndarray, chosen, out: int, incoming: int) -> float:
    """Pair-sum change from swapping ``out`` for ``incoming``; O(p)."""
    delta = 0.0
    for k in chosen:
        if k == out:
            continue
        delta += dist[incoming, k] - dist[out, k]
    return delta


def _greedy(dist: np.ndarray, p: int) -> list:
    n = dist.shape[0]
    bestdist = -1.0
    seed = (0, 1)
    for i in range(n):
        for j in range(i + 1, n):
            if dist[i, j] > bestdist:
                bestdist = dist[i, j]
                seed = (i, j)
    chosen = [seed[0], seed[1]]
    while len(chosen) < p:
        sums = dist[:, chosen].sum(axis=1)
        sums[chosen] = -np.inf
        nxt = int(np.argmax(sums))  # argmax keeps the lowest index on ties
        chosen.append(nxt)
    return chosen


def _swap_to_local_optimum(dist: np.ndarray, chosen: list) -> list:
    chosen = list(chosen)
    in_set = set(chosen)
    n = dist.shape[0]
    for _ in range(SWAP_CAP_FACTOR * len(chosen)):
        best_gain = 1e-12
        best_move = None
        for out in sorted(chosen):
            for inc in range(n):
                if inc in in_set:
                    continue
                gain = dbin_delta(dist, chosen, out, inc)
                if gain > best_gain:
                    best_gain = gain
                    best_move = (out, inc)
        if best_move is None:
            break
        out, inc = best_move
        chosen[chosen.index(out)] = inc
        in_set.discard(out)
        in_set.add(inc)
    return sorted(chosen)


def _greedy_drop(dist: np.ndarray, p: int) -> list:
    """Peel the least-contributing member off the full pool until p remain."""
    chosen = list(range(dist.shape[0]))
    contrib = dist.sum(axis=1).astype(float)
    while len(chosen) > p:
        worst = min(chosen, key=lambda i: (contrib[i], i))
        chosen.remove(worst)
        for i in chosen:
            contrib[i] -= dist[i, worst]
    return chosen


def _greedy_from(dist: np.ndarray, first: int, p: int) -> list:
    j = int(np.argmax(dist[first]))
    if j == first:
        j = (first + 1) % dist.shape[0]
    chosen = [first, j]
    sums = dist[:, chosen].sum(axis=1)
    sums[chosen] = -np.inf
    while len(chosen) < p:
        nxt = int(np.argmax(sums))
        chosen.append(nxt)
        sums += dist[:, nxt]
        sums[nxt] = -np.inf
    return chosen


def _greedy_swap(dist: np.ndarray, p: int) -> list:
    n = dist.shape[0]
    starts = [_greedy(dist, p), _greedy_drop(dist, p)]
    starts.extend(_greedy_from(dist, i, p) for i in range(n))
    best = None
    best_sum = -math.inf
    for start in starts:  # fixed order keeps ties, and so output, deterministic
        cand = _swap_to_local_optimum(dist, start)
        val = pair_sum(dist, cand)
        if val > best_sum + 1e-12:
            best_sum = val
            best = cand
    return best


def _exact(dist: np.ndarray, p: int, projections: np.ndarray) -> list:
    n = dist.shape[0]
    best_sum = -math.inf
    best = None
    best_key = None
    for combo in itertools.combinations(range(n), p):
        s = pair_sum(dist, combo)
        if s > best_sum + 1e-12:
            best_sum, best, best_key = s, combo, None
        elif s > best_sum - 1e-12:
            # tie: prefer canonically smallest content, not pool position
            if best_key is None:
                best_key = _content_key(projections, best)
            key = _content_key(projections, combo)
            if key < best_key:
                best, best_key = combo, key
    return list(best)


def _content_key(projections: np.ndarray, combo) -> tuple:
    return tuple(sorted(projections[i].tobytes() for i in combo))


def select_diverse_subset(pool_or_projections, p: int, method: str = "greedy_swap") -> list:
    """Indices of a diverse p-subset of the pool, per the chosen method."""
    proj = _projection_matrix(pool_or_projections)
    n = proj.shape[0]
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}; choose from {METHODS}")
    if p < 2:
        raise ValueError(f"subset size must be at least 2, got {p}")
    if p > n:
        raise ValueError(f"subset size {p} exceeds pool size {n}")
    if method == "exact" and math.comb(n, p) > EXACT_LIMIT:
        raise ValueError(
            f"exact search over C({n}, {p}) = {math.comb(n, p)} subsets exceeds "
            f"the {EXACT_LIMIT} limit"
        )
    dist = pairwise_ham(proj)
    if method == "greedy":
        return sorted(_greedy(dist, p))
    if method == "greedy_swap":
        return _greedy_swap(dist, p)
    return _exact(dist, p, proj)
