"""Diverse-subset selection: greedy chain, swap deltas, exact search."""

import itertools

import numpy as np
import pytest

from conftest import oracle_pair_sum
from diversitree.diversity import pairwise_ham
from diversitree.subset import (
    EXACT_LIMIT,
    dbin_delta,
    pair_sum,
    select_diverse_subset,
)


def random_pool(rng, n=None, bits=None):
    n = n or int(rng.integers(4, 13))
    bits = bits or int(rng.integers(2, 9))
    return rng.integers(0, 2, size=(n, bits))


def brute_best(proj, p):
    dist = pairwise_ham(proj)
    return max(pair_sum(dist, c) for c in itertools.combinations(range(len(proj)), p))


class TestPairSum:
    def test_matches_plain_loop_oracle(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            proj = random_pool(rng)
            dist = pairwise_ham(proj)
            p = int(rng.integers(2, len(proj) + 1))
            chosen = rng.choice(len(proj), size=p, replace=False)
            assert pair_sum(dist, chosen) == pytest.approx(
                oracle_pair_sum(proj, chosen), abs=1e-12
            )

    def test_single_pair(self):
        proj = np.array([[0, 0], [1, 1]])
        assert pair_sum(pairwise_ham(proj), [0, 1]) == 1.0


class TestSwapDelta:
    def test_matches_recomputation(self):
        rng = np.random.default_rng(1)
        for _ in range(100):
            proj = random_pool(rng)
            n = len(proj)
            dist = pairwise_ham(proj)
            p = int(rng.integers(2, n))
            chosen = list(rng.choice(n, size=p, replace=False))
            out = chosen[int(rng.integers(0, p))]
            rest = [k for k in range(n) if k not in chosen]
            inc = rest[int(rng.integers(0, len(rest)))]
            swapped = [inc if k == out else k for k in chosen]
            want = pair_sum(dist, swapped) - pair_sum(dist, chosen)
            assert dbin_delta(dist, chosen, out, inc) == pytest.approx(want, abs=1e-12)

    def test_identical_rows_give_zero_delta(self):
        proj = np.array([[1, 0, 1], [0, 1, 1], [1, 0, 1]])  # rows 0 and 2 equal
        dist = pairwise_ham(proj)
        assert dbin_delta(dist, [0, 1], 0, 2) == 0.0

    def test_dominating_row_gives_positive_delta(self):
        proj = np.array([[0, 0, 0], [0, 0, 1], [1, 1, 1]])
        dist = pairwise_ham(proj)
        # replacing the near-duplicate with the far row must help
        assert dbin_delta(dist, [0, 1], 1, 2) > 0.0


class TestMethodChain:
    def test_each_method_dominates_the_cruder_one(self):
        rng = np.random.default_rng(2)
        improved = 0
        for _ in range(120):
            proj = random_pool(rng, n=int(rng.integers(5, 11)))
            dist = pairwise_ham(proj)
            p = int(rng.integers(2, min(6, len(proj) + 1)))
            prefix = pair_sum(dist, range(p))
            greedy = pair_sum(dist, select_diverse_subset(proj, p, "greedy"))
            swap = pair_sum(dist, select_diverse_subset(proj, p, "greedy_swap"))
            exact = pair_sum(dist, select_diverse_subset(proj, p, "exact"))
            assert greedy >= prefix - 1e-12
            assert swap >= greedy - 1e-12
            assert exact >= swap - 1e-12
            assert exact == pytest.approx(brute_best(proj, p), abs=1e-12)
            if swap > greedy + 1e-12:
                improved += 1
        assert improved > 0  # the swap phase must actually fire somewhere

    def test_exact_is_permutation_invariant(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            proj = random_pool(rng, n=8, bits=4)
            p = 3
            base = select_diverse_subset(proj, p, "exact")
            perm = rng.permutation(len(proj))
            shuffled = select_diverse_subset(proj[perm], p, "exact")
            content = lambda m, idx: sorted(tuple(int(v) for v in m[i]) for i in idx)
            assert content(proj, base) == content(proj[perm], shuffled)

    def test_opposite_corners_beat_the_near_duplicate(self):
        proj = np.array([[0, 0, 0, 0], [1, 1, 1, 1], [0, 0, 0, 1]])
        for method in ("greedy", "greedy_swap", "exact"):
            assert select_diverse_subset(proj, 2, method) == [0, 1]

    def test_whole_pool_when_p_equals_n(self):
        proj = np.array([[0, 0], [0, 1], [1, 0]])
        for method in ("greedy", "greedy_swap", "exact"):
            assert select_diverse_subset(proj, 3, method) == [0, 1, 2]

    def test_exact_tie_break_is_canonical(self):
        # both antipodal pairs score 1.0; the all-zero row wins the key compare
        proj = np.array([[0, 1], [1, 0], [1, 1], [0, 0]])
        idx = select_diverse_subset(proj, 2, "exact")
        assert sorted(tuple(int(v) for v in proj[i]) for i in idx) == [(0, 0), (1, 1)]

    def test_accepts_a_solution_pool_object(self):
        from diversitree.engine import SolutionPool
        from diversitree.model import LE, LinearConstraint, MipInstance, VariableDef

        inst = MipInstance(
            name="p",
            variables=[VariableDef(j, 0.0, 1.0, True, f"x{j}") for j in range(3)],
            constraints=[LinearConstraint({0: 1.0}, LE, 3.0, "r0")],
            objective={0: 1.0},
        )
        pool = SolutionPool(inst)
        for row in ([0, 0, 0], [1, 1, 1], [1, 1, 0]):
            pool.add(np.asarray(row, dtype=float), 0.0)
        assert select_diverse_subset(pool, 2) == [0, 1]


class TestValidation:
    PROJ = np.array([[0, 0], [0, 1], [1, 1]])

    def test_subset_size_bounds(self):
        with pytest.raises(ValueError, match="at least 2"):
            select_diverse_subset(self.PROJ, 1)
        with pytest.raises(ValueError, match="exceeds pool size"):
            select_diverse_subset(self.PROJ, 4)

    def test_unknown_method(self):
        with pytest.raises(ValueError, match="unknown method"):
            select_diverse_subset(self.PROJ, 2, "annealing")

    def test_exact_combinatorial_guard(self):
        big = np.zeros((40, 3), dtype=int)
        assert __import__("math").comb(40, 12) > EXACT_LIMIT
        with pytest.raises(ValueError, match="exceeds"):
            select_diverse_subset(big, 12, "exact")
