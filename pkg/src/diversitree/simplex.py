"""Bounded-variable primal/dual simplex over dense arrays.

Solves ``min c @ x  s.t.  rows, l <= x <= u`` for one instance whose matrix
is built once; per-call bound overrides support branch-and-bound nodes.
Rows become equalities with signed slacks, a two-phase primal method with
explicit artificials handles cold solves, and a bounded dual simplex
reoptimizes from a parent basis after bound tightenings (falling back to a
cold solve on any trouble, so results are identical either way).

Pivoting is deterministic: Dantzig pricing with lowest-index tie-breaks,
switching to Bland's rule after a run of degenerate pivots. Every optimal
solve carries a reconstructed dual objective so callers can verify weak
duality.
"""

import logging
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .model import EQ, GE, LE, MipInstance

log = logging.getLogger("diversitree.simplex")

PIVOT_TOL = 1e-9
DUAL_FEAS_TOL = 1e-7


class LpStatus(str, Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"
    STALLED = "stalled"


@dataclass(frozen=True)
class BasisSnapshot:
    """Restart point: basic column set plus nonbasic columns parked at upper."""

    basis: tuple
    at_upper: frozenset


@dataclass
class LpResult:
    status: LpStatus
    objective: float = None
    x: np.ndarray = None  # structural values only
    fractional: list = None  # integer columns off the grid at int_tol
    dual_objective: float = None
    basis: BasisSnapshot = None
    iterations: int = 0

    @property
    def is_optimal(self) -> bool:
        return self.status == LpStatus.OPTIMAL


class _Stalled(Exception):
    pass


class _Singular(Exception):
    pass


class SimplexSolver:
    """Reusable solver for one instance's LP relaxation."""

    def __init__(self, instance: MipInstance, feas_tol: float = 1e-6, int_tol: float = 1e-6,
                 max_iter: int = None):
        self.instance = instance
        self.feas_tol = feas_tol
        self.int_tol = int_tol
        d = instance.num_vars
        m = len(instance.constraints)
        self.d = d
        self.m = m
        self.n = d + m  # structural + slack columns
        self.max_iter = max_iter if max_iter is not None else 500 + 100 * self.n

        self.A = np.zeros((m, self.n))
        self.b = np.zeros(m)
        slack_lo = np.zeros(m)
        slack_hi = np.zeros(m)
        for i, con in enumerate(instance.constraints):
            for j, a in con.coeffs.items():
                self.A[i, j] = a
            self.A[i, d + i] = 1.0
            self.b[i] = con.rhs
            if con.sense == LE:
                slack_lo[i], slack_hi[i] = 0.0, np.inf
            elif con.sense == GE:
                slack_lo[i], slack_hi[i] = -np.inf, 0.0
            else:
                slack_lo[i], slack_hi[i] = 0.0, 0.0

        lo_s, hi_s = instance.bounds()
        self.base_lo = np.concatenate([np.asarray(lo_s, dtype=float), slack_lo])
        self.base_hi = np.concatenate([np.asarray(hi_s, dtype=float), slack_hi])
        self.c = np.zeros(self.n)
        for j, v in instance.objective.items():
            self.c[j] = v
        self.integer_index = np.asarray(instance.integer_index, dtype=int)

    # -- public API ---------------------------------------------------------

    def solve(self, lo=None, hi=None) -> LpResult:
        """Cold two-phase solve under optional structural bound overrides."""
        full_lo, full_hi = self._bounds(lo, hi)
        if np.any(full_lo > full_hi + self.feas_tol):
            return LpResult(status=LpStatus.INFEASIBLE)
        return self._cold(full_lo, full_hi)

    def resolve(self, snapshot: BasisSnapshot, lo=None, hi=None) -> LpResult:
        """Reoptimize from a parent basis after bound changes.

        Pure performance path: the result contract is identical to
        :meth:`solve`, and any numerical trouble falls back to a cold solve.
        """
        full_lo, full_hi = self._bounds(lo, hi)
        if np.any(full_lo > full_hi + self.feas_tol):
            return LpResult(status=LpStatus.INFEASIBLE)
        if snapshot is None:
            return self._cold(full_lo, full_hi)
        try:
            return self._dual(snapshot, full_lo, full_hi)
        except (_Stalled, _Singular, np.linalg.LinAlgError):
            log.debug("warm start fell back to a cold solve")
            return self._cold(full_lo, full_hi)

    # -- shared pieces ------------------------------------------------------

    def _bounds(self, lo, hi):
        full_lo = self.base_lo.copy()
        full_hi = self.base_hi.copy()
        if lo is not None:
            full_lo[: self.d] = lo
        if hi is not None:
            full_hi[: self.d] = hi
        return full_lo, full_hi

    @staticmethod
    def _parked(j, lo, hi, at_upper):
        if j in at_upper:
            return hi[j]
        if np.isfinite(lo[j]):
            return lo[j]
        if np.isfinite(hi[j]):
            return hi[j]
        return 0.0

    def _basic_values(self, A, basis, x):
        mask = np.ones(A.shape[1], dtype=bool)
        mask[basis] = False
        rhs = self.b - A[:, mask] @ x[mask]
        return np.linalg.solve(A[:, basis], rhs)

    def _result(self, A, basis, x, lo, hi, iterations) -> LpResult:
        xs = x[: self.d]
        obj = float(self.c[: self.d] @ xs)
        c_ext = np.zeros(A.shape[1])
        c_ext[: self.n] = self.c
        y = np.linalg.solve(A[:, basis].T, c_ext[basis])
        red = c_ext - A.T @ y
        dual_obj = float(y @ self.b)
        basic = np.zeros(A.shape[1], dtype=bool)
        basic[basis] = True
        for j in np.nonzero(~basic)[0]:
            if red[j] > DUAL_FEAS_TOL and np.isfinite(lo[j]):
                dual_obj += red[j] * lo[j]
            elif red[j] < -DUAL_FEAS_TOL and np.isfinite(hi[j]):
                dual_obj += red[j] * hi[j]
            else:
                dual_obj += red[j] * x[j]
        frac = [
            int(j)
            for j in self.integer_index
            if abs(xs[j] - round(xs[j])) > self.int_tol
        ]
        snapshot = None
        if all(k < self.n for k in basis):
            at_upper = frozenset(
                int(j)
                for j in np.nonzero(~basic[: self.n])[0]
                if np.isfinite(hi[j]) and abs(x[j] - hi[j]) < abs(x[j] - lo[j])
            )
            snapshot = BasisSnapshot(basis=tuple(int(k) for k in basis), at_upper=at_upper)
        return LpResult(
            status=LpStatus.OPTIMAL,
            objective=obj,
            x=xs.copy(),
            fractional=frac,
            dual_objective=dual_obj,
            basis=snapshot,
            iterations=iterations,
        )

    # -- primal simplex -----------------------------------------------------

    def _primal(self, A, c, lo, hi, basis, x):
        """Iterate to optimality from a primal-feasible basis.

        Returns (status, iterations); basis and x are updated in place.
        """
        n_cols = A.shape[1]
        bland = False
        degenerate = 0
        it = 0
        while True:
            if it > self.max_iter:
                raise _Stalled()
            it += 1
            B = A[:, basis]
            xb = self._basic_values(A, basis, x)
            x[basis] = xb
            y = np.linalg.solve(B.T, c[basis])
            red = c - A.T @ y

            basic = np.zeros(n_cols, dtype=bool)
            basic[basis] = True
            enter = -1
            direction = 0.0
            best = DUAL_FEAS_TOL
            for j in range(n_cols):
                if basic[j] or lo[j] == hi[j]:
                    continue
                if not np.isfinite(lo[j]) and not np.isfinite(hi[j]):
                    score = abs(red[j])  # free: move against the cost sign
                    dirn = 1.0 if red[j] < 0 else -1.0
                elif np.isfinite(hi[j]) and abs(x[j] - hi[j]) < abs(x[j] - lo[j]):
                    score = red[j]  # leaving an upper bound pays when cost is positive
                    dirn = -1.0
                else:
                    score = -red[j]
                    dirn = 1.0
                if score > best:
                    enter, direction, best = j, dirn, score
                    if bland:
                        break
            if enter < 0:
                return LpStatus.OPTIMAL, it

            w = np.linalg.solve(B, A[:, enter])
            step = np.inf
            leave_pos = -1
            leave_to_upper = False
            if np.isfinite(lo[enter]) and np.isfinite(hi[enter]):
                step = hi[enter] - lo[enter]  # bound flip
            for k in range(self.m):
                rate = direction * w[k]
                bk = basis[k]
                if rate > PIVOT_TOL and np.isfinite(lo[bk]):
                    limit = (x[bk] - lo[bk]) / rate
                    to_upper = False
                elif rate < -PIVOT_TOL and np.isfinite(hi[bk]):
                    limit = (x[bk] - hi[bk]) / rate
                    to_upper = True
                else:
                    continue
                limit = max(limit, 0.0)
                if limit < step - PIVOT_TOL or (
                    limit < step + PIVOT_TOL
                    and leave_pos >= 0
                    and bk < basis[leave_pos]
                ):
                    step = limit
                    leave_pos = k
                    leave_to_upper = to_upper
            if not np.isfinite(step):
                return LpStatus.UNBOUNDED, it
            if step <= PIVOT_TOL:
                degenerate += 1
                if degenerate > 2 * self.n:
                    bland = True
            if leave_pos < 0:
                # entering variable flips to its opposite bound
                x[enter] = hi[enter] if direction > 0 else lo[enter]
                continue
            leaving = basis[leave_pos]
            x[leaving] = hi[leaving] if leave_to_upper else lo[leaving]
            x[enter] = x[enter] + direction * step
            basis[leave_pos] = enter

    def _cold(self, lo, hi) -> LpResult:
        n_cols = self.n + self.m
        A = np.zeros((self.m, n_cols))
        A[:, : self.n] = self.A
        x = np.zeros(n_cols)
        for j in range(self.n):
            x[j] = lo[j] if np.isfinite(lo[j]) else (hi[j] if np.isfinite(hi[j]) else 0.0)
        resid = self.b - A[:, : self.n] @ x[: self.n]
        for i in range(self.m):
            A[i, self.n + i] = 1.0 if resid[i] >= 0 else -1.0
            x[self.n + i] = abs(resid[i])
        lo_ext = np.concatenate([lo, np.zeros(self.m)])
        hi_ext = np.concatenate([hi, np.full(self.m, np.inf)])
        basis = list(range(self.n, n_cols))

        c1 = np.zeros(n_cols)
        c1[self.n :] = 1.0
        try:
            status, it1 = self._primal(A, c1, lo_ext, hi_ext, basis, x)
        except _Stalled:
            return LpResult(status=LpStatus.STALLED)
        except np.linalg.LinAlgError:
            return LpResult(status=LpStatus.STALLED)
        if status != LpStatus.OPTIMAL:  # phase 1 is bounded below by zero
            return LpResult(status=LpStatus.STALLED, iterations=it1)
        scale = max(1.0, float(np.max(np.abs(self.b))) if self.m else 1.0)
        if float(c1 @ x) > self.feas_tol * scale:
            return LpResult(status=LpStatus.INFEASIBLE, iterations=it1)

        # Pivot leftover artificials out where a real column can replace them.
        basic = np.zeros(n_cols, dtype=bool)
        basic[basis] = True
        for k in range(self.m):
            if basis[k] < self.n:
                continue
            B = A[:, basis]
            replaced = False
            for j in range(self.n):
                if basic[j] or lo_ext[j] == hi_ext[j]:
                    continue
                w = np.linalg.solve(B, A[:, j])
                if abs(w[k]) > 1e-7:
                    old = basis[k]
                    basis[k] = j  # degenerate swap, values recomputed next iteration
                    basic[old] = False
                    basic[j] = True
                    x[old] = 0.0
                    replaced = True
                    break
            if not replaced:
                hi_ext[basis[k]] = 0.0  # redundant row: freeze its artificial

        lo_ext[self.n :] = 0.0
        hi_ext[self.n :] = 0.0
        c2 = np.zeros(n_cols)
        c2[: self.n] = self.c
        try:
            status, it2 = self._primal(A, c2, lo_ext, hi_ext, basis, x)
        except _Stalled:
            return LpResult(status=LpStatus.STALLED)
        except np.linalg.LinAlgError:
            return LpResult(status=LpStatus.STALLED)
        if status == LpStatus.UNBOUNDED:
            return LpResult(status=LpStatus.UNBOUNDED, iterations=it1 + it2)
        x[basis] = self._basic_values(A, basis, x)
        return self._result(A, basis, x, lo_ext, hi_ext, it1 + it2)

    # -- dual simplex (warm start) -------------------------------------------

    def _dual(self, snapshot: BasisSnapshot, lo, hi) -> LpResult:
        A = self.A
        basis = list(snapshot.basis)
        if len(basis) != self.m or len(set(basis)) != self.m:
            raise _Singular()
        basic = np.zeros(self.n, dtype=bool)
        basic[basis] = True
        x = np.zeros(self.n)
        for j in range(self.n):
            if not basic[j]:
                x[j] = self._parked(j, lo, hi, snapshot.at_upper)
                if not np.isfinite(x[j]):
                    raise _Singular()

        B = A[:, basis]
        y = np.linalg.solve(B.T, self.c[basis])
        red = self.c - A.T @ y
        for j in range(self.n):
            if basic[j] or lo[j] == hi[j]:
                continue
            if j in snapshot.at_upper:
                if red[j] > DUAL_FEAS_TOL:
                    raise _Singular()  # parent basis is not dual feasible here
            elif np.isfinite(lo[j]):
                if red[j] < -DUAL_FEAS_TOL:
                    raise _Singular()
            elif abs(red[j]) > DUAL_FEAS_TOL:
                raise _Singular()

        it = 0
        while True:
            if it > self.max_iter:
                raise _Stalled()
            it += 1
            B = A[:, basis]
            xb = self._basic_values(A, basis, x)
            x[basis] = xb

            leave_pos = -1
            worst = self.feas_tol
            below = False
            for k in range(self.m):
                bk = basis[k]
                if lo[bk] - x[bk] > worst or (
                    lo[bk] - x[bk] > worst - PIVOT_TOL and leave_pos >= 0 and bk < basis[leave_pos]
                ):
                    worst = lo[bk] - x[bk]
                    leave_pos, below = k, True
                if x[bk] - hi[bk] > worst or (
                    x[bk] - hi[bk] > worst - PIVOT_TOL and leave_pos >= 0 and bk < basis[leave_pos]
                ):
                    worst = x[bk] - hi[bk]
                    leave_pos, below = k, False
            if leave_pos < 0:
                return self._result(A, basis, x, lo, hi, it)

            y = np.linalg.solve(B.T, self.c[basis])
            red = self.c - A.T @ y
            e_k = np.zeros(self.m)
            e_k[leave_pos] = 1.0
            v = np.linalg.solve(B.T, e_k)
            alpha = v @ A

            basic = np.zeros(self.n, dtype=bool)
            basic[basis] = True
            enter = -1
            best = np.inf
            for j in range(self.n):
                if basic[j] or lo[j] == hi[j]:
                    continue
                if not np.isfinite(lo[j]) and not np.isfinite(hi[j]):
                    ok = abs(alpha[j]) > PIVOT_TOL  # free: either direction works
                else:
                    at_up = np.isfinite(hi[j]) and abs(x[j] - hi[j]) < abs(x[j] - lo[j])
                    if below:  # basic value must rise
                        ok = (not at_up and alpha[j] < -PIVOT_TOL) or (at_up and alpha[j] > PIVOT_TOL)
                    else:  # basic value must fall
                        ok = (not at_up and alpha[j] > PIVOT_TOL) or (at_up and alpha[j] < -PIVOT_TOL)
                if not ok:
                    continue
                ratio = abs(red[j]) / abs(alpha[j])
                if ratio < best - PIVOT_TOL or (ratio < best + PIVOT_TOL and (enter < 0 or j < enter)):
                    best = ratio
                    enter = j
            if enter < 0:
                return LpResult(status=LpStatus.INFEASIBLE, iterations=it)

            leaving = basis[leave_pos]
            x[leaving] = lo[leaving] if below else hi[leaving]
            basis[leave_pos] = enter
            basic[leaving] = False
            basic[enter] = True
