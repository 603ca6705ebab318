"""Shared fixtures and independent oracles.

Every oracle here recomputes the quantity under test from first
principles (plain loops, exhaustive enumeration, or scipy's LP solver)
so package code is never checked against itself.
"""

import itertools
import math

import numpy as np
import pytest
from scipy.optimize import linprog

from diversitree import (
    EQ,
    GE,
    LE,
    LinearConstraint,
    MipInstance,
    VariableDef,
    random_binary_instance,
)


# -- diversity oracles (plain double loops) -----------------------------------

def oracle_ham(a, b):
    assert len(a) == len(b)
    total = 0.0
    for x, y in zip(a, b):
        total += abs(float(x) - float(y))
    return total / len(a)


def oracle_dbin(projections):
    rows = [list(r) for r in projections]
    n = len(rows)
    total = 0.0
    for j in range(n):
        for k in range(j + 1, n):
            total += oracle_ham(rows[j], rows[k])
    return 2.0 * total / (n * (n - 1))


def oracle_dall(solutions, ranges, per_variable=True):
    sols = [list(r) for r in solutions]
    n = len(sols)
    d = len(sols[0])
    scaled = []
    for i in range(d):
        if ranges[i] <= 0:
            continue
        col = [row[i] for row in sols]
        mean = sum(col) / n
        var = sum((v - mean) ** 2 for v in col) / n
        scaled.append(var / ranges[i])
    assert scaled, "all ranges zero"
    if per_variable:
        return sum(scaled) / len(scaled)
    return sum(scaled) / n


def oracle_pair_sum(projections, chosen):
    total = 0.0
    chosen = list(chosen)
    for a in range(len(chosen)):
        for b in range(a + 1, len(chosen)):
            total += oracle_ham(projections[chosen[a]], projections[chosen[b]])
    return total


# -- LP oracle (scipy HiGHS) ---------------------------------------------------

def scipy_lp(instance, lo=None, hi=None):
    """(status, objective) with integrality dropped; status in
    {optimal, infeasible, unbounded}."""
    d = instance.num_vars
    c = np.zeros(d)
    for j, v in instance.objective.items():
        c[j] = v
    a_ub, b_ub, a_eq, b_eq = [], [], [], []
    for con in instance.constraints:
        row = np.zeros(d)
        for j, v in con.coeffs.items():
            row[j] = v
        if con.sense == "<=":
            a_ub.append(row)
            b_ub.append(con.rhs)
        elif con.sense == ">=":
            a_ub.append(-row)
            b_ub.append(-con.rhs)
        else:
            a_eq.append(row)
            b_eq.append(con.rhs)
    lo0, hi0 = instance.bounds()
    lo = np.asarray(lo0, dtype=float) if lo is None else np.asarray(lo, dtype=float)
    hi = np.asarray(hi0, dtype=float) if hi is None else np.asarray(hi, dtype=float)
    res = linprog(
        c,
        A_ub=np.vstack(a_ub) if a_ub else None,
        b_ub=np.asarray(b_ub) if b_ub else None,
        A_eq=np.vstack(a_eq) if a_eq else None,
        b_eq=np.asarray(b_eq) if b_eq else None,
        bounds=list(zip(lo, hi)),
        method="highs",
    )
    if res.status == 0:
        return "optimal", float(res.fun)
    if res.status == 2:
        return "infeasible", None
    if res.status == 3:
        return "unbounded", None
    raise RuntimeError(f"scipy solver trouble: {res.status} {res.message}")


# -- exhaustive near-optimal enumeration --------------------------------------

def enum_pure_integer(instance, q, tol=1e-9):
    """(z_star, set of integer tuples) for instances whose continuous
    variables are all fixed; returns (None, set()) when infeasible."""
    lo, hi = instance.bounds()
    ranges = []
    for v in instance.variables:
        if v.is_integer:
            ranges.append(range(int(lo[v.index]), int(hi[v.index]) + 1))
        else:
            assert lo[v.index] == hi[v.index], "oracle needs fixed continuous columns"
            ranges.append((lo[v.index],))
    feasible = []
    best = None
    for combo in itertools.product(*ranges):
        x = np.asarray(combo, dtype=float)
        if all(con.satisfied(x, tol) for con in instance.constraints):
            val = instance.objective_value(x)
            feasible.append((val, combo))
            if best is None or val < best:
                best = val
    if best is None:
        return None, set()
    cutoff = best + q * abs(best)
    return best, {combo for val, combo in feasible if val <= cutoff + tol}


def enum_mixed_projections(instance, q, tol=1e-6):
    """(z_star, set of integer-projection tuples admitting a feasible
    continuous completion under the cutoff). Uses scipy for completions."""
    lo, hi = instance.bounds()
    int_idx = instance.integer_index
    cont_idx = [v.index for v in instance.variables if not v.is_integer]
    ranges = [range(int(lo[j]), int(hi[j]) + 1) for j in int_idx]

    def completion_value(assign):
        """Best objective with integers fixed, or None if infeasible."""
        clo = np.asarray(lo, dtype=float).copy()
        chi = np.asarray(hi, dtype=float).copy()
        for j, v in zip(int_idx, assign):
            clo[j] = chi[j] = v
        status, val = scipy_lp(instance, clo, chi)
        return val if status == "optimal" else None

    if not int_idx:
        raise AssertionError("oracle expects at least one integer variable")
    best = None
    vals = {}
    for combo in itertools.product(*ranges):
        val = completion_value(combo)
        if val is not None:
            vals[combo] = val
            if best is None or val < best:
                best = val
    if best is None:
        return None, set()
    cutoff = best + q * abs(best)
    return best, {combo for combo, val in vals.items() if val <= cutoff + tol}


# -- shared fixtures -----------------------------------------------------------

@pytest.fixture(scope="session")
def small_instances():
    """Ten seeded pure-binary instances with manageable near-optimal sets."""
    return [
        random_binary_instance(seed, n_vars=8 + (seed % 5), n_cons=3, max_sq=600)
        for seed in range(10)
    ]


def make_lp(seed, n=6, m=6, integers=False):
    """Random bounded LP/MIP with small integer data and a known feasible box."""
    rng = np.random.default_rng(seed)
    variables = []
    for i in range(n):
        lo = float(rng.integers(-3, 1))
        hi = lo + float(rng.integers(1, 5))
        variables.append(VariableDef(index=i, lower=lo, upper=hi,
                                     is_integer=bool(integers), name=f"v{i}"))
    ref = np.array([rng.uniform(v.lower, v.upper) for v in variables])
    cons = []
    for k in range(m):
        nnz = int(rng.integers(1, n + 1))
        cols = rng.choice(n, size=nnz, replace=False)
        coefs = rng.integers(-4, 5, size=nnz).astype(float)
        coefs[coefs == 0] = 2.0
        act = float(coefs @ ref[cols])
        if k % 3 == 2:
            sense, rhs = EQ, act
        elif rng.integers(0, 2):
            sense, rhs = LE, act + float(rng.integers(0, 4))
        else:
            sense, rhs = GE, act - float(rng.integers(0, 4))
        cons.append(LinearConstraint(
            coeffs={int(j): float(cc) for j, cc in zip(cols, coefs)},
            sense=sense, rhs=rhs, name=f"r{k}"))
    obj = rng.integers(-5, 6, size=n).astype(float)
    return MipInstance(
        name=f"lp{seed}",
        variables=variables,
        constraints=cons,
        objective={i: float(obj[i]) for i in range(n) if obj[i] != 0.0},
    )
