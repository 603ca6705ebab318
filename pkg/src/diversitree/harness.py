"""Experiment pipeline around the enumeration engine.

Phase one finds the optimal value, adds the near-optimality cutoff, and
enumerates a pool of solutions under a chosen node-selection rule. Phase
two picks a maximum-diversity subset of the pool and scores it. The
pipeline has no internal randomness: the recorded seed only labels runs,
and repeated runs with one config produce byte-identical result files.
"""

import csv
import heapq
import json
import logging
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .diversity import dall, dbin
from .engine import BranchAndCount, EngineError, most_fractional
from .model import MipInstance, add_objective_cutoff
from .selectors import Rule, SelectorConfig
from .simplex import LpStatus, SimplexSolver
from .subset import select_diverse_subset

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1

# default comparison slate: the classic rules plus the blended one
DEFAULT_COMPARE_RULES = ("bestfs", "dfs", "brfs", "uct", "he", "diversitree")


class HarnessError(RuntimeError):
    """Pipeline failure, message prefixed with the stage that raised it."""


@dataclass
class OptimumResult:
    status: str  # optimal | infeasible | unbounded | limit
    objective: float = None  # internal minimization value
    x: np.ndarray = None
    nodes_processed: int = 0
    wall_time_s: float = 0.0


def find_optimum(instance: MipInstance, node_limit: int = None, time_limit: float = None,
                 feas_tol: float = 1e-6, int_tol: float = 1e-6) -> OptimumResult:
    """Optimal value by plain best-first branch-and-bound with incumbent pruning."""
    t0 = time.perf_counter()
    solver = SimplexSolver(instance, feas_tol=feas_tol, int_tol=int_tol)
    lo_list, hi_list = instance.bounds()
    lo = np.asarray(lo_list, dtype=float)
    hi = np.asarray(hi_list, dtype=float)
    for j in instance.integer_index:
        if not (math.isfinite(lo[j]) and math.isfinite(hi[j])):
            raise EngineError(
                f"integer variable {instance.variables[j].name} must have finite bounds"
            )
        lo[j] = math.ceil(lo[j] - int_tol)
        hi[j] = math.floor(hi[j] + int_tol)
        if lo[j] > hi[j]:
            return OptimumResult("infeasible", wall_time_s=time.perf_counter() - t0)

    root = solver.solve(lo, hi)
    if root.status == LpStatus.STALLED:
        root = solver.solve(lo, hi)
    if root.status == LpStatus.STALLED:
        raise EngineError("root relaxation stalled")
    if root.status == LpStatus.UNBOUNDED:
        return OptimumResult("unbounded", nodes_processed=1,
                             wall_time_s=time.perf_counter() - t0)
    if root.status == LpStatus.INFEASIBLE:
        return OptimumResult("infeasible", nodes_processed=1,
                             wall_time_s=time.perf_counter() - t0)

    inc_val = math.inf
    inc_x = None
    nodes = 0
    status = "optimal"
    counter = 1
    heap = [(root.objective, 0, lo, hi, root)]
    while heap:
        if node_limit is not None and nodes >= node_limit:
            status = "limit"
            break
        if time_limit is not None and time.perf_counter() - t0 > time_limit:
            status = "limit"
            break
        bound, _, nlo, nhi, lp = heapq.heappop(heap)
        if bound >= inc_val - 1e-9:
            continue
        nodes += 1
        if not lp.fractional:
            if lp.objective < inc_val:
                inc_val = lp.objective
                inc_x = lp.x.copy()
            continue
        j = most_fractional(lp)
        split = math.floor(lp.x[j])
        for child_lo, child_hi in ((nlo[j], float(split)), (float(split + 1), nhi[j])):
            clo = nlo.copy()
            chi = nhi.copy()
            clo[j], chi[j] = child_lo, child_hi
            child = solver.resolve(lp.basis, clo, chi) if lp.basis else solver.solve(clo, chi)
            if child.status == LpStatus.STALLED:
                child = solver.solve(clo, chi)
            if child.status == LpStatus.INFEASIBLE:
                continue
            if child.status == LpStatus.STALLED:
                raise EngineError("LP stalled during optimization")
            if child.status == LpStatus.UNBOUNDED:
                return OptimumResult("unbounded", nodes_processed=nodes,
                                     wall_time_s=time.perf_counter() - t0)
            if child.objective >= inc_val - 1e-9:
                continue
            heapq.heappush(heap, (child.objective, counter, clo, chi, child))
            counter += 1

    if inc_x is None:
        if status == "limit":
            return OptimumResult("limit", nodes_processed=nodes,
                                 wall_time_s=time.perf_counter() - t0)
        return OptimumResult("infeasible", nodes_processed=nodes,
                             wall_time_s=time.perf_counter() - t0)
    for j in instance.integer_index:
        inc_x[j] = round(inc_x[j])
    return OptimumResult(status, objective=float(inc_val), x=inc_x,
                         nodes_processed=nodes, wall_time_s=time.perf_counter() - t0)


@dataclass
class ExperimentSpec:
    """One pipeline run: cutoff fraction, pool and subset sizes, selector."""

    q: float = 0.03
    p1: int = 100  # None enumerates until exhaustion
    p: int = 10
    selector: SelectorConfig = field(default_factory=SelectorConfig)
    subset_method: str = "greedy_swap"
    dedup: bool = True
    seed: int = 0  # run label; the pipeline itself is deterministic
    node_limit: int = None
    time_limit: float = None
    compute_dall: bool = True

    def __post_init__(self):
        if self.q < 0:
            raise ValueError(f"q must be nonnegative, got {self.q}")
        if self.p1 is not None and self.p1 < 1:
            raise ValueError(f"p1 must be positive, got {self.p1}")
        if self.p < 1:
            raise ValueError(f"p must be positive, got {self.p}")
        if self.p1 is not None and self.p > self.p1:
            raise ValueError(f"p = {self.p} exceeds pool capacity p1 = {self.p1}")


@dataclass
class ExperimentResult:
    instance_name: str
    rule: str
    alpha: float
    beta: float
    sol_cutoff: float
    depth_cutoff: int
    q: float
    p1: int
    p: int
    seed: int
    z_star: float  # reported in the source model's sense
    cutoff_value: float  # internal minimization sense
    pool_size: int
    exhausted: bool
    truncated: bool
    nodes_processed: int
    dbin_pool: float
    dbin_subset: float
    dall_subset: float
    subset_indices: list
    subset_objectives: list
    trace_hash: str
    wall_time_ms: float = 0.0
    optimize_ms: float = 0.0
    count_ms: float = 0.0
    subset_ms: float = 0.0

    def to_json_dict(self, include_timing: bool = False) -> dict:
        """Stable-key result record; timing keys stay null by default so the
        file bytes do not vary between runs of the same config."""
        doc = {
            "schemaVersion": SCHEMA_VERSION,
            "instance": self.instance_name,
            "rule": self.rule,
            "alpha": float(self.alpha),
            "beta": float(self.beta),
            "solCutoff": float(self.sol_cutoff),
            "depthCutoff": int(self.depth_cutoff),
            "q": float(self.q),
            "p1": self.p1,
            "p": int(self.p),
            "seed": int(self.seed),
            "zStar": float(self.z_star),
            "cutoffValue": float(self.cutoff_value),
            "poolSize": int(self.pool_size),
            "exhausted": bool(self.exhausted),
            "truncated": bool(self.truncated),
            "nodesProcessed": int(self.nodes_processed),
            "dbinPool": float(self.dbin_pool),
            "dbinSubset": float(self.dbin_subset),
            "dallSubset": None if self.dall_subset is None else float(self.dall_subset),
            "subsetIndices": [int(i) for i in self.subset_indices],
            "subsetObjectives": [float(v) for v in self.subset_objectives],
            "traceHash": self.trace_hash,
            "wallTimeMs": None,
            "optimizeMs": None,
            "countMs": None,
            "subsetMs": None,
        }
        if include_timing:
            doc["wallTimeMs"] = round(float(self.wall_time_ms), 3)
            doc["optimizeMs"] = round(float(self.optimize_ms), 3)
            doc["countMs"] = round(float(self.count_ms), 3)
            doc["subsetMs"] = round(float(self.subset_ms), 3)
        return doc

    def to_json(self, include_timing: bool = False) -> str:
        return json.dumps(self.to_json_dict(include_timing), sort_keys=True, indent=2) + "\n"


def run_phase_one(instance: MipInstance, spec: ExperimentSpec = None,
                  trace_path: str = None):
    """Optimize and enumerate the near-optimal pool; no subset selection.

    Returns (OptimumResult, CountResult). Stage failures raise
    HarnessError with the stage name in the message.
    """
    spec = spec if spec is not None else ExperimentSpec()
    try:
        opt = find_optimum(instance, node_limit=spec.node_limit, time_limit=spec.time_limit)
    except EngineError as exc:
        raise HarnessError(f"optimize stage: {exc}") from exc
    if opt.status != "optimal":
        raise HarnessError(f"optimize stage: instance is {opt.status}")

    cut = add_objective_cutoff(instance, opt.objective, spec.q)
    try:
        engine = BranchAndCount(cut, selector=spec.selector, dedup=spec.dedup)
        count = engine.run(p1=spec.p1, node_limit=spec.node_limit,
                           time_limit=spec.time_limit, trace_path=trace_path)
    except EngineError as exc:
        raise HarnessError(f"count stage: {exc}") from exc
    return opt, count


def run_two_phase(instance: MipInstance, spec: ExperimentSpec = None,
                  trace_path: str = None) -> ExperimentResult:
    """Optimize, enumerate the near-optimal pool, then pick a diverse subset."""
    spec = spec if spec is not None else ExperimentSpec()
    t0 = time.perf_counter()
    try:
        opt = find_optimum(instance, node_limit=spec.node_limit, time_limit=spec.time_limit)
    except EngineError as exc:
        raise HarnessError(f"optimize stage: {exc}") from exc
    if opt.status != "optimal":
        raise HarnessError(f"optimize stage: instance is {opt.status}")
    t1 = time.perf_counter()

    cut = add_objective_cutoff(instance, opt.objective, spec.q)
    try:
        engine = BranchAndCount(cut, selector=spec.selector, dedup=spec.dedup)
        count = engine.run(p1=spec.p1, node_limit=spec.node_limit,
                           time_limit=spec.time_limit, trace_path=trace_path)
    except EngineError as exc:
        raise HarnessError(f"count stage: {exc}") from exc
    t2 = time.perf_counter()

    pool = count.pool
    proj = pool.projection_matrix()
    has_bits = proj.shape[1] > 0
    if len(pool) >= 2 and has_bits:
        dbin_pool = dbin(proj)
    else:
        dbin_pool = 0.0

    p_eff = min(spec.p, len(pool))
    if p_eff >= 2 and has_bits:
        try:
            idx = select_diverse_subset(pool, p_eff, spec.subset_method)
        except ValueError as exc:
            raise HarnessError(f"subset stage: {exc}") from exc
        dbin_subset = dbin(proj[idx])
    else:
        idx = list(range(p_eff))
        dbin_subset = 0.0

    dall_subset = None
    if spec.compute_dall and len(idx) >= 2:
        sols = pool.solution_matrix()[idx]
        ranges = sols.max(axis=0) - sols.min(axis=0)
        try:
            dall_subset = dall(sols, ranges)
        except ValueError:
            dall_subset = None
    t3 = time.perf_counter()

    cfg = spec.selector
    return ExperimentResult(
        instance_name=instance.name,
        rule=cfg.rule.value,
        alpha=cfg.alpha,
        beta=cfg.beta,
        sol_cutoff=cfg.sol_cutoff,
        depth_cutoff=cfg.depth_cutoff,
        q=spec.q,
        p1=spec.p1,
        p=spec.p,
        seed=spec.seed,
        z_star=instance.reported_objective(opt.objective),
        cutoff_value=opt.objective + spec.q * abs(opt.objective),
        pool_size=len(pool),
        exhausted=count.exhausted,
        truncated=count.truncated,
        nodes_processed=count.nodes_processed,
        dbin_pool=dbin_pool,
        dbin_subset=dbin_subset,
        dall_subset=dall_subset,
        subset_indices=list(idx),
        subset_objectives=[instance.reported_objective(pool.objectives[i]) for i in idx],
        trace_hash=count.trace_hash,
        wall_time_ms=(t3 - t0) * 1000.0,
        optimize_ms=(t1 - t0) * 1000.0,
        count_ms=(t2 - t1) * 1000.0,
        subset_ms=(t3 - t2) * 1000.0,
    )


GRID_FIELDS = ("rank", "q", "p1", "alpha", "beta", "solCutoff", "dbinSubset", "dbinPool",
               "poolSize", "exhausted", "nodesProcessed", "error")

DEFAULT_GRID = (0.0, 0.25, 0.5, 0.75, 1.0)


def grid_search(instance: MipInstance, q_list=(0.03,), p1_list=(100,),
                alpha_grid=DEFAULT_GRID, beta_grid=DEFAULT_GRID, s_grid=DEFAULT_GRID,
                p: int = 10, rule=Rule.DIVERSITREE, csv_path: str = None,
                node_limit: int = None, time_limit: float = None, seed: int = 0) -> list:
    """Sweep (q, p1, alpha, beta, s); rows ranked by subset diversity, failures last.

    Combinations with alpha + beta > 1 are skipped up front.
    """
    rows = []
    for q in q_list:
        for p1 in p1_list:
            for a in alpha_grid:
                for b in beta_grid:
                    if a + b > 1.0 + 1e-12:
                        continue
                    for s in s_grid:
                        cfg = SelectorConfig(rule=rule, alpha=a, beta=b, sol_cutoff=s)
                        row = {"rank": 0, "q": q, "p1": p1, "alpha": a, "beta": b,
                               "solCutoff": s, "dbinSubset": None, "dbinPool": None,
                               "poolSize": None, "exhausted": None,
                               "nodesProcessed": None, "error": ""}
                        spec = ExperimentSpec(q=q, p1=p1, p=p if p1 is None else min(p, p1),
                                              selector=cfg,
                                              seed=seed, node_limit=node_limit,
                                              time_limit=time_limit, compute_dall=False)
                        try:
                            res = run_two_phase(instance, spec)
                        except HarnessError as exc:
                            row["error"] = str(exc)
                            rows.append(row)
                            continue
                        row.update(dbinSubset=res.dbin_subset, dbinPool=res.dbin_pool,
                                   poolSize=res.pool_size, exhausted=res.exhausted,
                                   nodesProcessed=res.nodes_processed)
                        rows.append(row)
    rows.sort(key=lambda r: (r["dbinSubset"] is None, -(r["dbinSubset"] or 0.0)))
    for k, row in enumerate(rows):
        row["rank"] = k + 1
    if csv_path:
        write_csv(csv_path, GRID_FIELDS, rows)
    return rows


COMPARE_FIELDS = ("rule", "dbinSubset", "improvementPct", "dbinPool", "poolSize",
                  "exhausted", "nodesProcessed", "traceHash", "error")


def compare_selectors(instance: MipInstance, spec: ExperimentSpec = None,
                      rules=DEFAULT_COMPARE_RULES, baseline: str = "bestfs",
                      csv_path: str = None) -> list:
    """One pipeline run per rule plus a percent-improvement column vs the baseline.

    Rule parameters (alpha, beta, cutoffs, rho) are taken from ``spec.selector``;
    only the rule itself varies. Failures are recorded per row, not raised.
    """
    spec = spec if spec is not None else ExperimentSpec()
    base_rule = Rule.from_name(baseline).value
    names = [Rule.from_name(r).value for r in rules]
    if base_rule not in names:
        names.insert(0, base_rule)

    rows = []
    by_rule = {}
    for name in names:
        tpl = spec.selector
        cfg = SelectorConfig(rule=name, alpha=tpl.alpha, beta=tpl.beta,
                             sol_cutoff=tpl.sol_cutoff, depth_cutoff=tpl.depth_cutoff,
                             rho=tpl.rho, min_plunge_depth=tpl.min_plunge_depth,
                             max_plunge_depth=tpl.max_plunge_depth,
                             literal_score=tpl.literal_score)
        run_spec = ExperimentSpec(q=spec.q, p1=spec.p1, p=spec.p, selector=cfg,
                                  subset_method=spec.subset_method, dedup=spec.dedup,
                                  seed=spec.seed, node_limit=spec.node_limit,
                                  time_limit=spec.time_limit, compute_dall=spec.compute_dall)
        row = {"rule": name, "dbinSubset": None, "improvementPct": None, "dbinPool": None,
               "poolSize": None, "exhausted": None, "nodesProcessed": None,
               "traceHash": "", "error": ""}
        try:
            res = run_two_phase(instance, run_spec)
        except HarnessError as exc:
            row["error"] = str(exc)
            rows.append(row)
            continue
        by_rule[name] = res
        row.update(dbinSubset=res.dbin_subset, dbinPool=res.dbin_pool,
                   poolSize=res.pool_size, exhausted=res.exhausted,
                   nodesProcessed=res.nodes_processed, traceHash=res.trace_hash)
        rows.append(row)

    base = by_rule.get(base_rule)
    if base is not None and base.dbin_subset > 0:
        for row in rows:
            if row["dbinSubset"] is not None:
                row["improvementPct"] = (
                    (row["dbinSubset"] - base.dbin_subset) / base.dbin_subset * 100.0
                )
    if csv_path:
        write_csv(csv_path, COMPARE_FIELDS, rows)
    return rows


def write_csv(path: str, fieldnames, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(fieldnames))
        writer.writeheader()
        for row in rows:
            writer.writerow({k: ("" if row.get(k) is None else row.get(k)) for k in fieldnames})
