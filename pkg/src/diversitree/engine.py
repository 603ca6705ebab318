"""Branch-and-count: enumerate near-optimal solutions into a bounded pool.

The search keeps a queue of open nodes, each carrying local bounds and its
own LP relaxation solved at creation (warm-started from the parent basis).
Dequeued nodes are classified:

* infeasible nodes are discarded,
* *unrestricted* nodes, where every constraint holds for every assignment
  inside the local box, have their whole subtree enumerated wholesale,
* nodes with an integral LP and every integer variable fixed contribute a
  single completed solution,
* anything else is split in two, on the most-fractional variable when one
  exists, otherwise on a partitioning disjunction over an unfixed integer
  variable so each solution is reachable through exactly one leaf.

The run stops when the queue empties, the pool reaches capacity, or a
node/time limit trips. Everything is deterministic for a fixed instance
and configuration; a trace hash over the dequeue sequence witnesses it.
"""

import hashlib
import heapq
import itertools
import json
import logging
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .diversity import project_binary
from .model import MipInstance
from .selectors import ScoreContext, Selector, SelectorConfig
from .simplex import LpResult, LpStatus, SimplexSolver

log = logging.getLogger("diversitree.engine")

INFEASIBLE = "infeasible"
UNRESTRICTED = "unrestricted"
INTEGER_FEASIBLE = "integer_feasible"
BRANCHABLE = "branchable"
STALLED = "stalled"


class EngineError(RuntimeError):
    pass


@dataclass
class Node:
    """One open subproblem: bound overrides relative to the root box."""

    id: int
    parent_id: int
    depth: int
    local_bounds: dict  # column -> (lo, hi)
    fixed_binaries: dict  # column -> 0/1
    lp: LpResult = None
    inherited_bound: float = -math.inf  # stand-in while the LP is unsolved
    estimate: float = math.nan  # bound plus fractionality repair

    @property
    def lp_bound(self) -> float:
        if self.lp is not None and self.lp.objective is not None:
            return self.lp.objective
        return self.inherited_bound


class SolutionPool:
    """Capacity-bounded solution store with binary-projection dedup.

    The dedup key is the rounded binary projection; instances without
    binary variables fall back to the full integer projection so distinct
    solutions are not collapsed.
    """

    def __init__(self, instance: MipInstance, capacity: int = None, dedup: bool = True,
                 int_tol: float = 1e-6):
        self.capacity = capacity
        self.dedup = dedup
        self.int_tol = int_tol
        self.binary_index = instance.binary_index
        self.binary_pos = {j: k for k, j in enumerate(self.binary_index)}
        self._key_cols = self.binary_index if self.binary_index else instance.integer_index
        self.solutions = []
        self.objectives = []
        self.projections = []
        self.ones = np.zeros(len(self.binary_index))
        self._keys = set()

    def __len__(self) -> int:
        return len(self.solutions)

    @property
    def is_full(self) -> bool:
        return self.capacity is not None and len(self.solutions) >= self.capacity

    def add(self, x, objective: float) -> bool:
        if self.is_full:
            return False
        x = np.asarray(x, dtype=float)
        key = np.rint([x[j] for j in self._key_cols]).astype(np.int64).tobytes()
        if self.dedup and key in self._keys:
            return False
        proj = project_binary(x, self.binary_index, self.int_tol)
        self._keys.add(key)
        self.solutions.append(x)
        self.objectives.append(float(objective))
        self.projections.append(proj)
        if len(self.binary_index):
            self.ones += proj
        return True

    def projection_matrix(self):
        if not self.projections:
            return np.zeros((0, len(self.binary_index)), dtype=np.int8)
        return np.vstack(self.projections)

    def solution_matrix(self):
        if not self.solutions:
            return np.zeros((0, 0))
        return np.vstack(self.solutions)


class OpenNodeQueue:
    """Open nodes by id with lazily maintained lpBound extrema."""

    def __init__(self):
        self.nodes = {}
        self._min_heap = []
        self._max_heap = []

    def __len__(self):
        return len(self.nodes)

    def __iter__(self):
        return iter(self.nodes.values())

    def push(self, node: Node):
        self.nodes[node.id] = node
        heapq.heappush(self._min_heap, (node.lp_bound, node.id))
        heapq.heappush(self._max_heap, (-node.lp_bound, node.id))

    def pop(self, node_id: int) -> Node:
        return self.nodes.pop(node_id)

    def _front(self, heap, sign: float) -> float:
        while heap:
            bound, nid = heap[0]
            node = self.nodes.get(nid)
            if node is None or node.lp_bound != sign * bound:
                heapq.heappop(heap)
                continue
            return sign * bound
        return math.nan

    def min_bound(self) -> float:
        return self._front(self._min_heap, 1.0)

    def max_bound(self) -> float:
        return self._front(self._max_heap, -1.0)


@dataclass
class TraceRecord:
    id: int
    depth: int
    lp_bound: float
    classification: str
    pool_size: int
    min_open: float = math.nan
    max_open: float = math.nan
    gated: bool = False

    def spec_fields(self) -> dict:
        bound = self.lp_bound
        return {
            "id": self.id,
            "depth": self.depth,
            "lpBound": None if bound is None or not math.isfinite(bound) else bound,
            "classification": self.classification,
            "poolSize": self.pool_size,
        }


@dataclass
class CountResult:
    pool: SolutionPool
    nodes_processed: int = 0
    nodes_pruned: int = 0
    unrestricted_subtrees: int = 0
    stalled_dropped: int = 0
    infeasible_completions: int = 0
    exhausted: bool = False
    truncated: bool = False
    wall_time_s: float = 0.0
    trace_hash: str = ""
    log: list = field(default_factory=list)


def most_fractional(lp: LpResult) -> int:
    """Branching column: fractional part nearest 0.5, lowest index on ties."""
    if not lp.fractional:
        raise EngineError("branch requested but no integer variable is fractional")
    best = None
    best_gap = math.inf
    for j in lp.fractional:
        f = lp.x[j] - math.floor(lp.x[j])
        gap = abs(f - 0.5)
        if gap < best_gap:
            best, best_gap = j, gap
    return best


class BranchAndCount:
    """Enumerator for one instance (cutoff row included by the caller)."""

    def __init__(self, instance: MipInstance, selector: SelectorConfig = None,
                 dedup: bool = True, feas_tol: float = 1e-6, int_tol: float = 1e-6):
        self.instance = instance
        self.selector_config = selector if selector is not None else SelectorConfig()
        self.dedup = dedup
        self.feas_tol = feas_tol
        self.int_tol = int_tol
        self.solver = SimplexSolver(instance, feas_tol=feas_tol, int_tol=int_tol)

        self.integer_index = instance.integer_index
        self.binary_set = set(instance.binary_index)
        lo, hi = instance.bounds()
        self.root_lo = np.asarray(lo, dtype=float)
        self.root_hi = np.asarray(hi, dtype=float)
        for j in self.integer_index:
            if not (math.isfinite(self.root_lo[j]) and math.isfinite(self.root_hi[j])):
                raise EngineError(
                    f"integer variable {instance.variables[j].name} must have finite bounds "
                    "for enumeration"
                )
            self.root_lo[j] = math.ceil(self.root_lo[j] - int_tol)
            self.root_hi[j] = math.floor(self.root_hi[j] + int_tol)
        # constraints in >= form (one row per <=/>=, two per equality)
        self.ge_rows = []
        for coeffs, rhs in instance.ge_rows():
            idx = np.asarray(sorted(coeffs), dtype=int)
            coef = np.asarray([coeffs[j] for j in idx], dtype=float)
            self.ge_rows.append((idx, coef, rhs))

    # -- node geometry --------------------------------------------------------

    def materialize(self, node: Node):
        lo = self.root_lo.copy()
        hi = self.root_hi.copy()
        for j, (a, b) in node.local_bounds.items():
            lo[j], hi[j] = a, b
        return lo, hi

    def classify(self, node: Node, lo, hi) -> str:
        if node.lp is None or node.lp.status == LpStatus.STALLED:
            return STALLED
        if node.lp.status != LpStatus.OPTIMAL:
            return INFEASIBLE
        if self.is_unrestricted(lo, hi):
            return UNRESTRICTED
        if not node.lp.fractional:
            return INTEGER_FEASIBLE
        return BRANCHABLE

    def is_unrestricted(self, lo, hi) -> bool:
        """True when every row holds at its worst point of the local box."""
        for idx, coef, rhs in self.ge_rows:
            worst = np.where(coef > 0, coef * lo[idx], coef * hi[idx]).sum()
            if not worst >= rhs - self.feas_tol:  # NaN-safe: unbounded box fails
                return False
        return True

    def _estimate(self, lp: LpResult) -> float:
        est = lp.objective
        for j in lp.fractional:
            f = lp.x[j] - math.floor(lp.x[j])
            est += min(f, 1.0 - f) * abs(self.solver.c[j])
        return est

    def _child(self, node: Node, next_id: int, j: int, lo_j: float, hi_j: float) -> Node:
        bounds = dict(node.local_bounds)
        bounds[j] = (lo_j, hi_j)
        fixed = node.fixed_binaries
        if j in self.binary_set and lo_j == hi_j:
            fixed = dict(fixed)
            fixed[j] = int(lo_j)
        return Node(
            id=next_id,
            parent_id=node.id,
            depth=node.depth + 1,
            local_bounds=bounds,
            fixed_binaries=fixed,
            inherited_bound=node.lp_bound,
        )

    def branch(self, node: Node):
        """Two children on the most-fractional column: floor and ceil sides."""
        lo, hi = self.materialize(node)
        j = most_fractional(node.lp)
        v = node.lp.x[j]
        down = self._child(node, -1, j, lo[j], math.floor(v))
        up = self._child(node, -1, j, math.ceil(v), hi[j])
        return [down, up]

    def partition_branch(self, node: Node, lo, hi):
        """Split on the lowest unfixed integer column when the LP is integral.

        Children [lo, v] / [v+1, hi] partition the box, so the solution at
        this node is counted by exactly one descendant leaf.
        """
        j = next(k for k in self.integer_index if hi[k] - lo[k] > 0.5)
        v = float(round(node.lp.x[j]))
        v = min(max(v, lo[j]), hi[j])
        if v >= hi[j]:
            return [
                self._child(node, -1, j, lo[j], v - 1.0),
                self._child(node, -1, j, v, v),
            ]
        return [
            self._child(node, -1, j, lo[j], v),
            self._child(node, -1, j, v + 1.0, hi[j]),
        ]

    # -- solution extraction ---------------------------------------------------

    def _rows_hold(self, x) -> bool:
        return all(con.satisfied(x, self.feas_tol) for con in self.instance.constraints)

    def _complete(self, x, lo, hi):
        """Validate a candidate; re-solve the continuous completion if needed."""
        if self._rows_hold(x):
            return x
        lo2, hi2 = lo.copy(), hi.copy()
        for j in self.integer_index:
            lo2[j] = hi2[j] = x[j]
        res = self.solver.solve(lo2, hi2)
        if res.is_optimal:
            return res.x
        return None

    def enumerate_unrestricted(self, node: Node, lo, hi, pool: SolutionPool):
        """Add every integer assignment of the local box to the pool.

        Assignments run in lexicographic order (ascending column, values
        ascending). Continuous columns keep the node LP values, which the
        unrestricted test guarantees feasible. Returns (added, completed)
        where completed is False when capacity cut the walk short.
        """
        free = [j for j in self.integer_index if hi[j] - lo[j] > 0.5]
        base = node.lp.x.copy()
        for j in self.integer_index:
            if j not in free:
                base[j] = round(lo[j])
        ranges = [range(int(lo[j]), int(hi[j]) + 1) for j in free]
        added = 0
        infeasible = 0
        for combo in itertools.product(*ranges):
            if pool.is_full:
                return added, infeasible, False
            x = base.copy()
            for j, v in zip(free, combo):
                x[j] = float(v)
            x = self._complete(x, lo, hi)
            if x is None:
                infeasible += 1
                continue
            if pool.add(x, self.instance.objective_value(x)):
                added += 1
        return added, infeasible, True

    # -- main loop ---------------------------------------------------------------

    def run(self, p1: int = None, node_limit: int = None, time_limit: float = None,
            trace_path: str = None) -> CountResult:
        t0 = time.perf_counter()
        pool = SolutionPool(self.instance, capacity=p1, dedup=self.dedup, int_tol=self.int_tol)
        selector = Selector(self.selector_config, num_integer_vars=len(self.integer_index))
        queue = OpenNodeQueue()
        result = CountResult(pool=pool)
        hasher = hashlib.sha256()
        trace_fh = open(trace_path, "w") if trace_path else None
        truncated_enum = False
        next_id = 1

        def emit(record: TraceRecord):
            line = json.dumps(record.spec_fields(), sort_keys=True)
            hasher.update(line.encode())
            hasher.update(b"\n")
            if trace_fh:
                trace_fh.write(line + "\n")
            result.log.append(record)

        try:
            root = Node(id=0, parent_id=None, depth=0, local_bounds={},
                        fixed_binaries={
                            j: int(self.root_lo[j])
                            for j in sorted(self.binary_set)
                            if self.root_lo[j] == self.root_hi[j]
                        })
            root.lp = self.solver.solve(self.root_lo, self.root_hi)
            if root.lp.status == LpStatus.STALLED:
                root.lp = self.solver.solve(self.root_lo, self.root_hi)
            if root.lp.status == LpStatus.UNBOUNDED:
                raise EngineError("root relaxation is unbounded; add bounds or a cutoff")
            if root.lp.status == LpStatus.STALLED:
                raise EngineError("root relaxation stalled")
            if root.lp.status == LpStatus.INFEASIBLE:
                result.nodes_processed = 1
                result.nodes_pruned = 1
                emit(TraceRecord(0, 0, None, INFEASIBLE, 0))
                result.exhausted = True
                return result
            root.estimate = self._estimate(root.lp)
            queue.push(root)
            selector.on_enqueue(root)

            while len(queue) and not pool.is_full:
                if node_limit is not None and result.nodes_processed >= node_limit:
                    result.truncated = True
                    break
                if time_limit is not None and time.perf_counter() - t0 > time_limit:
                    result.truncated = True
                    break
                ctx = ScoreContext(
                    min_bound=queue.min_bound(),
                    max_bound=queue.max_bound(),
                    pool=pool,
                    solutions_found=len(pool),
                    p1=p1,
                )
                gated = selector.gated(ctx)
                nid = selector.select(queue, ctx)
                node = queue.pop(nid)
                selector.on_dequeue(node)
                result.nodes_processed += 1
                lo, hi = self.materialize(node)

                if node.lp is None:  # the creation-time LP stalled; retry cold once
                    node.lp = self.solver.solve(lo, hi)
                cls = self.classify(node, lo, hi)
                emit(TraceRecord(node.id, node.depth, node.lp_bound if node.lp else None,
                                 cls, len(pool), ctx.min_bound, ctx.max_bound, gated))

                if cls == STALLED:
                    result.stalled_dropped += 1
                    log.warning("node %d dropped after a second LP stall", node.id)
                    continue
                if cls == INFEASIBLE:
                    result.nodes_pruned += 1
                    continue
                if cls == UNRESTRICTED:
                    result.unrestricted_subtrees += 1
                    _, bad, completed = self.enumerate_unrestricted(node, lo, hi, pool)
                    result.infeasible_completions += bad
                    if not completed:
                        truncated_enum = True
                    continue
                if cls == INTEGER_FEASIBLE:
                    if any(hi[k] - lo[k] > 0.5 for k in self.integer_index):
                        children = self.partition_branch(node, lo, hi)
                    else:
                        x = self._complete(node.lp.x.copy(), lo, hi)
                        if x is None:
                            result.infeasible_completions += 1
                        else:
                            pool.add(x, self.instance.objective_value(x))
                        continue
                else:
                    children = self.branch(node)

                for child in children:
                    child.id = next_id
                    next_id += 1
                    clo, chi = self.materialize(child)
                    child.lp = self.solver.resolve(node.lp.basis, clo, chi)
                    if child.lp.status == LpStatus.INFEASIBLE:
                        result.nodes_pruned += 1
                        emit(TraceRecord(child.id, child.depth, None, INFEASIBLE, len(pool)))
                        continue
                    if child.lp.status == LpStatus.STALLED:
                        child.lp = None  # re-queued once on the inherited bound
                        child.estimate = child.inherited_bound
                    else:
                        child.estimate = self._estimate(child.lp)
                    queue.push(child)
                    selector.on_enqueue(child)

            result.exhausted = len(queue) == 0 and not result.truncated and not truncated_enum
            return result
        finally:
            result.trace_hash = hasher.hexdigest()
            result.wall_time_s = time.perf_counter() - t0
            if trace_fh:
                trace_fh.close()
