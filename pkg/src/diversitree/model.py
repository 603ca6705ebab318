"""Mixed-integer program instances and reformulations.

The core container is :class:`MipInstance`: minimize ``c @ x`` subject to
linear constraints and variable bounds, with designated integer variables.
Instances are treated as immutable; every transform returns a new instance.

Transforms provided here:

* :func:`add_objective_cutoff` appends the near-optimality constraint
  ``c @ x <= cutoff`` used by solution enumeration.
* :func:`binary_expand` rewrites bounded general integers as weighted sums
  of fresh binaries.
* :func:`discretize_continuous` approximates bounded continuous variables
  on a dyadic grid of binaries to a requested decimal precision.
"""

import json
import math
from dataclasses import dataclass, field, replace

INF = float("inf")

GE = ">="
LE = "<="
EQ = "="
SENSES = (GE, LE, EQ)


class ModelError(ValueError):
    """Raised for structurally invalid instances or transform misuse."""


@dataclass(frozen=True)
class VariableDef:
    """One column: bounds plus integrality marker.

    A variable is *binary* when it is integer with bounds exactly [0, 1].
    """

    index: int
    lower: float = 0.0
    upper: float = INF
    is_integer: bool = False
    name: str = ""

    def __post_init__(self):
        if self.index < 0:
            raise ModelError(f"variable index must be >= 0, got {self.index}")
        if self.lower > self.upper:
            raise ModelError(
                f"variable {self.name or self.index}: lower {self.lower} > upper {self.upper}"
            )
        if not self.name:
            object.__setattr__(self, "name", f"x{self.index}")

    @property
    def is_binary(self) -> bool:
        return self.is_integer and self.lower == 0.0 and self.upper == 1.0


@dataclass(frozen=True)
class LinearConstraint:
    """Sparse row ``sum(coeffs[j] * x[j]) sense rhs``."""

    coeffs: dict
    sense: str
    rhs: float
    name: str = ""

    def __post_init__(self):
        if self.sense not in SENSES:
            raise ModelError(f"constraint {self.name!r}: unknown sense {self.sense!r}")
        for j, a in self.coeffs.items():
            if a == 0.0:
                raise ModelError(f"constraint {self.name!r}: zero coefficient on column {j}")

    def ge_rows(self):
        """The row as a list of equivalent >= rows (one for >=/<=, two for =)."""
        if self.sense == GE:
            return [(self.coeffs, self.rhs)]
        if self.sense == LE:
            return [({j: -a for j, a in self.coeffs.items()}, -self.rhs)]
        return [
            (self.coeffs, self.rhs),
            ({j: -a for j, a in self.coeffs.items()}, -self.rhs),
        ]

    def activity(self, x) -> float:
        return sum(a * x[j] for j, a in self.coeffs.items())

    def satisfied(self, x, tol: float = 1e-6) -> bool:
        act = self.activity(x)
        if self.sense == GE:
            return act >= self.rhs - tol
        if self.sense == LE:
            return act <= self.rhs + tol
        return abs(act - self.rhs) <= tol


@dataclass
class MipInstance:
    """Minimization MIP over bounded variables.

    ``objective`` maps column index to cost. ``objective_negated`` records
    that the source model was a maximization negated at ingestion; report
    layers un-negate values for display but all internals minimize.
    """

    name: str
    variables: list
    constraints: list
    objective: dict
    objective_name: str = "OBJ"
    objective_negated: bool = False

    def __post_init__(self):
        seen = set()
        for pos, v in enumerate(self.variables):
            if v.index != pos:
                raise ModelError(f"variable {v.name!r} has index {v.index}, expected {pos}")
            if v.name in seen:
                raise ModelError(f"duplicate variable name {v.name!r}")
            seen.add(v.name)
        d = len(self.variables)
        for con in self.constraints:
            for j in con.coeffs:
                if not 0 <= j < d:
                    raise ModelError(f"constraint {con.name!r} references unknown column {j}")
        for j in self.objective:
            if not 0 <= j < d:
                raise ModelError(f"objective references unknown column {j}")

    @property
    def num_vars(self) -> int:
        return len(self.variables)

    @property
    def integer_index(self) -> list:
        """Indices of all integer variables, ascending."""
        return [v.index for v in self.variables if v.is_integer]

    @property
    def binary_index(self) -> list:
        """Indices of binary variables (integer with bounds [0, 1]), ascending."""
        return [v.index for v in self.variables if v.is_binary]

    def objective_value(self, x) -> float:
        return float(sum(c * x[j] for j, c in self.objective.items()))

    def reported_objective(self, value: float) -> float:
        """Objective in the sense of the source model (un-negated)."""
        return -value if self.objective_negated else value

    def ge_rows(self):
        """All constraints normalized to >= form, in declaration order."""
        rows = []
        for con in self.constraints:
            rows.extend(con.ge_rows())
        return rows

    def bounds(self):
        """(lower, upper) bound lists over all columns."""
        return [v.lower for v in self.variables], [v.upper for v in self.variables]

    def to_json(self) -> str:
        """Canonical JSON dump with fields {name, vars, cons, obj}.

        Infinite bounds serialize as null.
        """

        def _b(x):
            return None if math.isinf(x) else x

        doc = {
            "name": self.name,
            "vars": [
                {
                    "name": v.name,
                    "index": v.index,
                    "lower": _b(v.lower),
                    "upper": _b(v.upper),
                    "integer": v.is_integer,
                }
                for v in self.variables
            ],
            "cons": [
                {
                    "name": c.name,
                    "coeffs": {str(j): c.coeffs[j] for j in sorted(c.coeffs)},
                    "sense": c.sense,
                    "rhs": c.rhs,
                }
                for c in self.constraints
            ],
            "obj": {
                "name": self.objective_name,
                "coeffs": {str(j): self.objective[j] for j in sorted(self.objective)},
                "sense": "min",
                "negated": self.objective_negated,
            },
        }
        return json.dumps(doc, indent=2)


@dataclass(frozen=True)
class CutoffSpec:
    """Near-optimality threshold: admit x with c @ x <= cutoff_value.

    cutoff_value = z_star + q * |z_star|, which is (1 + q) * z_star for
    z_star >= 0 and tightens toward z_star from above for negative optima.
    A zero optimum admits only alternate optima regardless of q.
    """

    z_star: float
    q: float
    cutoff_value: float = field(init=False)

    def __post_init__(self):
        if self.q < 0:
            raise ModelError(f"q must be nonnegative, got {self.q}")
        object.__setattr__(self, "cutoff_value", self.z_star + self.q * abs(self.z_star))


CUTOFF_ROW = "__cutoff__"


def add_objective_cutoff(instance: MipInstance, z_star: float, q: float) -> MipInstance:
    """Append the constraint ``objective <= z_star + q * |z_star|``.

    The objective itself is retained so node bounds stay meaningful.
    """
    spec = CutoffSpec(z_star, q)
    if not instance.objective:
        raise ModelError("cannot add an objective cutoff to an instance with an empty objective")
    row = LinearConstraint(
        coeffs=dict(instance.objective),
        sense=LE,
        rhs=spec.cutoff_value,
        name=CUTOFF_ROW,
    )
    return replace(instance, constraints=list(instance.constraints) + [row])


@dataclass(frozen=True)
class Expansion:
    """Recipe recovering one original variable from replacement binaries."""

    kind: str  # "identity" | "binary" | "dyadic"
    bit_indices: tuple = ()
    weights: tuple = ()
    offset: float = 0.0

    def decode(self, x) -> float:
        if self.kind == "identity":
            return float(x[self.bit_indices[0]]) if self.bit_indices else self.offset
        return self.offset + sum(w * x[j] for w, j in zip(self.weights, self.bit_indices))


@dataclass
class IndexMap:
    """Maps original variable indices to their replacement bit columns."""

    entries: dict

    def decode(self, x) -> dict:
        """Original-index -> value, reconstructed from the bit columns of x."""
        return {j: e.decode(x) for j, e in self.entries.items()}


def binary_expand(instance: MipInstance, targets) -> tuple:
    """Rewrite bounded general integers as sums of fresh binaries.

    Each target with bounds [l, u], 0 <= l <= u < inf, keeps its column
    (reclassified continuous) and gains M fresh binaries b_0..b_{M-1} with
    M minimal such that u <= 2**M - 1, a linking equality
    ``x = sum 2**j * b_j``, and, when u < 2**M - 1, an upper-bound row
    ``sum 2**j * b_j <= u`` clipping unused bit patterns.

    A target that is already binary (u = 1, l = 0) is left untouched.

    Returns (new instance, IndexMap).
    """
    targets = sorted(set(targets))
    by_index = {v.index: v for v in instance.variables}
    for j in targets:
        if j not in by_index:
            raise ModelError(f"binary_expand: unknown column {j}")
        v = by_index[j]
        if not v.is_integer:
            raise ModelError(f"binary_expand: {v.name} is not an integer variable")
        if v.lower < 0:
            raise ModelError(f"binary_expand: {v.name} has a negative lower bound")
        if math.isinf(v.upper):
            raise ModelError(f"binary_expand: {v.name} is unbounded above")

    variables = list(instance.variables)
    constraints = list(instance.constraints)
    entries = {}
    for j in targets:
        v = by_index[j]
        u = int(round(v.upper))
        if v.is_binary or u == 0:
            entries[j] = Expansion(kind="identity", bit_indices=(j,))
            continue
        m = u.bit_length()  # smallest M with u <= 2**M - 1
        bits = []
        weights = []
        for k in range(m):
            idx = len(variables)
            variables.append(
                VariableDef(index=idx, lower=0.0, upper=1.0, is_integer=True, name=f"{v.name}__b{k}")
            )
            bits.append(idx)
            weights.append(float(2**k))
        variables[j] = replace(v, is_integer=False)
        link = {j: 1.0}
        link.update({b: -w for b, w in zip(bits, weights)})
        constraints.append(LinearConstraint(coeffs=link, sense=EQ, rhs=0.0, name=f"{v.name}__link"))
        if u < 2**m - 1:
            cap = {b: w for b, w in zip(bits, weights)}
            constraints.append(
                LinearConstraint(coeffs=cap, sense=LE, rhs=float(u), name=f"{v.name}__cap")
            )
        entries[j] = Expansion(kind="binary", bit_indices=tuple(bits), weights=tuple(weights))

    new = MipInstance(
        name=instance.name,
        variables=variables,
        constraints=constraints,
        objective=dict(instance.objective),
        objective_name=instance.objective_name,
        objective_negated=instance.objective_negated,
    )
    return new, IndexMap(entries)


def discretize_continuous(instance: MipInstance, targets, precision_digits: int) -> tuple:
    """Approximate bounded continuous variables on a dyadic binary grid.

    Each target with finite bounds [l, u], l < u, keeps its column and gains
    K binaries z_1..z_K with K = ceil(precision_digits * log2(10)) and a
    linking equality ``x = l + (u - l) * sum 2**-k * z_k``. The grid spacing
    (u - l) * 2**-K keeps the worst-case decode error below
    (u - l) * 10**-precision_digits. Fixed targets (l = u) need no bits.

    Returns (new instance, IndexMap).
    """
    if precision_digits < 1:
        raise ModelError("precision_digits must be >= 1")
    targets = sorted(set(targets))
    by_index = {v.index: v for v in instance.variables}
    for j in targets:
        if j not in by_index:
            raise ModelError(f"discretize_continuous: unknown column {j}")
        v = by_index[j]
        if v.is_integer:
            raise ModelError(f"discretize_continuous: {v.name} is an integer variable")
        if math.isinf(v.lower) or math.isinf(v.upper):
            raise ModelError(f"discretize_continuous: {v.name} has unbounded range")

    k_bits = math.ceil(precision_digits * math.log(10) / math.log(2))
    variables = list(instance.variables)
    constraints = list(instance.constraints)
    entries = {}
    for j in targets:
        v = by_index[j]
        lo, hi = v.lower, v.upper
        if hi == lo:
            entries[j] = Expansion(kind="identity", bit_indices=(), offset=lo)
            continue
        bits = []
        weights = []
        for k in range(1, k_bits + 1):
            idx = len(variables)
            variables.append(
                VariableDef(index=idx, lower=0.0, upper=1.0, is_integer=True, name=f"{v.name}__z{k}")
            )
            bits.append(idx)
            weights.append((hi - lo) * 2.0**-k)
        link = {j: 1.0}
        link.update({b: -w for b, w in zip(bits, weights)})
        constraints.append(
            LinearConstraint(coeffs=link, sense=EQ, rhs=lo, name=f"{v.name}__link")
        )
        entries[j] = Expansion(kind="dyadic", bit_indices=tuple(bits), weights=tuple(weights), offset=lo)

    new = MipInstance(
        name=instance.name,
        variables=variables,
        constraints=constraints,
        objective=dict(instance.objective),
        objective_name=instance.objective_name,
        objective_negated=instance.objective_negated,
    )
    return new, IndexMap(entries)
