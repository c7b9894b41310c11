"""The undirected flow formulation and its three valid-inequality families.

Each inequality family is generated in two orientations.  Orientation 0
is the one written for the first endpoint ``a`` of a virtual edge
``(a, b)``; orientation 1 swaps the endpoints and reverses every arc.
Both are valid because a virtual edge is undirected.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

from vnepoly.instance import Instance, Point, VarIndex

FLOW_DEPARTURE = "flow_departure"
FLOW_CONTINUITY = "flow_continuity"
LEAF_EQUALITY = "leaf_equality"
FAMILIES = (FLOW_DEPARTURE, FLOW_CONTINUITY, LEAF_EQUALITY)

_ALIASES = {
    "fd": FLOW_DEPARTURE,
    "departure": FLOW_DEPARTURE,
    "fc": FLOW_CONTINUITY,
    "continuity": FLOW_CONTINUITY,
    "leaf": LEAF_EQUALITY,
}


def family_name(name: str) -> str:
    name = name.strip().lower()
    name = _ALIASES.get(name, name)
    if name not in FAMILIES:
        raise ValueError(f"unknown inequality family {name!r}")
    return name


def parse_families(spec: str | Iterable[str] | None) -> tuple[str, ...]:
    """``"fd,fc"`` -> ``("flow_departure", "flow_continuity")``."""
    if not spec:
        return ()
    if isinstance(spec, str):
        spec = [s for s in spec.split(",") if s.strip()]
    out: list[str] = []
    for s in spec:
        f = family_name(s)
        if f not in out:
            out.append(f)
    return tuple(out)


class InfeasibleError(ValueError):
    """No feasible mapping can exist; ``model`` is the model built so far."""

    def __init__(self, message: str, model: Model | None = None):
        super().__init__(message)
        self.model = model


@dataclass(frozen=True)
class Variable:
    name: str
    kind: str
    vindex: int
    sindex: int
    lb: int = 0
    ub: int = 1
    integer: bool = True
    fixed: bool = False


@dataclass(frozen=True, eq=False)
class Constraint:
    coeffs: dict[int, Fraction]
    sense: str
    rhs: Fraction
    name: str = ""

    def activity(self, values: Sequence) -> Fraction | float:
        return sum((c * values[j] for j, c in self.coeffs.items()), Fraction(0))

    def violation(self, values: Sequence) -> Fraction | float:
        """Amount by which ``values`` violates the row (<= 0 when satisfied)."""
        lhs = self.activity(values)
        if self.sense == "<=":
            return lhs - self.rhs
        if self.sense == ">=":
            return self.rhs - lhs
        return abs(lhs - self.rhs)


@dataclass(frozen=True, eq=False)
class Cut(Constraint):
    family: str = ""
    key: tuple = ()


@dataclass(frozen=True, eq=False)
class Model:
    variables: tuple[Variable, ...]
    constraints: tuple[Constraint, ...]
    objective: dict[int, Fraction]
    index: VarIndex | None = None
    instance: Instance | None = field(default=None, repr=False)

    @property
    def n(self) -> int:
        return len(self.variables)

    def with_constraints(self, extra: Iterable[Constraint]) -> Model:
        return replace(self, constraints=self.constraints + tuple(extra))

    def with_objective(self, objective: dict[int, Fraction]) -> Model:
        return replace(self, objective=dict(objective))

    def objective_value(self, values: Sequence) -> Fraction | float:
        return sum((c * values[j] for j, c in self.objective.items()), Fraction(0))

    def violations(self, values: Sequence, tol: float = 0.0) -> list[tuple[str, float]]:
        """Rows and bounds violated by more than ``tol``."""
        out: list[tuple[str, float]] = []
        for j, var in enumerate(self.variables):
            if values[j] < var.lb - tol or values[j] > var.ub + tol:
                out.append((f"bound {var.name}", values[j]))
        for i, con in enumerate(self.constraints):
            viol = con.violation(values)
            if viol > tol:
                out.append((con.name or f"row {i}", viol))
        return out

    def is_feasible(self, values: Sequence, tol: float = 0.0) -> bool:
        return not self.violations(values, tol)

    def family_counts(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for con in self.constraints:
            fam = con.family if isinstance(con, Cut) else "base"
            out[fam] = out.get(fam, 0) + 1
        return out


def build_flow_formulation(inst: Instance) -> Model:
    v, s, bi = inst.virtual, inst.substrate, inst.bidirected
    idx = inst.index
    variables: list[Variable] = []
    objective: dict[int, Fraction] = {}
    for vi in range(v.n):
        for u in range(s.n):
            j = idx.x(vi, u)
            variables.append(Variable(inst.var_name(j), "x", vi, u))
            objective[j] = v.node_demand[vi] * s.node_cost[u]
    for k in range(len(v.edges)):
        for a in range(len(bi.arcs)):
            j = idx.y(k, a)
            variables.append(Variable(inst.var_name(j), "y", k, a))
            objective[j] = v.edge_demand[k] * s.edge_cost[bi.edge_of(a)]

    one, zero = Fraction(1), Fraction(0)
    rows: list[Constraint] = []
    for vi in range(v.n):
        rows.append(
            Constraint({idx.x(vi, u): one for u in range(s.n)}, "=", one, f"place_{v.ids[vi]}")
        )
    for k, (a, b) in enumerate(v.edges):
        for u in range(s.n):
            coeffs = {idx.x(a, u): one, idx.x(b, u): -one}
            for arc in bi.out_arcs[u]:
                coeffs[idx.y(k, arc)] = -one
            for arc in bi.in_arcs[u]:
                coeffs[idx.y(k, arc)] = one
            rows.append(Constraint(coeffs, "=", zero, f"flow_{k}_{s.ids[u]}"))
    for u in range(s.n):
        rows.append(
            Constraint({idx.x(vi, u): one for vi in range(v.n)}, "<=", one, f"one_{s.ids[u]}")
        )
    for e, (p, q) in enumerate(s.edges):
        coeffs = {}
        for k in range(len(v.edges)):
            d = Fraction(v.edge_demand[k])
            coeffs[idx.y(k, 2 * e)] = d
            coeffs[idx.y(k, 2 * e + 1)] = d
        rows.append(Constraint(coeffs, "<=", Fraction(s.edge_capacity[e]), f"cap_{s.ids[p]}_{s.ids[q]}"))
    return Model(tuple(variables), tuple(rows), objective, idx, inst)


def prefix_variables(model: Model, inst: Instance) -> Model:
    """Fix to zero the columns that no feasible mapping can use.

    ``x[a, u]`` is fixed when ``d_a > c_u`` and both arcs of edge ``e`` are
    fixed for virtual edge ``k`` when ``d_k > c_e``.  Raises
    :class:`InfeasibleError` (carrying the fixed model) when some virtual
    node has no placement left.
    """
    v, s, idx = inst.virtual, inst.substrate, inst.index
    fixed: set[int] = set()
    for vi in range(v.n):
        for u in range(s.n):
            if v.node_demand[vi] > s.node_capacity[u]:
                fixed.add(idx.x(vi, u))
    for k in range(len(v.edges)):
        for e in range(len(s.edges)):
            if v.edge_demand[k] > s.edge_capacity[e]:
                fixed.add(idx.y(k, 2 * e))
                fixed.add(idx.y(k, 2 * e + 1))
    variables = tuple(
        replace(var, ub=0, fixed=True) if j in fixed else var for j, var in enumerate(model.variables)
    )
    out = replace(model, variables=variables)
    stuck = [v.ids[vi] for vi in range(v.n) if all(idx.x(vi, u) in fixed for u in range(s.n))]
    if stuck:
        raise InfeasibleError(
            "no substrate node can host virtual node(s) " + ", ".join(map(str, stuck)), out
        )
    return out


def build_model(
    inst: Instance, families: Iterable[str] = (), *, prefix: bool = True, symmetric: bool = True
) -> Model:
    """Flow formulation, optionally pre-fixed, with whole families appended."""
    model = build_flow_formulation(inst)
    if prefix:
        model = prefix_variables(model, inst)
    cuts: list[Cut] = []
    for fam in parse_families(families):
        cuts.extend(generate_family(inst, fam, symmetric=symmetric))
    return model.with_constraints(cuts)


def _orientations(inst: Instance, symmetric: bool):
    """Yield (k, source endpoint, sink endpoint, orientation, arc map)."""
    n_arcs = len(inst.bidirected.arcs)
    for k, (a, b) in enumerate(inst.virtual.edges):
        yield k, a, b, 0, list(range(n_arcs))
        if symmetric:
            # arc (u, v) of the swapped edge is arc (v, u) of the original
            yield k, b, a, 1, [arc ^ 1 for arc in range(n_arcs)]


def gen_flow_departure(inst: Instance, symmetric: bool = True) -> list[Cut]:
    """``x[src, u] <= sum of y over arcs leaving u``, one per (edge, node)."""
    idx, bi = inst.index, inst.bidirected
    cuts = []
    for k, src, _, orient, amap in _orientations(inst, symmetric):
        for u in range(inst.substrate.n):
            coeffs = {idx.x(src, u): Fraction(1)}
            for arc in bi.out_arcs[u]:
                coeffs[idx.y(k, amap[arc])] = Fraction(-1)
            cuts.append(
                Cut(coeffs, "<=", Fraction(0), f"fd_{k}_{orient}_{inst.substrate.ids[u]}",
                    FLOW_DEPARTURE, (k, u, orient))
            )
    return cuts


def gen_flow_continuity(inst: Instance, symmetric: bool = True) -> list[Cut]:
    """``y[(u,v)] <= sum of y over arcs leaving v except (v,u), plus x[snk, v]``."""
    idx, bi = inst.index, inst.bidirected
    ids = inst.substrate.ids
    cuts = []
    for k, _, snk, orient, amap in _orientations(inst, symmetric):
        for arc, (u, v) in enumerate(bi.arcs):
            coeffs = {idx.y(k, amap[arc]): Fraction(1), idx.x(snk, v): Fraction(-1)}
            for nxt in bi.out_arcs[v]:
                if bi.arcs[nxt][1] != u:
                    coeffs[idx.y(k, amap[nxt])] = Fraction(-1)
            cuts.append(
                Cut(coeffs, "<=", Fraction(0), f"fc_{k}_{orient}_{ids[u]}_{ids[v]}",
                    FLOW_CONTINUITY, (k, (u, v), orient))
            )
    return cuts


def gen_leaf_equalities(inst: Instance, symmetric: bool = True) -> list[Cut]:
    """``y[(l, v_l)] = x[src, l]`` for every leaf ``l`` with neighbour ``v_l``."""
    idx, bi, s = inst.index, inst.bidirected, inst.substrate
    cuts = []
    for k, src, _, orient, amap in _orientations(inst, symmetric):
        for leaf in s.leaves():
            arc = bi.arc_id[(leaf, s.neighbors[leaf][0])]
            coeffs = {idx.y(k, amap[arc]): Fraction(1), idx.x(src, leaf): Fraction(-1)}
            cuts.append(
                Cut(coeffs, "=", Fraction(0), f"leaf_{k}_{orient}_{s.ids[leaf]}",
                    LEAF_EQUALITY, (k, leaf, orient))
            )
    return cuts


_GENERATORS = {
    FLOW_DEPARTURE: gen_flow_departure,
    FLOW_CONTINUITY: gen_flow_continuity,
    LEAF_EQUALITY: gen_leaf_equalities,
}


@lru_cache(maxsize=256)
def _cached_family(inst: Instance, family: str, symmetric: bool) -> tuple[Cut, ...]:
    return tuple(_GENERATORS[family](inst, symmetric))


def generate_family(inst: Instance, family: str, symmetric: bool = True) -> tuple[Cut, ...]:
    return _cached_family(inst, family_name(family), symmetric)


def separate(
    inst: Instance,
    point: Point | Sequence,
    family: str | Iterable[str],
    tolerance: float = 1e-6,
    symmetric: bool = True,
) -> list[Cut]:
    """All cuts of the given families violated by more than ``tolerance``.

    Sorted by decreasing violation; ties keep generation order.
    """
    values = point.values if isinstance(point, Point) else point
    found = []
    for fam in parse_families(family):
        for cut in generate_family(inst, fam, symmetric):
            viol = cut.violation(values)
            if viol > tolerance:
                found.append((viol, len(found), cut))
    found.sort(key=lambda t: (-t[0], t[1]))
    return [cut for _, _, cut in found]
