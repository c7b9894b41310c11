"""Path/cycle decompositions of a single-virtual-edge flow.

For one virtual edge ``(a, b)`` a point of the flow formulation is a unit
``a -> b`` flow in the augmented network: ``x[a, u]`` is the flow on arc
``(src, u)``, ``x[b, u]`` the flow on ``(u, snk)``.  Two decompositions
are provided:

* :func:`decompose_generic` peels paths and cycles in the textbook way;
* :func:`compute_flow_decomposition` is the forward/backward construction
  for a path substrate, which only ever emits valid paths when the point
  satisfies the flow-departure and flow-continuity inequalities.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Hashable, Sequence

from vnepoly.formulation import FLOW_CONTINUITY, FLOW_DEPARTURE, generate_family
from vnepoly.instance import (
    SINK,
    SOURCE,
    Instance,
    InstanceError,
    Mapping,
    Point,
    as_fraction,
    build_augmented,
)

FLOAT_ZERO = 1e-9


class FlowConservationError(ValueError):
    """The point is not a unit flow (placement or conservation broken)."""


class ContractViolation(RuntimeError):
    """A residual left the region the construction relies on."""

    def __init__(self, message: str, residual: Point | None = None, failures: Sequence[str] = ()):
        super().__init__(message)
        self.residual = residual
        self.failures = list(failures)


@dataclass(frozen=True)
class AugPath:
    """``(src, route[0], ..., route[-1], snk)`` in the augmented network."""

    route: tuple[int, ...]

    @property
    def nodes(self) -> tuple:
        return (SOURCE, *self.route, SINK)

    @property
    def arcs(self) -> list[tuple[Any, Any]]:
        n = self.nodes
        return list(zip(n, n[1:]))

    @property
    def is_valid(self) -> bool:
        return is_valid_path(self)


def is_valid_path(p: AugPath) -> bool:
    """At least three augmented arcs, i.e. a nonempty substrate route."""
    return len(p.arcs) >= 3


@dataclass(frozen=True)
class Decomposition:
    instance: Instance
    paths: tuple[tuple[AugPath, Any], ...]
    cycles: tuple[tuple[tuple[tuple[int, int], ...], Any], ...]
    vedge: int = 0

    @property
    def total_path_weight(self):
        return sum((lam for _, lam in self.paths), Fraction(0))

    @property
    def all_valid(self) -> bool:
        return all(p.is_valid for p, _ in self.paths)


def _is_exact(values: Sequence) -> bool:
    return all(isinstance(v, (int, Fraction)) for v in values)


def _zero(values: Sequence):
    return 0 if _is_exact(values) else FLOAT_ZERO


def check_unit_flow(point: Point, inst: Instance, k: int = 0, tol: float = 1e-9) -> list[str]:
    """Placement (sum of x = 1 for both endpoints) and conservation failures."""
    bi, s = inst.bidirected, inst.substrate
    a, b = inst.virtual.edges[k]
    out = []
    for end in (a, b):
        total = sum(point.x(end, u) for u in range(s.n))
        if abs(total - 1) > tol:
            out.append(f"placement of {inst.virtual.ids[end]} sums to {total}")
    for u in range(s.n):
        lhs = point.x(a, u) - point.x(b, u)
        rhs = sum(point.y(k, arc) for arc in bi.out_arcs[u]) - sum(point.y(k, arc) for arc in bi.in_arcs[u])
        if abs(lhs - rhs) > tol:
            out.append(f"flow conservation at {s.ids[u]}: {lhs} != {rhs}")
    return out


def _peel(point: Point, inst: Instance, k: int):
    """Textbook peeling of the edge-``k`` flow into paths then cycles."""
    bi, n_s = inst.bidirected, inst.substrate.n
    a, b = inst.virtual.edges[k]
    zero = _zero(point.values)
    exact = zero == 0
    flow: dict[tuple, Any] = {}
    out: dict[Any, list[tuple]] = {SOURCE: []}
    for u in range(n_s):
        out[u] = []
    for u in range(n_s):
        arc = (SOURCE, u)
        flow[arc] = point.x(a, u)
        out[SOURCE].append(arc)
    for arc_id, (u, v) in enumerate(bi.arcs):
        flow[(u, v)] = point.y(k, arc_id)
        out[u].append((u, v))
    for u in range(n_s):
        arc = (u, SINK)
        flow[arc] = point.x(b, u)
        out[u].append(arc)

    def first_positive(node):
        for arc in out.get(node, ()):
            if flow[arc] > zero:
                return arc
        return None

    def subtract(arcs, lam):
        for arc in arcs:
            flow[arc] = flow[arc] - lam
            if not exact and abs(flow[arc]) <= zero:
                flow[arc] = 0.0

    paths, cycles = [], []
    while first_positive(SOURCE) is not None:
        walk = [SOURCE]
        pos = {SOURCE: 0}
        while True:
            arc = first_positive(walk[-1])
            if arc is None:
                raise FlowConservationError(f"flow stops at node {walk[-1]!r}")
            nxt = arc[1]
            if nxt == SINK:
                nodes = walk + [SINK]
                arcs = list(zip(nodes, nodes[1:]))
                lam = min(flow[e] for e in arcs)
                subtract(arcs, lam)
                paths.append((AugPath(tuple(nodes[1:-1])), lam))
                break
            if nxt in pos:
                loop = walk[pos[nxt]:] + [nxt]
                arcs = list(zip(loop, loop[1:]))
                lam = min(flow[e] for e in arcs)
                subtract(arcs, lam)
                cycles.append((tuple(arcs), lam))
                break
            pos[nxt] = len(walk)
            walk.append(nxt)
    for start in range(n_s):
        while first_positive(start) is not None:
            walk = [start]
            pos = {start: 0}
            while True:
                arc = first_positive(walk[-1])
                if arc is None or arc[1] == SINK:
                    raise FlowConservationError(f"unbalanced flow at node {walk[-1]!r}")
                nxt = arc[1]
                if nxt in pos:
                    loop = walk[pos[nxt]:] + [nxt]
                    arcs = list(zip(loop, loop[1:]))
                    lam = min(flow[e] for e in arcs)
                    subtract(arcs, lam)
                    cycles.append((tuple(arcs), lam))
                    break
                pos[nxt] = len(walk)
                walk.append(nxt)
    return paths, cycles


def decompose_generic(point: Point, inst: Instance, tol: float = 1e-9) -> Decomposition:
    """Paths and cycles of the augmented network whose weighted sum is ``point``.

    Paths may be non-valid and cycles may appear; only conservation and the
    placement equalities are required of the input.
    """
    build_augmented(inst)
    bad = check_unit_flow(point, inst, 0, tol)
    if bad:
        raise FlowConservationError("; ".join(bad))
    paths, cycles = _peel(point, inst, 0)
    return Decomposition(inst, tuple(paths), tuple(cycles), 0)


def reconstruct(dec: Decomposition) -> Point:
    """Weighted sum of the incidence vectors of the paths and cycles."""
    inst, k = dec.instance, dec.vedge
    idx, arc_id = inst.index, inst.bidirected.arc_id
    a, b = inst.virtual.edges[k]
    values: list[Any] = [0] * idx.size
    for path, lam in dec.paths:
        for tail, head in path.arcs:
            if tail == SOURCE:
                values[idx.x(a, head)] += lam
            elif head == SINK:
                values[idx.x(b, tail)] += lam
            else:
                values[idx.y(k, arc_id[(tail, head)])] += lam
    for arcs, lam in dec.cycles:
        for arc in arcs:
            values[idx.y(k, arc_id[arc])] += lam
    return Point(idx, tuple(values))


@dataclass
class InvariantReport:
    failures: list[str]

    @property
    def ok(self) -> bool:
        return not self.failures

    def __bool__(self) -> bool:
        return self.ok


def check_residual_invariants(
    residual: Point, inst: Instance, path_weight: Any = 0, tol: float | None = None
) -> InvariantReport:
    """Nonnegativity, flow departure, flow continuity and mass balance.

    The balance check is ``sum x[a, .] == sum x[b, .] == 1 - path_weight``.
    Departure and continuity are checked in the orientation the path
    construction relies on (source endpoint ``a``).
    """
    if tol is None:
        tol = 0 if _is_exact(residual.values) else FLOAT_ZERO
    s = inst.substrate
    a, b = inst.virtual.edges[0]
    failures = []
    for j, val in enumerate(residual.values):
        if val < -tol:
            failures.append(f"negative residual {inst.var_name(j)} = {val}")
    for cut in generate_family(inst, FLOW_DEPARTURE, False):
        if cut.violation(residual.values) > tol:
            _, u, _ = cut.key
            failures.append(f"flow departure violated at {s.ids[u]}")
    for cut in generate_family(inst, FLOW_CONTINUITY, False):
        if cut.violation(residual.values) > tol:
            _, (u, v), _ = cut.key
            failures.append(f"flow continuity violated on arc ({s.ids[u]}, {s.ids[v]})")
    remaining = 1 - path_weight
    for end in (a, b):
        total = sum(residual.x(end, u) for u in range(s.n))
        if abs(total - remaining) > tol:
            failures.append(f"balance: placements of {inst.virtual.ids[end]} sum to {total}, expected {remaining}")
    return InvariantReport(failures)


def compute_flow_decomposition(
    point: Point, inst: Instance, *, check_invariants: bool = True
) -> Decomposition:
    """Decompose a point of a path substrate into valid paths only.

    Forward stage: for every position ``i`` build paths ``(src, u_i, ...,
    u_j, snk)`` with ``j > i`` while the forward arc out of ``u_i`` still
    carries flow, keeping at each candidate end node ``u_j`` enough sink
    flow for the backward paths that will need it.  Backward stage: from
    the far end, route the remaining source flow of ``u_i`` to sinks at
    ``u_j`` with ``j < i``.

    Raises :class:`ContractViolation` if a residual would go negative, an
    inner loop runs off the path, or (with ``check_invariants``) a residual
    breaks flow departure, flow continuity or the balance equations.
    """
    s = inst.substrate
    if not s.is_path():
        raise InstanceError("compute_flow_decomposition needs a path substrate")
    build_augmented(inst)
    bad = check_unit_flow(point, inst, 0, 1e-9)
    if bad:
        raise FlowConservationError("; ".join(bad))

    idx, arc_id = inst.index, inst.bidirected.arc_id
    a, b = inst.virtual.edges[0]
    order = s.path_order()
    n = len(order)
    exact = _is_exact(point.values)
    zero = 0 if exact else FLOAT_ZERO
    res = list(point.values)
    if exact:
        res = [Fraction(v) for v in res]

    col_xu = [idx.x(a, u) for u in order]
    col_xv = [idx.x(b, u) for u in order]
    col_yf = [idx.y(0, arc_id[(order[i], order[i + 1])]) for i in range(n - 1)]
    col_yb = [idx.y(0, arc_id[(order[i + 1], order[i])]) for i in range(n - 1)]

    def yb(p):  # arc u_{p+1} -> u_p, zero off the path
        return res[col_yb[p]] if 0 <= p < n - 1 else 0

    paths: list[tuple[AugPath, Any]] = []
    weight = Fraction(0) if exact else 0.0

    def residual_point() -> Point:
        return Point(idx, tuple(res))

    names = [s.ids[u] for u in order]

    def path_failures() -> list[str]:
        # departure and continuity written out along the path, in terms of
        # the position arrays; agrees with check_residual_invariants
        out = []
        for p in range(n):
            leaving = (res[col_yf[p]] if p < n - 1 else 0) + (res[col_yb[p - 1]] if p > 0 else 0)
            if res[col_xu[p]] > leaving + zero:
                out.append(f"flow departure violated at {names[p]}")
        for p in range(n - 1):
            onward = res[col_yf[p + 1]] if p + 1 < n - 1 else 0
            if res[col_yf[p]] > onward + res[col_xv[p + 1]] + zero:
                out.append(f"flow continuity violated on arc ({names[p]}, {names[p + 1]})")
            onward = res[col_yb[p - 1]] if p > 0 else 0
            if res[col_yb[p]] > onward + res[col_xv[p]] + zero:
                out.append(f"flow continuity violated on arc ({names[p + 1]}, {names[p]})")
        remaining = 1 - weight
        for label, cols in ((inst.virtual.ids[a], col_xu), (inst.virtual.ids[b], col_xv)):
            total = sum(res[j] for j in cols)
            if abs(total - remaining) > zero:
                out.append(f"balance: placements of {label} sum to {total}, expected {remaining}")
        return out

    def check(stage: str) -> None:
        for j in col_xu + col_xv + col_yf + col_yb:
            if res[j] < -zero:
                raise ContractViolation(
                    f"{stage}: residual {inst.var_name(j)} = {res[j]} is negative", residual_point()
                )
        if check_invariants:
            failures = path_failures()
            if failures:
                raise ContractViolation(f"{stage}: " + "; ".join(failures), residual_point(), failures)

    def take(cols: list[int], route: list[int], lam) -> None:
        nonlocal weight
        for j in cols:
            res[j] -= lam
            if not exact and abs(res[j]) <= zero:
                res[j] = 0.0
        paths.append((AugPath(tuple(order[p] for p in route)), lam))
        weight += lam

    check("input")
    # forward-oriented paths
    for i in range(n - 1):
        j = i + 1
        while res[col_yf[i]] > zero:
            if j >= n:
                raise ContractViolation(
                    f"forward stage at {s.ids[order[i]]} ran past the end of the path", residual_point()
                )
            reserve = max(yb(j) - yb(j - 1), 0)
            delta = min(res[col_yf[i]], res[col_xv[j]] - reserve)
            if delta > zero:
                for l in range(i + 1, j):
                    if res[col_yf[i]] > res[col_yf[l]] + zero:
                        raise ContractViolation(
                            f"ordering: flow on the first arc out of {s.ids[order[i]]} exceeds "
                            f"the flow on ({s.ids[order[l]]}, {s.ids[order[l + 1]]})",
                            residual_point(),
                        )
                cols = [col_xu[i], col_xv[j]] + [col_yf[l] for l in range(i, j)]
                take(cols, list(range(i, j + 1)), delta)
                check(f"forward path {i + 1}->{j + 1}")
            j += 1
    # backward-oriented paths
    for i in range(n - 1, 0, -1):
        j = i - 1
        while res[col_xu[i]] > zero:
            if j < 0:
                raise ContractViolation(
                    f"backward stage at {s.ids[order[i]]} ran past the start of the path", residual_point()
                )
            delta = min(res[col_xu[i]], res[col_xv[j]])
            if delta > zero:
                cols = [col_xu[i], col_xv[j]] + [col_yb[l] for l in range(j, i)]
                take(cols, list(range(i, j - 1, -1)), delta)
                check(f"backward path {i + 1}->{j + 1}")
            j -= 1

    leftover = [inst.var_name(j) for j, v in enumerate(res) if abs(v) > zero]
    if leftover:
        raise ContractViolation("residual flow remains on " + ", ".join(leftover), residual_point())
    return Decomposition(inst, tuple(paths), (), 0)


def extract_mapping(point: Point, inst: Instance) -> Mapping:
    """Mapping encoded by an integral point; stray cycles in y are dropped."""
    n_s = inst.substrate.n
    node_map = []
    for vi in range(inst.virtual.n):
        hosts = [u for u in range(n_s) if point.x(vi, u) > 0.5]
        if len(hosts) != 1:
            raise ValueError(f"virtual node {inst.virtual.ids[vi]} is not placed integrally")
        node_map.append(hosts[0])
    routes = []
    for k in range(len(inst.virtual.edges)):
        rounded = Point(point.index, tuple(int(round(v)) for v in point.values))
        paths, _ = _peel(rounded, inst, k)
        if len(paths) != 1:
            raise ValueError(f"virtual edge {inst.virtual.edge_label(k)} is not routed on a single path")
        routes.append(paths[0][0].route)
    return Mapping(tuple(node_map), tuple(routes))


def _label(inst: Instance, node) -> Hashable:
    a, b = inst.virtual.edges[0]
    if node == SOURCE:
        return inst.virtual.ids[a]
    if node == SINK:
        return inst.virtual.ids[b]
    return inst.substrate.ids[node]


def _num(v):
    if isinstance(v, Fraction):
        return int(v) if v.denominator == 1 else str(v)
    return v


def decomposition_to_dict(dec: Decomposition) -> dict:
    inst = dec.instance
    ids = inst.substrate.ids
    return {
        "paths": [
            {"nodes": [_label(inst, n) for n in p.nodes], "lambda": _num(lam), "valid": p.is_valid}
            for p, lam in dec.paths
        ],
        "cycles": [
            {"arcs": [[ids[u], ids[v]] for u, v in arcs], "lambda": _num(lam)} for arcs, lam in dec.cycles
        ],
    }


def decomposition_from_dict(data: dict, inst: Instance) -> Decomposition:
    paths = []
    for p in data.get("paths", []):
        route = tuple(inst.snode(n) for n in p["nodes"][1:-1])
        paths.append((AugPath(route), as_fraction(p["lambda"])))
    cycles = []
    for c in data.get("cycles", []):
        arcs = tuple((inst.snode(u), inst.snode(v)) for u, v in c["arcs"])
        cycles.append((arcs, as_fraction(c["lambda"])))
    return Decomposition(inst, tuple(paths), tuple(cycles), 0)
