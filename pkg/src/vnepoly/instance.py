"""Virtual and substrate networks, mappings, feasibility and cost.

Node ids are dense integers ``0..n-1`` internally, assigned in the order
the nodes are listed; the external ids are kept in ``ids`` for I/O.
Every undirected substrate edge is stored with its lower internal id
first, and its two arcs get ids ``2e`` (canonical direction) and
``2e + 1`` (reverse).
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from pathlib import Path
from typing import Any, Hashable, Iterable, Sequence

Number = Fraction | int | float


class InstanceError(ValueError):
    """Raised for malformed or invalid instance data."""


class InfeasibleMappingError(ValueError):
    def __init__(self, report: FeasibilityReport):
        super().__init__("infeasible mapping: " + "; ".join(report.violations))
        self.report = report


def as_fraction(value: Any) -> Fraction:
    """Parse an int, float, or ``"p/q"`` string into an exact Fraction.

    Floats go through their shortest repr, so ``0.4`` becomes ``2/5``.
    """
    if isinstance(value, bool):
        raise InstanceError(f"not a number: {value!r}")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(repr(value))
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except ValueError as exc:
            raise InstanceError(f"not a number: {value!r}") from exc
    raise InstanceError(f"not a number: {value!r}")


def _as_int(value: Any, what: str) -> int:
    q = as_fraction(value)
    if q.denominator != 1:
        raise InstanceError(f"{what} must be an integer, got {value!r}")
    return int(q)


def _is_connected(n: int, edges: Sequence[tuple[int, int]]) -> bool:
    if n <= 1:
        return True
    adj: list[list[int]] = [[] for _ in range(n)]
    for u, v in edges:
        adj[u].append(v)
        adj[v].append(u)
    seen = {0}
    todo = deque([0])
    while todo:
        u = todo.popleft()
        for v in adj[u]:
            if v not in seen:
                seen.add(v)
                todo.append(v)
    return len(seen) == n


def _check_graph(kind: str, n: int, edges: Sequence[tuple[int, int]]) -> None:
    seen = set()
    for u, v in edges:
        if not (0 <= u < n and 0 <= v < n):
            raise InstanceError(f"{kind} edge ({u}, {v}) references an unknown node")
        if u == v:
            raise InstanceError(f"{kind} network has a self-loop at node {u}")
        key = (min(u, v), max(u, v))
        if key in seen:
            raise InstanceError(f"{kind} network has a parallel edge {key}")
        seen.add(key)
    if not _is_connected(n, edges):
        raise InstanceError(f"{kind} network is not connected")


@dataclass(frozen=True)
class VirtualNetwork:
    ids: tuple[Hashable, ...]
    edges: tuple[tuple[int, int], ...]
    node_demand: tuple[int, ...]
    edge_demand: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.node_demand) != len(self.ids) or len(self.edge_demand) != len(self.edges):
            raise InstanceError("virtual demand arrays do not match the graph size")
        if not self.ids:
            raise InstanceError("virtual network has no nodes")
        if len(set(self.ids)) != len(self.ids):
            raise InstanceError("duplicate virtual node id")
        if any(d < 0 for d in self.node_demand + self.edge_demand):
            raise InstanceError("virtual demands must be nonnegative")
        _check_graph("virtual", len(self.ids), self.edges)

    @property
    def n(self) -> int:
        return len(self.ids)

    def edge_label(self, k: int) -> str:
        a, b = self.edges[k]
        return f"{self.ids[a]}-{self.ids[b]}"


@dataclass(frozen=True)
class SubstrateNetwork:
    ids: tuple[Hashable, ...]
    edges: tuple[tuple[int, int], ...]
    node_capacity: tuple[int, ...]
    edge_capacity: tuple[int, ...]
    node_cost: tuple[Fraction, ...]
    edge_cost: tuple[Fraction, ...]

    def __post_init__(self) -> None:
        n, m = len(self.ids), len(self.edges)
        if not (len(self.node_capacity) == len(self.node_cost) == n):
            raise InstanceError("substrate node arrays do not match the node count")
        if not (len(self.edge_capacity) == len(self.edge_cost) == m):
            raise InstanceError("substrate edge arrays do not match the edge count")
        if n == 0:
            raise InstanceError("substrate network has no nodes")
        if len(set(self.ids)) != n:
            raise InstanceError("duplicate substrate node id")
        if any(c < 0 for c in self.node_capacity + self.edge_capacity):
            raise InstanceError("substrate capacities must be nonnegative")
        if any(w < 0 for w in self.node_cost + self.edge_cost):
            raise InstanceError("substrate costs must be nonnegative")
        if any(u > v for u, v in self.edges):
            raise InstanceError("substrate edges must be stored as (low, high)")
        _check_graph("substrate", n, self.edges)

    @property
    def n(self) -> int:
        return len(self.ids)

    @cached_property
    def neighbors(self) -> tuple[tuple[int, ...], ...]:
        adj: list[list[int]] = [[] for _ in range(self.n)]
        for u, v in self.edges:
            adj[u].append(v)
            adj[v].append(u)
        return tuple(tuple(sorted(a)) for a in adj)

    @cached_property
    def edge_id(self) -> dict[tuple[int, int], int]:
        out = {}
        for e, (u, v) in enumerate(self.edges):
            out[(u, v)] = e
            out[(v, u)] = e
        return out

    def leaves(self) -> list[int]:
        return [u for u in range(self.n) if len(self.neighbors[u]) == 1]

    def is_path(self) -> bool:
        if self.n < 2 or len(self.edges) != self.n - 1:
            return False
        return all(len(a) <= 2 for a in self.neighbors)

    def path_order(self) -> list[int]:
        """Nodes of a path substrate, starting from its lowest-index leaf."""
        if not self.is_path():
            raise InstanceError("substrate is not a path")
        order = [min(self.leaves())]
        prev = -1
        while len(order) < self.n:
            cur = order[-1]
            nxt = [v for v in self.neighbors[cur] if v != prev]
            prev = cur
            order.append(nxt[0])
        return order


@dataclass(frozen=True)
class BidirectedSubstrate:
    arcs: tuple[tuple[int, int], ...]
    out_arcs: tuple[tuple[int, ...], ...]
    in_arcs: tuple[tuple[int, ...], ...]
    arc_id: dict[tuple[int, int], int]

    @staticmethod
    def edge_of(arc: int) -> int:
        return arc >> 1

    @staticmethod
    def reverse(arc: int) -> int:
        return arc ^ 1


def build_bidirected(substrate: SubstrateNetwork) -> BidirectedSubstrate:
    arcs: list[tuple[int, int]] = []
    for u, v in substrate.edges:
        arcs.append((u, v))
        arcs.append((v, u))
    out_arcs: list[list[int]] = [[] for _ in range(substrate.n)]
    in_arcs: list[list[int]] = [[] for _ in range(substrate.n)]
    for a, (u, v) in enumerate(arcs):
        out_arcs[u].append(a)
        in_arcs[v].append(a)
    return BidirectedSubstrate(
        arcs=tuple(arcs),
        out_arcs=tuple(map(tuple, out_arcs)),
        in_arcs=tuple(map(tuple, in_arcs)),
        arc_id={arc: a for a, arc in enumerate(arcs)},
    )


SOURCE = "src"
SINK = "snk"


@dataclass(frozen=True)
class AugmentedNetwork:
    """Bidirected substrate plus arcs ``(src, u)`` and ``(u, snk)`` for all u.

    Substrate nodes keep their internal ids; the virtual endpoints of the
    embedded edge are the string nodes ``SOURCE`` and ``SINK``.
    """

    n_s: int
    bidirected: BidirectedSubstrate
    source_label: Hashable
    sink_label: Hashable

    @property
    def arcs(self) -> list[tuple[Any, Any]]:
        return (
            list(self.bidirected.arcs)
            + [(SOURCE, u) for u in range(self.n_s)]
            + [(u, SINK) for u in range(self.n_s)]
        )


def build_augmented(inst: Instance) -> AugmentedNetwork:
    if len(inst.virtual.edges) != 1:
        raise InstanceError(
            f"augmented network needs exactly one virtual edge, got {len(inst.virtual.edges)}"
        )
    a, b = inst.virtual.edges[0]
    return AugmentedNetwork(
        n_s=inst.substrate.n,
        bidirected=inst.bidirected,
        source_label=inst.virtual.ids[a],
        sink_label=inst.virtual.ids[b],
    )


@dataclass(frozen=True)
class VarIndex:
    """Column layout shared by models and points.

    x-variables come first (``x[vnode, snode]`` at ``vnode * n_s + snode``),
    followed by y-variables in blocks of ``2 |E_s|`` arcs per virtual edge.
    """

    n_r: int
    n_s: int
    n_er: int
    n_arcs: int

    @property
    def n_x(self) -> int:
        return self.n_r * self.n_s

    @property
    def size(self) -> int:
        return self.n_x + self.n_er * self.n_arcs

    def x(self, vnode: int, snode: int) -> int:
        return vnode * self.n_s + snode

    def y(self, vedge: int, arc: int) -> int:
        return self.n_x + vedge * self.n_arcs + arc

    def describe(self, j: int) -> tuple[str, int, int]:
        if j < self.n_x:
            return ("x", *divmod(j, self.n_s))
        return ("y", *divmod(j - self.n_x, self.n_arcs))


@dataclass(frozen=True)
class Point:
    """Values for every model column, exact (Fraction/int) or float."""

    index: VarIndex | None
    values: tuple

    def __getitem__(self, j: int):
        return self.values[j]

    def __len__(self) -> int:
        return len(self.values)

    def x(self, vnode: int, snode: int):
        return self.values[self.index.x(vnode, snode)]

    def y(self, vedge: int, arc: int):
        return self.values[self.index.y(vedge, arc)]

    def is_integral(self, tol: float = 1e-6) -> bool:
        return all(abs(v - round(v)) <= tol for v in self.values)

    def as_float(self) -> Point:
        return Point(self.index, tuple(float(v) for v in self.values))

    def max_abs_diff(self, other: Point) -> float:
        return max((abs(float(a) - float(b)) for a, b in zip(self.values, other.values)), default=0.0)


@dataclass(frozen=True)
class Instance:
    virtual: VirtualNetwork
    substrate: SubstrateNetwork

    @cached_property
    def bidirected(self) -> BidirectedSubstrate:
        return build_bidirected(self.substrate)

    @cached_property
    def index(self) -> VarIndex:
        return VarIndex(
            n_r=self.virtual.n,
            n_s=self.substrate.n,
            n_er=len(self.virtual.edges),
            n_arcs=2 * len(self.substrate.edges),
        )

    def vnode(self, ext: Hashable) -> int:
        return _lookup(self.virtual.ids, ext, "virtual node")

    def snode(self, ext: Hashable) -> int:
        return _lookup(self.substrate.ids, ext, "substrate node")

    def vedge(self, ext: Any) -> int:
        """Virtual edge index from an index, a ``"a-b"`` label, or a pair."""
        labels = [self.virtual.edge_label(k) for k in range(len(self.virtual.edges))]
        if isinstance(ext, str) and ext in labels:
            return labels.index(ext)
        if isinstance(ext, (tuple, list)) and len(ext) == 2:
            a, b = self.vnode(ext[0]), self.vnode(ext[1])
            for k, (p, q) in enumerate(self.virtual.edges):
                if (p, q) == (a, b) or (p, q) == (b, a):
                    return k
        try:
            k = int(ext)
        except (TypeError, ValueError):
            k = -1
        if 0 <= k < len(labels):
            return k
        raise InstanceError(f"unknown virtual edge {ext!r}")

    def var_name(self, j: int) -> str:
        kind, a, b = self.index.describe(j)
        if kind == "x":
            return f"x_{_safe(self.virtual.ids[a])}_{_safe(self.substrate.ids[b])}"
        u, v = self.bidirected.arcs[b]
        return f"y_{a}_{_safe(self.substrate.ids[u])}_{_safe(self.substrate.ids[v])}"


def _lookup(ids: Sequence[Hashable], ext: Hashable, what: str) -> int:
    for i, node in enumerate(ids):
        if node == ext or str(node) == str(ext):
            return i
    raise InstanceError(f"unknown {what} {ext!r}")


def _safe(ext: Hashable) -> str:
    return "".join(ch if ch.isalnum() or ch in "_." else "_" for ch in str(ext))


def make_instance(
    virtual_nodes: Sequence[tuple[Hashable, int]],
    virtual_edges: Sequence[tuple[Hashable, Hashable, int]],
    substrate_nodes: Sequence[tuple[Hashable, int, Any]],
    substrate_edges: Sequence[tuple[Hashable, Hashable, int, Any]],
) -> Instance:
    """Build an instance from external ids.

    ``virtual_nodes`` holds ``(id, demand)``, ``virtual_edges`` holds
    ``(u, v, demand)``, ``substrate_nodes`` holds ``(id, capacity, cost)``
    and ``substrate_edges`` holds ``(u, v, capacity, cost)``.
    """
    vids = tuple(n[0] for n in virtual_nodes)
    vpos = {v: i for i, v in enumerate(vids)}
    sids = tuple(n[0] for n in substrate_nodes)
    spos = {s: i for i, s in enumerate(sids)}
    try:
        vedges = tuple((vpos[u], vpos[v]) for u, v, _ in virtual_edges)
        sedges = []
        for u, v, _, _ in substrate_edges:
            a, b = spos[u], spos[v]
            sedges.append((min(a, b), max(a, b)))
    except KeyError as exc:
        raise InstanceError(f"edge references unknown node {exc.args[0]!r}") from None
    virtual = VirtualNetwork(
        ids=vids,
        edges=vedges,
        node_demand=tuple(_as_int(n[1], "virtual node demand") for n in virtual_nodes),
        edge_demand=tuple(_as_int(e[2], "virtual edge demand") for e in virtual_edges),
    )
    substrate = SubstrateNetwork(
        ids=sids,
        edges=tuple(sedges),
        node_capacity=tuple(_as_int(n[1], "node capacity") for n in substrate_nodes),
        edge_capacity=tuple(_as_int(e[2], "edge capacity") for e in substrate_edges),
        node_cost=tuple(as_fraction(n[2]) for n in substrate_nodes),
        edge_cost=tuple(as_fraction(e[3]) for e in substrate_edges),
    )
    return Instance(virtual, substrate)


def instance_from_dict(data: dict) -> Instance:
    try:
        v, s = data["virtual"], data["substrate"]
        return make_instance(
            [(n["id"], n.get("demand", 1)) for n in v["nodes"]],
            [(e["u"], e["v"], e.get("demand", 1)) for e in v["edges"]],
            [(n["id"], n["capacity"], n.get("cost", 0)) for n in s["nodes"]],
            [(e["u"], e["v"], e["capacity"], e.get("cost", 0)) for e in s["edges"]],
        )
    except (KeyError, TypeError) as exc:
        raise InstanceError(f"malformed instance JSON: missing {exc}") from None


def _json_number(q: Fraction) -> int | str:
    return int(q) if q.denominator == 1 else str(q)


def instance_to_dict(inst: Instance) -> dict:
    v, s = inst.virtual, inst.substrate
    return {
        "virtual": {
            "nodes": [{"id": v.ids[i], "demand": v.node_demand[i]} for i in range(v.n)],
            "edges": [
                {"u": v.ids[a], "v": v.ids[b], "demand": v.edge_demand[k]}
                for k, (a, b) in enumerate(v.edges)
            ],
        },
        "substrate": {
            "nodes": [
                {"id": s.ids[i], "capacity": s.node_capacity[i], "cost": _json_number(s.node_cost[i])}
                for i in range(s.n)
            ],
            "edges": [
                {
                    "u": s.ids[a],
                    "v": s.ids[b],
                    "capacity": s.edge_capacity[e],
                    "cost": _json_number(s.edge_cost[e]),
                }
                for e, (a, b) in enumerate(s.edges)
            ],
        },
    }


def load_instance(path: str | Path) -> Instance:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise InstanceError(f"{path}: invalid JSON ({exc})") from None
    return instance_from_dict(data)


def dump_instance(inst: Instance, path: str | Path) -> None:
    Path(path).write_text(json.dumps(instance_to_dict(inst), indent=2) + "\n")


@dataclass(frozen=True)
class Mapping:
    """Injective node placement plus one substrate node sequence per virtual edge.

    ``routes[k]`` lists the substrate nodes visited by virtual edge ``k``;
    either orientation is accepted, arcs are read from the placement of the
    edge's first endpoint.
    """

    node_map: tuple[int, ...]
    routes: tuple[tuple[int, ...], ...]

    def oriented_route(self, inst: Instance, k: int) -> tuple[int, ...]:
        a, _ = inst.virtual.edges[k]
        route = self.routes[k]
        if route and route[0] != self.node_map[a]:
            route = tuple(reversed(route))
        return route

    def arcs(self, inst: Instance, k: int) -> list[tuple[int, int]]:
        route = self.oriented_route(inst, k)
        return list(zip(route, route[1:]))


@dataclass
class FeasibilityReport:
    violations: list[str]

    @property
    def feasible(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.feasible


def is_feasible(m: Mapping, inst: Instance) -> FeasibilityReport:
    v, s = inst.virtual, inst.substrate
    out: list[str] = []
    if len(m.node_map) != v.n or len(m.routes) != len(v.edges):
        return FeasibilityReport(["mapping does not match the virtual network size"])
    if any(not 0 <= u < s.n for u in m.node_map):
        return FeasibilityReport(["placement on an unknown substrate node"])
    hosted: dict[int, list[int]] = {}
    for vi, u in enumerate(m.node_map):
        hosted.setdefault(u, []).append(vi)
    for u, vs in hosted.items():
        if len(vs) > 1:
            names = ", ".join(str(v.ids[i]) for i in vs)
            out.append(f"injectivity: virtual nodes {names} share substrate node {s.ids[u]}")
        load = sum(v.node_demand[i] for i in vs)
        if load > s.node_capacity[u]:
            out.append(f"node capacity: load {load} > {s.node_capacity[u]} on substrate node {s.ids[u]}")
    usage = [0] * len(s.edges)
    for k, (a, b) in enumerate(v.edges):
        route = m.routes[k]
        label = v.edge_label(k)
        ends = {m.node_map[a], m.node_map[b]}
        if len(route) < 2 or {route[0], route[-1]} != ends:
            out.append(f"path endpoints: route of virtual edge {label} does not join its placements")
            continue
        if len(set(route)) != len(route):
            out.append(f"simple path: route of virtual edge {label} repeats a node")
            continue
        for p, q in zip(route, route[1:]):
            e = s.edge_id.get((p, q))
            if e is None:
                out.append(f"path: ({s.ids[p]}, {s.ids[q]}) on virtual edge {label} is not a substrate edge")
                break
            usage[e] += v.edge_demand[k]
    for e, load in enumerate(usage):
        if load > s.edge_capacity[e]:
            p, q = s.edges[e]
            out.append(f"edge capacity: load {load} > {s.edge_capacity[e]} on substrate edge ({s.ids[p]}, {s.ids[q]})")
    return FeasibilityReport(out)


def mapping_cost(m: Mapping, inst: Instance) -> Fraction:
    report = is_feasible(m, inst)
    if not report:
        raise InfeasibleMappingError(report)
    v, s = inst.virtual, inst.substrate
    cost = sum((v.node_demand[i] * s.node_cost[u] for i, u in enumerate(m.node_map)), Fraction(0))
    for k in range(len(v.edges)):
        for p, q in m.arcs(inst, k):
            cost += v.edge_demand[k] * s.edge_cost[s.edge_id[(p, q)]]
    return cost


def incidence_vector(m: Mapping, inst: Instance) -> Point:
    idx = inst.index
    values = [0] * idx.size
    for vi, u in enumerate(m.node_map):
        values[idx.x(vi, u)] = 1
    for k in range(len(inst.virtual.edges)):
        for arc in m.arcs(inst, k):
            values[idx.y(k, inst.bidirected.arc_id[arc])] = 1
    return Point(idx, tuple(values))


def mapping_from_ids(
    inst: Instance,
    placement: dict[Hashable, Hashable],
    routes: dict[Any, Iterable[Hashable]] | Sequence[Iterable[Hashable]],
) -> Mapping:
    node_map = [0] * inst.virtual.n
    for vid, sid in placement.items():
        node_map[inst.vnode(vid)] = inst.snode(sid)
    out: list[tuple[int, ...]] = [()] * len(inst.virtual.edges)
    items = routes.items() if isinstance(routes, dict) else enumerate(routes)
    for key, nodes in items:
        out[inst.vedge(key)] = tuple(inst.snode(n) for n in nodes)
    return Mapping(tuple(node_map), tuple(out))


def mapping_to_dict(m: Mapping, inst: Instance) -> dict:
    v, s = inst.virtual, inst.substrate
    return {
        "nodes": {str(v.ids[i]): s.ids[u] for i, u in enumerate(m.node_map)},
        "edges": [
            {
                "u": v.ids[a],
                "v": v.ids[b],
                "route": [s.ids[u] for u in m.oriented_route(inst, k)],
            }
            for k, (a, b) in enumerate(v.edges)
        ],
    }
