"""Brute-force ground truth for small instances."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Sequence

import numpy as np

from vnepoly.formulation import Constraint, InfeasibleError, Model, build_model
from vnepoly.instance import Instance, Mapping, Point, incidence_vector, mapping_cost, mapping_to_dict
from vnepoly.lpsolve import OPTIMAL, solve_lp

MAX_PLACEMENTS = 10**6
MAX_MAPPINGS = 10**6
MAX_PATHS_PER_PAIR = 10**4
INTEGRALITY_TOL = 1e-6


class SizeError(ValueError):
    """The instance is too large to enumerate."""


@dataclass
class EnumerationReport:
    mapping_count: int
    optimal_cost: Fraction | None
    optimal_mappings: list[Mapping]
    costs: list[tuple[Mapping, Fraction]] = field(repr=False, default_factory=list)


def _check_size(inst: Instance) -> None:
    n_s, n_r = inst.substrate.n, inst.virtual.n
    if n_r > n_s:
        return
    placements = math.perm(n_s, n_r)
    if placements > MAX_PLACEMENTS:
        raise SizeError(f"{placements} injective placements exceed the limit of {MAX_PLACEMENTS}")


def simple_paths(inst: Instance, src: int, dst: int, demand: int = 0) -> list[tuple[int, ...]]:
    """Simple paths ``src -> dst`` over edges whose capacity is at least ``demand``."""
    s = inst.substrate
    out: list[tuple[int, ...]] = []
    stack = [src]
    seen = {src}

    def walk(u: int) -> None:
        if u == dst:
            out.append(tuple(stack))
            if len(out) > MAX_PATHS_PER_PAIR:
                raise SizeError(f"more than {MAX_PATHS_PER_PAIR} simple paths between two nodes")
            return
        for w in s.neighbors[u]:
            if w in seen or s.edge_capacity[s.edge_id[(u, w)]] < demand:
                continue
            seen.add(w)
            stack.append(w)
            walk(w)
            stack.pop()
            seen.discard(w)

    walk(src)
    return out


def iter_mappings(inst: Instance) -> Iterator[Mapping]:
    """Every feasible mapping: injective placements crossed with routings."""
    _check_size(inst)
    v, s = inst.virtual, inst.substrate
    hosts = [[u for u in range(s.n) if v.node_demand[vi] <= s.node_capacity[u]] for vi in range(v.n)]
    path_cache: dict[tuple[int, int, int], list[tuple[int, ...]]] = {}
    count = 0
    for placement in itertools.permutations(range(s.n), v.n):
        if any(u not in hosts[vi] for vi, u in enumerate(placement)):
            continue
        options = []
        for k, (a, b) in enumerate(v.edges):
            key = (placement[a], placement[b], v.edge_demand[k])
            if key not in path_cache:
                path_cache[key] = simple_paths(inst, *key)
            options.append(path_cache[key])
        usage = [0] * len(s.edges)
        chosen: list[tuple[int, ...]] = []

        def route(k: int) -> Iterator[Mapping]:
            if k == len(options):
                yield Mapping(tuple(placement), tuple(chosen))
                return
            d = v.edge_demand[k]
            for path in options[k]:
                edges = [s.edge_id[(p, q)] for p, q in zip(path, path[1:])]
                if any(usage[e] + d > s.edge_capacity[e] for e in edges):
                    continue
                for e in edges:
                    usage[e] += d
                chosen.append(path)
                yield from route(k + 1)
                chosen.pop()
                for e in edges:
                    usage[e] -= d

        for m in route(0):
            count += 1
            if count > MAX_MAPPINGS:
                raise SizeError(f"more than {MAX_MAPPINGS} feasible mappings")
            yield m


def enumerate_mappings(inst: Instance, keep_all: bool = True) -> EnumerationReport:
    best: Fraction | None = None
    winners: list[Mapping] = []
    costs: list[tuple[Mapping, Fraction]] = []
    count = 0
    for m in iter_mappings(inst):
        c = mapping_cost(m, inst)
        count += 1
        if keep_all:
            costs.append((m, c))
        if best is None or c < best:
            best, winners = c, [m]
        elif c == best:
            winners.append(m)
    return EnumerationReport(count, best, winners, costs)


def optimal_by_enumeration(inst: Instance) -> tuple[Fraction, Mapping]:
    rep = enumerate_mappings(inst, keep_all=False)
    if rep.mapping_count == 0:
        raise InfeasibleError("no feasible mapping exists")
    return rep.optimal_cost, rep.optimal_mappings[0]


@dataclass
class IntegralityReport:
    trials: int
    integral_count: int
    fractional_witnesses: list[tuple[dict[int, Fraction], Point]]

    @property
    def all_integral(self) -> bool:
        return self.integral_count == self.trials


def random_objective(n: int, rng: np.random.Generator, scale: int = 10**6) -> dict[int, Fraction]:
    """Coefficients uniform on ``[1, 2]`` on a grid of step ``1/scale``."""
    draws = rng.integers(scale, 2 * scale, size=n, endpoint=True)
    return {j: Fraction(int(d), scale) for j, d in enumerate(draws)}


def is_integral_point(point: Point, tol: float = INTEGRALITY_TOL) -> bool:
    return all(abs(float(v) - round(float(v))) <= tol for v in point.values)


def verify_vertex_integrality(
    inst: Instance,
    families: Iterable[str],
    trials: int,
    rng_seed: int,
    objectives: Sequence[dict[int, Fraction]] | None = None,
    *,
    symmetric: bool = True,
    exact: bool = True,
    model: Model | None = None,
) -> IntegralityReport:
    """Solve the LP for random (or given) objectives and test each vertex.

    When ``objectives`` is given it replaces the random draws and ``trials``
    is ignored.
    """
    if model is None:
        model = build_model(inst, families, symmetric=symmetric)
    if objectives is None:
        rng = np.random.default_rng(rng_seed)
        objectives = [random_objective(model.n, rng) for _ in range(trials)]
    integral = 0
    witnesses = []
    for obj in objectives:
        lp = solve_lp(model.with_objective(obj), exact=exact)
        if lp.status != OPTIMAL:
            raise RuntimeError(f"LP not solved to optimality: {lp.status}")
        if is_integral_point(lp.point):
            integral += 1
        else:
            witnesses.append((dict(obj), lp.point))
    return IntegralityReport(len(objectives), integral, witnesses)


@dataclass
class ValidityReport:
    valid: bool
    mappings_checked: int
    cuts_checked: int
    witness: tuple[str, Mapping, Fraction] | None = None

    def __bool__(self) -> bool:
        return self.valid


def verify_validity_by_enumeration(inst: Instance, cuts: Sequence[Constraint]) -> ValidityReport:
    """Check every cut at every feasible mapping's incidence vector."""
    count = 0
    for m in iter_mappings(inst):
        count += 1
        values = incidence_vector(m, inst).values
        for cut in cuts:
            viol = cut.violation(values)
            if viol > 0:
                return ValidityReport(False, count, len(cuts), (cut.name, m, viol))
    return ValidityReport(True, count, len(cuts))


def _num(q):
    q = Fraction(q)
    return int(q) if q.denominator == 1 else str(q)


def enumeration_report_to_dict(rep: EnumerationReport, inst: Instance) -> dict:
    return {
        "mapping_count": rep.mapping_count,
        "optimal_cost": None if rep.optimal_cost is None else _num(rep.optimal_cost),
        "optimal_mappings": [mapping_to_dict(m, inst) for m in rep.optimal_mappings],
    }


def integrality_report_to_dict(rep: IntegralityReport, inst: Instance) -> dict:
    return {
        "trials": rep.trials,
        "integral_count": rep.integral_count,
        "fractional_witnesses": [
            {
                "objective": {inst.var_name(j): _num(c) for j, c in obj.items()},
                "point": {inst.var_name(j): _num(v) for j, v in enumerate(p.values) if v != 0},
            }
            for obj, p in rep.fractional_witnesses
        ],
    }


def validity_report_to_dict(rep: ValidityReport, inst: Instance) -> dict:
    out = {"valid": rep.valid, "mappings_checked": rep.mappings_checked, "cuts_checked": rep.cuts_checked}
    if rep.witness is not None:
        name, m, viol = rep.witness
        out["witness"] = {"cut": name, "mapping": mapping_to_dict(m, inst), "violation": _num(viol)}
    return out
