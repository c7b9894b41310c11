"""Branch-and-bound over binary columns and a root cutting-plane loop."""

from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator

from vnepoly.formulation import Model, generate_family, parse_families, separate
from vnepoly.instance import Point
from vnepoly.lpsolve.simplex import INFEASIBLE, OPTIMAL, LpResult, solve_lp

INT_TOL = 1e-6
NODE_LIMIT = "node_limit"


@dataclass(frozen=True)
class CutConfig:
    """Which families to add, and how.

    ``mode="upfront"`` appends every member of each family before the root
    solve; ``mode="root"`` separates violated members at the root only.
    """

    families: tuple[str, ...] = ()
    mode: str = "upfront"
    max_rounds: int = 50
    tolerance: float = 1e-6
    symmetric: bool = True

    @classmethod
    def of(cls, families: str | Iterable[str] | None, **kw) -> CutConfig:
        return cls(parse_families(families), **kw)


@dataclass(frozen=True)
class MipResult:
    status: str
    incumbent: Point | None
    value: Fraction | float | None
    node_count: int
    root_bound: Fraction | float | None
    model: Model | None = field(default=None, repr=False)
    lp_solves: int = 0


def iter_cutting_plane(
    model: Model,
    families: Iterable[str],
    max_rounds: int = 50,
    *,
    tolerance: float = 1e-6,
    exact: bool = True,
    symmetric: bool = True,
) -> Iterator[tuple[Model, LpResult]]:
    """Yield ``(model, lp)`` after the initial solve and after each round."""
    families = parse_families(families)
    res = solve_lp(model, exact=exact)
    yield model, res
    if not families or model.instance is None:
        return
    for _ in range(max_rounds):
        if res.status != OPTIMAL:
            return
        cuts = separate(model.instance, res.point, families, tolerance, symmetric)
        if not cuts:
            return
        model = model.with_constraints(cuts)
        res = solve_lp(model, exact=exact)
        yield model, res


def cutting_plane_root(
    model: Model, families: Iterable[str], max_rounds: int = 50, **kw
) -> tuple[Model, LpResult]:
    last = None
    for last in iter_cutting_plane(model, families, max_rounds, **kw):
        pass
    return last


def _is_integral(v, exact: bool) -> bool:
    if exact:
        return Fraction(v).denominator == 1
    return abs(v - round(v)) <= INT_TOL


def _branch_column(model: Model, point: Point, exact: bool) -> int | None:
    """Most fractional column; x columns before y columns, then lowest index."""
    best: tuple | None = None
    for j, v in enumerate(point.values):
        if _is_integral(v, exact):
            continue
        kind = model.variables[j].kind
        frac = abs(float(v) - round(float(v)))
        key = (0 if kind == "x" else 1, -frac, j)
        if best is None or key < best:
            best = key
    return None if best is None else best[2]


def solve_mip(
    model: Model,
    cut_config: CutConfig | None = None,
    *,
    exact: bool = True,
    node_limit: int | None = None,
) -> MipResult:
    """Proven-optimal integral solution of ``model`` (all columns binary).

    Best-bound search, ties broken depth-first.  ``node_count`` counts the
    nodes solved below the root, so an integral root gives 0.
    """
    cfg = cut_config or CutConfig()
    if cfg.families and cfg.mode == "upfront" and model.instance is not None:
        extra = [c for f in cfg.families for c in generate_family(model.instance, f, cfg.symmetric)]
        model = model.with_constraints(extra)
        root = solve_lp(model, exact=exact)
        solves = 1
    elif cfg.families and cfg.mode == "root":
        solves = 0
        for model, root in iter_cutting_plane(
            model, cfg.families, cfg.max_rounds,
            tolerance=cfg.tolerance, exact=exact, symmetric=cfg.symmetric,
        ):
            solves += 1
    else:
        root = solve_lp(model, exact=exact)
        solves = 1

    if root.status != OPTIMAL:
        return MipResult(root.status, None, None, 0, None, model, solves)

    lower0 = [v.lb for v in model.variables]
    upper0 = [v.ub for v in model.variables]
    incumbent: Point | None = None
    best_value = None
    nodes = 0
    seq = itertools.count()
    heap = [(root.value, 0, next(seq), root, lower0, upper0)]

    def worse_than_incumbent(bound) -> bool:
        if best_value is None:
            return False
        if exact:
            return bound >= best_value
        return bound >= float(best_value) - 1e-9

    while heap:
        bound, negdepth, _, lp, lower, upper = heapq.heappop(heap)
        if worse_than_incumbent(bound):
            continue
        j = _branch_column(model, lp.point, exact)
        if j is None:
            rounded = tuple(int(round(v)) for v in lp.point.values)
            value = model.objective_value(rounded)
            if best_value is None or value < best_value:
                best_value, incumbent = value, Point(model.index, rounded)
            continue
        if node_limit is not None and nodes >= node_limit:
            return MipResult(NODE_LIMIT, incumbent, best_value, nodes, root.value, model, solves)
        for fix in (0, 1):
            lo, hi = list(lower), list(upper)
            lo[j] = hi[j] = fix
            child = solve_lp(model, exact=exact, lower=lo, upper=hi)
            nodes += 1
            solves += 1
            if child.status != OPTIMAL or worse_than_incumbent(child.value):
                continue
            heapq.heappush(heap, (child.value, negdepth - 1, next(seq), child, lo, hi))

    if incumbent is None:
        return MipResult(INFEASIBLE, None, None, nodes, root.value, model, solves)
    return MipResult(OPTIMAL, incumbent, best_value, nodes, root.value, model, solves)
