"""Bounded-variable primal simplex returning basic (vertex) solutions.

The same tableau code runs on float64 arrays or on object arrays of
``Fraction``.  Exact solves first run the float simplex, then certify the
final basis in rational arithmetic: the basic solution and the duals are
recovered from their float values, and the row equations, bounds and
reduced-cost signs are all checked exactly.  If the certificate fails the
solve is continued, or restarted, with exact pivots.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from vnepoly.formulation import Model
from vnepoly.instance import Point

FLOAT_TOL = 1e-9
PIVOT_TOL = 1e-9
BLAND_AFTER = 1000
MAX_DENOMINATOR = 10**6

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"
ITERATION_LIMIT = "iteration_limit"


@dataclass(frozen=True)
class Basis:
    """Final basis in standard-form column ids.

    Columns ``0..n-1`` are the model variables, then one slack per
    inequality row, then the phase-one artificials.
    """

    basic: tuple[int, ...]
    at_upper: tuple[int, ...]
    n_structural: int


@dataclass(frozen=True)
class LpResult:
    status: str
    point: Point | None
    value: Fraction | float | None
    basis: Basis | None
    exact: bool
    iterations: int = 0
    route: str = ""


class _StandardForm:
    """``A x = b`` with ``lo <= x <= hi`` plus an initial slack/artificial basis."""

    def __init__(self, model: Model, lower: Sequence, upper: Sequence):
        n, m = model.n, len(model.constraints)
        self.n, self.m = n, m
        lo = [Fraction(v) for v in lower]
        hi = [v if v == math.inf else Fraction(v) for v in upper]
        cols: list[list[tuple[int, Fraction]]] = [[] for _ in range(n)]
        rows: list[list[tuple[int, Fraction]]] = []
        b: list[Fraction] = []
        for i, con in enumerate(model.constraints):
            row = [(j, Fraction(c)) for j, c in con.coeffs.items() if c != 0]
            for j, c in row:
                cols[j].append((i, c))
            rows.append(row)
            b.append(Fraction(con.rhs))
        # residual of each row with every structural at its lower bound
        resid = [b[i] - sum((c * lo[j] for j, c in rows[i]), Fraction(0)) for i in range(m)]
        init_basis = [0] * m
        sign = [1] * m
        for i, con in enumerate(model.constraints):
            if con.sense in ("<=", ">="):
                s = 1 if con.sense == "<=" else -1
                j = len(cols)
                cols.append([(i, Fraction(s))])
                rows[i].append((j, Fraction(s)))
                lo.append(Fraction(0))
                hi.append(math.inf)
                if resid[i] * s >= 0:
                    init_basis[i] = j
                    sign[i] = s
                    continue
            init_basis[i] = -1
        self.n_slack = len(cols) - n
        self.artificials: list[int] = []
        for i in range(m):
            if init_basis[i] == -1:
                s = 1 if resid[i] >= 0 else -1
                j = len(cols)
                cols.append([(i, Fraction(s))])
                rows[i].append((j, Fraction(s)))
                lo.append(Fraction(0))
                hi.append(math.inf)
                init_basis[i] = j
                sign[i] = s
                self.artificials.append(j)
        self.N = len(cols)
        self.cols, self.rows, self.b = cols, rows, b
        self.lo, self.hi = lo, hi
        self.init_basis, self.sign = init_basis, sign
        self.cost = [Fraction(0)] * self.N
        for j, c in model.objective.items():
            self.cost[j] = Fraction(c)
        self.phase1_cost = [Fraction(0)] * self.N
        for j in self.artificials:
            self.phase1_cost[j] = Fraction(1)

    def dense(self, exact: bool) -> np.ndarray:
        if exact:
            A = np.full((self.m, self.N), Fraction(0), dtype=object)
        else:
            A = np.zeros((self.m, self.N))
        for j, col in enumerate(self.cols):
            for i, c in col:
                A[i, j] = c if exact else float(c)
        return A

    def bounds(self, exact: bool, phase: int) -> tuple[np.ndarray, np.ndarray]:
        hi = list(self.hi)
        if phase == 2:
            for j in self.artificials:
                hi[j] = Fraction(0)
        if exact:
            return np.array(self.lo, dtype=object), np.array(hi, dtype=object)
        return np.array([float(v) for v in self.lo]), np.array([float(v) for v in hi])


class _Tableau:
    """Dense simplex tableau ``T = B^-1 A`` with bounded nonbasic columns."""

    def __init__(self, T, beta, basis, at_upper, lo, hi, exact: bool):
        self.T, self.beta = T, beta
        self.basis = np.array(basis, dtype=np.int64)
        self.exact = exact
        self.lo, self.hi = lo, hi
        self.at_upper = np.array(at_upper, dtype=bool)
        self.is_basic = np.zeros(T.shape[1], dtype=bool)
        self.is_basic[self.basis] = True
        self.tol = 0 if exact else FLOAT_TOL
        self.ptol = 0 if exact else PIVOT_TOL
        self.iterations = 0
        self.set_bounds(lo, hi)

    def set_bounds(self, lo, hi) -> None:
        self.lo, self.hi = lo, hi
        self.hi_finite = np.array([h != math.inf for h in hi], dtype=bool)
        self.movable = np.array([h != l for l, h in zip(lo, hi)], dtype=bool)

    def set_cost(self, cost) -> None:
        if self.exact:
            c = np.array(cost, dtype=object)
        else:
            c = np.array([float(v) for v in cost])
        self.c = c
        self.d = c - c[self.basis].dot(self.T)

    def nonbasic_values(self):
        return np.where(self.at_upper, self.hi, self.lo)

    def solution(self):
        x = self.nonbasic_values().copy()
        x[self.basis] = self.beta
        return x

    def run(self, max_iter: int) -> str:
        bland = False
        degenerate = 0
        tol, ptol = self.tol, self.ptol
        for _ in range(max_iter):
            score = np.where(self.at_upper, self.d, -self.d)
            elig = self.movable & ~self.is_basic
            improving = elig & (score > tol)
            if not improving.any():
                return OPTIMAL
            if bland:
                q = int(np.flatnonzero(improving)[0])
            else:
                masked = np.where(improving, score, 0)
                q = int(np.argmax(masked))
            s = -1 if self.at_upper[q] else 1
            sa = s * self.T[:, q]
            lb = self.lo[self.basis]
            ub = self.hi[self.basis]
            dec = np.flatnonzero(sa > ptol)
            inc = np.flatnonzero((sa < -ptol) & self.hi_finite[self.basis])
            cand_rows = np.concatenate([dec, inc])
            if len(cand_rows):
                ratios = np.concatenate(
                    [(self.beta[dec] - lb[dec]) / sa[dec], (ub[inc] - self.beta[inc]) / (-sa[inc])]
                )
                if not self.exact:
                    ratios = np.maximum(ratios, 0.0)
                theta_rows = ratios.min()
            else:
                theta_rows = math.inf
            theta_flip = self.hi[q] - self.lo[q]
            if theta_rows == math.inf and theta_flip == math.inf:
                return UNBOUNDED
            self.iterations += 1
            if theta_flip <= theta_rows:
                theta = theta_flip
                self.beta = self.beta - theta * sa
                self.at_upper[q] = not self.at_upper[q]
            else:
                theta = theta_rows
                ties = np.flatnonzero(ratios <= theta_rows + (0 if self.exact else 1e-12))
                if bland:
                    pick = min(ties, key=lambda t: self.basis[cand_rows[t]])
                else:
                    pick = max(ties, key=lambda t: abs(sa[cand_rows[t]]))
                r = int(cand_rows[pick])
                to_upper = pick >= len(dec)
                entering = self.lo[q] + theta if s == 1 else self.hi[q] - theta
                self.beta = self.beta - theta * sa
                self._pivot(r, q, entering, to_upper)
            if theta <= tol:
                degenerate += 1
                if degenerate >= BLAND_AFTER:
                    bland = True
            else:
                degenerate = 0
        return ITERATION_LIMIT

    def _pivot(self, r: int, q: int, entering_value, leaving_to_upper: bool) -> None:
        T = self.T
        leaving = int(self.basis[r])
        prow = T[r] / T[r, q]
        col = T[:, q].copy()
        col[r] = 0
        nz = np.flatnonzero(col != 0)
        if len(nz):
            T[nz] -= np.outer(col[nz], prow)
        T[r] = prow
        T[:, q] = 0
        T[r, q] = 1
        if not self.exact:
            T[np.abs(T) < 1e-13] = 0.0
        self.d = self.d - self.d[q] * prow
        self.d[q] = 0
        self.beta[r] = entering_value
        self.basis[r] = q
        self.is_basic[q] = True
        self.is_basic[leaving] = False
        self.at_upper[leaving] = leaving_to_upper
        self.at_upper[q] = False


def _initial_tableau(sf: _StandardForm, exact: bool) -> _Tableau:
    A = sf.dense(exact)
    sign = np.array(sf.sign, dtype=object if exact else float)
    T = A * sign[:, None]
    lo, hi = sf.bounds(exact, phase=1)
    if exact:
        b = np.array(sf.b, dtype=object)
        x0 = lo.copy()
    else:
        b = np.array([float(v) for v in sf.b])
        x0 = lo.copy()
    x0[sf.init_basis] = 0
    beta = (b - A.dot(x0)) * sign
    return _Tableau(T, beta, sf.init_basis, np.zeros(sf.N, dtype=bool), lo, hi, exact)


def _run_phases(sf: _StandardForm, tab: _Tableau, max_iter: int) -> str:
    if sf.artificials:
        tab.set_cost(sf.phase1_cost)
        status = tab.run(max_iter)
        if status != OPTIMAL:
            return status
        infeas = sum(tab.solution()[j] for j in sf.artificials)
        if infeas > (0 if tab.exact else 1e-7):
            return INFEASIBLE
    lo, hi = sf.bounds(tab.exact, phase=2)
    tab.set_bounds(lo, hi)
    tab.set_cost(sf.cost)
    return tab.run(max_iter)


def _rationalize(v: float) -> Fraction:
    return Fraction(v).limit_denominator(MAX_DENOMINATOR)


def _lcm_denominator(values: Sequence[Fraction]) -> int:
    out = 1
    for v in values:
        out = out * v.denominator // math.gcd(out, v.denominator)
    return out


def _certify(sf: _StandardForm, tab: _Tableau, phase: int) -> list[Fraction] | None:
    """Exact basic solution for the float tableau's basis, or None.

    Checks ``A x = b``, bounds, and dual feasibility of the reduced costs
    for the given phase's objective, all in rational arithmetic.
    """
    basis = [int(j) for j in tab.basis]
    hi = list(sf.hi)
    if phase == 2:
        for j in sf.artificials:
            hi[j] = Fraction(0)
    cost = sf.cost if phase == 2 else sf.phase1_cost
    x: list[Fraction] = [hi[j] if tab.at_upper[j] else sf.lo[j] for j in range(sf.N)]
    for r, j in enumerate(basis):
        x[j] = _rationalize(float(tab.beta[r]))
    for i in range(sf.m):
        if sum((c * x[j] for j, c in sf.rows[i]), Fraction(0)) != sf.b[i]:
            return None
    for j in range(sf.N):
        if x[j] < sf.lo[j] or x[j] > hi[j]:
            return None
        if x[j] == math.inf:
            return None
    # duals from B^T pi = c_B on an integer-scaled objective
    L = _lcm_denominator([cost[j] for j in basis])
    B = np.zeros((sf.m, sf.m))
    for r, j in enumerate(basis):
        for i, c in sf.cols[j]:
            B[i, r] = float(c)
    cb = np.array([float(cost[j] * L) for j in basis])
    try:
        pi_f = np.linalg.solve(B.T, cb)
    except np.linalg.LinAlgError:
        return None
    pi = [_rationalize(float(v)) / L for v in pi_f]
    basic = set(basis)
    for j in range(sf.N):
        red = cost[j] - sum((c * pi[i] for i, c in sf.cols[j]), Fraction(0))
        if j in basic:
            if red != 0:
                return None
        elif sf.lo[j] != hi[j]:
            if tab.at_upper[j] and red > 0:
                return None
            if not tab.at_upper[j] and red < 0:
                return None
    return x


def _exact_from_basis(sf: _StandardForm, float_tab: _Tableau) -> _Tableau | None:
    """Exact tableau for the float basis, if that basis is primal feasible."""
    tab = _initial_tableau(sf, exact=True)
    rhs = tab.beta.copy()
    target = [int(j) for j in float_tab.basis]
    target_set = set(target)
    for q in target:
        if tab.is_basic[q]:
            continue
        rows = [r for r in range(sf.m) if int(tab.basis[r]) not in target_set and tab.T[r, q] != 0]
        if not rows:
            return None
        r = max(rows, key=lambda t: abs(tab.T[t, q]))
        piv = tab.T[r, q]
        rhs[r] = rhs[r] / piv
        for i in range(sf.m):
            if i != r and tab.T[i, q] != 0:
                rhs[i] = rhs[i] - tab.T[i, q] * rhs[r]
        tab.d = np.zeros(sf.N, dtype=object)
        tab._pivot(r, q, rhs[r], False)
    lo, hi = sf.bounds(True, phase=2)
    tab.set_bounds(lo, hi)
    at_upper = np.array(float_tab.at_upper, dtype=bool)
    at_upper[tab.basis] = False
    tab.at_upper = at_upper
    xn = tab.nonbasic_values()
    xn[tab.basis] = 0
    tab.beta = rhs - tab.T.dot(xn)
    for r, j in enumerate(tab.basis):
        if tab.beta[r] < lo[j] or tab.beta[r] > hi[j]:
            return None
    return tab


def solve_lp(
    model: Model,
    *,
    exact: bool = True,
    lower: Sequence | None = None,
    upper: Sequence | None = None,
    method: str = "auto",
    max_iter: int | None = None,
) -> LpResult:
    """Minimize ``model.objective`` over the LP relaxation of ``model``.

    ``lower``/``upper`` override the variable bounds (used by branching).
    With ``exact=True`` the returned point and value are Fractions and the
    basis is certified optimal in rational arithmetic.  ``method="exact"``
    skips the float pass and pivots in rational arithmetic throughout.
    """
    lower = [v.lb for v in model.variables] if lower is None else list(lower)
    upper = [v.ub for v in model.variables] if upper is None else list(upper)
    upper = [math.inf if u is None else u for u in upper]
    if any(lo is None for lo in lower):
        raise ValueError("lower bounds must be finite")
    if any(lo > hi for lo, hi in zip(lower, upper)):
        return LpResult(INFEASIBLE, None, None, None, exact, 0, "bounds")
    sf = _StandardForm(model, lower, upper)
    max_iter = max_iter or 50 * (sf.m + sf.N) + 1000

    if not exact or method != "exact":
        tab = _initial_tableau(sf, exact=False)
        status = _run_phases(sf, tab, max_iter)
        if not exact:
            return _result(model, sf, tab, status, exact=False, route="float")
        if status in (OPTIMAL, INFEASIBLE):
            phase = 2 if status == OPTIMAL else 1
            x = _certify(sf, tab, phase)
            if x is not None:
                return _finish(model, sf, tab, status, x, route="certified")
            if status == OPTIMAL:
                warm = _exact_from_basis(sf, tab)
                if warm is not None:
                    warm.set_cost(sf.cost)
                    warm.iterations = tab.iterations
                    status = warm.run(max_iter)
                    if status == OPTIMAL:
                        return _result(model, sf, warm, status, exact=True, route="warm")
    tab = _initial_tableau(sf, exact=True)
    status = _run_phases(sf, tab, max_iter)
    return _result(model, sf, tab, status, exact=True, route="exact")


def _basis_of(sf: _StandardForm, tab: _Tableau) -> Basis:
    at_up = tuple(int(j) for j in np.flatnonzero(tab.at_upper & ~tab.is_basic))
    return Basis(tuple(int(j) for j in tab.basis), at_up, sf.n)


def _finish(model, sf, tab, status, x, route) -> LpResult:
    if status != OPTIMAL:
        return LpResult(status, None, None, _basis_of(sf, tab), True, tab.iterations, route)
    values = tuple(x[: sf.n])
    value = model.objective_value(values)
    return LpResult(status, Point(model.index, values), value, _basis_of(sf, tab), True, tab.iterations, route)


def _result(model, sf, tab, status, exact, route) -> LpResult:
    if status != OPTIMAL:
        return LpResult(status, None, None, _basis_of(sf, tab), exact, tab.iterations, route)
    x = tab.solution()
    if exact:
        values = tuple(Fraction(v) for v in x[: sf.n])
    else:
        values = tuple(float(v) for v in x[: sf.n])
    value = model.objective_value(values)
    return LpResult(status, Point(model.index, values), value, _basis_of(sf, tab), exact, tab.iterations, route)
