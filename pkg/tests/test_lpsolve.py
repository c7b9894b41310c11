import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import linprog

from conftest import active_rank, path_instance, random_small_instance
from vnepoly.formulation import Constraint, InfeasibleError, Model, Variable, build_model
from vnepoly.lpsolve import INFEASIBLE, OPTIMAL, UNBOUNDED, CutConfig, cutting_plane_root, solve_lp, solve_mip
from vnepoly.oracle import optimal_by_enumeration


def _model(c, rows, lb=0, ub=1):
    variables = tuple(Variable(f"z{j}", "x", 0, j, lb, ub) for j in range(len(c)))
    cons = tuple(Constraint({j: Fraction(a) for j, a in enumerate(r) if a}, s, Fraction(b)) for r, s, b in rows)
    return Model(variables, cons, {j: Fraction(v) for j, v in enumerate(c)})


def _scipy(model):
    n = model.n
    c = np.zeros(n)
    for j, v in model.objective.items():
        c[j] = float(v)
    A_ub, b_ub, A_eq, b_eq = [], [], [], []
    for con in model.constraints:
        row = np.zeros(n)
        for j, v in con.coeffs.items():
            row[j] = float(v)
        if con.sense == "=":
            A_eq.append(row), b_eq.append(float(con.rhs))
        elif con.sense == "<=":
            A_ub.append(row), b_ub.append(float(con.rhs))
        else:
            A_ub.append(-row), b_ub.append(-float(con.rhs))
    bounds = [(float(v.lb), float(v.ub) if v.ub is not None else None) for v in model.variables]
    return linprog(
        c,
        A_ub=np.array(A_ub) if A_ub else None, b_ub=b_ub or None,
        A_eq=np.array(A_eq) if A_eq else None, b_eq=b_eq or None,
        bounds=bounds, method="highs",
    )


def test_tiny_lp_by_hand():
    # min -x - y  s.t. x + 2y <= 2, 3x + y <= 3, 0 <= x, y <= 1  ->  x = 4/5, y = 3/5
    m = _model([-1, -1], [([1, 2], "<=", 2), ([3, 1], "<=", 3)])
    res = solve_lp(m)
    assert res.status == OPTIMAL
    assert res.point.values == (Fraction(4, 5), Fraction(3, 5))
    assert res.value == Fraction(-7, 5)


def test_infeasible_lp():
    m = _model([1, 1], [([1, 1], ">=", 3)])
    assert solve_lp(m).status == INFEASIBLE
    assert solve_lp(m, exact=False).status == INFEASIBLE


def test_unbounded_lp():
    variables = (Variable("z0", "x", 0, 0, 0, None, integer=False),)
    m = Model(variables, (Constraint({0: Fraction(1)}, ">=", Fraction(1)),), {0: Fraction(-1)})
    assert solve_lp(m).status == UNBOUNDED


def test_bound_override():
    m = _model([-1, -1], [([1, 1], "<=", 2)])
    res = solve_lp(m, lower=[0, 0], upper=[0, 1])
    assert res.point.values == (0, 1)
    assert solve_lp(m, lower=[1, 0], upper=[0, 1]).status == INFEASIBLE


def test_exact_method_agrees(five_node):
    model = build_model(five_node, "fd,fc")
    a = solve_lp(model)
    b = solve_lp(model, method="exact")
    assert a.value == b.value
    assert model.is_feasible(a.point.values)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**9))
def test_against_scipy_on_random_lps(seed):
    rng = random.Random(seed)
    n = rng.randint(2, 6)
    point = [Fraction(rng.randint(0, 4), 4) for _ in range(n)]
    rows = []
    for _ in range(rng.randint(1, 5)):
        a = [rng.randint(-3, 3) for _ in range(n)]
        act = sum(x * y for x, y in zip(a, point))
        sense = rng.choice(["<=", ">=", "="])
        slack = 0 if sense == "=" else rng.randint(0, 2)
        rows.append((a, sense, act + slack if sense == "<=" else act - slack))
    c = [rng.randint(-5, 5) for _ in range(n)]
    model = _model(c, rows)
    ours = solve_lp(model)
    ref = _scipy(model)
    assert ref.status == 0
    assert ours.status == OPTIMAL
    assert abs(float(ours.value) - ref.fun) < 1e-7
    assert model.is_feasible(ours.point.values)
    assert active_rank(model, ours.point) == n


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10**9))
def test_vne_lp_against_scipy(seed):
    inst = random_small_instance(random.Random(seed), 5, 3)
    try:
        model = build_model(inst, "fd,fc")
    except InfeasibleError:
        return
    ours = solve_lp(model)
    ref = _scipy(model)
    if ref.status == 2:
        assert ours.status == INFEASIBLE
        return
    assert ours.status == OPTIMAL
    assert abs(float(ours.value) - ref.fun) < 1e-7
    assert active_rank(model, ours.point) == model.n


def test_float_mode_returns_floats(path4):
    res = solve_lp(build_model(path4), exact=False)
    assert res.route == "float"
    assert all(isinstance(v, float) for v in res.point.values)


def test_mip_on_path_needs_no_branching_with_cuts():
    inst = path_instance(6, [5, 1, 9, 9, 1, 5], [1, 7, 1, 7, 1])
    plain = solve_mip(build_model(inst))
    cut = solve_mip(build_model(inst), CutConfig.of("fd,fc"))
    assert plain.value == cut.value == optimal_by_enumeration(inst)[0]
    assert cut.node_count == 0
    assert cut.root_bound == cut.value


def test_root_mode_matches_upfront():
    inst = path_instance(5, [3, 1, 4, 1, 5], [9, 2, 6, 5])
    upfront = solve_mip(build_model(inst), CutConfig.of("fd,fc"))
    root = solve_mip(build_model(inst), CutConfig.of("fd,fc", mode="root"))
    assert upfront.value == root.value


def test_cutting_plane_bound_is_monotone(five_node):
    model, lp = cutting_plane_root(build_model(five_node), "fd,fc", max_rounds=10)
    base = solve_lp(build_model(five_node))
    assert lp.value >= base.value


def test_infeasible_mip():
    inst = path_instance(3, node_caps=[1, 0, 0])
    res = solve_mip(build_model(inst))
    assert res.status == INFEASIBLE


def test_node_limit_reported():
    rng = random.Random(3)
    inst = random_small_instance(rng, 6, 3)
    res = solve_mip(build_model(inst), node_limit=0)
    assert res.status in (OPTIMAL, INFEASIBLE, "node_limit")
    assert res.node_count == 0


@pytest.mark.parametrize("seed", range(8))
def test_float_mip_matches_exact(seed):
    inst = random_small_instance(random.Random(seed), 5, 3)
    try:
        model = build_model(inst)
    except InfeasibleError:
        return
    a = solve_mip(model)
    b = solve_mip(model, exact=False)
    assert a.status == b.status
    if a.status == OPTIMAL:
        assert a.value == b.value
