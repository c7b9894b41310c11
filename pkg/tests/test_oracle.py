import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from conftest import path_instance, random_path_instance
from vnepoly.formulation import Constraint, InfeasibleError, build_model, generate_family
from vnepoly.instance import make_instance
from vnepoly.lpsolve import solve_mip
from vnepoly.oracle import (
    SizeError,
    enumerate_mappings,
    integrality_report_to_dict,
    optimal_by_enumeration,
    simple_paths,
    verify_validity_by_enumeration,
    verify_vertex_integrality,
)


def _two_node(w1=1, w2=1, we=1):
    return make_instance(
        [("a", 1), ("b", 1)], [("a", "b", 1)], [("u1", 1, w1), ("u2", 1, w2)], [("u1", "u2", 1, we)]
    )


def test_two_node_counts_and_cost():
    assert enumerate_mappings(_two_node()).mapping_count == 2
    cost, _ = optimal_by_enumeration(_two_node(1, 2, 1))
    assert cost == 4
    assert optimal_by_enumeration(_two_node(0, 0, 0))[0] == 0


def test_path4_has_twelve_mappings(path4):
    assert enumerate_mappings(path4).mapping_count == 12


def test_five_node_count_matches_solver(five_node):
    rep = enumerate_mappings(five_node, keep_all=False)
    assert rep.mapping_count > 0
    assert solve_mip(build_model(five_node), exact=False).value == rep.optimal_cost


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 7), st.integers(0, 10**9))
def test_path_completeness(n, seed):
    rng = random.Random(seed)
    caps = [rng.randint(0, 1) for _ in range(n)]
    ecaps = [rng.randint(0, 1) for _ in range(n - 1)]
    inst = path_instance(n, node_caps=caps, edge_caps=ecaps)
    expected = 0
    for p in range(n):
        for q in range(n):
            if p != q and caps[p] and caps[q] and all(ecaps[min(p, q):max(p, q)]):
                expected += 1
    assert enumerate_mappings(inst).mapping_count == expected


def test_infeasible_reported():
    inst = path_instance(3, node_caps=[1, 0, 0])
    with pytest.raises(InfeasibleError):
        optimal_by_enumeration(inst)


def test_size_refusal():
    n = 14
    inst = make_instance(
        [(f"v{i}", 1) for i in range(6)], [(f"v{i}", f"v{i + 1}", 1) for i in range(5)],
        [(f"u{i}", 1, 1) for i in range(n)], [(f"u{i}", f"u{i + 1}", 1, 1) for i in range(n - 1)],
    )
    with pytest.raises(SizeError):
        enumerate_mappings(inst)


def test_simple_paths_in_cycle():
    inst = make_instance(
        [("a", 1), ("b", 1)], [("a", "b", 1)],
        [(f"u{i}", 1, 1) for i in range(5)],
        [(f"u{i}", f"u{(i + 1) % 5}", 1, 1) for i in range(5)],
    )
    assert len(simple_paths(inst, 0, 2)) == 2


def test_empty_cut_list_is_valid(path4):
    assert verify_validity_by_enumeration(path4, [])


def test_sign_flip_is_caught(path4):
    # interior node u2: the flipped row forbids routing through it
    cut = next(c for c in generate_family(path4, "fd") if c.key == (0, 1, 0))
    flipped = Constraint({j: -c for j, c in cut.coeffs.items()}, "<=", cut.rhs, "flipped")
    rep = verify_validity_by_enumeration(path4, [flipped])
    assert not rep
    name, mapping, viol = rep.witness
    assert name == "flipped" and viol > 0


def test_departure_alone_has_fractional_vertex(path4, cycle_point):
    support = {j for j, v in enumerate(cycle_point.values) if v != 0}
    obj = {j: Fraction(0 if j in support else 1) for j in range(path4.index.size)}
    rep = verify_vertex_integrality(path4, ["fd"], 0, 0, objectives=[obj])
    assert rep.trials == 1 and rep.integral_count == 0
    _, witness = rep.fractional_witnesses[0]
    model = build_model(path4, "fd")
    assert model.is_feasible(witness.values, 1e-9)
    assert any(1e-6 <= v <= 1 - 1e-6 for v in witness.values)
    assert sum(obj[j] * v for j, v in enumerate(witness.values)) == 0
    assert integrality_report_to_dict(rep, path4)["fractional_witnesses"]


def test_integrality_on_path(path4):
    rep = verify_vertex_integrality(path4, ["fd", "fc"], 30, 1)
    assert rep.all_integral and rep.integral_count == 30


def test_integrality_report_bookkeeping():
    inst = random_path_instance(5, random.Random(4))
    rep = verify_vertex_integrality(inst, [], 40, 9)
    assert rep.integral_count + len(rep.fractional_witnesses) == rep.trials == 40
    model = build_model(inst)
    for _, pt in rep.fractional_witnesses:
        assert model.is_feasible(pt.values, 1e-9)
        assert any(1e-6 <= v <= 1 - 1e-6 for v in pt.values)
