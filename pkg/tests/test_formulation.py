from fractions import Fraction

import pytest
from hypothesis import given, settings

from conftest import path_instance, small_instances
from vnepoly.formulation import (
    FLOW_CONTINUITY,
    FLOW_DEPARTURE,
    LEAF_EQUALITY,
    InfeasibleError,
    build_flow_formulation,
    build_model,
    generate_family,
    parse_families,
    prefix_variables,
    separate,
)
from vnepoly.instance import incidence_vector, make_instance
from vnepoly.oracle import iter_mappings


def test_parse_families():
    assert parse_families("fd,fc") == (FLOW_DEPARTURE, FLOW_CONTINUITY)
    assert parse_families(["leaf", "fd", "leaf"]) == (LEAF_EQUALITY, FLOW_DEPARTURE)
    assert parse_families(None) == ()
    with pytest.raises(ValueError):
        parse_families("gomory")


def test_model_sizes(five_node):
    model = build_flow_formulation(five_node)
    assert model.n == 20 + 70
    # placement + conservation + one-to-one + capacity
    assert len(model.constraints) == 4 + 5 * 5 + 5 + 7


def test_family_sizes(path4):
    assert len(generate_family(path4, "fd")) == 2 * 4
    assert len(generate_family(path4, "fc")) == 2 * 6
    assert len(generate_family(path4, "leaf")) == 2 * 2
    assert len(generate_family(path4, "fd", symmetric=False)) == 4


def test_departure_row(path4):
    cut = next(c for c in generate_family(path4, "fd", symmetric=False) if c.key[1] == 1)
    idx, arc = path4.index, path4.bidirected.arc_id
    assert cut.sense == "<=" and cut.rhs == 0
    assert cut.coeffs == {
        idx.x(0, 1): 1,
        idx.y(0, arc[(1, 0)]): -1,
        idx.y(0, arc[(1, 2)]): -1,
    }


def test_continuity_row(path4):
    cut = next(c for c in generate_family(path4, "fc", symmetric=False) if c.key[1] == (0, 1))
    idx, arc = path4.index, path4.bidirected.arc_id
    assert cut.coeffs == {
        idx.y(0, arc[(0, 1)]): 1,
        idx.y(0, arc[(1, 2)]): -1,
        idx.x(1, 1): -1,
    }


def test_symmetric_orientation_swaps_endpoints(path4):
    cut = next(c for c in generate_family(path4, "leaf") if c.key == (0, 3, 1))
    idx, arc = path4.index, path4.bidirected.arc_id
    # leaf u4, orientation with b as the source: y(u4, u3) = x[b, u4] after the swap
    assert cut.coeffs == {idx.y(0, arc[(2, 3)]): 1, idx.x(1, 3): -1}


def test_prefix_fixes_columns():
    inst = path_instance(3, node_caps=[0, 1, 1], edge_caps=[1, 0])
    model = prefix_variables(build_flow_formulation(inst), inst)
    fixed = {v.name for v in model.variables if v.fixed}
    assert fixed == {"x_a_u1", "x_b_u1", "y_0_u2_u3", "y_0_u3_u2"}
    assert all(v.ub == 0 for v in model.variables if v.fixed)


def test_prefix_detects_hopeless_node():
    inst = make_instance(
        [("a", 2), ("b", 1)], [("a", "b", 1)],
        [("u1", 1, 1), ("u2", 1, 1)], [("u1", "u2", 1, 1)],
    )
    with pytest.raises(InfeasibleError) as err:
        build_model(inst)
    assert err.value.model is not None
    assert "a" in str(err.value)


def test_cycle_separation(path4, cycle_point):
    assert separate(path4, cycle_point, "fd") == []
    cuts = separate(path4, cycle_point, "fc", symmetric=False)
    assert [c.key[1] for c in cuts] == [(0, 1), (3, 2)]
    assert all(c.violation(cycle_point.values) == Fraction(1, 2) for c in cuts)


def test_separation_on_integral_point_is_empty(path4):
    for m in iter_mappings(path4):
        assert separate(path4, incidence_vector(m, path4), ("fd", "fc", "leaf")) == []


@settings(max_examples=25, deadline=None)
@given(small_instances(n_s_max=5, n_r_max=3))
def test_families_valid_at_every_mapping(inst):
    cuts = [c for f in ("fd", "fc", "leaf") for c in generate_family(inst, f)]
    for m in iter_mappings(inst):
        vals = incidence_vector(m, inst).values
        assert all(c.violation(vals) <= 0 for c in cuts)


def test_with_constraints_appends(path4):
    base = build_model(path4)
    more = build_model(path4, "fd,fc")
    assert len(more.constraints) == len(base.constraints) + 8 + 12
    assert more.family_counts()[FLOW_DEPARTURE] == 8
