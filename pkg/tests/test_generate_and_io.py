import csv
import io
import math
from fractions import Fraction

import networkx as nx
import numpy as np
import pytest

from conftest import path_instance
from vnepoly.experiment import CSV_HEADER, ExperimentConfig, rows_to_csv, run_experiment
from vnepoly.formulation import build_model
from vnepoly.generate import GeneratorConfig, GeneratorError, generate_instance, generate_instances
from vnepoly.instance import dump_instance, instance_to_dict
from vnepoly.lpformat import LpParseError, format_number, parse_lp, write_lp
from vnepoly.lpsolve import solve_lp


def test_generator_is_deterministic():
    a = generate_instances(GeneratorConfig(), 4, 11)
    b = generate_instances(GeneratorConfig(), 4, 11)
    assert [instance_to_dict(i) for i in a] == [instance_to_dict(i) for i in b]
    c = generate_instances(GeneratorConfig(), 4, 12)
    assert [instance_to_dict(i) for i in a] != [instance_to_dict(i) for i in c]


@pytest.mark.parametrize("rho", [0.25, 0.5, 1.0])
def test_capacity_density(rho):
    for inst in generate_instances(GeneratorConfig(rho=rho), 5, 3):
        s = inst.substrate
        assert sum(s.node_capacity) == math.ceil(rho * s.n)
        assert set(s.node_capacity) <= {0, 1}


def test_full_density_all_capacity_one():
    for inst in generate_instances(GeneratorConfig(rho=1.0), 3, 5):
        assert all(c == 1 for c in inst.substrate.node_capacity)


def test_large_virtual_network_counts():
    cfg = GeneratorConfig(n_virtual=14, m_virtual=(22, 22), n_substrate=(20, 20))
    inst = generate_instance(cfg, np.random.default_rng(0))
    g = nx.Graph(list(inst.virtual.edges))
    assert inst.virtual.n == 14 and len(inst.virtual.edges) == 22
    assert nx.is_connected(g)


def test_ranges():
    for inst in generate_instances(GeneratorConfig(), 5, 8):
        m_r = len(inst.virtual.edges)
        assert all(1 <= c <= m_r for c in inst.substrate.edge_capacity)
        assert all(1 <= w <= 10 for w in inst.substrate.node_cost + inst.substrate.edge_cost)
        assert 10 <= inst.substrate.n <= 14


@pytest.mark.parametrize("kind", ["path", "cycle"])
def test_structured_substrates(kind):
    inst = generate_instances(GeneratorConfig(substrate=kind, n_substrate=(6, 6)), 1, 0)[0]
    assert len(inst.substrate.edges) == (5 if kind == "path" else 6)
    assert inst.substrate.is_path() == (kind == "path")


@pytest.mark.parametrize(
    "cfg",
    [GeneratorConfig(n_virtual=4, m_virtual=(2, 2)), GeneratorConfig(rho=0), GeneratorConfig(substrate="torus")],
)
def test_impossible_parameters(cfg):
    with pytest.raises(GeneratorError):
        cfg.validate()


# ------------------------------------------------------------------ LP files


def test_format_number():
    assert format_number(Fraction(3, 8)) == "0.375"
    assert format_number(Fraction(-5, 2)) == "-2.5"
    assert format_number(Fraction(12)) == "12"


def test_two_node_export_counts():
    inst = path_instance(2)
    text = write_lp(build_model(inst))
    for section in ("Minimize", "Subject To", "Bounds", "Binaries", "End"):
        assert section in text.splitlines()
    model = parse_lp(text)
    names = [v.name for v in model.variables]
    assert sum(n.startswith("x_") for n in names) == 4
    assert sum(n.startswith("y_") for n in names) == 2


def test_export_grows_by_family_size(path4):
    base = parse_lp(write_lp(build_model(path4)))
    more = parse_lp(write_lp(build_model(path4, "fd,fc")))
    assert len(more.constraints) - len(base.constraints) == 8 + 12


def test_export_is_deterministic(five_node):
    assert write_lp(build_model(five_node, "fd")) == write_lp(build_model(five_node, "fd"))


@pytest.mark.parametrize("seed", range(4))
def test_round_trip_optimum(seed):
    inst = generate_instances(GeneratorConfig(n_substrate=(5, 6)), 1, seed)[0]
    model = build_model(inst, "fd,fc")
    again = parse_lp(write_lp(model))
    assert solve_lp(again).value == solve_lp(model).value


def test_parse_handwritten_lp():
    text = """\\ a small test
Maximize
 obj: 2 x + 3 y
   - z
Subject To
 c1: x + y + z <= 4
 c2: x - y >= -2
 x + 3 z = 3
Bounds
 0 <= x <= 4
 y <= 3
 z = 1
End
"""
    model = parse_lp(text)
    assert [v.name for v in model.variables] == ["x", "y", "z"]
    res = solve_lp(model)
    # z = 1 forces x = 0, then x - y >= -2 caps y at 2: maximum 5, stored as min -5
    assert res.value == -5
    assert len(model.constraints) == 3


@pytest.mark.parametrize("text", ["x + y <= 1\n", "Minimize\n obj: x\nSubject To\n c: x <= 1 <= 2\nEnd\n"])
def test_parse_errors(text):
    with pytest.raises(LpParseError):
        parse_lp(text)


# ------------------------------------------------------------- experiments


def test_single_instance_single_row(tmp_path):
    f = tmp_path / "one.json"
    dump_instance(path_instance(4), f)
    rows = run_experiment(ExperimentConfig(files=(str(f),), family_sets=("FF",)))
    assert len(rows) == 1
    assert rows[0].v_mip == 3 and rows[0].status == "optimal"


def test_csv_schema_and_determinism():
    cfg = ExperimentConfig(generator=GeneratorConfig(n_virtual=3, m_virtual=(2, 3), n_substrate=(5, 6)),
                           rhos=(0.5, 1.0), instances=2)
    a = list(csv.reader(io.StringIO(rows_to_csv(run_experiment(cfg)))))
    b = list(csv.reader(io.StringIO(rows_to_csv(run_experiment(cfg)))))
    assert tuple(a[0]) == CSV_HEADER
    drop_time = lambda rows: [r[:3] + r[4:] for r in rows]
    assert drop_time(a) == drop_time(b)
    assert len(a) == 1 + 2 * 2 * 3 + 2 * 3
    for r in a[1:]:
        if r[6] and r[5]:
            assert float(r[5]) <= float(r[6]) + 1e-9


def test_path_batch_needs_no_branching():
    cfg = ExperimentConfig(
        generator=GeneratorConfig(n_virtual=2, m_virtual=(1, 1), substrate="path", n_substrate=(5, 8)),
        rhos=(1.0,), instances=5, family_sets=("FF+FD+FC",), exact=True,
    )
    rows = run_experiment(cfg)
    assert all(r.status == "optimal" and r.nodes == 0 for r in rows)
