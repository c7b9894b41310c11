import json

from conftest import DATA, path_instance
from vnepoly.cli import main
from vnepoly.instance import dump_instance, make_instance
from vnepoly.lpformat import read_lp


def test_solve_with_oracle(capsys):
    assert main(["solve", str(DATA / "path4.json"), "--cuts", "fd,fc", "--oracle"]) == 0
    out = capsys.readouterr().out
    assert "instance,families,rho,time_s,nodes,v_lp,v_mip,status" in out
    assert "FF+FD+FC" in out
    assert "MATCH" in out and "MISMATCH" not in out


def test_solve_writes_mapping(tmp_path):
    out = tmp_path / "m.json"
    assert main(["solve", str(DATA / "five_node.json"), "--float", "--out", str(out)]) == 0
    data = json.loads(out.read_text())
    assert set(data["nodes"]) == {"v1", "v2", "v3", "v4"}


def test_solve_infeasible(tmp_path, capsys):
    f = tmp_path / "inf.json"
    dump_instance(path_instance(3, node_caps=[1, 0, 0]), f)
    assert main(["solve", str(f)]) == 2


def test_solve_parse_error(tmp_path):
    f = tmp_path / "bad.json"
    f.write_text("{ not json")
    assert main(["solve", str(f)]) == 1
    assert main(["solve", str(tmp_path / "missing.json")]) == 1


def test_decompose_cycle(capsys):
    assert main(["decompose", str(DATA / "path4.json"), str(DATA / "cycle_point.json")]) == 0
    out = capsys.readouterr().out
    assert out.count("(not valid)") == 2
    assert out.count("cycle") == 2
    assert "refused" in out and "fc_0_0_u1_u2" in out


def test_decompose_three_paths(tmp_path, capsys):
    report = tmp_path / "dec.json"
    assert main(["decompose", str(DATA / "path4.json"), str(DATA / "three_paths_point.json"), "--out", str(report)]) == 0
    data = json.loads(report.read_text())
    lams = [p["lambda"] for p in data["path_construction"]["paths"]]
    assert lams == ["2/5", "3/10", "3/10"]


def test_decompose_conservation_error(tmp_path):
    f = tmp_path / "p.json"
    f.write_text(json.dumps({"x": {"a@u1": 1, "b@u2": 1}, "y": {}}))
    assert main(["decompose", str(DATA / "path4.json"), str(f)]) == 4


def test_export_lp(tmp_path):
    out = tmp_path / "m.lp"
    assert main(["export-lp", str(DATA / "path4.json"), "--cuts", "fd", "--out", str(out)]) == 0
    assert len(read_lp(out).constraints) == 4 + 2 + 4 + 3 + 8


def test_generate_is_reproducible(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        assert main(["generate", "--seed", "5", "--count", "3", "--rho", "0.5", "--out", str(d)]) == 0
    for name in ("inst_000.json", "inst_001.json", "inst_002.json"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_experiment_csv(tmp_path):
    out = tmp_path / "r.csv"
    args = ["experiment", "--n-virtual", "3", "--m-virtual", "2", "3", "--n-substrate", "5", "6",
            "--rho", "1.0", "--trials", "2", "--out", str(out)]
    assert main(args) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "instance,families,rho,time_s,nodes,v_lp,v_mip,status"
    assert len(lines) == 1 + 2 * 3 + 3


def test_verify(capsys):
    assert main(["verify", str(DATA / "path4.json"), "--trials", "10"]) == 0
    out = capsys.readouterr().out
    assert "feasible mappings: 12" in out and "integral vertices: 10/10" in out


def test_verify_size_refusal(tmp_path):
    n = 14
    inst = make_instance(
        [(f"v{i}", 1) for i in range(6)], [(f"v{i}", f"v{i + 1}", 1) for i in range(5)],
        [(f"u{i}", 1, 1) for i in range(n)], [(f"u{i}", f"u{i + 1}", 1, 1) for i in range(n - 1)],
    )
    f = tmp_path / "big.json"
    dump_instance(inst, f)
    assert main(["verify", str(f)]) == 3


def test_unknown_family_is_input_error(capsys):
    assert main(["solve", str(DATA / "path4.json"), "--cuts", "gomory"]) == 1
    assert "gomory" in capsys.readouterr().err
