"""Command-line entry point: ``vnepoly <verb> ...``.

Exit codes: 0 success, 1 unreadable input, 2 infeasible instance,
3 instance too large for enumeration, 4 point violates flow conservation,
5 a ``verify`` check failed.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from vnepoly.experiment import CSV_HEADER, FAMILY_SETS, ExperimentConfig, ResultRow, rows_to_csv, run_experiment
from vnepoly.flowdecomp import (
    ContractViolation,
    FlowConservationError,
    compute_flow_decomposition,
    decompose_generic,
    decomposition_to_dict,
    extract_mapping,
)
from vnepoly.formulation import (
    FLOW_CONTINUITY,
    FLOW_DEPARTURE,
    LEAF_EQUALITY,
    InfeasibleError,
    build_model,
    generate_family,
    parse_families,
    separate,
)
from vnepoly.generate import GeneratorConfig, generate_instances
from vnepoly.instance import dump_instance, load_instance, mapping_to_dict
from vnepoly.lpformat import write_lp
from vnepoly.lpsolve import CutConfig, solve_mip
from vnepoly.lpsolve.simplex import OPTIMAL
from vnepoly.oracle import (
    SizeError,
    enumeration_report_to_dict,
    enumerate_mappings,
    integrality_report_to_dict,
    validity_report_to_dict,
    verify_validity_by_enumeration,
    verify_vertex_integrality,
)
from vnepoly.points import load_point

EXIT_OK, EXIT_PARSE, EXIT_INFEASIBLE, EXIT_SIZE, EXIT_CONSERVATION, EXIT_CHECK_FAILED = 0, 1, 2, 3, 4, 5


_SHORT = {FLOW_DEPARTURE: "FD", FLOW_CONTINUITY: "FC", LEAF_EQUALITY: "LEAF"}


def _fmt(v) -> str:
    if v is None:
        return "-"
    try:
        if v.denominator != 1:
            return f"{v} (~{float(v):.6g})"
    except AttributeError:
        return f"{v:.10g}" if isinstance(v, float) else str(v)
    return str(v)


def _emit(data: dict, out: str | None) -> None:
    text = json.dumps(data, indent=2, default=str)
    if out:
        Path(out).write_text(text + "\n")
    else:
        print(text)


def cmd_solve(args) -> int:
    inst = load_instance(args.instance)
    fams = parse_families(args.cuts)
    t0 = time.perf_counter()
    try:
        model = build_model(inst, ())
        res = solve_mip(model, CutConfig(fams, mode=args.mode), exact=not args.float, node_limit=args.node_limit)
    except InfeasibleError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    elapsed = time.perf_counter() - t0
    label = "+".join(["FF"] + [_SHORT[f] for f in fams])
    row = ResultRow(Path(args.instance).stem, label, None, elapsed, res.node_count, res.root_bound, res.value, res.status)
    print(",".join(CSV_HEADER))
    print(",".join(row.as_csv()))
    if res.status != OPTIMAL or res.incumbent is None:
        print(f"no feasible embedding ({res.status})", file=sys.stderr)
        return EXIT_INFEASIBLE if res.status != "node_limit" else EXIT_OK
    mapping = extract_mapping(res.incumbent, inst)
    print(f"value: {_fmt(res.value)}  root bound: {_fmt(res.root_bound)}  nodes: {res.node_count}")
    mdict = mapping_to_dict(mapping, inst)
    for vid, sid in mdict["nodes"].items():
        print(f"  {vid} -> {sid}")
    for e in mdict["edges"]:
        print(f"  {e['u']}-{e['v']}: {' > '.join(map(str, e['route']))}")
    if args.oracle:
        rep = enumerate_mappings(inst, keep_all=False)
        verdict = "MATCH" if rep.optimal_cost == res.value else "MISMATCH"
        print(f"oracle: {_fmt(rep.optimal_cost)}  solver: {_fmt(res.value)}  {verdict}")
    if args.out:
        Path(args.out).write_text(json.dumps(mdict, indent=2) + "\n")
    return EXIT_OK


def cmd_generate(args) -> int:
    cfg = GeneratorConfig(
        n_virtual=args.n_virtual,
        m_virtual=(args.m_virtual[0], args.m_virtual[-1]),
        substrate=args.substrate,
        n_substrate=(args.n_substrate[0], args.n_substrate[-1]),
        rho=args.rho,
    )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for i, inst in enumerate(generate_instances(cfg, args.count, args.seed)):
        path = out / f"inst_{i:03d}.json"
        dump_instance(inst, path)
        print(path)
    return EXIT_OK


def cmd_experiment(args) -> int:
    gen = GeneratorConfig(
        n_virtual=args.n_virtual,
        m_virtual=(args.m_virtual[0], args.m_virtual[-1]),
        substrate=args.substrate,
        n_substrate=(args.n_substrate[0], args.n_substrate[-1]),
    )
    cfg = ExperimentConfig(
        generator=gen,
        rhos=tuple(args.rho),
        instances=args.trials,
        family_sets=tuple(args.sets),
        seed=args.seed,
        exact=args.exact,
        node_limit=args.node_limit,
        lp_only=args.lp_only,
        workers=args.workers,
        files=tuple(args.files or ()),
    )
    text = rows_to_csv(run_experiment(cfg))
    if args.out:
        Path(args.out).write_text(text)
        print(f"wrote {args.out}")
    else:
        print(text, end="")
    return EXIT_OK


def cmd_export_lp(args) -> int:
    inst = load_instance(args.instance)
    try:
        model = build_model(inst, args.cuts)
    except InfeasibleError as exc:
        model = exc.model.with_constraints(
            c for f in parse_families(args.cuts) for c in generate_family(inst, f)
        )
    text = write_lp(model)
    if args.out:
        Path(args.out).write_text(text)
        print(f"wrote {args.out}: {model.n} columns, {len(model.constraints)} rows")
    else:
        print(text, end="")
    return EXIT_OK


def cmd_decompose(args) -> int:
    inst = load_instance(args.instance)
    point = load_point(args.point, inst, exact=not args.float)
    try:
        generic = decompose_generic(point, inst)
    except FlowConservationError as exc:
        print(f"flow conservation violated: {exc}", file=sys.stderr)
        return EXIT_CONSERVATION
    report: dict = {"generic": decomposition_to_dict(generic)}
    _print_decomposition("generic peeling", report["generic"])
    if inst.substrate.is_path():
        cuts = separate(inst, point, (FLOW_DEPARTURE, FLOW_CONTINUITY), symmetric=False)
        if cuts:
            names = [f"{c.name} (violation {_fmt(c.violation(point.values))})" for c in cuts]
            report["path_construction"] = {"refused": names}
            print("path construction refused, violated: " + ", ".join(names))
        else:
            try:
                dec = compute_flow_decomposition(point, inst)
            except ContractViolation as exc:
                report["path_construction"] = {"error": str(exc)}
                print(f"path construction failed: {exc}")
            else:
                report["path_construction"] = decomposition_to_dict(dec)
                _print_decomposition("path construction", report["path_construction"])
    else:
        print("path construction skipped: substrate is not a path")
    if args.out:
        _emit(report, args.out)
    return EXIT_OK


def _print_decomposition(title: str, d: dict) -> None:
    print(f"{title}:")
    for p in d["paths"]:
        tag = "valid" if p["valid"] else "not valid"
        print(f"  path {' > '.join(map(str, p['nodes']))}  lambda={p['lambda']}  ({tag})")
    for c in d["cycles"]:
        nodes = [a for a, _ in c["arcs"]] + [c["arcs"][0][0]]
        print(f"  cycle {' > '.join(map(str, nodes))}  lambda={c['lambda']}")


def cmd_verify(args) -> int:
    inst = load_instance(args.instance)
    fams = parse_families(args.cuts)
    report: dict = {}
    enum = enumerate_mappings(inst, keep_all=False)
    report["enumeration"] = enumeration_report_to_dict(enum, inst)
    cuts = [c for f in fams for c in generate_family(inst, f)]
    validity = verify_validity_by_enumeration(inst, cuts)
    report["validity"] = validity_report_to_dict(validity, inst)
    print(f"feasible mappings: {enum.mapping_count}  optimum: {_fmt(enum.optimal_cost)}")
    print(f"cuts valid at every mapping: {validity.valid} ({len(cuts)} cuts)")
    try:
        res = solve_mip(build_model(inst), CutConfig(fams), exact=True)
        mip_value = res.value
    except InfeasibleError:
        mip_value = None
    agree = mip_value == enum.optimal_cost
    report["mip_value"] = None if mip_value is None else str(mip_value)
    report["oracle_agrees"] = agree
    print(f"solver optimum: {_fmt(mip_value)}  {'MATCH' if agree else 'MISMATCH'}")
    if len(inst.virtual.edges) == 1 and enum.mapping_count:
        integ = verify_vertex_integrality(inst, fams, args.trials, args.seed)
        report["integrality"] = integrality_report_to_dict(integ, inst)
        print(f"integral vertices: {integ.integral_count}/{integ.trials}")
    if args.out:
        _emit(report, args.out)
    if not enum.mapping_count:
        return EXIT_INFEASIBLE
    ok = validity.valid and agree and not report.get("integrality", {}).get("fractional_witnesses")
    return EXIT_OK if ok else EXIT_CHECK_FAILED


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="vnepoly", description="Exact VNE models, cuts and flow decompositions.")
    sub = p.add_subparsers(dest="verb", required=True)

    s = sub.add_parser("solve", help="solve an instance to proven optimality")
    s.add_argument("instance")
    s.add_argument("--cuts", default="", help="comma list of fd, fc, leaf")
    s.add_argument("--mode", choices=("upfront", "root"), default="upfront")
    arith = s.add_mutually_exclusive_group()
    arith.add_argument("--exact", dest="float", action="store_false")
    arith.add_argument("--float", dest="float", action="store_true")
    s.add_argument("--node-limit", type=int, default=None)
    s.add_argument("--oracle", action="store_true", help="also enumerate all mappings and compare")
    s.add_argument("--out", help="write the optimal mapping as JSON")
    s.set_defaults(func=cmd_solve, float=False)

    def generator_flags(q):
        q.add_argument("--n-virtual", type=int, default=4)
        q.add_argument("--m-virtual", type=int, nargs="+", default=[4, 5], metavar="M")
        q.add_argument("--substrate", choices=("path", "cycle", "random"), default="random")
        q.add_argument("--n-substrate", type=int, nargs="+", default=[10, 14], metavar="N")
        q.add_argument("--seed", type=int, default=2024)

    g = sub.add_parser("generate", help="write seeded random instances")
    generator_flags(g)
    g.add_argument("--rho", type=float, default=1.0)
    g.add_argument("--count", type=int, default=20)
    g.add_argument("--out", required=True, help="output directory")
    g.set_defaults(func=cmd_generate)

    e = sub.add_parser("experiment", help="run the instance x rho x cut-family matrix")
    generator_flags(e)
    e.add_argument("--rho", type=float, nargs="+", default=[0.25, 0.5, 1.0])
    e.add_argument("--trials", type=int, default=20, help="instances per rho")
    e.add_argument("--sets", nargs="+", default=list(FAMILY_SETS), help="family sets, e.g. FF FF+FD")
    arith = e.add_mutually_exclusive_group()
    arith.add_argument("--exact", dest="exact", action="store_true")
    arith.add_argument("--float", dest="exact", action="store_false")
    e.add_argument("--node-limit", type=int, default=20000)
    e.add_argument("--lp-only", action="store_true", help="root LP bounds only")
    e.add_argument("--workers", type=int, default=1)
    e.add_argument("--files", nargs="*", help="instance files instead of generated ones")
    e.add_argument("--out", help="CSV path")
    e.set_defaults(func=cmd_experiment, exact=False)

    x = sub.add_parser("export-lp", help="write the model in LP format")
    x.add_argument("instance")
    x.add_argument("--cuts", default="")
    x.add_argument("--out")
    x.set_defaults(func=cmd_export_lp)

    d = sub.add_parser("decompose", help="decompose a single-edge point into paths and cycles")
    d.add_argument("instance")
    d.add_argument("point")
    arith = d.add_mutually_exclusive_group()
    arith.add_argument("--exact", dest="float", action="store_false")
    arith.add_argument("--float", dest="float", action="store_true")
    d.add_argument("--out", help="write the decomposition report as JSON")
    d.set_defaults(func=cmd_decompose, float=False)

    v = sub.add_parser("verify", help="enumeration checks on a small instance")
    v.add_argument("instance")
    v.add_argument("--cuts", default="fd,fc,leaf")
    v.add_argument("--trials", type=int, default=200)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--out")
    v.set_defaults(func=cmd_verify)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SizeError as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return EXIT_SIZE
    except (ValueError, OSError) as exc:
        # InstanceError, LpParseError, GeneratorError, bad JSON, unknown family
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
