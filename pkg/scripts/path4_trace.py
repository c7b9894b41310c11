"""Replay the four-node example through both decompositions."""

from pathlib import Path

from vnepoly.flowdecomp import ContractViolation, compute_flow_decomposition, decompose_generic
from vnepoly.instance import load_instance
from vnepoly.points import load_point

DATA = Path(__file__).resolve().parent.parent / "data"


def show(dec) -> None:
    ids = dec.instance.substrate.ids
    for p, lam in dec.paths:
        tag = "" if p.is_valid else "  (not valid)"
        print(f"  {lam!s:>6}  a -> {' -> '.join(str(ids[u]) for u in p.route)} -> b{tag}")
    for cyc, lam in dec.cycles:
        print(f"  {lam!s:>6}  cycle {' '.join(f'{ids[u]}>{ids[v]}' for u, v in cyc)}")


def main() -> None:
    inst = load_instance(DATA / "path4.json")
    for name in ("three_paths_point.json", "cycle_point.json"):
        pt = load_point(DATA / name, inst)
        print(f"{name}, generic peeling:")
        show(decompose_generic(pt, inst))
        print(f"{name}, path construction:")
        try:
            show(compute_flow_decomposition(pt, inst))
        except ContractViolation as err:
            print(f"  refused: {err}")


if __name__ == "__main__":
    main()
