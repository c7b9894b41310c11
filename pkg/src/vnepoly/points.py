"""JSON form of LP points.

A point is stored sparsely by external ids; omitted entries are zero::

    {"x": {"a@u1": "2/5", ...}, "y": {"a-b@u1>u2": 0.4, ...}}

Numbers may be ints, floats or ``"p/q"`` strings; floats are read through
their shortest repr so ``0.4`` is exactly ``2/5``.
"""

from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path

from vnepoly.instance import Instance, InstanceError, Point, as_fraction


def point_from_dict(data: dict, inst: Instance, exact: bool = True) -> Point:
    idx, arc_id = inst.index, inst.bidirected.arc_id
    values: list = [Fraction(0)] * idx.size
    if not isinstance(data, dict) or not set(data) <= {"x", "y"}:
        raise InstanceError("point must be an object with keys 'x' and 'y'")
    for key, val in data.get("x", {}).items():
        vnode, sep, snode = key.partition("@")
        if not sep:
            raise InstanceError(f"bad x key {key!r}, expected 'vnode@snode'")
        values[idx.x(inst.vnode(vnode), inst.snode(snode))] = as_fraction(val)
    for key, val in data.get("y", {}).items():
        edge, sep, arc = key.partition("@")
        tail, sep2, head = arc.partition(">")
        if not (sep and sep2):
            raise InstanceError(f"bad y key {key!r}, expected 'edge@tail>head'")
        pair = (inst.snode(tail), inst.snode(head))
        if pair not in arc_id:
            raise InstanceError(f"{tail}>{head} is not a substrate arc")
        values[idx.y(inst.vedge(edge), arc_id[pair])] = as_fraction(val)
    if not exact:
        values = [float(v) for v in values]
    return Point(idx, tuple(values))


def _num(v):
    if isinstance(v, Fraction):
        return int(v) if v.denominator == 1 else str(v)
    return v


def point_to_dict(point: Point, inst: Instance) -> dict:
    idx = inst.index
    out: dict = {"x": {}, "y": {}}
    for j, v in enumerate(point.values):
        if v == 0:
            continue
        kind, a, b = idx.describe(j)
        if kind == "x":
            out["x"][f"{inst.virtual.ids[a]}@{inst.substrate.ids[b]}"] = _num(v)
        else:
            u, w = inst.bidirected.arcs[b]
            key = f"{inst.virtual.edge_label(a)}@{inst.substrate.ids[u]}>{inst.substrate.ids[w]}"
            out["y"][key] = _num(v)
    return out


def load_point(path: str | Path, inst: Instance, exact: bool = True) -> Point:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise InstanceError(f"{path}: invalid JSON ({exc})") from None
    return point_from_dict(data, inst, exact)


def dump_point(point: Point, inst: Instance, path: str | Path) -> None:
    Path(path).write_text(json.dumps(point_to_dict(point, inst), indent=2) + "\n")
