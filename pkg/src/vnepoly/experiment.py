"""Experiment matrix: instances x capacity densities x cut families."""

from __future__ import annotations

import csv
import io
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from fractions import Fraction
from pathlib import Path
from statistics import mean
from typing import Sequence

from vnepoly.formulation import InfeasibleError, build_model, parse_families
from vnepoly.generate import GeneratorConfig, generate_instances
from vnepoly.instance import Instance, load_instance
from vnepoly.lpsolve import CutConfig, solve_lp, solve_mip
from vnepoly.lpsolve.simplex import OPTIMAL

CSV_HEADER = ("instance", "families", "rho", "time_s", "nodes", "v_lp", "v_mip", "status")
FAMILY_SETS = ("FF", "FF+FD", "FF+FD+FC")
_LABEL_TO_FAMILIES = {"FF": "", "FF+FD": "fd", "FF+FD+FC": "fd,fc", "FF+FD+FC+LEAF": "fd,fc,leaf"}


def families_of(label: str) -> tuple[str, ...]:
    if label in _LABEL_TO_FAMILIES:
        return parse_families(_LABEL_TO_FAMILIES[label])
    return parse_families(label)


@dataclass(frozen=True)
class ExperimentConfig:
    generator: GeneratorConfig = field(default_factory=GeneratorConfig)
    rhos: tuple[float, ...] = (0.25, 0.5, 1.0)
    instances: int = 20
    family_sets: tuple[str, ...] = FAMILY_SETS
    seed: int = 2024
    exact: bool = False
    node_limit: int | None = 20000
    lp_only: bool = False
    workers: int = 1
    files: tuple[str, ...] = ()
    out: str | None = None


@dataclass(frozen=True)
class ResultRow:
    instance: str
    families: str
    rho: float | None
    time_s: float
    nodes: int | None
    v_lp: Fraction | float | None
    v_mip: Fraction | float | None
    status: str

    def as_csv(self) -> list[str]:
        def fmt(v):
            if v is None:
                return ""
            if isinstance(v, Fraction):
                return str(v.numerator) if v.denominator == 1 else repr(float(v))
            if isinstance(v, float):
                return f"{v:.10g}"
            return str(v)

        return [self.instance, self.families, fmt(self.rho), f"{self.time_s:.4f}",
                fmt(self.nodes), fmt(self.v_lp), fmt(self.v_mip), self.status]


@dataclass(frozen=True)
class _Job:
    name: str
    rho: float | None
    instance: Instance
    label: str
    exact: bool
    node_limit: int | None
    lp_only: bool


def _run(job: _Job) -> ResultRow:
    fams = families_of(job.label)
    t0 = time.perf_counter()
    try:
        model = build_model(job.instance, fams)
    except InfeasibleError:
        return ResultRow(job.name, job.label, job.rho, time.perf_counter() - t0, 0, None, None, "infeasible")
    try:
        if job.lp_only:
            lp = solve_lp(model, exact=job.exact)
            status = "lp_" + lp.status
            return ResultRow(job.name, job.label, job.rho, time.perf_counter() - t0, None, lp.value, None, status)
        res = solve_mip(model, CutConfig(), exact=job.exact, node_limit=job.node_limit)
    except Exception as exc:  # a failed row must not stop the matrix
        return ResultRow(job.name, job.label, job.rho, time.perf_counter() - t0, None, None, None,
                         f"error: {type(exc).__name__}")
    return ResultRow(job.name, job.label, job.rho, time.perf_counter() - t0,
                     res.node_count, res.root_bound, res.value, res.status)


def build_jobs(cfg: ExperimentConfig) -> list[_Job]:
    pairs: list[tuple[str, float | None, Instance]] = []
    if cfg.files:
        for f in cfg.files:
            pairs.append((Path(f).stem, None, load_instance(f)))
    else:
        for r, rho in enumerate(cfg.rhos):
            gen = replace(cfg.generator, rho=rho)
            for i, inst in enumerate(generate_instances(gen, cfg.instances, cfg.seed + 1000 * r)):
                pairs.append((f"rho{rho:g}_{i:03d}", rho, inst))
    return [
        _Job(name, rho, inst, label, cfg.exact, cfg.node_limit, cfg.lp_only)
        for name, rho, inst in pairs
        for label in cfg.family_sets
    ]


def run_experiment(cfg: ExperimentConfig) -> list[ResultRow]:
    """One row per (instance, family set), in that order."""
    jobs = build_jobs(cfg)
    if cfg.workers > 1:
        with ProcessPoolExecutor(cfg.workers) as pool:
            return list(pool.map(_run, jobs))
    return [_run(j) for j in jobs]


def summary_rows(rows: Sequence[ResultRow]) -> list[ResultRow]:
    """Mean over solved rows for every (family set, rho) cell."""
    cells: dict[tuple, list[ResultRow]] = {}
    for r in rows:
        cells.setdefault((r.families, r.rho), []).append(r)
    out = []
    for (label, rho), group in cells.items():
        done = [r for r in group if r.status in (OPTIMAL, "lp_" + OPTIMAL)]
        if not done:
            out.append(ResultRow("mean", label, rho, 0.0, None, None, None, f"mean(n=0/{len(group)})"))
            continue
        v_mip = [float(r.v_mip) for r in done if r.v_mip is not None]
        nodes = [r.nodes for r in done if r.nodes is not None]
        out.append(ResultRow(
            "mean", label, rho,
            mean(r.time_s for r in done),
            round(mean(nodes), 2) if nodes else None,
            mean(float(r.v_lp) for r in done),
            mean(v_mip) if v_mip else None,
            f"mean(n={len(done)}/{len(group)})",
        ))
    return out


def rows_to_csv(rows: Sequence[ResultRow], with_summary: bool = True) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in rows:
        w.writerow(r.as_csv())
    if with_summary:
        for r in summary_rows(rows):
            w.writerow(r.as_csv())
    return buf.getvalue()


def write_csv(rows: Sequence[ResultRow], path: str | Path, with_summary: bool = True) -> None:
    Path(path).write_text(rows_to_csv(rows, with_summary))
