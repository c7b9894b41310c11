"""Seeded random instances."""

from __future__ import annotations

import math
from dataclasses import dataclass

import networkx as nx
import numpy as np

from vnepoly.instance import Instance, make_instance

SUBSTRATE_KINDS = ("path", "cycle", "random")
MAX_REDRAWS = 1000


class GeneratorError(ValueError):
    pass


@dataclass(frozen=True)
class GeneratorConfig:
    """Parameters of one family of random instances.

    Node capacities: ``ceil(rho * n_s)`` substrate nodes chosen uniformly
    get capacity 1, the others 0.  Edge capacities are uniform integers in
    ``[1, |E_r|]``, costs uniform integers in ``cost_range``.  Demands are 1.
    """

    n_virtual: int = 4
    m_virtual: tuple[int, int] = (4, 5)
    substrate: str = "random"
    n_substrate: tuple[int, int] = (10, 14)
    substrate_degree: float = 3.0
    rho: float = 1.0
    cost_range: tuple[int, int] = (1, 10)

    def validate(self) -> None:
        n = self.n_virtual
        lo, hi = self.m_virtual
        if n < 2:
            raise GeneratorError("virtual network needs at least 2 nodes")
        if not (n - 1 <= lo <= hi <= n * (n - 1) // 2):
            raise GeneratorError(f"a connected simple graph on {n} nodes has {n - 1}..{n * (n - 1) // 2} edges")
        if self.substrate not in SUBSTRATE_KINDS:
            raise GeneratorError(f"substrate must be one of {SUBSTRATE_KINDS}")
        smin, smax = self.n_substrate
        if not (2 <= smin <= smax):
            raise GeneratorError("substrate size range must satisfy 2 <= min <= max")
        if self.substrate == "cycle" and smin < 3:
            raise GeneratorError("a cycle needs at least 3 nodes")
        if not (0 < self.rho <= 1):
            raise GeneratorError("rho must lie in (0, 1]")
        if self.cost_range[0] > self.cost_range[1]:
            raise GeneratorError("empty cost range")


def _connected_gnm(n: int, m: int, rng: np.random.Generator) -> nx.Graph:
    for _ in range(MAX_REDRAWS):
        g = nx.gnm_random_graph(n, m, seed=int(rng.integers(2**32)))
        if nx.is_connected(g):
            return g
    raise GeneratorError(f"no connected G({n}, {m}) found in {MAX_REDRAWS} draws")


def _substrate_graph(cfg: GeneratorConfig, n: int, rng: np.random.Generator) -> nx.Graph:
    if cfg.substrate == "path":
        return nx.path_graph(n)
    if cfg.substrate == "cycle":
        return nx.cycle_graph(n)
    m = min(max(n - 1, round(cfg.substrate_degree * n / 2)), n * (n - 1) // 2)
    return _connected_gnm(n, m, rng)


def generate_instance(cfg: GeneratorConfig, rng: np.random.Generator) -> Instance:
    cfg.validate()
    n_r = cfg.n_virtual
    m_r = int(rng.integers(cfg.m_virtual[0], cfg.m_virtual[1], endpoint=True))
    virtual = _connected_gnm(n_r, m_r, rng)
    n_s = int(rng.integers(cfg.n_substrate[0], cfg.n_substrate[1], endpoint=True))
    sub = _substrate_graph(cfg, n_s, rng)

    capable = set(rng.choice(n_s, size=math.ceil(cfg.rho * n_s), replace=False).tolist())
    lo, hi = cfg.cost_range
    node_cost = rng.integers(lo, hi, size=n_s, endpoint=True)
    edges = sorted(tuple(sorted(e)) for e in sub.edges())
    edge_cap = rng.integers(1, m_r, size=len(edges), endpoint=True)
    edge_cost = rng.integers(lo, hi, size=len(edges), endpoint=True)

    return make_instance(
        [(f"v{i + 1}", 1) for i in range(n_r)],
        [(f"v{a + 1}", f"v{b + 1}", 1) for a, b in sorted(tuple(sorted(e)) for e in virtual.edges())],
        [(f"u{u + 1}", int(u in capable), int(node_cost[u])) for u in range(n_s)],
        [(f"u{a + 1}", f"u{b + 1}", int(edge_cap[e]), int(edge_cost[e])) for e, (a, b) in enumerate(edges)],
    )


def generate_instances(cfg: GeneratorConfig, count: int, seed: int) -> list[Instance]:
    """``count`` independent instances; instance ``i`` depends only on ``seed`` and ``i``."""
    children = np.random.SeedSequence(seed).spawn(count)
    return [generate_instance(cfg, np.random.default_rng(c)) for c in children]
