from vnepoly.lpsolve.mip import (
    CutConfig,
    MipResult,
    cutting_plane_root,
    iter_cutting_plane,
    solve_mip,
)
from vnepoly.lpsolve.simplex import (
    INFEASIBLE,
    OPTIMAL,
    UNBOUNDED,
    Basis,
    LpResult,
    solve_lp,
)

__all__ = [
    "Basis",
    "CutConfig",
    "INFEASIBLE",
    "LpResult",
    "MipResult",
    "OPTIMAL",
    "UNBOUNDED",
    "cutting_plane_root",
    "iter_cutting_plane",
    "solve_lp",
    "solve_mip",
]
