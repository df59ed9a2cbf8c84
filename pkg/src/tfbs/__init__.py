"""Tempered time-fractional Black-Scholes solver.

Compact fourth-order finite differences in log-price combined with a
nonuniform tempered L1 discretization of the time-fractional derivative
on graded meshes.  Two time-steppers are provided: the direct scheme
(full history re-summation) and a fast scheme built on a
sum-of-exponentials compression of the weakly singular kernel.
"""

from __future__ import annotations

from tfbs.mesh import (
    GradedMesh,
    SpatialGrid,
    build_graded_mesh,
    build_spatial_grid,
    coupled_resolution,
)
from tfbs.kernel_l1 import L1Weights, l1_weights, apply_tempered_l1, tempered_l1_split
from tfbs.soe import (
    SoeKernel,
    HistoryState,
    build_soe_kernel,
    history_step_coefficient,
    update_history,
    apply_fast_tempered_l1,
    b_weights,
)
from tfbs.spatial import (
    TridiagonalSystem,
    apply_compact,
    apply_second_difference,
    solve_tridiagonal,
)
from tfbs.schemes import TtfdrProblem, Solution, solve, stability_bound
from tfbs.bs_transform import (
    TemperedBsModel,
    to_ttfdr,
    from_ttfdr,
    boundary_memory_numeric,
)
from tfbs.mittag_leffler import ml2
from tfbs.harness import (
    StudyConfig,
    ConvergenceTable,
    PricingConfig,
    PricingResult,
    SoeReport,
    error_inf,
    run_convergence_study,
    run_pricing,
    soe_check,
)

__all__ = [
    "StudyConfig",
    "ConvergenceTable",
    "PricingConfig",
    "PricingResult",
    "SoeReport",
    "error_inf",
    "run_convergence_study",
    "run_pricing",
    "soe_check",
    "GradedMesh",
    "SpatialGrid",
    "build_graded_mesh",
    "build_spatial_grid",
    "coupled_resolution",
    "L1Weights",
    "l1_weights",
    "apply_tempered_l1",
    "tempered_l1_split",
    "SoeKernel",
    "HistoryState",
    "build_soe_kernel",
    "history_step_coefficient",
    "update_history",
    "apply_fast_tempered_l1",
    "b_weights",
    "TridiagonalSystem",
    "apply_compact",
    "apply_second_difference",
    "solve_tridiagonal",
    "TtfdrProblem",
    "Solution",
    "solve",
    "stability_bound",
    "TemperedBsModel",
    "to_ttfdr",
    "from_ttfdr",
    "boundary_memory_numeric",
    "ml2",
]
