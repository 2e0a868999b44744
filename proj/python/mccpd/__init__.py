"""Monte-Carlo canonical decomposition of function-defined tensors.

Multi-indices are 0-based here, as in the C++ API.
"""

from ._core import (
    CPModel,
    F39Radius,
    LocalSystem,
    Method,
    SingularMatrixError,
    SolverConfig,
    TauMode,
    TensorOracle,
    dense_global_discrepancy,
    dense_global_gradient,
    dense_local_discrepancy,
    dense_local_gradient,
    eval_cp,
    gauss_jordan_invert,
    init_random_start,
    load_cpd,
    mc_global_discrepancy,
    mc_local_system,
    residual_at,
    run,
    save_cpd,
    selftest,
    sweep,
)

__all__ = [
    "CPModel",
    "F39Radius",
    "LocalSystem",
    "Method",
    "SingularMatrixError",
    "SolverConfig",
    "TauMode",
    "TensorOracle",
    "dense_global_discrepancy",
    "dense_global_gradient",
    "dense_local_discrepancy",
    "dense_local_gradient",
    "eval_cp",
    "gauss_jordan_invert",
    "init_random_start",
    "load_cpd",
    "mc_global_discrepancy",
    "mc_local_system",
    "residual_at",
    "run",
    "save_cpd",
    "selftest",
    "sweep",
]
