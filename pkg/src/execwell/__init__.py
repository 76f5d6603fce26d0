"""Optimal execution under time-varying market impact.

Discrete and continuous schedule solvers, well-posedness certificates,
price-manipulation detection, and admissibility sweeps over impact-decay
parameter space.
"""

__version__ = "0.1.0"

from .impact import (
    ConstantImpact,
    DiscreteImpactGrid,
    ExponentialImpact,
    ImpactPath,
    LinearImpact,
    MarketModel,
    PowerLawImpact,
    TabulatedImpact,
    discretize,
    path_from_json,
    path_to_json,
    summary_gamma,
)
from .discrete import (
    DiscreteStrategy,
    ImpactMatrix,
    NotApplicableError,
    NotSPDError,
    brute_force_optimum,
    check_bmatrix_sufficient,
    cost,
    impact_matrix,
    is_b_matrix,
    is_diagonally_dominant,
    is_spd,
    solve_optimal,
)
from .continuous import (
    BracketFailureError,
    ExistenceCertificate,
    ExistenceUncertifiedError,
    SecondOrderCertificate,
    SingularModelError,
    ToleranceFailureError,
    Trajectory,
    UnsupportedModelError,
    cash_functional,
    check_existence_uniqueness,
    check_second_order,
    closed_form,
    excess_cash_linear,
    integrate_initial_velocity,
    solve_bvp_shooting,
)
from .analysis import (
    RegimeReport,
    classify_shape,
    classify_wellposedness,
    detect_ttpm,
    monte_carlo_is,
)
from .sweep import (
    AxisSpec,
    SweepCell,
    SweepSpec,
    cells_to_json,
    is_admissible,
    lambert_w0,
    run_sweep,
    write_cells_csv,
)

__all__ = [
    "__version__",
    "ImpactPath",
    "ConstantImpact",
    "LinearImpact",
    "ExponentialImpact",
    "PowerLawImpact",
    "TabulatedImpact",
    "MarketModel",
    "DiscreteImpactGrid",
    "discretize",
    "summary_gamma",
    "path_from_json",
    "path_to_json",
    "ImpactMatrix",
    "DiscreteStrategy",
    "impact_matrix",
    "cost",
    "solve_optimal",
    "is_spd",
    "is_diagonally_dominant",
    "is_b_matrix",
    "check_bmatrix_sufficient",
    "brute_force_optimum",
    "NotSPDError",
    "NotApplicableError",
    "Trajectory",
    "ExistenceCertificate",
    "SecondOrderCertificate",
    "check_existence_uniqueness",
    "check_second_order",
    "solve_bvp_shooting",
    "integrate_initial_velocity",
    "closed_form",
    "cash_functional",
    "excess_cash_linear",
    "BracketFailureError",
    "ToleranceFailureError",
    "SingularModelError",
    "UnsupportedModelError",
    "ExistenceUncertifiedError",
    "RegimeReport",
    "detect_ttpm",
    "classify_shape",
    "classify_wellposedness",
    "monte_carlo_is",
    "AxisSpec",
    "SweepSpec",
    "SweepCell",
    "lambert_w0",
    "is_admissible",
    "run_sweep",
    "write_cells_csv",
    "cells_to_json",
]
