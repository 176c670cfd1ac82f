"""degflow: 1D nonlinear diffusion with degenerate mobility.

Coordinate transform to a linear-mobility drift-diffusion form,
minimizing-movement (implicit Wasserstein) time stepping in quantile
coordinates, displacement-convexity certification, and independent
finite-volume solvers for cross-validation.
"""

from .convexity import (
    Condition,
    ConvexityReport,
    convexity_report,
    fokker_planck_lambdas,
    heat_lambda,
    hessian_f,
    porous_medium_conditions,
)
from .energy import (
    InternalEnergy,
    energy_density_form,
    energy_quantile_form,
    entropy,
    entropy_energy,
    power_energy,
    weighted_lm_norm,
)
from .errors import (
    BlowupError,
    CflError,
    ConfigError,
    ConvergenceError,
    DegflowError,
    DomainError,
    InconclusiveError,
    MassError,
    MonotonicityError,
    NonFiniteError,
    ShapeError,
    SlowDecayError,
    TimeRangeError,
)
from .fdsolver import (
    ComparisonReport,
    FdConfig,
    FdDiagnostics,
    FdTrajectory,
    compare_jko_fd,
    solve_original,
    solve_rescaled,
)
from .jko import (
    ContractionReport,
    Diagnostics,
    EstimateReport,
    FlowTrajectory,
    JkoConfig,
    check_estimates,
    contraction_test,
    jko_step,
    run_flow,
)
from .mobility import (
    AssumptionReport,
    DecayClass,
    MobilityFunction,
    check_assumptions,
    classify_decay,
    custom_mobility,
    interior_grid,
    power_mobility,
)
from .transform import (
    CoefficientField,
    CoordinateMap,
    PotentialSpec,
    build_coefficients,
    build_map,
    constant_coefficients,
    custom_potential,
    harmonic_coefficients,
    quadratic_potential,
    rescale_rho_to_u,
    rescale_u_to_rho,
    zero_potential,
)
from .transport1d import (
    DensityProfile,
    QuantileProfile,
    bump_density,
    density_to_quantiles,
    gaussian_density,
    gaussian_quantiles,
    l1_distance,
    quantiles_to_density,
    second_moment,
    uniform_density,
    uniform_quantiles,
    wasserstein2,
)

__version__ = "0.1.0"
