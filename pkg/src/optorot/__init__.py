"""Stationary mirror-field entanglement of a Laguerre-Gaussian cavity mode and a rotating mirror."""

from .dynamics import (
    ConvergenceError,
    EffectiveResponse,
    EigenvalueError,
    LinearModel,
    StabilityVerdict,
    assess_stability,
    build_linear_model,
    effective_response,
    linear_model,
    thermal_occupancy,
)
from .entanglement import (
    EntanglementReport,
    LowTemperatureFit,
    check_physicality,
    fit_low_temperature,
    log_negativity,
    partial_transpose_eta,
    symplectic_eigenvalues,
)
from .lyapunov import (
    CovarianceMatrix,
    covariance_quadrature_oracle,
    lyapunov_residual,
    solve_lyapunov_direct,
    solve_lyapunov_elimination,
)
from .params import (
    CONSTANTS,
    DerivedQuantities,
    ParameterError,
    ParameterSet,
    PhysicalConstants,
    derive_quantities,
    validate_parameters,
)
from .steadystate import SteadyState, bistability_roots, steady_state
from .sweeps import (
    SweepResult,
    SweepSpec,
    evaluate_point,
    find_threshold,
    parse_config,
    render_outputs,
    run_sweep,
)

__version__ = "0.1.0"
