"""Quantum noise and entanglement of a driven cavity coupled to two
pinned domain-wall oscillators.

The package models a single driven optical mode dispersively coupled to
the position quadratures of two pinned magnetic domain walls.  It solves
the classical steady states (one or three roots of a cubic in the photon
number), linearizes the quantum fluctuations around each root, solves
the steady covariance through a Lyapunov equation, and derives the
measurable structure on top: logarithmic negativity and two-mode
squeezing for every mode pair, reduced oscillator-only models in the
dispersive regime, reflected-noise spectra with exceptional-point
detection, and grid/line/thermal scans with a CSV/JSON command-line
front end (``dwcavity``).

Quadrature ordering is ``(x_a, p_a, x_1, p_1, x_2, p_2)`` with vacuum
variance 1/2; frequencies and rates are angular (rad/s) internally, with
an ordinary-frequency input convention available at ingestion.
"""

from .errors import (
    BracketError,
    ConditioningError,
    ConvergenceError,
    DomainError,
    DWCavityError,
    InvalidParamsError,
    ResolutionError,
    StabilityError,
)
from .params import SystemParams, baseline, thermal_occupation, to_angular
from .material import (
    DWMode,
    MaterialSpec,
    derive_all_modes,
    derive_dw_mode,
    load_material_spec,
    pinning_potential,
    to_system_params,
)
from .steadystate import (
    SteadyStateRoot,
    bifurcation_amplitude,
    bifurcation_geff,
    branch_root,
    compute_Omega,
    cubic_residual,
    integrate_mean_field,
    reduced_to_drive,
    roots_from_reduced,
    solve_mean_field,
    three_root_region,
)
from .linearized import (
    StabilityReport,
    build_drift,
    build_noise,
    classify_stability,
    integrate_lyapunov,
    lyapunov_residual,
    solve_lyapunov,
)
from .entanglement import (
    NegativityResult,
    PointAnalysis,
    RootAnalysis,
    analyze_point,
    analyze_root,
    is_physical,
    log_negativity,
    min_variance,
    pair_names,
    reduce_modes,
    symplectic_spectrum,
    two_mode_squeezed_cov,
)
from .adiabatic import (
    EffectiveModel,
    ReducedModel,
    check_validity,
    effective_couplings,
    reduced_covariance,
    reduced_dw_model,
    solve_shifts,
)
from .spectrum import (
    EigenBranches,
    EPCandidate,
    SpectrumGrid,
    branches_along_line,
    detect_exceptional_points,
    input_spectral_matrix,
    mode_eigenvalues,
    output_spectrum,
    stability_crossings,
    track_branches,
    transfer_matrix,
)
from .sweep import (
    CutResult,
    PhaseDiagram,
    ThermalScan,
    bifurcation_cut,
    find_cutoff_temperature,
    phase_diagram,
    scaled_params,
    thermal_scan,
    with_kappa_ratio,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # errors
    "DWCavityError", "InvalidParamsError", "DomainError", "StabilityError",
    "ConditioningError", "ConvergenceError", "BracketError", "ResolutionError",
    # parameters
    "SystemParams", "baseline", "thermal_occupation", "to_angular",
    # material
    "MaterialSpec", "DWMode", "derive_dw_mode", "derive_all_modes",
    "pinning_potential", "to_system_params", "load_material_spec",
    # steady states
    "SteadyStateRoot", "solve_mean_field", "cubic_residual", "compute_Omega",
    "roots_from_reduced", "reduced_to_drive", "branch_root",
    "three_root_region", "bifurcation_amplitude", "bifurcation_geff",
    "integrate_mean_field",
    # linearization
    "StabilityReport", "build_drift", "build_noise", "classify_stability",
    "solve_lyapunov", "lyapunov_residual", "integrate_lyapunov",
    # entanglement
    "NegativityResult", "RootAnalysis", "PointAnalysis", "log_negativity",
    "min_variance", "symplectic_spectrum", "is_physical", "reduce_modes",
    "pair_names", "two_mode_squeezed_cov", "analyze_root", "analyze_point",
    # adiabatic
    "EffectiveModel", "ReducedModel", "effective_couplings", "solve_shifts",
    "check_validity", "reduced_dw_model", "reduced_covariance",
    # spectrum
    "SpectrumGrid", "EigenBranches", "EPCandidate", "transfer_matrix",
    "input_spectral_matrix", "output_spectrum", "mode_eigenvalues",
    "track_branches", "branches_along_line", "stability_crossings",
    "detect_exceptional_points",
    # sweeps
    "PhaseDiagram", "CutResult", "ThermalScan", "phase_diagram",
    "bifurcation_cut", "thermal_scan", "find_cutoff_temperature",
    "scaled_params", "with_kappa_ratio",
]
