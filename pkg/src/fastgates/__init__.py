"""Fast entangling gates on RF-trapped ions with exact micromotion.

Design and verification of fixed-duration, phase-locked kick schedules
(six-group FRAG gates) on two-ion crystals, with the intrinsic
micromotion of the RF drive treated exactly via Floquet solutions of the
Mathieu equation.  A direct ODE oracle cross-checks every analytic
prediction.
"""

from .config import RunConfig, load_config, parse_config, resolve_trap
from .errors import (
    ConfigError,
    FastGatesError,
    GroupOverlap,
    InvalidTiming,
    NoConvergence,
    SingularDenominator,
    Unstable,
)
from .fidelity import (
    FidelityReport,
    GateErrors,
    LaserConfig,
    ThermalState,
    acquired_phase,
    evaluate_schedule,
    floquet_gate_errors,
    full_infidelity,
    gate_errors,
    infidelity,
    mode_displacement,
    per_kick_mu,
    thermal_scaling,
)
from .gatescheme import (
    KickTrain,
    PulseSchedule,
    expand_finite_rep,
    frag_schedule,
    is_locked,
    lock_grid_spacing,
    phase_lock,
    snap_time,
)
from .mathieu import (
    FloquetSolution,
    MathieuParams,
    TrapDrive,
    characteristic_exponent,
    floquet_solution,
    fourier_coefficients,
    kick_excitation,
    micromotion_sums,
    mu_approx,
    mu_at,
    mu_factor,
    stability,
)
from .odeoracle import (
    gate_oracle,
    geometric_phase,
    integrate_trajectories,
    oracle_infidelity,
)
from .optimizer import (
    OptimizationConfig,
    OptimizationResult,
    optimize_gate,
    optimize_schedule,
    sweep_gate_time,
)
from .robustness import (
    SweepSpec,
    chi_error_to_geometry,
    stray_field_fraction,
    sweep_chi_error,
    sweep_phase_offset,
    sweep_q_value,
    sweep_rep_rate,
    sweep_stray_field,
    sweep_thermal,
)
from .trapmodel import (
    CA40_MASS,
    MicrotrapArray,
    Mode,
    ModeSpectrum,
    PaulTrap,
    chi_microtrap,
    chi_paul,
    find_periodic_crystal,
    mode_spectrum,
    solve_a_for_beta,
    spectrum_from_chi,
    xi_param,
)

__version__ = "0.1.0"

__all__ = [
    "CA40_MASS",
    "ConfigError",
    "FastGatesError",
    "FidelityReport",
    "FloquetSolution",
    "GateErrors",
    "GroupOverlap",
    "InvalidTiming",
    "KickTrain",
    "LaserConfig",
    "MathieuParams",
    "MicrotrapArray",
    "Mode",
    "ModeSpectrum",
    "NoConvergence",
    "OptimizationConfig",
    "OptimizationResult",
    "PaulTrap",
    "PulseSchedule",
    "RunConfig",
    "SingularDenominator",
    "SweepSpec",
    "ThermalState",
    "TrapDrive",
    "Unstable",
    "acquired_phase",
    "characteristic_exponent",
    "chi_error_to_geometry",
    "chi_microtrap",
    "chi_paul",
    "evaluate_schedule",
    "expand_finite_rep",
    "find_periodic_crystal",
    "floquet_gate_errors",
    "floquet_solution",
    "fourier_coefficients",
    "frag_schedule",
    "full_infidelity",
    "gate_errors",
    "gate_oracle",
    "geometric_phase",
    "infidelity",
    "integrate_trajectories",
    "is_locked",
    "kick_excitation",
    "load_config",
    "lock_grid_spacing",
    "micromotion_sums",
    "mode_displacement",
    "mode_spectrum",
    "mu_approx",
    "mu_at",
    "mu_factor",
    "optimize_gate",
    "optimize_schedule",
    "oracle_infidelity",
    "parse_config",
    "per_kick_mu",
    "phase_lock",
    "resolve_trap",
    "snap_time",
    "solve_a_for_beta",
    "spectrum_from_chi",
    "stability",
    "stray_field_fraction",
    "sweep_chi_error",
    "sweep_gate_time",
    "sweep_phase_offset",
    "sweep_q_value",
    "sweep_rep_rate",
    "sweep_stray_field",
    "sweep_thermal",
    "thermal_scaling",
    "xi_param",
]
