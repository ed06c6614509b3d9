"""Error-sensitivity sweeps for designed gates.

Each sweep re-evaluates a fixed gate under a one-parameter family of
perturbations: RF phase offsets, mis-characterized mode splitting,
finite pulse repetition rate, thermal occupation, stray-field frequency
offsets between the traps, and drive strength q.  Sweeps never mutate
the gate or the trap, return one row per grid point in grid order, and
reproduce the base evaluation exactly at the zero-perturbation point.

Perturbations that change the dynamics themselves (stray field, finite
repetition rate) are evaluated with the ODE oracle; the others reuse the
analytic model the gate was designed against.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import GroupOverlap
from .fidelity import (
    FidelityReport,
    LaserConfig,
    ThermalState,
    evaluate_schedule,
    per_kick_mu,
    thermal_scaling,
)
from .gatescheme import expand_finite_rep
from .mathieu import (
    MathieuParams,
    floquet_solution,
    micromotion_sums,
    mu_factor,
)
from .odeoracle import gate_oracle
from .trapmodel import CA40_MASS, ModeSpectrum, chi_microtrap, xi_param

PARAMETERS = ("phase_offset", "chi_error", "rep_rate", "thermal_n",
              "stray_field", "q_value")


@dataclass(frozen=True)
class SweepSpec:
    """Declarative description of a sweep, for serialization and the CLI."""

    parameter: str
    grid: tuple
    base_gate: object
    trap: object = None

    def __post_init__(self):
        if self.parameter not in PARAMETERS:
            raise ValueError(f"unknown sweep parameter {self.parameter!r}")
        if len(self.grid) == 0:
            raise ValueError("sweep grid must be nonempty")
        if list(self.grid) != sorted(self.grid):
            raise ValueError("sweep grid must be sorted")


def _schedule(gate):
    """Accept either an OptimizationResult or a bare schedule/train."""
    return getattr(gate, "best_schedule", gate)


def sweep_phase_offset(base_gate, params: MathieuParams,
                       spectrum: ModeSpectrum, offsets,
                       design_mu: float | None = None,
                       laser: LaserConfig = LaserConfig(),
                       thermal: ThermalState = ThermalState()) -> list:
    """Infidelity when every pulse arrives at RF phase pi + offset.

    A uniform offset keeps the schedule phase-locked but moves the kicks
    off the micromotion turning point, rescaling the enhancement factor
    from mu(pi) to mu(pi + offset).  If `design_mu` is given, the curve is
    normalized so that zero offset reproduces the design value exactly.
    """
    schedule = _schedule(base_gate)
    solution = floquet_solution(params)

    def mu_of(phi):
        return mu_factor(micromotion_sums(solution, phi), solution.beta)

    scale = 1.0 if design_mu is None else design_mu / mu_of(np.pi)
    rows = []
    for offset in offsets:
        mu = scale * mu_of(np.pi + float(offset))
        _, report = evaluate_schedule(schedule, spectrum, mu=mu,
                                      laser=laser, thermal=thermal)
        rows.append({"offset": float(offset), "mu": float(mu),
                     "infidelity": report.infidelity})
    return rows


def _perturbed_spectrum(spectrum: ModeSpectrum, fraction: float) -> ModeSpectrum:
    """Spectrum whose splitting (r_p - 1) is scaled by (1 + fraction)."""
    modes = tuple(
        replace(m, ratio=1.0 + (m.ratio - 1.0) * (1.0 + fraction))
        for m in spectrum.modes
    )
    return replace(spectrum, modes=modes)


def sweep_chi_error(base_gate, spectrum: ModeSpectrum, fractions,
                    mu: float = 1.0,
                    laser: LaserConfig = LaserConfig(),
                    thermal: ThermalState = ThermalState()) -> list:
    """Evaluate the schedule (designed at nominal chi) on a trap whose true
    splitting differs by the given relative fractions."""
    schedule = _schedule(base_gate)
    rows = []
    for fraction in fractions:
        perturbed = _perturbed_spectrum(spectrum, float(fraction))
        _, report = evaluate_schedule(schedule, perturbed, mu=mu,
                                      laser=laser, thermal=thermal)
        rows.append({"chi_fraction": float(fraction),
                     "infidelity": report.infidelity})
    return rows


def chi_error_to_geometry(fraction: float, separation_d: float,
                          secular_omega: float,
                          ion_mass: float = CA40_MASS) -> dict:
    """Convert a relative chi error into the equivalent relative errors in
    trap separation d and secular frequency omega.

    chi depends on geometry only through xi = d^3 omega^2 / alpha, so
    d(ln chi) = s (3 d(ln d) + 2 d(ln omega)) with s = dln(chi)/dln(xi),
    evaluated by central finite difference.
    """
    xi = xi_param(separation_d, secular_omega, ion_mass)
    step = 1e-6
    hi = chi_microtrap(xi * (1.0 + step)).chi
    lo = chi_microtrap(xi * (1.0 - step)).chi
    slope = (hi - lo) / (2.0 * step) / chi_microtrap(xi).chi
    return {"d_fraction": fraction / (3.0 * slope),
            "omega_fraction": fraction / (2.0 * slope)}


def sweep_rep_rate(base_gate, trap, rep_rates,
                   laser: LaserConfig = LaserConfig(),
                   thermal: ThermalState = ThermalState(),
                   **oracle_kwargs) -> list:
    """Oracle infidelity of the schedule expanded at finite repetition
    rates (kicks per secular period).  Rates too low to separate the pulse
    groups are flagged rather than evaluated."""
    schedule = _schedule(base_gate)
    rows = []
    for rate in rep_rates:
        try:
            train = expand_finite_rep(schedule, float(rate))
        except GroupOverlap as exc:
            rows.append({"rep_rate": float(rate), "infidelity": float("nan"),
                         "ok": False, "reason": str(exc)})
            continue
        report, _ = gate_oracle(trap, train, laser=laser, thermal=thermal,
                                **oracle_kwargs)
        rows.append({"rep_rate": float(rate),
                     "infidelity": report.infidelity, "ok": True})
    return rows


def sweep_thermal(base_report: FidelityReport, base_thermal: ThermalState,
                  occupations) -> list:
    """Rescale the restoration terms of a base evaluation to each mean
    occupation; the phase term is temperature-independent."""
    rows = []
    for nbar in occupations:
        report = thermal_scaling(base_report, base_thermal,
                                 ThermalState(mean_occupation=float(nbar)))
        rows.append({"mean_occupation": float(nbar),
                     "infidelity": report.infidelity})
    return rows


def sweep_stray_field(base_gate, trap, frequency_offsets,
                      laser: LaserConfig = LaserConfig(),
                      thermal: ThermalState = ThermalState(),
                      **oracle_kwargs) -> list:
    """Oracle infidelity with one trap's secular frequency offset by the
    given fractions (slowly varying stray field).  The couplings, crystal,
    and mode structure are re-derived for each perturbed trap."""
    schedule = _schedule(base_gate)
    rows = []
    for offset in frequency_offsets:
        perturbed = replace(trap, frequency_offsets=(0.0, float(offset)))
        report, _ = gate_oracle(perturbed, schedule, laser=laser,
                                thermal=thermal, **oracle_kwargs)
        rows.append({"frequency_offset": float(offset),
                     "infidelity": report.infidelity})
    return rows


def stray_field_fraction(frequency_offset: float) -> float:
    """Relative stray-field strength dE/E producing a given relative
    secular-frequency offset: domega/omega ~ sqrt(2) dE/E."""
    return frequency_offset / np.sqrt(2.0)


def sweep_q_value(base_gate, q_values, rf_over_secular: float,
                  spectrum: ModeSpectrum,
                  laser: LaserConfig = LaserConfig(),
                  thermal: ThermalState = ThermalState(),
                  phi_rf: float = np.pi) -> list:
    """Re-evaluate a (micromotion-unaware) gate at different drive
    strengths q, holding the RF/secular frequency ratio fixed; each kick is
    weighted by the enhancement factor at the RF phase it actually sees."""
    from .trapmodel import solve_a_for_beta

    schedule = _schedule(base_gate)
    beta = 2.0 / rf_over_secular
    rows = []
    for q in q_values:
        q = float(q)
        params = MathieuParams(a=solve_a_for_beta(q, beta), q=q)
        mus = per_kick_mu(schedule, params, beta, phi_rf=phi_rf)
        _, report = evaluate_schedule(schedule, spectrum, mu=mus,
                                      laser=laser, thermal=thermal)
        rows.append({"q": q, "infidelity": report.infidelity})
    return rows
