"""Ground-truth gate verification by direct integration of the classical
equations of motion, micromotion included.

For each qubit basis state the state-dependent kicks are applied as
instantaneous velocity jumps to a trajectory integrated with a fixed-step
RK4 scheme (kicks land exactly on segment boundaries).  The kick-induced
deviation from the unkicked reference motion yields

* the two-qubit phase, from the classical action sum_k dv . dx(t_k-)
  calibrated to displacement-operator composition, and
* per-mode residual secular amplitudes at gate end, extracted by projecting
  the final deviation onto the complex Floquet solution of each mode.

Both are reported in the same conventions as the analytic model in
`fidelity`, so analytic and oracle infidelities are directly comparable.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .errors import EscapedIon, StepFailure
from .fidelity import (
    FidelityReport,
    GateErrors,
    LaserConfig,
    TARGET_PHASE,
    ThermalState,
    full_infidelity,
    infidelity,
)
from .mathieu import MathieuParams, floquet_solution
from .trapmodel import (
    MicrotrapArray,
    ModeSpectrum,
    PaulTrap,
    PeriodicCrystal,
    find_periodic_crystal,
    mode_spectrum,
    solve_a_for_beta,
)

#: qubit basis states mapped to per-ion kick signs
BASIS_SIGNS = {"uu": (1, 1), "ud": (1, -1), "du": (-1, 1), "dd": (-1, -1)}

#: default RK4 steps per RF period (1/200 fails the energy-drift bound)
STEPS_PER_RF = 800

#: default dimensionless velocity of one pulse-pair kick (linearization knob)
KICK_V_UNIT = 1e-3

#: linearization sanity bound on kick-induced displacement, fraction of d
ESCAPE_BOUND = 0.1


@dataclass(frozen=True)
class Trajectory:
    """Kicked trajectory of one basis state plus its kick-deviation data."""

    basis_state: str
    times: np.ndarray
    positions: np.ndarray          # (n_samples, n_ions) kicked motion
    deviations: np.ndarray         # (n_samples, n_ions) kicked - reference
    kick_times: np.ndarray
    classical_action: float        # sum_k sum_i dv_i dx_i(t_k-)
    final_deviation: np.ndarray    # (2, n_ions): rows dx, dv at gate end
    final_time: float
    v_unit: float
    phi_rf: float


@dataclass(frozen=True)
class GeometricPhaseResult:
    phase: float
    endpoint_displacement: np.ndarray   # per mode, pulse-pair count units
    oracle_infidelity: float


def _kick_events(pulses, basis_state: str, v_unit: float):
    """Ordered (time, (dv_ion1, dv_ion2)) velocity jumps for a basis state."""
    signs = BASIS_SIGNS[basis_state]
    t, z = pulses.times_counts()
    order = np.argsort(t, kind="stable")
    return [(float(t[k]), (z[k] * v_unit * signs[0], z[k] * v_unit * signs[1]))
            for k in order]


def _microtrap_forces(trap: MicrotrapArray, phi_rf: float):
    """Per-ion static coefficients and shared constants of the dimensionless
    microtrap EOM (displacements y_i from trap centers, units of d)."""
    beta = trap.beta
    q = trap.mathieu.q
    a_nom = trap.mathieu.a
    a_per_ion = []
    for eps in trap.frequency_offsets:
        if eps == 0.0:
            a_per_ion.append(a_nom)
        else:
            a_per_ion.append(solve_a_for_beta(q, beta * (1.0 + eps)))
    k0 = (2.0 * np.pi / beta) ** 2
    lam = (2.0 * np.pi) ** 2 / trap.xi
    w_rf = 4.0 * np.pi / beta
    return a_per_ion, k0, q, lam, w_rf, phi_rf


def _run_microtrap(trap: MicrotrapArray, events, crystal: PeriodicCrystal,
                   h_target: float, phi_rf: float, n_record: int):
    """Fixed-step RK4 through the kick sequence; returns sampled motion,
    deviations at kick times, the classical action, and the final deviation.

    The analytic periodic-crystal series is the unkicked reference, so only
    the kicked trajectory is integrated.
    """
    (a1, a2), k0, q, lam, w_rf, phi = _microtrap_forces(trap, phi_rf)
    d = trap.separation_d
    u, w = crystal.relative_series()
    jg = np.arange(crystal.harmonic_count + 1)
    jfreq = jg * w_rf

    def reference(tau):
        arg = jfreq * tau + jg * phi
        delta = float(np.cos(arg) @ u + np.sin(arg) @ w)
        ddot = float(-np.sin(arg) @ (jfreq * u) + np.cos(arg) @ (jfreq * w))
        return (-0.5 * delta, 0.5 * delta, -0.5 * ddot, 0.5 * ddot)

    def deriv(tau, y1, y2, v1, v2):
        drive = 2.0 * q * np.cos(w_rf * tau + phi)
        sep = 1.0 + y2 - y1
        fc = lam / (sep * sep)
        return (v1, v2,
                -k0 * (a1 - drive) * y1 - fc,
                -k0 * (a2 - drive) * y2 + fc)

    tau = events[0][0]
    y1, y2, v1, v2 = reference(tau)
    action = 0.0
    samples_t, samples_y, samples_d = [], [], []
    record_every = max(1, int(round(
        (events[-1][0] - events[0][0]) / max(h_target, 1e-12) / max(n_record, 1)
    ))) if n_record else 0
    step_count = 0

    def record(tau, y1, y2):
        r1, r2, _, _ = reference(tau)
        samples_t.append(tau)
        samples_y.append((y1 * d, y2 * d))
        samples_d.append(((y1 - r1) * d, (y2 - r2) * d))

    if n_record:
        record(tau, y1, y2)

    for idx, (t_kick, dv) in enumerate(events):
        # integrate up to this kick time
        span = t_kick - tau
        if span < -1e-12:
            raise StepFailure("kick times not ordered")
        if span > 1e-15:
            n = max(int(np.ceil(span / h_target)), 1)
            h = span / n
            for _ in range(n):
                k1 = deriv(tau, y1, y2, v1, v2)
                k2 = deriv(tau + 0.5 * h, y1 + 0.5 * h * k1[0],
                           y2 + 0.5 * h * k1[1], v1 + 0.5 * h * k1[2],
                           v2 + 0.5 * h * k1[3])
                k3 = deriv(tau + 0.5 * h, y1 + 0.5 * h * k2[0],
                           y2 + 0.5 * h * k2[1], v1 + 0.5 * h * k2[2],
                           v2 + 0.5 * h * k2[3])
                k4 = deriv(tau + h, y1 + h * k3[0], y2 + h * k3[1],
                           v1 + h * k3[2], v2 + h * k3[3])
                y1 += h * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]) / 6.0
                y2 += h * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1]) / 6.0
                v1 += h * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2]) / 6.0
                v2 += h * (k1[3] + 2 * k2[3] + 2 * k3[3] + k4[3]) / 6.0
                tau += h
                step_count += 1
                if n_record and step_count % record_every == 0:
                    record(tau, y1, y2)
        tau = t_kick
        r1, r2, rv1, rv2 = reference(tau)
        dx1, dx2 = y1 - r1, y2 - r2
        if max(abs(dx1), abs(dx2)) > ESCAPE_BOUND:
            raise EscapedIon(
                f"kick-induced displacement exceeds {ESCAPE_BOUND} d")
        action += dv[0] * dx1 + dv[1] * dx2
        v1 += dv[0]
        v2 += dv[1]
        del idx, rv1, rv2
    r1, r2, rv1, rv2 = reference(tau)
    final = np.array([[y1 - r1, y2 - r2], [v1 - rv1, v2 - rv2]])
    if n_record:
        record(tau, y1, y2)
    return (np.array(samples_t), np.array(samples_y), np.array(samples_d),
            action, final, tau)


def _run_paul(trap: PaulTrap, events, h_target: float, phi_rf: float,
              n_record: int):
    """Same contract as _run_microtrap for the linear Paul trap (2D per ion:
    gate axis x and trap axis z, lengths in units of the ion separation).
    The unkicked reference is the static equilibrium x = 0, z = -+1/2."""
    beta = trap.beta
    a, q = trap.mathieu_radial.a, trap.mathieu_radial.q
    k0 = (2.0 * np.pi / beta) ** 2
    w_rf = 4.0 * np.pi / beta
    kap = trap.kappa
    wz2 = (2.0 * np.pi * kap) ** 2
    lam = 0.5 * (2.0 * np.pi * kap) ** 2

    def deriv(tau, s):
        x1, z1, x2, z2, vx1, vz1, vx2, vz2 = s
        drive = k0 * (a - 2.0 * q * np.cos(w_rf * tau + phi_rf))
        dx, dz = x1 - x2, z1 - z2
        r3 = (dx * dx + dz * dz) ** 1.5
        fx, fz = lam * dx / r3, lam * dz / r3
        return np.array([vx1, vz1, vx2, vz2,
                         -drive * x1 + fx, -wz2 * z1 + fz,
                         -drive * x2 - fx, -wz2 * z2 - fz])

    tau = events[0][0]
    s = np.array([0.0, 0.5, 0.0, -0.5, 0.0, 0.0, 0.0, 0.0])
    ref = s.copy()
    action = 0.0
    samples_t, samples_y, samples_d = [], [], []
    for t_kick, dv in events:
        span = t_kick - tau
        if span > 1e-15:
            n = max(int(np.ceil(span / h_target)), 1)
            h = span / n
            for _ in range(n):
                k1 = deriv(tau, s)
                k2 = deriv(tau + 0.5 * h, s + 0.5 * h * k1)
                k3 = deriv(tau + 0.5 * h, s + 0.5 * h * k2)
                k4 = deriv(tau + h, s + h * k3)
                s = s + h * (k1 + 2 * k2 + 2 * k3 + k4) / 6.0
                tau += h
        tau = t_kick
        dx1, dx2 = s[0] - ref[0], s[2] - ref[2]
        if max(abs(dx1), abs(dx2)) > ESCAPE_BOUND:
            raise EscapedIon(
                f"kick-induced displacement exceeds {ESCAPE_BOUND}")
        action += dv[0] * dx1 + dv[1] * dx2
        s[4] += dv[0]
        s[6] += dv[1]
        if n_record:
            samples_t.append(tau)
            samples_y.append((s[0], s[2]))
            samples_d.append((dx1, dx2))
    final = np.array([[s[0] - ref[0], s[2] - ref[2]],
                      [s[4] - ref[4], s[6] - ref[6]]])
    return (np.array(samples_t), np.array(samples_y), np.array(samples_d),
            action, final, tau)


def integrate_trajectories(trap, pulses, basis_state: str,
                           v_unit: float = KICK_V_UNIT,
                           steps_per_rf: int = STEPS_PER_RF,
                           crystal: PeriodicCrystal | None = None,
                           phi_rf: float = np.pi,
                           n_record: int = 0) -> Trajectory:
    """Integrate one basis state's kicked trajectory through a schedule or
    kick train; micromotion drive included exactly."""
    if basis_state not in BASIS_SIGNS:
        raise ValueError(f"unknown basis state {basis_state!r}")
    events = _kick_events(pulses, basis_state, v_unit)
    if not events:
        raise ValueError("pulse sequence is empty")
    beta = trap.beta
    h_target = (beta / 2.0) / steps_per_rf
    if isinstance(trap, MicrotrapArray):
        if crystal is None:
            crystal = find_periodic_crystal(trap, phi_rf=phi_rf)
        out = _run_microtrap(trap, events, crystal, h_target, phi_rf,
                             n_record)
    elif isinstance(trap, PaulTrap):
        out = _run_paul(trap, events, h_target, phi_rf, n_record)
    else:
        raise TypeError(f"unsupported trap type {type(trap)!r}")
    times, pos, dev, action, final, t_end = out
    return Trajectory(basis_state=basis_state, times=times, positions=pos,
                      deviations=dev,
                      kick_times=np.array([e[0] for e in events]),
                      classical_action=action, final_deviation=final,
                      final_time=t_end, v_unit=v_unit, phi_rf=phi_rf)


def _floquet_series(mode, beta_com: float):
    """Fourier data (beta_p, C_j, j indices, sign flips) of the mode's
    complex Floquet solution Phi(s) = sum_j C_j exp(i (beta_p + 2 j) s)."""
    q_p = mode.q_p
    if q_p == 0.0:
        coeffs = np.array([1.0])
        j_idx = np.array([0])
    else:
        params = MathieuParams(a=mode.a_p, q=abs(q_p))
        sol = floquet_solution(params)
        coeffs = sol.coefficients
        J = sol.truncation_order
        j_idx = np.arange(-J, J + 1)
        if q_p < 0.0:
            # Mathieu with -q is the +q solution shifted by s -> s + pi/2
            coeffs = coeffs * np.where(j_idx % 2 == 0, 1.0, -1.0)
    return mode.beta_p, coeffs, j_idx


def secular_amplitude(delta_x: float, delta_v: float, mode, beta_com: float,
                      tau: float, phi_rf: float) -> float:
    """Stroboscopic secular amplitude of a mode deviation.

    delta_x, delta_v are the mode-projected deviation and its tau-derivative
    at time tau.  The Floquet amplitude 2|B| is scaled by the periodic
    envelope sampled at the RF lock phase, which is the convention under
    which a kick at the lock phase displaces the mode by exactly mu times
    the harmonic response.  Reduces to sqrt(dx^2 + (dv/omega_p)^2) for a
    harmonic mode.
    """
    beta_p, coeffs, j_idx = _floquet_series(mode, beta_com)
    s = 2.0 * np.pi * tau / beta_com + phi_rf / 2.0
    expo = np.exp(1j * (beta_p + 2.0 * j_idx) * s)
    phi = np.sum(coeffs * expo)
    dphi_ds = np.sum(coeffs * 1j * (beta_p + 2.0 * j_idx) * expo)
    dphi = dphi_ds * (2.0 * np.pi / beta_com)
    # delta = 2 Re[B Phi]; solve the 2x2 real system for B = br + i bi
    mat = np.array([[phi.real, -phi.imag], [dphi.real, -dphi.imag]])
    br2, bi2 = np.linalg.solve(mat, [delta_x, delta_v])
    envelope = abs(np.sum(coeffs * np.exp(1j * 2.0 * j_idx * (phi_rf / 2.0))))
    return float(np.hypot(br2, bi2)) * envelope  # = 2 |B C_0| |P(s_lock)|


def geometric_phase(traj: Trajectory, spectrum: ModeSpectrum,
                    laser: LaserConfig = LaserConfig(),
                    thermal: ThermalState = ThermalState()) -> GeometricPhaseResult:
    """Quantum phase and per-mode endpoint displacement of one basis state.

    The phase calibration 8 pi eta^2 / v_unit^2 converts the classical
    action accumulated by the kicks into the coherent-state phase of the
    displaced modes.  Endpoint displacements are scaled to the pulse-pair
    count units of `fidelity.mode_displacement`.
    """
    eta = laser.lamb_dicke_eta
    phase = 8.0 * np.pi * eta**2 * traj.classical_action / traj.v_unit**2
    b = np.array([m.b for m in spectrum.modes])
    dx_modes = b @ traj.final_deviation[0]
    dv_modes = b @ traj.final_deviation[1]
    beta_com = spectrum.modes[0].beta_p
    disp = np.empty(len(spectrum.modes))
    for p, mode in enumerate(spectrum.modes):
        amp = secular_amplitude(dx_modes[p], dv_modes[p], mode, beta_com,
                                traj.final_time, traj.phi_rf)
        omega_p = 2.0 * np.pi * mode.ratio
        disp[p] = 2.0 * amp * omega_p / (np.sqrt(mode.ratio)
                                         * np.sqrt(2.0) * traj.v_unit)
    nbar = thermal.nbar(len(spectrum.modes))
    rest = (4.0 / 3.0) * np.sum((0.5 + nbar) * (eta * disp) ** 2) / 2.0
    return GeometricPhaseResult(phase=float(phase),
                                endpoint_displacement=disp,
                                oracle_infidelity=float(rest))


def complete_basis(results: Mapping) -> dict:
    """Fill the mirror-symmetric basis states (global kick sign flip leaves
    the action and displacement magnitudes unchanged)."""
    full = dict(results)
    for state, mirror in (("dd", "uu"), ("du", "ud")):
        if state not in full and mirror in full:
            full[state] = full[mirror]
    missing = set(BASIS_SIGNS) - set(full)
    if missing:
        raise ValueError(f"missing basis states: {sorted(missing)}")
    return full


def oracle_infidelity(results: Mapping, thermal: ThermalState,
                      spectrum: ModeSpectrum,
                      laser: LaserConfig = LaserConfig()) -> FidelityReport:
    """Combine per-basis geometric-phase results into an oracle fidelity
    report comparable term-by-term with the analytic one."""
    full = complete_basis(results)
    phase = 0.5 * (full["uu"].phase + full["dd"].phase
                   - full["ud"].phase - full["du"].phase)
    # independent basis excitations combine in quadrature per mode
    n_modes = len(next(iter(full.values())).endpoint_displacement)
    disp = np.zeros(n_modes)
    for state in ("uu", "ud"):
        disp += full[state].endpoint_displacement ** 2
    disp = np.sqrt(disp)
    errors = GateErrors(phase_error=abs(phase) - TARGET_PHASE,
                        mode_displacements=disp, mu_used=float("nan"),
                        raw_phase=phase)
    report = infidelity(errors, thermal, spectrum, laser)
    # the oracle is the reporting path: use the untruncated (saturating)
    # form, which agrees with phase_term + sum(restoration_terms) to
    # second order but stays physical for badly failed gates
    return FidelityReport(infidelity=full_infidelity(errors, thermal,
                                                     spectrum, laser),
                          phase_term=report.phase_term,
                          restoration_terms=report.restoration_terms,
                          fidelity_source="oracle")


def gate_oracle(trap, pulses, spectrum: ModeSpectrum | None = None,
                laser: LaserConfig = LaserConfig(),
                thermal: ThermalState = ThermalState(),
                v_unit: float = KICK_V_UNIT,
                steps_per_rf: int = STEPS_PER_RF,
                phi_rf: float = np.pi,
                crystal: PeriodicCrystal | None = None) -> tuple:
    """End-to-end oracle evaluation of a schedule or kick train.

    Returns (FidelityReport, {basis: GeometricPhaseResult}).  Only the two
    symmetry-inequivalent basis states are integrated.
    """
    if isinstance(trap, MicrotrapArray) and crystal is None:
        crystal = find_periodic_crystal(trap, phi_rf=phi_rf)
    if spectrum is None:
        spectrum = mode_spectrum(trap, crystal=crystal, phi_rf=phi_rf) \
            if isinstance(trap, MicrotrapArray) else mode_spectrum(trap)
    results = {}
    for basis in ("uu", "ud"):
        traj = integrate_trajectories(trap, pulses, basis, v_unit=v_unit,
                                      steps_per_rf=steps_per_rf,
                                      crystal=crystal, phi_rf=phi_rf)
        results[basis] = geometric_phase(traj, spectrum, laser, thermal)
    report = oracle_infidelity(results, thermal, spectrum, laser)
    return report, complete_basis(results)
