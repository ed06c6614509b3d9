"""Mathieu/Floquet solver: characteristic exponent, Fourier coefficients,
micromotion sums and the kick enhancement factor mu.

All quantities refer to the standard-form Mathieu equation

    x'' + (a - 2 q cos(2 s)) x = 0,

where s = omega_RF * t / 2, so the secular frequency of a trapped ion is
omega = beta * omega_RF / 2 with beta the characteristic exponent.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .errors import SingularDenominator, TruncationInsufficient, Unstable

#: tolerance on |trace(monodromy)| - 2 beyond which a point is unstable
STABILITY_EPS = 1e-9

#: default / escalated truncation orders for the Fourier expansion
DEFAULT_J = 5
ESCALATED_J = 8

#: adequacy threshold on the outermost coefficient magnitude
TRUNCATION_TOL = 1e-6


@dataclass(frozen=True)
class MathieuParams:
    """Dimensionless Mathieu parameters of an RF trap axis.

    q >= 0 by convention; the drive sign is folded into the RF phase.
    """

    a: float
    q: float

    def __post_init__(self):
        if self.q < 0:
            raise ValueError("q must be >= 0 (fold drive sign into phi_rf)")


@dataclass(frozen=True)
class TrapDrive:
    """Physical drive of one trap axis.

    static_voltage_term and dynamic_voltage_term are the products of applied
    voltage and geometric curvature (V * m^-2 equivalents) for the DC and RF
    electrodes respectively.
    """

    charge_number: int
    static_voltage_term: float
    dynamic_voltage_term: float
    ion_mass: float
    rf_angular_frequency: float
    rf_phase: float = 0.0

    def __post_init__(self):
        if self.rf_angular_frequency <= 0:
            raise ValueError("rf_angular_frequency must be positive")
        if self.ion_mass <= 0:
            raise ValueError("ion_mass must be positive")


@dataclass(frozen=True)
class FloquetSolution:
    """Characteristic exponent and Fourier coefficients C_{-J}..C_{J}.

    Coefficients are normalized to C_0 = 1.
    """

    beta: float
    coefficients: np.ndarray
    truncation_order: int

    @property
    def j_indices(self) -> np.ndarray:
        return np.arange(-self.truncation_order, self.truncation_order + 1)


@dataclass(frozen=True)
class MicromotionSums:
    """Phase-dependent sums over the Floquet coefficients (Appendix-style
    sigma/zeta notation): sigma_c = sum C_j cos(j phi), zeta_c = sum j C_j
    cos(j phi), etc., and the normalization rho."""

    sigma_c: float
    sigma_s: float
    zeta_c: float
    zeta_s: float
    rho: float
    phi_rf: float


def _monodromy_trace(a: float, q: float, rtol: float = 1e-12) -> float:
    """Trace of the one-period monodromy matrix of the Mathieu equation."""

    def rhs(t, y):
        k = a - 2.0 * q * np.cos(2.0 * t)
        return [y[1], -k * y[0], y[3], -k * y[2]]

    sol = solve_ivp(
        rhs,
        (0.0, np.pi),
        [1.0, 0.0, 0.0, 1.0],
        method="DOP853",
        rtol=rtol,
        atol=1e-14,
    )
    if not sol.success:
        raise Unstable(f"monodromy integration failed at (a={a}, q={q})")
    return sol.y[0, -1] + sol.y[3, -1]


def characteristic_exponent(params: MathieuParams) -> float:
    """Characteristic exponent beta in the first stability region.

    Computed from the phase of the monodromy-matrix eigenvalues
    (cos(pi beta) = trace / 2).  Raises Unstable when the eigenvalues
    leave the unit circle beyond STABILITY_EPS.
    """
    a, q = params.a, params.q
    if q == 0.0:
        if a <= 0.0 or a >= 1.0:
            raise Unstable(f"static trap with a={a} has no beta in (0, 1)")
        return float(np.sqrt(a))
    tr = _monodromy_trace(a, q)
    if abs(tr) > 2.0 - STABILITY_EPS:
        raise Unstable(f"(a={a}, q={q}) outside first stability region "
                       f"(|trace| = {abs(tr):.6g})")
    return float(np.arccos(tr / 2.0) / np.pi)


def stability(params: MathieuParams) -> bool:
    """True iff (a, q) supports a stable solution with beta in (0, 1)."""
    try:
        beta = characteristic_exponent(params)
    except Unstable:
        return False
    return 0.0 < beta < 1.0


def params_from_drive(drive: TrapDrive) -> MathieuParams:
    """Map physical drive constants to (a, q).

    a = 4 Z|e| U alpha / (m omega_RF^2), q = 2 Z|e| U~ alpha' / (m omega_RF^2)
    reported as a magnitude (the drive sign convention lives in rf_phase).
    """
    from scipy.constants import elementary_charge

    ze = drive.charge_number * elementary_charge
    denom = drive.ion_mass * drive.rf_angular_frequency**2
    a = 4.0 * ze * drive.static_voltage_term / denom
    q = abs(2.0 * ze * drive.dynamic_voltage_term / denom)
    return MathieuParams(a=a, q=q)


def _coefficient_ratios(a: float, q: float, beta: float, J: int):
    """Continued-fraction ratios of the decaying two-sided recurrence.

    Returns (up, down): up[j] = C_{j+1}/C_j for j = 0..J-1 and
    down[j] = C_{-(j+1)}/C_{-j} for j = 0..J-1.
    """
    def D(j):
        return (a - (2.0 * j + beta) ** 2) / q

    tail = J + 40
    up = np.empty(J)
    h = 0.0
    ladder = {}
    for j in range(tail, 0, -1):
        h = 1.0 / (D(j) - h)
        ladder[j - 1] = h
    for j in range(J):
        up[j] = ladder[j]

    down = np.empty(J)
    m = 0.0
    mladder = {}
    for j in range(-tail, 1):
        m = 1.0 / (D(j - 1) - m)
        mladder[j] = m  # C_{j-1}/C_j
    for j in range(J):
        down[j] = mladder[-j]
    return up, down


def _closure_residual(a: float, q: float, beta: float, J: int) -> float:
    """Residual of the j = 0 recurrence row for C built from ratio chains."""
    up, down = _coefficient_ratios(a, q, beta, J)
    D0 = (a - beta**2) / q
    return up[0] + down[0] - D0


def fourier_coefficients(params: MathieuParams, beta: float, J: int) -> np.ndarray:
    """Fourier coefficients C_{-J}..C_{J} of the stable Floquet solution.

    Solves the two-sided recurrence C_{j+1} - D_j C_j + C_{j-1} = 0,
    D_j = (a - (2j + beta)^2) / q, by continued-fraction ratio chains with
    decaying boundary conditions, normalized to C_0 = 1.  beta is refined
    by Newton iteration on the j = 0 closure so the recurrence residual is
    at machine level at every interior index.
    """
    if J < 3:
        raise ValueError("truncation order J must be >= 3")
    a, q = params.a, params.q
    coeffs = np.zeros(2 * J + 1)
    coeffs[J] = 1.0
    if q == 0.0:
        return coeffs

    # Newton-polish beta on the closure condition; the monodromy value is
    # already accurate so this only sharpens the last few digits.
    b = beta
    for _ in range(8):
        r = _closure_residual(a, q, b, J)
        db = 1e-9
        rp = _closure_residual(a, q, b + db, J)
        deriv = (rp - r) / db
        if deriv == 0.0:
            break
        step = -r / deriv
        b += step
        if abs(step) < 1e-15:
            break
    if abs(b - beta) > 1e-7:
        raise Unstable(
            f"coefficient closure incompatible with beta={beta} at (a={a}, q={q})"
        )

    up, down = _coefficient_ratios(a, q, b, J)
    for j in range(J):
        coeffs[J + j + 1] = up[j] * coeffs[J + j]
        coeffs[J - j - 1] = down[j] * coeffs[J - j]

    if max(abs(coeffs[0]), abs(coeffs[-1])) >= TRUNCATION_TOL:
        raise TruncationInsufficient(
            f"|C_(+-{J})| = {max(abs(coeffs[0]), abs(coeffs[-1])):.3g} "
            f">= {TRUNCATION_TOL}; raise J"
        )
    return coeffs


def floquet_solution(params: MathieuParams, J: int = DEFAULT_J) -> FloquetSolution:
    """Solve the full Floquet problem, escalating J once if truncation fails."""
    beta = characteristic_exponent(params)
    try:
        coeffs = fourier_coefficients(params, beta, J)
    except TruncationInsufficient:
        J = max(ESCALATED_J, J + 3)
        coeffs = fourier_coefficients(params, beta, J)
    return FloquetSolution(beta=beta, coefficients=coeffs, truncation_order=J)


def floquet_mode_values(solution: FloquetSolution, s) -> tuple:
    """Complex Floquet solution Phi(s) = e^{i beta s} sum_j C_j e^{2ijs}
    and its derivative dPhi/ds, evaluated at Mathieu time(s) s."""
    s = np.atleast_1d(np.asarray(s, dtype=float))
    rates = solution.beta + 2.0 * solution.j_indices
    waves = np.exp(1j * np.outer(s, rates))
    phi = waves @ solution.coefficients
    dphi = waves @ (1j * rates * solution.coefficients)
    return phi, dphi


def kick_excitation(solution: FloquetSolution, s) -> np.ndarray:
    """Complex amplitude B of the Floquet mode excited by a unit velocity
    kick at Mathieu time s.

    Defined by 2 Re[B Phi(s)] = 0 (no position jump) and
    2 Re[B dPhi(s)] = 1 (unit velocity jump, in dx/ds units).
    """
    phi, dphi = floquet_mode_values(solution, s)
    out = np.empty(phi.shape, dtype=complex)
    for k in range(phi.size):
        m = np.array([[phi[k].real, -phi[k].imag],
                      [dphi[k].real, -dphi[k].imag]])
        try:
            re, im = np.linalg.solve(m, (0.0, 0.5))
        except np.linalg.LinAlgError as exc:
            raise SingularDenominator(
                f"degenerate kick response at s={s}"
            ) from exc
        out[k] = complex(re, im)
    return out


def micromotion_sums(solution: FloquetSolution, phi_rf: float) -> MicromotionSums:
    """Evaluate the sigma/zeta sums and rho at drive phase phi_rf."""
    j = solution.j_indices
    c = solution.coefficients
    beta = solution.beta
    cosj = np.cos(j * phi_rf)
    sinj = np.sin(j * phi_rf)
    sc = float(np.dot(c, cosj))
    ss = float(np.dot(c, sinj))
    zc = float(np.dot(j * c, cosj))
    zs = float(np.dot(j * c, sinj))
    rho = 4.0 * np.pi * (sc * (beta * sc + 2.0 * zc) + ss * (beta * ss + 2.0 * zs))
    return MicromotionSums(sigma_c=sc, sigma_s=ss, zeta_c=zc, zeta_s=zs,
                           rho=rho, phi_rf=phi_rf)


def mu_factor(sums: MicromotionSums, beta: float) -> float:
    """Exact kick-displacement enhancement factor.

    mu = beta (sigma_c^2 + sigma_s^2) /
         (sigma_c (beta sigma_c + 2 zeta_c) + sigma_s (beta sigma_s + 2 zeta_s))

    Invariant under uniform rescaling of the Fourier coefficients.
    """
    num = beta * (sums.sigma_c**2 + sums.sigma_s**2)
    den = sums.rho / (4.0 * np.pi)
    if abs(den) < 1e-12 * max(abs(num), 1.0):
        raise SingularDenominator(
            f"mu denominator {den:.3g} vanishes at phi_rf={sums.phi_rf}"
        )
    return float(num / den)


def mu_approx(params: MathieuParams, beta: float, phi_rf: float) -> float:
    """Leading-order closed form of the enhancement factor:

    mu ~ (1 - 2 (beta^2 + 4) q cos(phi_rf) / (beta^2 - 4)^2)^2.
    """
    q = params.q
    return float((1.0 - 2.0 * (beta**2 + 4.0) * q * np.cos(phi_rf)
                  / (beta**2 - 4.0) ** 2) ** 2)


def mu_at(params: MathieuParams, phi_rf: float, J: int = DEFAULT_J) -> float:
    """Convenience: full mu from (a, q) and drive phase."""
    sol = floquet_solution(params, J)
    return mu_factor(micromotion_sums(sol, phi_rf), sol.beta)


def skew_factor(sums: MicromotionSums) -> float:
    """Velocity-quadrature skew 4 pi (sigma_s zeta_c - sigma_c zeta_s) / rho.

    Vanishes at phi_rf in {0, pi}; used when evaluating kick trains whose
    kicks are not locked to a single RF phase.
    """
    return float(4.0 * np.pi * (sums.sigma_s * sums.zeta_c
                                - sums.sigma_c * sums.zeta_s) / sums.rho)
