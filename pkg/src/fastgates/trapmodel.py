"""Trap geometries, equilibria, the RF-periodic crystal solution, secular
mode spectra via Hill/Mathieu reduction, and the trap-characterizing
parameter chi.

Internal dimensionless convention: time tau in secular trap periods of the
common mode (tau = beta * omega_RF * t / (4 pi)), lengths in units of the
microtrap separation d (microtraps) or the equilibrium axial separation
(Paul trap).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.constants import atomic_mass, e as _e, epsilon_0
from scipy.integrate import quad, solve_ivp
from scipy.optimize import brentq, least_squares

from .errors import NoConvergence, QuadratureFailure, Unstable
from .mathieu import (
    MathieuParams,
    characteristic_exponent,
    floquet_solution,
)

#: default ion species mass (Ca-40) in kg
CA40_MASS = 39.9626 * atomic_mass


def coulomb_alpha(ion_mass: float) -> float:
    """alpha = e^2 / (4 pi eps0 M), the per-mass Coulomb strength (m^3/s^2)."""
    return _e**2 / (4.0 * np.pi * epsilon_0 * ion_mass)


@dataclass(frozen=True)
class MicrotrapArray:
    """Two ions in separate microtraps along the RF (gate) axis."""

    separation_d: float
    secular_omega: float
    mathieu: MathieuParams
    rf_angular_frequency: float
    ion_mass: float = CA40_MASS
    ion_count: int = 2
    #: fractional secular-frequency offsets per trap (stray-field model)
    frequency_offsets: tuple = (0.0, 0.0)

    def __post_init__(self):
        if self.separation_d <= 0:
            raise ValueError("separation_d must be positive")
        if self.ion_count != 2:
            raise ValueError("gate operations support exactly two ions")
        beta = characteristic_exponent(self.mathieu)
        expected = 0.5 * beta * self.rf_angular_frequency
        if abs(expected - self.secular_omega) > 1e-6 * self.secular_omega:
            raise ValueError(
                "inconsistent triple: secular_omega != beta * omega_RF / 2 "
                f"({self.secular_omega:.6g} vs {expected:.6g})"
            )

    @property
    def beta(self) -> float:
        return 2.0 * self.secular_omega / self.rf_angular_frequency

    @property
    def xi(self) -> float:
        return xi_param(self.separation_d, self.secular_omega, self.ion_mass)

    @classmethod
    def build(cls, separation_d: float, secular_omega: float, q: float,
              rf_over_secular: float, ion_mass: float = CA40_MASS,
              frequency_offsets: tuple = (0.0, 0.0)) -> "MicrotrapArray":
        """Construct with a solved to give the requested RF/secular ratio."""
        beta = 2.0 / rf_over_secular
        a = solve_a_for_beta(q, beta)
        return cls(separation_d=separation_d, secular_omega=secular_omega,
                   mathieu=MathieuParams(a=a, q=q),
                   rf_angular_frequency=rf_over_secular * secular_omega,
                   ion_mass=ion_mass, frequency_offsets=frequency_offsets)


@dataclass(frozen=True)
class PaulTrap:
    """Two ions co-trapped in a linear Paul trap; gates use the radial modes."""

    mathieu_radial: MathieuParams
    axial_a: float
    kappa: float
    rf_angular_frequency: float
    ion_mass: float = CA40_MASS
    ion_count: int = 2

    def __post_init__(self):
        if not 0.0 < self.kappa < 1.0:
            raise ValueError("kappa = omega_A/omega_T must lie in (0, 1)")
        if self.ion_count != 2:
            raise ValueError("gate operations support exactly two ions")

    @property
    def beta(self) -> float:
        return characteristic_exponent(self.mathieu_radial)

    @property
    def radial_omega(self) -> float:
        return 0.5 * self.beta * self.rf_angular_frequency

    @property
    def axial_omega(self) -> float:
        return 0.5 * np.sqrt(self.axial_a) * self.rf_angular_frequency

    @classmethod
    def build(cls, q: float, kappa: float, rf_over_secular: float,
              secular_omega: float, ion_mass: float = CA40_MASS) -> "PaulTrap":
        beta = 2.0 / rf_over_secular
        a = solve_a_for_beta(q, beta)
        return cls(mathieu_radial=MathieuParams(a=a, q=q),
                   axial_a=(kappa * beta) ** 2, kappa=kappa,
                   rf_angular_frequency=rf_over_secular * secular_omega,
                   ion_mass=ion_mass)


@dataclass(frozen=True)
class PeriodicCrystal:
    """RF-periodic equilibrium motion of the two-ion microtrap crystal.

    cosine_coefficients[j, i] (meters) multiplies cos(4 pi j tau / beta + j
    phi_rf) for ion i; sine_coefficients likewise.  Mirror symmetry makes
    column 1 the negative of column 0.
    """

    cosine_coefficients: np.ndarray
    sine_coefficients: np.ndarray
    harmonic_count: int
    separation_d: float
    beta: float

    def relative_series(self) -> tuple[np.ndarray, np.ndarray]:
        """Dimensionless coefficients of Delta(tau) = (x2 - x1)/d."""
        u = (self.cosine_coefficients[:, 1] - self.cosine_coefficients[:, 0])
        w = (self.sine_coefficients[:, 1] - self.sine_coefficients[:, 0])
        return u / self.separation_d, w / self.separation_d

    def relative_displacement(self, tau, phi_rf: float = np.pi):
        """Delta(tau) in units of d (excludes the fixed separation 1)."""
        u, w = self.relative_series()
        j = np.arange(self.harmonic_count + 1)
        arg = np.outer(np.atleast_1d(tau), 4.0 * np.pi * j / self.beta) + j * phi_rf
        vals = np.cos(arg) @ u + np.sin(arg) @ w
        return vals if np.ndim(tau) else float(vals[0])


@dataclass(frozen=True)
class Mode:
    """One secular mode: frequency ratio to the single-ion omega, coupling
    vector, and its effective Mathieu parameters."""

    name: str
    ratio: float
    b: tuple
    a_p: float
    q_p: float
    beta_p: float


@dataclass(frozen=True)
class ModeSpectrum:
    modes: tuple
    secular_omega: float

    @property
    def ratios(self) -> np.ndarray:
        return np.array([m.ratio for m in self.modes])

    @property
    def omegas(self) -> np.ndarray:
        return self.secular_omega * self.ratios

    @property
    def chi(self) -> float:
        """Normalized splitting of the non-COM mode from the COM mode."""
        other = [m for m in self.modes if m.name != "com"]
        return other[0].ratio - 1.0


@dataclass(frozen=True)
class ChiParam:
    chi: float
    xi: float | None = None


def solve_a_for_beta(q: float, beta_target: float) -> float:
    """Invert beta(a, q) = beta_target in a within the first stability region."""
    if q == 0.0:
        return beta_target**2

    def f(a):
        try:
            return characteristic_exponent(MathieuParams(a=a, q=q)) - beta_target
        except Unstable:
            return 10.0

    hi = beta_target**2 - q * q / 2.0 + 0.02
    while f(hi) < 0:
        hi += 0.02
    lo, step = hi, 0.005
    while True:
        lo -= step
        v = f(lo)
        if v == 10.0:
            lo += step
            step /= 4.0
            if step < 1e-12:
                raise Unstable(f"no a gives beta={beta_target} at q={q}")
            continue
        if v < 0:
            break
    return brentq(f, lo, hi, xtol=1e-14)


def xi_param(d: float, omega: float, ion_mass: float) -> float:
    """Dimensionless trap-separation parameter xi = d^3 omega^2 / alpha."""
    if d <= 0 or omega <= 0 or ion_mass <= 0:
        raise ValueError("d, omega, ion_mass must be positive")
    return d**3 * omega**2 / coulomb_alpha(ion_mass)


def chi_microtrap(xi: float) -> ChiParam:
    """Mode splitting chi(xi) for the two-microtrap geometry (closed form).

    Decreases from sqrt(3) - 1 (merged traps, xi -> 0) towards 2/xi for
    widely separated traps.
    """
    if xi <= 0:
        raise ValueError("xi must be positive")
    root = np.sqrt(3.0) * np.sqrt(27.0 + 2.0 * xi)
    gamma = 1.0 + 3.0 * (9.0 + root) / xi
    beta_aux = 9.0 - root
    chi = np.sqrt((9.0 - beta_aux * gamma ** (1.0 / 3.0)
                   + beta_aux * gamma ** (2.0 / 3.0)) / 3.0) - 1.0
    return ChiParam(chi=float(chi), xi=xi)


def chi_paul(kappa: float) -> ChiParam:
    """Radial-mode splitting chi(kappa) = sqrt(1 - kappa^2) - 1 in (-1, 0)."""
    if not 0.0 < kappa <= 1.0:
        raise ValueError("kappa must lie in (0, 1]")
    return ChiParam(chi=float(np.sqrt(1.0 - kappa**2) - 1.0))


def _microtrap_lambda(trap: MicrotrapArray) -> float:
    """Dimensionless Coulomb prefactor (2 pi)^2 / xi of the microtrap EOM."""
    return (2.0 * np.pi) ** 2 / trap.xi


def equilibrium_positions(trap, coulomb_on: bool = True) -> np.ndarray:
    """Static equilibrium positions (meters) about the geometry center.

    Microtraps: ions sit just outside the trap centers, at +-(d/2 + delta).
    Paul trap: axial positions +-( alpha / (4 omega_A^2) )^(1/3).
    The coulomb_on=False hook returns the trap centers (microtraps only).
    """
    if isinstance(trap, MicrotrapArray):
        d = trap.separation_d
        if not coulomb_on:
            return np.array([-d / 2.0, d / 2.0])
        xi = trap.xi
        # solve u (1 + 2u)^2 = 1/xi for the outward displacement u (units of d)
        u = 1.0 / xi
        for _ in range(100):
            fval = u * (1.0 + 2.0 * u) ** 2 - 1.0 / xi
            fp = (1.0 + 2.0 * u) ** 2 + 4.0 * u * (1.0 + 2.0 * u)
            step = fval / fp
            u -= step
            if abs(step) < 1e-18:
                break
        else:
            raise NoConvergence("microtrap equilibrium Newton solve stalled")
        return np.array([-(0.5 + u) * d, (0.5 + u) * d])
    if isinstance(trap, PaulTrap):
        alpha = coulomb_alpha(trap.ion_mass)
        u = (alpha / (4.0 * trap.axial_omega**2)) ** (1.0 / 3.0)
        return np.array([-u, u])
    raise TypeError(f"unsupported trap type {type(trap)!r}")


def _relative_ode_rhs(trap: MicrotrapArray, phi_rf: float):
    """RHS of the dimensionless relative-coordinate ODE for the microtrap.

    Delta'' = -(2 pi / beta)^2 (a - 2 q cos(4 pi tau / beta + phi)) Delta
              + 2 Lambda / (1 + Delta)^2
    """
    beta = trap.beta
    a, q = trap.mathieu.a, trap.mathieu.q
    lam = _microtrap_lambda(trap)
    k0 = (2.0 * np.pi / beta) ** 2
    wrf = 4.0 * np.pi / beta

    def rhs(tau, y):
        drive = a - 2.0 * q * np.cos(wrf * tau + phi_rf)
        return [y[1], -k0 * drive * y[0] + 2.0 * lam / (1.0 + y[0]) ** 2]

    return rhs


def find_periodic_crystal(trap: MicrotrapArray, harmonic_count: int = 6,
                          phi_rf: float = np.pi, tol: float = 1e-10,
                          max_iterations: int = 200) -> PeriodicCrystal:
    """RF-periodic crystal solution by the iterate-and-refit method.

    The trial Fourier series seeds an ODE integration over a window of an
    integer number of RF periods close to four secular periods; the mean and
    the RF-harmonic Fourier components of the settled motion update the
    coefficients (damping 0.5) until the coefficient vector is stationary.
    """
    d = trap.separation_d
    beta = trap.beta
    J = harmonic_count
    eq = equilibrium_positions(trap)
    delta_static = (eq[1] - eq[0]) / d - 1.0  # dimensionless Delta at q = 0

    u = np.zeros(J + 1)
    u[0] = delta_static
    w = np.zeros(J + 1)
    if trap.mathieu.q == 0.0:
        return _crystal_from_relative(u, w, trap)

    rf_period = beta / 2.0
    n_rf = max(int(round(4.0 / rf_period)), 4)
    window = n_rf * rf_period
    samples_per_rf = 64
    n_samp = n_rf * samples_per_rf
    taus = np.linspace(0.0, window, n_samp, endpoint=False)
    jgrid = np.arange(J + 1)
    phases = np.outer(taus, 4.0 * np.pi * jgrid / beta) + jgrid * phi_rf
    cosb = np.cos(phases)
    sinb = np.sin(phases)

    rhs = _relative_ode_rhs(trap, phi_rf)
    prev = np.concatenate([u, w])
    for _ in range(max_iterations):
        # initial conditions from the trial series at tau = 0
        y0 = float(np.dot(u, np.cos(jgrid * phi_rf))
                   + np.dot(w, np.sin(jgrid * phi_rf)))
        v0 = float(np.dot(u * (4.0 * np.pi * jgrid / beta),
                          -np.sin(jgrid * phi_rf))
                   + np.dot(w * (4.0 * np.pi * jgrid / beta),
                            np.cos(jgrid * phi_rf)))
        sol = solve_ivp(rhs, (0.0, window), [y0, v0], t_eval=taus,
                        method="DOP853", rtol=1e-12, atol=1e-14)
        if not sol.success:
            raise NoConvergence("crystal ODE integration failed")
        y = sol.y[0]
        u_new = np.empty(J + 1)
        w_new = np.empty(J + 1)
        u_new[0] = np.mean(y)
        w_new[0] = 0.0
        for j in range(1, J + 1):
            u_new[j] = 2.0 * np.mean(y * cosb[:, j])
            w_new[j] = 2.0 * np.mean(y * sinb[:, j])
        u = 0.5 * u + 0.5 * u_new
        w = 0.5 * w + 0.5 * w_new
        vec = np.concatenate([u, w])
        if np.max(np.abs(vec - prev)) < tol:
            u, w = _harmonic_balance_polish(u, w, trap, phi_rf)
            return _crystal_from_relative(u, w, trap)
        prev = vec
    raise NoConvergence(
        f"periodic crystal did not converge in {max_iterations} iterations"
    )


def _harmonic_balance_polish(u: np.ndarray, w: np.ndarray,
                             trap: MicrotrapArray,
                             phi_rf: float) -> tuple[np.ndarray, np.ndarray]:
    """Newton-polish the relative Fourier series on the collocated ODE
    residual; removes the projection bias of the iterate-and-refit loop."""
    J = len(u) - 1
    beta = trap.beta
    a, q = trap.mathieu.a, trap.mathieu.q
    k0 = (2.0 * np.pi / beta) ** 2
    lam = _microtrap_lambda(trap)
    jgrid = np.arange(J + 1)
    taus = np.linspace(0.0, beta / 2.0, 8 * (J + 1), endpoint=False)
    arg = np.outer(taus, 4.0 * np.pi * jgrid / beta) + jgrid * phi_rf
    cosb, sinb = np.cos(arg), np.sin(arg)
    freq2 = (4.0 * np.pi * jgrid / beta) ** 2
    drive = a - 2.0 * q * np.cos(4.0 * np.pi * taus / beta + phi_rf)

    def residual(x):
        uu = x[: J + 1]
        ww = np.concatenate([[0.0], x[J + 1:]])
        y = cosb @ uu + sinb @ ww
        ypp = cosb @ (-freq2 * uu) + sinb @ (-freq2 * ww)
        return ypp + k0 * drive * y - 2.0 * lam / (1.0 + y) ** 2

    fit = least_squares(residual, np.concatenate([u, w[1:]]), method="lm",
                        xtol=1e-15, ftol=1e-15)
    if not fit.success:
        raise NoConvergence("harmonic-balance polish failed")
    return fit.x[: J + 1], np.concatenate([[0.0], fit.x[J + 1:]])


def _crystal_from_relative(u: np.ndarray, w: np.ndarray,
                           trap: MicrotrapArray) -> PeriodicCrystal:
    d = trap.separation_d
    cos_c = np.column_stack([-u / 2.0, u / 2.0]) * d
    sin_c = np.column_stack([-w / 2.0, w / 2.0]) * d
    return PeriodicCrystal(cosine_coefficients=cos_c, sine_coefficients=sin_c,
                           harmonic_count=len(u) - 1,
                           separation_d=d, beta=trap.beta)


def crystal_residual(crystal: PeriodicCrystal, trap: MicrotrapArray,
                     phi_rf: float = np.pi, n_samples: int = 2000) -> float:
    """Max ODE residual of the crystal over one RF period, relative to the
    peak force scale."""
    beta = trap.beta
    u, w = crystal.relative_series()
    J = crystal.harmonic_count
    jgrid = np.arange(J + 1)
    taus = np.linspace(0.0, beta / 2.0, n_samples)
    arg = np.outer(taus, 4.0 * np.pi * jgrid / beta) + jgrid * phi_rf
    freq = 4.0 * np.pi * jgrid / beta
    y = np.cos(arg) @ u + np.sin(arg) @ w
    ypp = np.cos(arg) @ (-(freq**2) * u) + np.sin(arg) @ (-(freq**2) * w)
    a, q = trap.mathieu.a, trap.mathieu.q
    k0 = (2.0 * np.pi / beta) ** 2
    lam = _microtrap_lambda(trap)
    drive = a - 2.0 * q * np.cos(4.0 * np.pi * taus / beta + phi_rf)
    force = -k0 * drive * y + 2.0 * lam / (1.0 + y) ** 2
    scale = np.max(np.abs(force)) + 1e-300
    return float(np.max(np.abs(ypp - force)) / scale)


def hill_coefficients(crystal: PeriodicCrystal, trap: MicrotrapArray,
                      j_max: int, phi_rf: float = np.pi) -> np.ndarray:
    """Fourier components h_j of the Coulomb curvature along the relative
    (breathing) mode, in Mathieu normalization.

    The relative coordinate obeys a Hill equation whose Coulomb part is
    K(tau) = 4 Lambda / (1 + Delta_0(tau))^3; we return h_j such that
    K(tau) beta^2 / (2 pi)^2 = h_0 + sum_j h_j cos(4 pi j tau / beta + j phi).
    The first-order truncation shifts the mode parameters to
    a_p = a + h_0, q_p = q - h_1 / 2.
    """
    beta = trap.beta
    lam = _microtrap_lambda(trap)
    scale = beta**2 / (2.0 * np.pi) ** 2
    period = beta / 2.0

    def curvature(tau):
        delta = crystal.relative_displacement(tau, phi_rf)
        return 4.0 * lam / (1.0 + delta) ** 3 * scale

    h = np.empty(j_max + 1)
    for j in range(j_max + 1):
        def integrand(tau, j=j):
            return curvature(tau) * np.cos(4.0 * np.pi * j * tau / beta
                                           + j * phi_rf)
        val, err = quad(integrand, 0.0, period, limit=200,
                        epsabs=1e-14, epsrel=1e-12)
        if err > 1e-8 * max(abs(val), 1.0):
            raise QuadratureFailure(f"h_{j} quadrature error {err:.3g}")
        h[j] = (1.0 if j == 0 else 2.0) * val / period
    return h


def mode_spectrum(trap, crystal: PeriodicCrystal | None = None,
                  phi_rf: float = np.pi) -> ModeSpectrum:
    """Secular mode spectrum of a two-ion trap.

    Microtraps: the COM mode keeps the bare (a, q); the breathing mode's
    Mathieu parameters come from the first-order Hill reduction around the
    periodic crystal.  Paul radial modes: the rocking mode has
    a_p = a - beta^2 kappa^2.
    """
    b_com = (1.0 / np.sqrt(2.0), 1.0 / np.sqrt(2.0))
    b_rel = (1.0 / np.sqrt(2.0), -1.0 / np.sqrt(2.0))
    if isinstance(trap, MicrotrapArray):
        a, q = trap.mathieu.a, trap.mathieu.q
        beta = trap.beta
        if crystal is None:
            crystal = find_periodic_crystal(trap, phi_rf=phi_rf)
        h = hill_coefficients(crystal, trap, j_max=2, phi_rf=phi_rf)
        a_br = a + h[0]
        q_br = q - h[1] / 2.0
        beta_br = characteristic_exponent(MathieuParams(a=a_br, q=abs(q_br)))
        com = Mode("com", 1.0, b_com, a, q, beta)
        br = Mode("breathing", beta_br / beta, b_rel, a_br, q_br, beta_br)
        return ModeSpectrum(modes=(com, br), secular_omega=trap.secular_omega)
    if isinstance(trap, PaulTrap):
        a, q = trap.mathieu_radial.a, trap.mathieu_radial.q
        beta = trap.beta
        a_r = a - beta**2 * trap.kappa**2
        beta_r = characteristic_exponent(MathieuParams(a=a_r, q=q))
        com = Mode("com", 1.0, b_com, a, q, beta)
        rock = Mode("rocking", beta_r / beta, b_rel, a_r, q, beta_r)
        return ModeSpectrum(modes=(com, rock), secular_omega=trap.radial_omega)
    raise TypeError(f"unsupported trap type {type(trap)!r}")


def spectrum_from_chi(chi: float, secular_omega: float = 2.0 * np.pi * 1e6,
                      mathieu: MathieuParams | None = None,
                      beta: float | None = None) -> ModeSpectrum:
    """Idealized two-ion spectrum specified directly by chi (mode ratio
    1 + chi); used for gate design when the trap is characterized by chi."""
    b_com = (1.0 / np.sqrt(2.0), 1.0 / np.sqrt(2.0))
    b_rel = (1.0 / np.sqrt(2.0), -1.0 / np.sqrt(2.0))
    a = mathieu.a if mathieu else float("nan")
    q = mathieu.q if mathieu else 0.0
    bt = beta if beta is not None else float("nan")
    name = "breathing" if chi >= 0 else "rocking"
    com = Mode("com", 1.0, b_com, a, q, bt)
    other = Mode(name, 1.0 + chi, b_rel, float("nan"), q, float("nan"))
    return ModeSpectrum(modes=(com, other), secular_omega=secular_omega)
