"""Pulse-timing optimization: multi-start local gradient searches on the
analytic infidelity over (tau1, tau2, tau3), with optional RF phase
locking, plus gate-time sweeps with and without micromotion.

The continuous search runs on the smooth (unsnapped) objective; in
phase-locked mode the best continuous point is snapped to the RF lock grid
and refined by a greedy integer-grid polish.  This searches the locked
manifold without destroying gradients.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize, root
from scipy.stats import qmc

from .fidelity import LaserConfig, TARGET_PHASE, ThermalState
from .gatescheme import FRAG_PATTERN, frag_schedule, lock_grid_spacing
from .mathieu import mu_at
from .trapmodel import MicrotrapArray, ModeSpectrum, PaulTrap, mode_spectrum

#: minimum tau, in trap periods, to keep timings strictly positive
TAU_FLOOR = 1e-4


@dataclass(frozen=True)
class OptimizationConfig:
    time_bound: float
    n: int
    starts: int = 512
    seed: int = 0
    mu_mode: str = "with_micromotion"
    target_sign: int = 1
    laser: LaserConfig = field(default_factory=LaserConfig)
    thermal: ThermalState = field(default_factory=ThermalState)
    gradient_tol: float = 1e-12
    polish_range: int = 2
    lock: bool | None = None

    def __post_init__(self):
        if self.time_bound <= 0:
            raise ValueError("time_bound must be positive")
        if self.starts < 1 or self.n < 1:
            raise ValueError("starts and n must be >= 1")
        if self.mu_mode not in ("with_micromotion", "without_micromotion"):
            raise ValueError(f"unknown mu_mode {self.mu_mode!r}")


@dataclass(frozen=True)
class OptimizationResult:
    best_schedule: object
    infidelity: float
    achieved_gate_time: float
    starts_converged: int
    mu: float
    taus: tuple


class InfidelityObjective:
    """Fast analytic infidelity of a FRAG schedule as a function of
    (tau1, tau2, tau3); algebra matches `fidelity.evaluate_schedule`."""

    def __init__(self, spectrum: ModeSpectrum, mu: float, n: int,
                 laser: LaserConfig, thermal: ThermalState):
        self.r = spectrum.ratios
        self.bb = np.array([m.b[0] * m.b[1] for m in spectrum.modes])
        self.mu = mu
        self.n = n
        self.eta = laser.lamb_dicke_eta
        nbar = thermal.nbar(len(spectrum.modes))
        b = np.array([m.b for m in spectrum.modes])
        self.weights = (0.5 + nbar) * (b[:, 0] ** 2 + b[:, 1] ** 2)
        self.z = np.array(FRAG_PATTERN, float) * n

    def _times(self, taus):
        t1, t2, t3 = taus
        return np.array([-t1, -t2, -t3, t3, t2, t1])

    #: dt_k/dtau_m for t = (-t1, -t2, -t3, t3, t2, t1)
    _JAC_T = np.array([[-1.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, -1.0],
                       [0.0, 0.0, 1.0], [0.0, 1.0, 0.0], [1.0, 0.0, 0.0]])

    def _terms(self, taus):
        t = self._times(taus)
        omega = 2.0 * np.pi * self.r
        s = np.sin(np.outer(omega, t)) @ self.z
        dp = 2.0 * self.mu / np.sqrt(self.r) * s
        dt = np.abs(t[:, None] - t[None, :])
        zz = self.z[:, None] * self.z[None, :]
        g = np.array([np.sum(zz * np.sin(w * dt)) for w in omega])
        theta = np.sum(8.0 * self.eta**2 * self.mu / self.r * self.bb * g)
        return t, omega, zz, dt, dp, theta

    def __call__(self, taus) -> float:
        _, _, _, _, dp, theta = self._terms(taus)
        dphi = abs(theta) - TARGET_PHASE
        return float((2.0 / 3.0) * dphi**2
                     + (4.0 / 3.0) * np.sum(self.weights
                                            * (self.eta * dp) ** 2))

    def with_gradient(self, taus):
        """(value, gradient) with exact derivatives of the sine sums."""
        t, omega, zz, dt, dp, theta = self._terms(taus)
        dphi = abs(theta) - TARGET_PHASE
        value = float((2.0 / 3.0) * dphi**2
                      + (4.0 / 3.0) * np.sum(self.weights
                                             * (self.eta * dp) ** 2))
        # d|t_i - t_j| / dtau_m
        sgn = np.sign(t[:, None] - t[None, :])
        ddt = sgn[:, :, None] * (self._JAC_T[:, None, :]
                                 - self._JAC_T[None, :, :])
        grad = np.zeros(3)
        dtheta = np.zeros(3)
        for p, w in enumerate(omega):
            # restoration derivative
            ds = (self.z * w * np.cos(w * t)) @ self._JAC_T
            ddp = 2.0 * self.mu / np.sqrt(self.r[p]) * ds
            grad += (8.0 / 3.0) * self.weights[p] * self.eta**2 * dp[p] * ddp
            # phase derivative
            dg = np.einsum("ij,ijm->m", zz * w * np.cos(w * dt), ddt)
            dtheta += 8.0 * self.eta**2 * self.mu / self.r[p] * self.bb[p] * dg
        grad += (4.0 / 3.0) * dphi * np.sign(theta) * dtheta
        return value, grad

    def residuals(self, taus):
        """Residual vector [dP_0, dP_1, theta^2 - (pi/4)^2] and its Jacobian;
        a root is an exact gate (zero objective).  The squared phase
        residual is smooth through theta = 0, unlike |theta| - pi/4."""
        t, omega, zz, dt, dp, theta = self._terms(taus)
        res = np.array([dp[0], dp[1], theta**2 - TARGET_PHASE**2])
        sgn = np.sign(t[:, None] - t[None, :])
        ddt = sgn[:, :, None] * (self._JAC_T[:, None, :]
                                 - self._JAC_T[None, :, :])
        jac = np.zeros((3, 3))
        dtheta = np.zeros(3)
        for p, w in enumerate(omega):
            ds = (self.z * w * np.cos(w * t)) @ self._JAC_T
            jac[p] = 2.0 * self.mu / np.sqrt(self.r[p]) * ds
            dg = np.einsum("ij,ijm->m", zz * w * np.cos(w * dt), ddt)
            dtheta += 8.0 * self.eta**2 * self.mu / self.r[p] * self.bb[p] * dg
        jac[2] = 2.0 * theta * dtheta
        return res, jac


def local_search(initial, objective: InfidelityObjective,
                 time_bound: float, gradient_tol: float = 1e-12):
    """Local search from one starting point.

    A Newton solve drives the exact-gate residuals (mode closures and phase
    target) to a root; a box-constrained quasi-Newton descent then polishes
    the objective.  The root stage cuts through the ill-conditioned closure
    valley that plain descent crawls along.  Returns (taus, value,
    converged); the returned value never exceeds the starting value.
    """
    x0 = np.asarray(initial, float)
    f0 = objective(x0)
    lo, hi = TAU_FLOOR, time_bound / 2.0
    start = x0
    rooted = root(objective.residuals, x0, jac=True, method="hybr",
                  options={"xtol": 1e-14})
    if rooted.success and np.all(rooted.x > lo) and np.all(rooted.x <= hi):
        start = rooted.x
    res = minimize(objective.with_gradient, start, jac=True,
                   method="L-BFGS-B", bounds=[(lo, hi)] * 3,
                   options={"ftol": 1e-18, "gtol": gradient_tol,
                            "maxiter": 2000})
    if res.fun <= f0:
        return tuple(res.x), float(res.fun), bool(res.success)
    return tuple(x0), float(f0), False


def _snap_polish(taus, objective: InfidelityObjective, beta: float,
                 time_bound: float, polish_range: int):
    """Snap timings to the RF lock grid and greedily polish on the grid."""
    grid = lock_grid_spacing(beta)
    k_max = int(np.floor(time_bound / 2.0 / grid))
    if k_max < 1:
        raise ValueError("time bound shorter than one RF period")
    k = np.clip(np.round(np.asarray(taus) / grid).astype(int), 1, k_max)
    best = objective(k * grid)
    moves = [m for m in itertools.product(range(-polish_range,
                                                polish_range + 1), repeat=3)
             if any(m)]
    improved = True
    while improved:
        improved = False
        for m in moves:
            cand = k + m
            if cand.min() < 1 or cand.max() > k_max:
                continue
            val = objective(cand * grid)
            if val < best - 1e-18:
                best, k = val, cand
                improved = True
                break
    return tuple(k * grid), best


def _sobol_starts(starts: int, seed: int, high: float) -> np.ndarray:
    sampler = qmc.Sobol(d=3, scramble=True, seed=seed)
    pts = sampler.random(starts)
    return TAU_FLOOR + pts * (high - TAU_FLOOR)


def _resolve(trap, phi_rf: float):
    """(spectrum, beta, mu_locked) for a trap object."""
    spectrum = mode_spectrum(trap, phi_rf=phi_rf) \
        if isinstance(trap, MicrotrapArray) else mode_spectrum(trap)
    if isinstance(trap, MicrotrapArray):
        beta, params = trap.beta, trap.mathieu
    elif isinstance(trap, PaulTrap):
        beta, params = trap.beta, trap.mathieu_radial
    else:
        raise TypeError(f"unsupported trap type {type(trap)!r}")
    mu = 1.0 if params.q == 0.0 else mu_at(params, phi_rf)
    return spectrum, beta, mu


def optimize_schedule(spectrum: ModeSpectrum, beta: float, mu: float,
                      config: OptimizationConfig,
                      phi_rf: float = np.pi) -> OptimizationResult:
    """Core multi-start search against an explicit spectrum and mu."""
    with_mu = config.mu_mode == "with_micromotion"
    locked = with_mu if config.lock is None else config.lock
    mu_eff = mu if with_mu else 1.0
    objective = InfidelityObjective(spectrum, mu_eff, config.n,
                                    config.laser, config.thermal)
    starts = _sobol_starts(config.starts, config.seed,
                           config.time_bound / 2.0)
    candidates = []
    n_converged = 0
    for x0 in starts:
        taus, val, ok = local_search(x0, objective, config.time_bound,
                                     config.gradient_tol)
        n_converged += ok
        if locked:
            taus, val = _snap_polish(taus, objective, beta,
                                     config.time_bound, config.polish_range)
        candidates.append((val, taus))
    candidates.sort(key=lambda c: (c[0], c[1]))
    best_val, best_taus = candidates[0]
    schedule = frag_schedule(*best_taus, n=config.n, phi_rf=phi_rf)
    return OptimizationResult(best_schedule=schedule,
                              infidelity=best_val,
                              achieved_gate_time=schedule.gate_time,
                              starts_converged=n_converged,
                              mu=mu_eff, taus=tuple(best_taus))


def optimize_gate(trap, config: OptimizationConfig,
                  phi_rf: float = np.pi) -> OptimizationResult:
    """Best schedule for a trap within the configured gate-time bound."""
    spectrum, beta, mu = _resolve(trap, phi_rf)
    return optimize_schedule(spectrum, beta, mu, config, phi_rf)


def sweep_gate_time(trap, n: int, bounds, mus=None,
                    starts: int = 512, seed: int = 0,
                    laser: LaserConfig = LaserConfig(),
                    thermal: ThermalState = ThermalState(),
                    phi_rf: float = np.pi) -> list:
    """Map best infidelity versus gate-time bound for each mu value.

    mus=None uses [1.0, mu(trap)].  Returns a list of row dicts
    (gate_time_bound, achieved_gate_time, infidelity, mu, taus, converged).
    """
    spectrum, beta, trap_mu = _resolve(trap, phi_rf)
    if mus is None:
        mus = [1.0, trap_mu]
    rows = []
    for bound, mu in itertools.product(bounds, mus):
        mode = "without_micromotion" if mu == 1.0 else "with_micromotion"
        config = OptimizationConfig(time_bound=bound, n=n, starts=starts,
                                    seed=seed, mu_mode=mode, laser=laser,
                                    thermal=thermal)
        result = optimize_schedule(spectrum, beta, mu, config, phi_rf)
        rows.append({"gate_time_bound": bound,
                     "achieved_gate_time": result.achieved_gate_time,
                     "infidelity": result.infidelity,
                     "mu": mu,
                     "n": n,
                     "tau1": result.taus[0],
                     "tau2": result.taus[1],
                     "tau3": result.taus[2],
                     "converged_starts": result.starts_converged})
    return rows
