"""FRAG pulse schedules: construction, RF phase locking, and expansion of
instantaneous kick groups into finite-repetition-rate trains.

Times are dimensionless, in units of secular trap periods of the common
mode.  A schedule holds six kick groups at antisymmetric times with signed
pair counts (-n, 2n, -2n, 2n, -2n, n); each count z_j stands for |z_j|
counter-propagating pi-pulse pairs of sign sgn(z_j).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import GroupOverlap, InvalidTiming

#: relative count pattern of the six-group antisymmetric scheme
FRAG_PATTERN = (-1, 2, -2, 2, -2, 1)


@dataclass(frozen=True)
class PulseSchedule:
    """Six instantaneous kick groups of a FRAG gate."""

    group_times: tuple
    group_counts: tuple
    scale_n: int
    phi_rf: float = np.pi

    def __post_init__(self):
        t = self.group_times
        z = self.group_counts
        if len(t) != 6 or len(z) != 6:
            raise InvalidTiming("a schedule has exactly six groups")
        if self.scale_n < 1:
            raise InvalidTiming("scale_n must be a positive integer")
        n = self.scale_n
        if tuple(z) != tuple(p * n for p in FRAG_PATTERN):
            raise InvalidTiming(f"counts must follow {FRAG_PATTERN} x n")
        for k in range(3):
            if abs(t[k] + t[5 - k]) > 1e-12:
                raise InvalidTiming("group times must be antisymmetric")

    @property
    def taus(self) -> tuple:
        """(tau1, tau2, tau3), the positive half-schedule times."""
        return (self.group_times[5], self.group_times[4], self.group_times[3])

    @property
    def gate_time(self) -> float:
        return 2.0 * max(abs(t) for t in self.group_times)

    def shifted(self, delta: float) -> "PulseSchedule":
        """Schedule with all groups delayed by delta (breaks antisymmetry;
        used internally by sweeps via the arrays below, not the constructor)."""
        return _RawSchedule(
            group_times=tuple(t + delta for t in self.group_times),
            group_counts=self.group_counts, scale_n=self.scale_n,
            phi_rf=self.phi_rf)

    def times_counts(self) -> tuple[np.ndarray, np.ndarray]:
        return np.asarray(self.group_times, float), np.asarray(
            self.group_counts, float)


@dataclass(frozen=True)
class _RawSchedule:
    """Schedule container without FRAG-structure validation (sweep helper)."""

    group_times: tuple
    group_counts: tuple
    scale_n: int
    phi_rf: float

    @property
    def gate_time(self) -> float:
        return max(self.group_times) - min(self.group_times)

    def times_counts(self) -> tuple[np.ndarray, np.ndarray]:
        return np.asarray(self.group_times, float), np.asarray(
            self.group_counts, float)


@dataclass(frozen=True)
class KickTrain:
    """Finite-rate realization: individual unit kicks (time, sign)."""

    kicks: tuple
    repetition_rate: float

    def __post_init__(self):
        times = [t for t, _ in self.kicks]
        if any(t2 < t1 for t1, t2 in zip(times, times[1:])):
            raise InvalidTiming("kicks must be time-ordered")

    def times_counts(self) -> tuple[np.ndarray, np.ndarray]:
        t = np.array([k[0] for k in self.kicks], float)
        z = np.array([k[1] for k in self.kicks], float)
        return t, z

    @property
    def gate_time(self) -> float:
        t = [k[0] for k in self.kicks]
        return max(t) - min(t)


def frag_schedule(tau1: float, tau2: float, tau3: float, n: int,
                  phi_rf: float = np.pi) -> PulseSchedule:
    """Build the six-group schedule t = (-tau1, -tau2, -tau3, tau3, tau2,
    tau1), z = n * (-1, 2, -2, 2, -2, 1).  No ordering among the tau is
    required."""
    if min(tau1, tau2, tau3) <= 0:
        raise InvalidTiming("all tau_i must be positive")
    times = (-tau1, -tau2, -tau3, tau3, tau2, tau1)
    counts = tuple(p * n for p in FRAG_PATTERN)
    return PulseSchedule(group_times=times, group_counts=counts,
                         scale_n=n, phi_rf=phi_rf)


def schedule_permutations(tau1: float, tau2: float, tau3: float,
                          n: int, phi_rf: float = np.pi) -> list:
    """The six schedules reachable by permuting (tau1, tau2, tau3)."""
    return [frag_schedule(*p, n=n, phi_rf=phi_rf)
            for p in itertools.permutations((tau1, tau2, tau3))]


def lock_grid_spacing(beta: float) -> float:
    """Spacing of RF-phase-locked kick instants in trap periods (= one RF
    period, beta/2)."""
    return beta / 2.0


def snap_time(t: float, beta: float) -> float:
    """Nearest instant with the same RF phase as tau = 0."""
    grid = lock_grid_spacing(beta)
    return round(t / grid) * grid


def phase_lock(schedule: PulseSchedule, beta: float) -> tuple:
    """Snap each group time to the RF-drive lock grid.

    Returns (locked_schedule, max_snap_displacement).  Antisymmetry is
    preserved because the grid is symmetric about tau = 0.
    """
    taus = schedule.taus
    snapped = []
    grid = lock_grid_spacing(beta)
    for tau in taus:
        s = snap_time(tau, beta)
        if s <= 0.0:  # keep tau_i > 0: smallest admissible grid point
            s = grid
        snapped.append(s)
    locked = frag_schedule(*snapped, n=schedule.scale_n,
                           phi_rf=schedule.phi_rf)
    max_disp = max(abs(s - t) for s, t in zip(snapped, taus))
    return locked, max_disp


def is_locked(schedule: PulseSchedule, beta: float, tol: float = 1e-9) -> bool:
    grid = lock_grid_spacing(beta)
    return all(abs(t / grid - round(t / grid)) < tol
               for t in schedule.group_times)


def expand_finite_rep(schedule, rep_rate: float) -> KickTrain:
    """Expand each instantaneous group of |z_j| pulse pairs into |z_j| unit
    kicks at consecutive repetition-rate slots, centered on the group time.

    rep_rate is in kicks per secular trap period.  Raises GroupOverlap when
    adjacent expanded groups collide (repetition rate too low).
    """
    if rep_rate <= 0:
        raise InvalidTiming("rep_rate must be positive")
    dt = 1.0 / rep_rate
    kicks = []
    for t_g, z in zip(schedule.group_times, schedule.group_counts):
        m = abs(int(z))
        sign = 1 if z > 0 else -1
        offsets = (np.arange(m) - (m - 1) / 2.0) * dt
        kicks.extend((t_g + o, sign) for o in offsets)
    kicks.sort(key=lambda k: k[0])
    for (t1, _), (t2, _) in zip(kicks, kicks[1:]):
        if t2 - t1 < dt * (1.0 - 1e-9):
            raise GroupOverlap(
                f"groups overlap at rep_rate={rep_rate} (spacing {t2 - t1:.3g}"
                f" < {dt:.3g})")
    return KickTrain(kicks=tuple(kicks), repetition_rate=rep_rate)
