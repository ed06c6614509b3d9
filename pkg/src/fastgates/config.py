"""Run configuration: TOML schema, validation, and trap resolution.

A run config is a TOML file with sections [trap], [laser], [gate],
[optimizer], and optionally [sweep].  `load_config` parses and validates
it with field-precise error messages; `resolve_trap` turns the trap
section into a concrete trap object (or an abstract chi-spectrum) plus
the (spectrum, beta, mu) triple the optimizer consumes.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .errors import ConfigError
from .mathieu import MathieuParams, mu_at
from .trapmodel import (
    CA40_MASS,
    MicrotrapArray,
    PaulTrap,
    mode_spectrum,
    spectrum_from_chi,
)

SCHEMA_VERSION = 1

TRAP_TYPES = ("microtrap", "paul", "chi")
MU_MODES = ("with_micromotion", "without_micromotion")

SPECIES_MASS = {"Ca40": CA40_MASS}


@dataclass(frozen=True)
class TrapConfig:
    type: str = "chi"
    species: str = "Ca40"
    chi: float | None = None
    mu: float = 1.0
    beta: float | None = None
    separation_d: float | None = None
    kappa: float | None = None
    q: float | None = None
    a: float | None = None
    rf_over_secular: float | None = None
    secular_omega: float = 2.0 * np.pi * 1e6
    phi_rf: float = np.pi


@dataclass(frozen=True)
class LaserSection:
    eta: float = 0.1
    rep_rate: float | None = None


@dataclass(frozen=True)
class GateSection:
    n: int = 12
    time_bound: float = 2.0
    target_sign: int = 1
    mean_occupation: float = 0.1
    taus: tuple | None = None


@dataclass(frozen=True)
class OptimizerSection:
    starts: int = 512
    seed: int = 0
    mu_mode: str = "with_micromotion"
    lock: bool | None = None


@dataclass(frozen=True)
class SweepSection:
    parameter: str = "phase_offset"
    grid: tuple = ()


@dataclass(frozen=True)
class RunConfig:
    trap: TrapConfig = field(default_factory=TrapConfig)
    laser: LaserSection = field(default_factory=LaserSection)
    gate: GateSection = field(default_factory=GateSection)
    optimizer: OptimizerSection = field(default_factory=OptimizerSection)
    sweep: SweepSection | None = None

    def to_dict(self) -> dict:
        record = asdict(self)
        record["schema_version"] = SCHEMA_VERSION
        return record

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def _section(data: dict, name: str, cls, known: dict):
    raw = data.get(name, {})
    if not isinstance(raw, dict):
        raise ConfigError(f"[{name}] must be a table")
    unknown = set(raw) - set(known)
    if unknown:
        raise ConfigError(
            f"[{name}] has unknown field(s): {', '.join(sorted(unknown))}")
    coerced = {}
    for key, value in raw.items():
        kind = known[key]
        try:
            if kind is tuple:
                coerced[key] = tuple(value)
            elif kind is bool:
                if not isinstance(value, bool):
                    raise TypeError
                coerced[key] = value
            else:
                coerced[key] = kind(value)
        except (TypeError, ValueError) as exc:
            raise ConfigError(
                f"[{name}].{key}: cannot interpret {value!r} as "
                f"{kind.__name__}") from exc
    return cls(**coerced)


def parse_config(data: dict) -> RunConfig:
    unknown = set(data) - {"trap", "laser", "gate", "optimizer", "sweep"}
    if unknown:
        raise ConfigError(f"unknown section(s): {', '.join(sorted(unknown))}")
    trap = _section(data, "trap", TrapConfig, {
        "type": str, "species": str, "chi": float, "mu": float,
        "beta": float, "separation_d": float, "kappa": float, "q": float,
        "a": float, "rf_over_secular": float, "secular_omega": float,
        "phi_rf": float,
    })
    laser = _section(data, "laser", LaserSection,
                     {"eta": float, "rep_rate": float})
    gate = _section(data, "gate", GateSection, {
        "n": int, "time_bound": float, "target_sign": int,
        "mean_occupation": float, "taus": tuple,
    })
    optimizer = _section(data, "optimizer", OptimizerSection, {
        "starts": int, "seed": int, "mu_mode": str, "lock": bool,
    })
    sweep = None
    if "sweep" in data:
        sweep = _section(data, "sweep", SweepSection,
                         {"parameter": str, "grid": tuple})
    config = RunConfig(trap=trap, laser=laser, gate=gate,
                       optimizer=optimizer, sweep=sweep)
    validate_config(config)
    return config


def validate_config(config: RunConfig) -> None:
    trap = config.trap
    if trap.type not in TRAP_TYPES:
        raise ConfigError(f"[trap].type must be one of {TRAP_TYPES}")
    if trap.species not in SPECIES_MASS:
        raise ConfigError(
            f"[trap].species must be one of {tuple(SPECIES_MASS)}")
    if trap.type == "chi":
        if trap.chi is None:
            raise ConfigError("[trap].chi is required for type = 'chi'")
    if trap.type == "microtrap":
        for fname in ("separation_d", "q", "rf_over_secular"):
            if getattr(trap, fname) is None:
                raise ConfigError(
                    f"[trap].{fname} is required for type = 'microtrap'")
    if trap.type == "paul":
        for fname in ("kappa", "q", "rf_over_secular"):
            if getattr(trap, fname) is None:
                raise ConfigError(
                    f"[trap].{fname} is required for type = 'paul'")
    if not 0.0 < config.laser.eta < 1.0:
        raise ConfigError("[laser].eta must lie in (0, 1)")
    if config.gate.n < 1:
        raise ConfigError("[gate].n must be >= 1")
    if config.gate.time_bound <= 0:
        raise ConfigError("[gate].time_bound must be positive")
    if config.gate.target_sign not in (-1, 1):
        raise ConfigError("[gate].target_sign must be +1 or -1")
    if config.gate.mean_occupation < 0:
        raise ConfigError("[gate].mean_occupation must be >= 0")
    if config.gate.taus is not None and len(config.gate.taus) != 3:
        raise ConfigError("[gate].taus must have exactly 3 entries")
    if config.optimizer.starts < 1:
        raise ConfigError("[optimizer].starts must be >= 1")
    if config.optimizer.mu_mode not in MU_MODES:
        raise ConfigError(f"[optimizer].mu_mode must be one of {MU_MODES}")
    if config.sweep is not None:
        from .robustness import PARAMETERS

        if config.sweep.parameter not in PARAMETERS:
            raise ConfigError(
                f"[sweep].parameter must be one of {PARAMETERS}")
        if not config.sweep.grid:
            raise ConfigError("[sweep].grid must be nonempty")


def load_config(path: str | Path) -> RunConfig:
    try:
        with open(path, "rb") as handle:
            data = tomllib.load(handle)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return parse_config(data)


@dataclass(frozen=True)
class ResolvedTrap:
    """Concrete trap objects derived from a TrapConfig."""

    spectrum: object
    beta: float
    mu: float
    trap: object = None  # MicrotrapArray / PaulTrap; None for abstract chi
    mathieu: MathieuParams | None = None


def resolve_trap(trap: TrapConfig) -> ResolvedTrap:
    mass = SPECIES_MASS[trap.species]
    if trap.type == "chi":
        beta = trap.beta if trap.beta is not None else 2.0 / 300.0
        mathieu = None
        if trap.q is not None:
            from .trapmodel import solve_a_for_beta

            a = trap.a if trap.a is not None else solve_a_for_beta(trap.q,
                                                                   beta)
            mathieu = MathieuParams(a=a, q=trap.q)
        spectrum = spectrum_from_chi(trap.chi,
                                     secular_omega=trap.secular_omega,
                                     mathieu=mathieu, beta=beta)
        mu = trap.mu
        if mathieu is not None and trap.mu == 1.0:
            mu = mu_at(mathieu, trap.phi_rf)
        return ResolvedTrap(spectrum=spectrum, beta=beta, mu=mu,
                            mathieu=mathieu)
    if trap.type == "microtrap":
        built = MicrotrapArray.build(separation_d=trap.separation_d,
                                     secular_omega=trap.secular_omega,
                                     q=trap.q,
                                     rf_over_secular=trap.rf_over_secular,
                                     ion_mass=mass)
        spectrum = mode_spectrum(built, phi_rf=trap.phi_rf)
        return ResolvedTrap(spectrum=spectrum,
                            beta=2.0 / trap.rf_over_secular,
                            mu=mu_at(built.mathieu, trap.phi_rf),
                            trap=built, mathieu=built.mathieu)
    built = PaulTrap.build(q=trap.q, kappa=trap.kappa,
                           rf_over_secular=trap.rf_over_secular,
                           secular_omega=trap.secular_omega, ion_mass=mass)
    spectrum = mode_spectrum(built, phi_rf=trap.phi_rf)
    return ResolvedTrap(spectrum=spectrum,
                        beta=2.0 / trap.rf_over_secular,
                        mu=mu_at(built.mathieu_radial, trap.phi_rf),
                        trap=built, mathieu=built.mathieu_radial)
