"""Pydantic request/response models for the HTTP service.

Request bodies mirror the TOML run-config sections one-to-one; the
service re-validates them through the same `parse_config` path the CLI
uses, so a config accepted on disk is accepted over the wire and vice
versa.
"""

from __future__ import annotations

import math

from pydantic import BaseModel, ConfigDict, field_serializer


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid")


class TrapModel(_Section):
    type: str | None = None
    species: str | None = None
    chi: float | None = None
    mu: float | None = None
    beta: float | None = None
    separation_d: float | None = None
    kappa: float | None = None
    q: float | None = None
    a: float | None = None
    rf_over_secular: float | None = None
    secular_omega: float | None = None
    phi_rf: float | None = None


class LaserModel(_Section):
    eta: float | None = None
    rep_rate: float | None = None


class GateModel(_Section):
    n: int | None = None
    time_bound: float | None = None
    target_sign: int | None = None
    mean_occupation: float | None = None
    taus: list[float] | None = None


class OptimizerModel(_Section):
    starts: int | None = None
    seed: int | None = None
    mu_mode: str | None = None
    lock: bool | None = None


class SweepModel(_Section):
    parameter: str
    grid: list[float]


class RunRequest(_Section):
    """One request body for every endpoint; sections are optional and
    fall back to the same defaults as the TOML loader."""

    trap: TrapModel | None = None
    laser: LaserModel | None = None
    gate: GateModel | None = None
    optimizer: OptimizerModel | None = None
    sweep: SweepModel | None = None

    def to_sections(self) -> dict:
        return self.model_dump(exclude_none=True)


class _Result(BaseModel):
    model_config = ConfigDict(extra="forbid")

    @field_serializer("*", when_used="json", check_fields=False)
    def _nan_to_none(self, value):
        if isinstance(value, float) and not math.isfinite(value):
            return None
        return value


class ModeInfo(_Result):
    name: str
    ratio: float
    a: float | None = None
    q: float
    beta: float | None = None


class CharacterizeResponse(_Result):
    beta: float
    mu: float
    chi: float
    secular_omega: float
    modes: list[ModeInfo]
    lock_grid_spacing: float


class OptimizeResponse(_Result):
    taus: list[float]
    infidelity: float
    achieved_gate_time: float
    starts_converged: int
    mu: float
    locked: bool
    n: int


class EvaluateResponse(_Result):
    infidelity: float
    full_infidelity: float
    phase_error: float
    raw_phase: float
    phase_term: float
    restoration_terms: list[float]
    mode_displacements: list[float]
    mu: float
    gate_time: float


class OracleBasisResult(_Result):
    phase: float
    endpoint_displacement: list[float]


class OracleResponse(_Result):
    infidelity: float
    phase_term: float
    restoration_terms: list[float]
    fidelity_source: str
    basis: dict[str, OracleBasisResult]


class SweepResponse(_Result):
    parameter: str
    rows: list[dict]


class HealthResponse(_Result):
    status: str
    schema_version: int
