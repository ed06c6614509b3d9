"""FastAPI service exposing the gate-design pipeline over HTTP.

The CLI runs this application in-process by default; the same app can be
served standalone with uvicorn.  Domain errors map to HTTP status codes:
configuration problems become 400, numerical failures become 422.
"""

from __future__ import annotations

import math

import numpy as np
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from ..config import (
    SCHEMA_VERSION,
    ResolvedTrap,
    RunConfig,
    parse_config,
    resolve_trap,
)
from ..errors import ConfigError, FastGatesError
from ..fidelity import (
    LaserConfig,
    ThermalState,
    evaluate_schedule,
    full_infidelity,
    infidelity,
)
from ..gatescheme import expand_finite_rep, frag_schedule, lock_grid_spacing
from ..odeoracle import gate_oracle
from ..optimizer import OptimizationConfig, optimize_schedule
from ..robustness import (
    sweep_chi_error,
    sweep_phase_offset,
    sweep_q_value,
    sweep_rep_rate,
    sweep_stray_field,
    sweep_thermal,
)
from ..trapmodel import MicrotrapArray
from . import schemas


def _config(request: schemas.RunRequest) -> RunConfig:
    return parse_config(request.to_sections())


def _laser(config: RunConfig) -> LaserConfig:
    return LaserConfig(lamb_dicke_eta=config.laser.eta)


def _thermal(config: RunConfig) -> ThermalState:
    return ThermalState(mean_occupation=config.gate.mean_occupation)


def _schedule(config: RunConfig):
    if config.gate.taus is None:
        raise ConfigError("[gate].taus is required for this operation")
    return frag_schedule(*config.gate.taus, n=config.gate.n,
                         phi_rf=config.trap.phi_rf)


def _concrete_trap(resolved: ResolvedTrap):
    if resolved.trap is None:
        raise ConfigError(
            "this operation needs a physical trap; use [trap].type = "
            "'microtrap' or 'paul', not 'chi'")
    return resolved.trap


def _clean(value):
    """JSON-safe copy: numpy scalars/arrays to lists, non-finite to None."""
    if isinstance(value, dict):
        return {k: _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, np.ndarray)):
        return [_clean(v) for v in value]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (np.floating, float)):
        v = float(value)
        return v if math.isfinite(v) else None
    if isinstance(value, (np.integer, int)):
        return int(value)
    return value


def create_app() -> FastAPI:
    app = FastAPI(title="fastgates", version=str(SCHEMA_VERSION))

    @app.exception_handler(ConfigError)
    async def _config_error(request: Request, exc: ConfigError):
        return JSONResponse(status_code=400,
                            content={"error": "config", "detail": str(exc)})

    @app.exception_handler(FastGatesError)
    async def _numerical_error(request: Request, exc: FastGatesError):
        return JSONResponse(status_code=422,
                            content={"error": type(exc).__name__,
                                     "detail": str(exc)})

    @app.exception_handler(ValueError)
    async def _value_error(request: Request, exc: ValueError):
        return JSONResponse(status_code=400,
                            content={"error": "config", "detail": str(exc)})

    @app.get("/health", response_model=schemas.HealthResponse)
    async def health():
        return schemas.HealthResponse(status="ok",
                                      schema_version=SCHEMA_VERSION)

    @app.post("/characterize", response_model=schemas.CharacterizeResponse)
    async def characterize(request: schemas.RunRequest):
        config = _config(request)
        resolved = resolve_trap(config.trap)
        modes = [
            schemas.ModeInfo(name=m.name, ratio=m.ratio, a=_clean(m.a_p),
                             q=m.q_p, beta=_clean(m.beta_p))
            for m in resolved.spectrum.modes
        ]
        return schemas.CharacterizeResponse(
            beta=resolved.beta, mu=resolved.mu,
            chi=resolved.spectrum.chi,
            secular_omega=resolved.spectrum.secular_omega,
            modes=modes,
            lock_grid_spacing=lock_grid_spacing(resolved.beta))

    @app.post("/optimize", response_model=schemas.OptimizeResponse)
    async def optimize(request: schemas.RunRequest):
        config = _config(request)
        resolved = resolve_trap(config.trap)
        opt = config.optimizer
        opt_config = OptimizationConfig(
            time_bound=config.gate.time_bound, n=config.gate.n,
            starts=opt.starts, seed=opt.seed, mu_mode=opt.mu_mode,
            target_sign=config.gate.target_sign, laser=_laser(config),
            thermal=_thermal(config), lock=opt.lock)
        result = optimize_schedule(resolved.spectrum, resolved.beta,
                                   resolved.mu, opt_config,
                                   phi_rf=config.trap.phi_rf)
        with_mu = opt.mu_mode == "with_micromotion"
        locked = with_mu if opt.lock is None else opt.lock
        return schemas.OptimizeResponse(
            taus=list(result.taus), infidelity=result.infidelity,
            achieved_gate_time=result.achieved_gate_time,
            starts_converged=result.starts_converged, mu=result.mu,
            locked=locked, n=config.gate.n)

    @app.post("/evaluate", response_model=schemas.EvaluateResponse)
    async def evaluate(request: schemas.RunRequest):
        config = _config(request)
        resolved = resolve_trap(config.trap)
        schedule = _schedule(config)
        mu = resolved.mu if config.optimizer.mu_mode == "with_micromotion" \
            else 1.0
        errors, report = evaluate_schedule(
            schedule, resolved.spectrum, mu=mu, laser=_laser(config),
            thermal=_thermal(config), target_sign=config.gate.target_sign)
        full = full_infidelity(errors, _thermal(config), resolved.spectrum,
                               _laser(config))
        return schemas.EvaluateResponse(
            infidelity=report.infidelity, full_infidelity=full,
            phase_error=errors.phase_error, raw_phase=errors.raw_phase,
            phase_term=report.phase_term,
            restoration_terms=_clean(report.restoration_terms),
            mode_displacements=_clean(errors.mode_displacements),
            mu=mu, gate_time=schedule.gate_time)

    @app.post("/oracle", response_model=schemas.OracleResponse)
    async def oracle(request: schemas.RunRequest):
        config = _config(request)
        resolved = resolve_trap(config.trap)
        trap = _concrete_trap(resolved)
        pulses = _schedule(config)
        if config.laser.rep_rate is not None:
            pulses = expand_finite_rep(pulses, config.laser.rep_rate)
        report, results = gate_oracle(
            trap, pulses, spectrum=resolved.spectrum, laser=_laser(config),
            thermal=_thermal(config), phi_rf=config.trap.phi_rf)
        basis = {
            state: schemas.OracleBasisResult(
                phase=res.phase,
                endpoint_displacement=_clean(res.endpoint_displacement))
            for state, res in results.items()
        }
        return schemas.OracleResponse(
            infidelity=report.infidelity, phase_term=report.phase_term,
            restoration_terms=_clean(report.restoration_terms),
            fidelity_source=report.fidelity_source, basis=basis)

    @app.post("/sweep", response_model=schemas.SweepResponse)
    async def sweep(request: schemas.RunRequest):
        config = _config(request)
        if config.sweep is None:
            raise ConfigError("[sweep] section is required for sweeps")
        resolved = resolve_trap(config.trap)
        schedule = _schedule(config)
        laser, thermal = _laser(config), _thermal(config)
        grid = config.sweep.grid
        parameter = config.sweep.parameter
        mu = resolved.mu if config.optimizer.mu_mode == "with_micromotion" \
            else 1.0
        if parameter == "phase_offset":
            if resolved.mathieu is None:
                raise ConfigError(
                    "phase_offset sweeps need Mathieu parameters; set "
                    "[trap].q (and optionally a) or use a physical trap")
            rows = sweep_phase_offset(schedule, resolved.mathieu,
                                      resolved.spectrum, grid,
                                      design_mu=mu, laser=laser,
                                      thermal=thermal)
        elif parameter == "chi_error":
            rows = sweep_chi_error(schedule, resolved.spectrum, grid,
                                   mu=mu, laser=laser, thermal=thermal)
        elif parameter == "thermal_n":
            _, base = evaluate_schedule(schedule, resolved.spectrum, mu=mu,
                                        laser=laser, thermal=thermal)
            rows = sweep_thermal(base, thermal, grid)
        elif parameter == "rep_rate":
            trap = _concrete_trap(resolved)
            rows = sweep_rep_rate(schedule, trap, grid, laser=laser,
                                  thermal=thermal,
                                  phi_rf=config.trap.phi_rf)
        elif parameter == "stray_field":
            trap = _concrete_trap(resolved)
            if not isinstance(trap, MicrotrapArray):
                raise ConfigError(
                    "stray_field sweeps model per-trap offsets and need "
                    "[trap].type = 'microtrap'")
            rows = sweep_stray_field(schedule, trap, grid, laser=laser,
                                     thermal=thermal,
                                     phi_rf=config.trap.phi_rf)
        else:  # q_value (validated upstream)
            if config.trap.rf_over_secular is None:
                raise ConfigError(
                    "q_value sweeps need [trap].rf_over_secular")
            rows = sweep_q_value(schedule, grid,
                                 config.trap.rf_over_secular,
                                 resolved.spectrum, laser=laser,
                                 thermal=thermal,
                                 phi_rf=config.trap.phi_rf)
        return schemas.SweepResponse(parameter=parameter,
                                     rows=[_clean(r) for r in rows])

    return app


app = create_app()
