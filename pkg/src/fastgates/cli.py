"""Command-line client for the gate-design service.

The CLI is a thin HTTP client: it loads and validates a TOML run config,
posts it to the service (in-process by default, or to a remote server via
--server), and writes the response as CSV with a JSON sidecar embedding
the resolved configuration.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import csv
import json
import os
import sys
from pathlib import Path

import click
import httpx

from .config import SCHEMA_VERSION, RunConfig, load_config
from .errors import ConfigError

EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

THREADS_ENV = "FASTGATES_THREADS"
_THREAD_VARS = ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS",
                "MKL_NUM_THREADS", "NUMEXPR_NUM_THREADS")


def _apply_threads(flag_value: int | None) -> None:
    """Set numeric-library thread counts.  The CLI flag wins; the
    environment variable is honored only when the flag is absent."""
    value = flag_value
    if value is None:
        env = os.environ.get(THREADS_ENV)
        if env is None:
            return
        try:
            value = int(env)
        except ValueError as exc:
            raise ConfigError(
                f"{THREADS_ENV} must be an integer, got {env!r}") from exc
    if value < 1:
        raise ConfigError("thread count must be >= 1")
    for var in _THREAD_VARS:
        os.environ[var] = str(value)


def _client(server: str | None) -> httpx.Client:
    if server:
        return httpx.Client(base_url=server, timeout=None)
    import warnings

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        from starlette.testclient import TestClient

    from .service import create_app

    # TestClient is an httpx.Client that drives the ASGI app in-process
    return TestClient(create_app(), raise_server_exceptions=False)


def _post(client: httpx.Client, endpoint: str, config: RunConfig) -> dict:
    sections = {k: v for k, v in config.to_dict().items()
                if k != "schema_version" and v is not None}
    for name, section in list(sections.items()):
        sections[name] = {k: v for k, v in section.items() if v is not None}
    try:
        response = client.post(endpoint, json=sections)
    except httpx.HTTPError as exc:
        click.echo(f"error: cannot reach service: {exc}", err=True)
        sys.exit(EXIT_NUMERICAL)
    if response.status_code == 200:
        return response.json()
    try:
        detail = response.json().get("detail", response.text)
    except ValueError:
        detail = response.text
    click.echo(f"error: {detail}", err=True)
    sys.exit(EXIT_CONFIG if response.status_code == 400 else EXIT_NUMERICAL)


def _format(value) -> str:
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (list, tuple)):
        return ";".join(_format(v) for v in value)
    if value is None:
        return ""
    return str(value)


def _write_rows(rows: list, out: Path | None) -> None:
    """Write CSV with one header row, full float precision, flushing after
    every data row."""
    if not rows:
        raise ConfigError("no rows to write")
    fields = list(rows[0])
    handle = open(out, "w", newline="") if out else sys.stdout
    try:
        writer = csv.writer(handle)
        writer.writerow(fields)
        for row in rows:
            writer.writerow([_format(row.get(f)) for f in fields])
            handle.flush()
    finally:
        if out:
            handle.close()


def _write_sidecar(out: Path | None, config: RunConfig, endpoint: str,
                   payload: dict) -> None:
    if out is None:
        return
    sidecar = Path(out).with_suffix(".json")
    record = {
        "schema_version": SCHEMA_VERSION,
        "endpoint": endpoint,
        "config": config.to_dict(),
        "result": payload,
    }
    sidecar.write_text(json.dumps(record, indent=2, sort_keys=True))


def _rows_from(payload: dict, endpoint: str) -> list:
    if endpoint == "/sweep":
        return payload["rows"]
    if endpoint == "/characterize":
        row = {k: v for k, v in payload.items() if k != "modes"}
        for i, mode in enumerate(payload["modes"]):
            for key, value in mode.items():
                row[f"mode{i}_{key}"] = value
        return [row]
    if endpoint == "/optimize":
        row = {k: v for k, v in payload.items() if k != "taus"}
        for i, tau in enumerate(payload["taus"], start=1):
            row[f"tau{i}"] = tau
        return [row]
    if endpoint == "/oracle":
        row = {k: v for k, v in payload.items() if k != "basis"}
        for state, result in payload["basis"].items():
            row[f"phase_{state}"] = result["phase"]
        return [row]
    return [payload]


def _run(ctx, endpoint: str) -> None:
    params = ctx.obj
    try:
        _apply_threads(params["threads"])
        config = load_config(params["config"])
        if params["seed"] is not None:
            from dataclasses import replace

            config = replace(config, optimizer=replace(
                config.optimizer, seed=params["seed"]))
    except ConfigError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)
    with _client(params["server"]) as client:
        payload = _post(client, endpoint, config)
    out = Path(params["out"]) if params["out"] else None
    _write_rows(_rows_from(payload, endpoint), out)
    _write_sidecar(out, config, endpoint, payload)


@click.group()
@click.option("--config", "config_path", required=True,
              type=click.Path(), help="TOML run configuration file.")
@click.option("--out", default=None, type=click.Path(),
              help="CSV output path (a .json sidecar is written alongside);"
                   " default stdout.")
@click.option("--seed", default=None, type=int,
              help="Override [optimizer].seed.")
@click.option("--threads", default=None, type=int,
              help=f"Numeric thread count (default: ${THREADS_ENV}).")
@click.option("--server", default=None,
              help="Base URL of a running service; default in-process.")
@click.pass_context
def main(ctx, config_path, out, seed, threads, server):
    """Design and verify micromotion-aware fast entangling gates."""
    ctx.obj = {"config": config_path, "out": out, "seed": seed,
               "threads": threads, "server": server}


@main.command()
@click.pass_context
def characterize(ctx):
    """Report beta, mu, and the mode spectrum of the configured trap."""
    _run(ctx, "/characterize")


@main.command()
@click.pass_context
def optimize(ctx):
    """Search for the best pulse schedule within the gate-time bound."""
    _run(ctx, "/optimize")


@main.command()
@click.pass_context
def evaluate(ctx):
    """Evaluate the analytic infidelity of the configured schedule."""
    _run(ctx, "/evaluate")


@main.command()
@click.pass_context
def sweep(ctx):
    """Sweep one error parameter over the configured grid."""
    _run(ctx, "/sweep")


@main.command()
@click.pass_context
def oracle(ctx):
    """Verify the configured schedule with the direct ODE oracle."""
    _run(ctx, "/oracle")


if __name__ == "__main__":
    main()
