import csv
import json
import os

import pytest
from click.testing import CliRunner

from fastgates.cli import EXIT_CONFIG, THREADS_ENV, main
from fastgates.config import SCHEMA_VERSION

CHI_TOML = """
[trap]
type = "chi"
chi = -1.4e-2

[laser]
eta = 0.12

[optimizer]
starts = 16
seed = 0
lock = false
"""

EVAL_TOML = """
[trap]
type = "chi"
chi = -1.4e-2

[gate]
taus = [0.5, 0.3333333333333333, 0.16666666666666666]
"""

SWEEP_TOML = EVAL_TOML + """
[sweep]
parameter = "thermal_n"
grid = [0.1, 1.0, 10.0]
"""


@pytest.fixture
def runner():
    return CliRunner()


def _write(tmp_path, text, name="run.toml"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


class TestStdout:
    def test_evaluate_csv_to_stdout(self, runner, tmp_path):
        cfg = _write(tmp_path, EVAL_TOML)
        result = runner.invoke(main, ["--config", cfg, "evaluate"])
        assert result.exit_code == 0, result.output
        lines = result.output.strip().splitlines()
        header = lines[0].split(",")
        values = next(csv.reader([lines[1]]))
        row = dict(zip(header, values))
        assert float(row["infidelity"]) > 0.0
        assert float(row["gate_time"]) == pytest.approx(1.0)

    def test_sweep_one_row_per_point(self, runner, tmp_path):
        cfg = _write(tmp_path, SWEEP_TOML)
        result = runner.invoke(main, ["--config", cfg, "sweep"])
        assert result.exit_code == 0, result.output
        lines = result.output.strip().splitlines()
        assert lines[0].split(",") == ["mean_occupation", "infidelity"]
        assert len(lines) == 4


class TestOutputFiles:
    def test_optimize_writes_csv_and_sidecar(self, runner, tmp_path):
        cfg = _write(tmp_path, CHI_TOML)
        out = tmp_path / "result.csv"
        result = runner.invoke(main, ["--config", cfg, "--out", str(out),
                                      "optimize"])
        assert result.exit_code == 0, result.output
        with open(out, newline="") as handle:
            rows = list(csv.DictReader(handle))
        assert len(rows) == 1
        assert float(rows[0]["infidelity"]) < 1e-10
        assert {"tau1", "tau2", "tau3"} <= set(rows[0])

        sidecar = json.loads((tmp_path / "result.json").read_text())
        assert sidecar["schema_version"] == SCHEMA_VERSION
        assert sidecar["endpoint"] == "/optimize"
        assert sidecar["config"]["optimizer"]["seed"] == 0
        assert sidecar["result"]["infidelity"] == float(
            rows[0]["infidelity"])

    def test_seed_override_recorded(self, runner, tmp_path):
        cfg = _write(tmp_path, CHI_TOML)
        out = tmp_path / "seeded.csv"
        result = runner.invoke(main, ["--config", cfg, "--out", str(out),
                                      "--seed", "9", "optimize"])
        assert result.exit_code == 0, result.output
        sidecar = json.loads((tmp_path / "seeded.json").read_text())
        assert sidecar["config"]["optimizer"]["seed"] == 9


class TestErrors:
    def test_missing_config_exits_2(self, runner, tmp_path):
        result = runner.invoke(main, ["--config",
                                      str(tmp_path / "nope.toml"),
                                      "evaluate"])
        assert result.exit_code == EXIT_CONFIG
        assert "error" in result.output

    def test_invalid_config_exits_2(self, runner, tmp_path):
        cfg = _write(tmp_path, "[trap]\ntype = 'chi'\n")  # chi missing
        result = runner.invoke(main, ["--config", cfg, "evaluate"])
        assert result.exit_code == EXIT_CONFIG

    def test_evaluate_without_taus_exits_2(self, runner, tmp_path):
        cfg = _write(tmp_path, "[trap]\ntype = 'chi'\nchi = -1.4e-2\n")
        result = runner.invoke(main, ["--config", cfg, "evaluate"])
        assert result.exit_code == EXIT_CONFIG

    def test_bad_threads_env_exits_2(self, runner, tmp_path, monkeypatch):
        monkeypatch.setenv(THREADS_ENV, "many")
        cfg = _write(tmp_path, EVAL_TOML)
        result = runner.invoke(main, ["--config", cfg, "evaluate"])
        assert result.exit_code == EXIT_CONFIG


class TestThreads:
    def test_flag_sets_thread_vars(self, runner, tmp_path, monkeypatch):
        for var in ("OMP_NUM_THREADS", "MKL_NUM_THREADS"):
            monkeypatch.delenv(var, raising=False)
        cfg = _write(tmp_path, EVAL_TOML)
        result = runner.invoke(main, ["--config", cfg, "--threads", "2",
                                      "evaluate"])
        assert result.exit_code == 0, result.output
        assert os.environ["OMP_NUM_THREADS"] == "2"
        assert os.environ["MKL_NUM_THREADS"] == "2"
