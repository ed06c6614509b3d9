import numpy as np
import pytest

from fastgates import (
    LaserConfig,
    MicrotrapArray,
    PaulTrap,
    ThermalState,
    frag_schedule,
    gate_oracle,
    integrate_trajectories,
    mode_spectrum,
)
from fastgates.fidelity import floquet_gate_errors, full_infidelity
from fastgates.odeoracle import complete_basis

OMEGA = 2 * np.pi * 1e6


@pytest.fixture(scope="module")
def paul_trap():
    return PaulTrap.build(q=0.2, kappa=1 / 6, rf_over_secular=12.0,
                          secular_omega=OMEGA)


@pytest.fixture(scope="module")
def locked_gate():
    return frag_schedule(3 / 12, 6 / 12, 7 / 12, n=5)


@pytest.fixture(scope="module")
def oracle_run(paul_trap, locked_gate):
    laser = LaserConfig(lamb_dicke_eta=0.26)
    return gate_oracle(paul_trap, locked_gate,
                       spectrum=mode_spectrum(paul_trap), laser=laser,
                       thermal=ThermalState(0.1))


class TestGateOracle:
    def test_frozen_infidelity(self, oracle_run):
        report, _ = oracle_run
        assert report.fidelity_source == "oracle"
        assert report.infidelity == pytest.approx(1.402601166339279e-04,
                                                  rel=1e-6)

    def test_matches_exact_analytic_model(self, paul_trap, locked_gate,
                                          oracle_run):
        laser = LaserConfig(lamb_dicke_eta=0.26)
        spectrum = mode_spectrum(paul_trap)
        errors = floquet_gate_errors(locked_gate, spectrum,
                                     beta=paul_trap.beta, laser=laser)
        analytic = full_infidelity(errors, ThermalState(0.1), spectrum,
                                   laser)
        report, _ = oracle_run
        assert report.infidelity == pytest.approx(analytic, rel=1e-3)

    def test_basis_symmetry(self, oracle_run):
        _, results = oracle_run
        assert results["uu"].phase == results["dd"].phase
        assert results["ud"].phase == results["du"].phase
        np.testing.assert_array_equal(results["uu"].endpoint_displacement,
                                      results["dd"].endpoint_displacement)

    def test_antisymmetric_schedule_leaves_com_mode_restored(
            self, oracle_run):
        _, results = oracle_run
        # the uu state only drives the COM mode; a well-restored gate
        # leaves small residual displacement there
        assert results["uu"].endpoint_displacement[1] < 1e-10


class TestTrajectories:
    def test_kick_count_momentum_jumps(self, paul_trap, locked_gate):
        traj = integrate_trajectories(paul_trap, locked_gate, "uu",
                                      v_unit=1e-4)
        assert len(traj.kick_times) == 6
        assert traj.basis_state == "uu"

    def test_deviation_zero_before_first_kick(self, paul_trap, locked_gate):
        traj = integrate_trajectories(paul_trap, locked_gate, "ud",
                                      v_unit=1e-4)
        before = traj.times < traj.kick_times.min()
        np.testing.assert_allclose(traj.deviations[before], 0.0, atol=1e-18)


class TestCompleteBasis:
    def test_mirror_fill(self, oracle_run):
        _, results = oracle_run
        partial = {"uu": results["uu"], "ud": results["ud"]}
        full = complete_basis(partial)
        assert set(full) == {"uu", "ud", "du", "dd"}
        assert full["dd"] is full["uu"]

    def test_missing_state_raises(self):
        with pytest.raises(ValueError):
            complete_basis({})
