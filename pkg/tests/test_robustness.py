import numpy as np
import pytest

from fastgates import (
    CA40_MASS,
    LaserConfig,
    MathieuParams,
    PaulTrap,
    ThermalState,
    evaluate_schedule,
    frag_schedule,
    mode_spectrum,
    mu_at,
    spectrum_from_chi,
    sweep_chi_error,
    sweep_phase_offset,
    sweep_q_value,
    sweep_rep_rate,
    sweep_stray_field,
    sweep_thermal,
    chi_error_to_geometry,
    stray_field_fraction,
)
from fastgates.robustness import PARAMETERS, SweepSpec

OMEGA = 2 * np.pi * 1e6


@pytest.fixture
def gate():
    return frag_schedule(3 / 12, 6 / 12, 7 / 12, n=5)


@pytest.fixture
def laser():
    return LaserConfig(lamb_dicke_eta=0.26)


class TestSweepSpec:
    def test_valid_parameters(self):
        for p in PARAMETERS:
            SweepSpec(parameter=p, grid=(0.0, 1.0), base_gate=None)

    def test_invalid_parameter(self):
        with pytest.raises(ValueError):
            SweepSpec(parameter="laser_power", grid=(0.0,), base_gate=None)

    def test_unsorted_grid_rejected(self):
        with pytest.raises(ValueError):
            SweepSpec(parameter="chi_error", grid=(1.0, 0.0),
                      base_gate=None)


class TestPhaseOffsetSweep:
    def test_zero_offset_reproduces_design_mu(self, gate, laser,
                                              paul_chi_spectrum, thermal01):
        params = MathieuParams(a=0.007303157200659854, q=0.2)
        mu = mu_at(params, np.pi)
        rows = sweep_phase_offset(gate, params, paul_chi_spectrum,
                                  [0.0, 0.1], design_mu=mu, laser=laser,
                                  thermal=thermal01)
        assert rows[0]["mu"] == pytest.approx(mu, rel=1e-12)
        _, base = evaluate_schedule(gate, paul_chi_spectrum, mu=mu,
                                    laser=laser, thermal=thermal01)
        assert rows[0]["infidelity"] == pytest.approx(base.infidelity,
                                                      rel=1e-12)

    def test_mu_decreases_away_from_pi(self, gate, laser,
                                       paul_chi_spectrum, thermal01):
        params = MathieuParams(a=0.0, q=0.2)
        rows = sweep_phase_offset(gate, params, paul_chi_spectrum,
                                  [0.0, 0.3, 0.6], laser=laser,
                                  thermal=thermal01)
        mus = [r["mu"] for r in rows]
        assert mus[0] > mus[1] > mus[2]


class TestChiErrorSweep:
    def test_zero_fraction_is_base(self, gate, laser, paul_chi_spectrum,
                                   thermal01):
        rows = sweep_chi_error(gate, paul_chi_spectrum, [0.0], mu=1.0,
                               laser=laser, thermal=thermal01)
        _, base = evaluate_schedule(gate, paul_chi_spectrum, mu=1.0,
                                    laser=laser, thermal=thermal01)
        assert rows[0]["infidelity"] == pytest.approx(base.infidelity,
                                                      rel=1e-12)

    def test_perturbation_scales_splitting_only(self, gate, laser,
                                                thermal01):
        # a chi error on spectrum chi0 equals no error on (1 + f) chi0
        chi0 = -1.4e-2
        rows = sweep_chi_error(gate, spectrum_from_chi(chi0), [0.02],
                               mu=1.0, laser=laser, thermal=thermal01)
        _, direct = evaluate_schedule(gate, spectrum_from_chi(1.02 * chi0),
                                      mu=1.0, laser=laser, thermal=thermal01)
        assert rows[0]["infidelity"] == pytest.approx(direct.infidelity,
                                                      rel=1e-12)


class TestGeometryConversion:
    def test_d_and_omega_fractions(self):
        out = chi_error_to_geometry(0.02, 100e-6, OMEGA, CA40_MASS)
        # chi error splits 3:2 between the d and omega log-derivatives
        assert out["d_fraction"] / out["omega_fraction"] == pytest.approx(
            2.0 / 3.0, rel=1e-9)
        # separated traps: chi ~ 2/xi so dln(chi)/dln(xi) ~ -1
        assert out["d_fraction"] == pytest.approx(-0.02 / 3.0, rel=2e-2)


class TestRepRateSweep:
    def test_overlapping_rate_flagged(self, gate, laser, thermal01):
        trap = PaulTrap.build(q=0.2, kappa=1 / 6, rf_over_secular=12.0,
                              secular_omega=OMEGA)
        rows = sweep_rep_rate(gate, trap, [20.0, 300.0], laser=laser,
                              thermal=thermal01)
        assert rows[0]["ok"] is False and np.isnan(rows[0]["infidelity"])
        assert rows[1]["ok"] is True and rows[1]["infidelity"] > 0.0


class TestThermalSweep:
    def test_monotone_in_occupation(self, gate, laser, paul_chi_spectrum,
                                    thermal01):
        _, base = evaluate_schedule(gate, paul_chi_spectrum, mu=1.0,
                                    laser=laser, thermal=thermal01)
        rows = sweep_thermal(base, thermal01, [0.1, 1.0, 10.0])
        vals = [r["infidelity"] for r in rows]
        assert vals[0] == pytest.approx(base.infidelity, rel=1e-12)
        assert vals[0] < vals[1] < vals[2]


class TestStrayField:
    def test_fraction_conversion(self):
        assert stray_field_fraction(1e-3) == pytest.approx(1e-3 / np.sqrt(2))


class TestQValueSweep:
    def test_q_zero_reproduces_unit_mu(self, gate, laser,
                                       paul_chi_spectrum, thermal01):
        rows = sweep_q_value(gate, [0.0, 0.2], rf_over_secular=12.0,
                             spectrum=paul_chi_spectrum, laser=laser,
                             thermal=thermal01)
        _, base = evaluate_schedule(gate, paul_chi_spectrum, mu=1.0,
                                    laser=laser, thermal=thermal01)
        assert rows[0]["infidelity"] == pytest.approx(base.infidelity,
                                                      rel=1e-12)
        assert rows[1]["infidelity"] != pytest.approx(base.infidelity,
                                                      rel=1e-3)
