import numpy as np
import pytest

from fastgates import (
    CA40_MASS,
    MathieuParams,
    MicrotrapArray,
    PaulTrap,
    characteristic_exponent,
    chi_microtrap,
    chi_paul,
    find_periodic_crystal,
    mode_spectrum,
    solve_a_for_beta,
    spectrum_from_chi,
    xi_param,
)
from fastgates.trapmodel import (
    crystal_residual,
    equilibrium_positions,
    hill_coefficients,
)

OMEGA = 2 * np.pi * 1e6


class TestChiParameters:
    def test_paul_closed_form(self):
        assert chi_paul(1 / 6).chi == pytest.approx(
            np.sqrt(1 - 1 / 36) - 1, abs=1e-15)

    def test_paul_reference_value(self):
        assert chi_paul(1 / 6).chi == pytest.approx(-1.399e-2, abs=1e-4)

    def test_paul_is_negative(self):
        for kappa in (0.1, 0.3, 0.7):
            assert -1.0 < chi_paul(kappa).chi < 0.0

    def test_microtrap_merged_limit(self):
        # merged traps (xi -> 0) recover the co-trapped breathing ratio
        # sqrt(3); convergence is ~ xi^(1/3)
        assert chi_microtrap(1e-18).chi == pytest.approx(
            np.sqrt(3.0) - 1.0, abs=1e-6)

    def test_microtrap_separated_limit(self):
        # widely separated traps: chi -> 2 / xi
        for xi in (1e4, 1e6):
            assert chi_microtrap(xi).chi == pytest.approx(2.0 / xi, rel=1e-3)

    def test_microtrap_monotone_decreasing(self):
        xs = np.logspace(-6, 8, 40)
        chis = [chi_microtrap(x).chi for x in xs]
        assert np.all(np.diff(chis) < 0)

    def test_ca40_reference_geometry(self):
        # Ca-40 ions, d = 100 um, omega = 2 pi MHz
        xi = xi_param(100e-6, OMEGA, CA40_MASS)
        assert xi == pytest.approx(11355.346150168201, rel=1e-9)
        assert chi_microtrap(xi).chi == pytest.approx(1.8e-4, rel=0.05)

    def test_xi_param_validation(self):
        with pytest.raises(ValueError):
            xi_param(-1e-6, OMEGA, CA40_MASS)


class TestSolveAForBeta:
    def test_recovers_target_beta(self):
        for q, beta in ((0.2, 1 / 6), (0.1, 0.25), (0.0094, 1 / 150)):
            a = solve_a_for_beta(q, beta)
            assert characteristic_exponent(
                MathieuParams(a=a, q=q)) == pytest.approx(beta, abs=1e-10)

    def test_frozen_value(self):
        assert solve_a_for_beta(0.2, 1 / 6) == pytest.approx(
            0.007303157200659854, abs=1e-12)

    def test_q_zero(self):
        assert solve_a_for_beta(0.0, 0.2) == pytest.approx(0.04, abs=1e-12)


class TestPaulTrap:
    def test_build_consistency(self):
        trap = PaulTrap.build(q=0.2, kappa=1 / 6, rf_over_secular=12.0,
                              secular_omega=OMEGA)
        assert trap.beta == pytest.approx(1 / 6, abs=1e-10)
        assert trap.radial_omega == pytest.approx(OMEGA, rel=1e-9)
        assert trap.axial_omega / trap.radial_omega == pytest.approx(
            1 / 6, rel=1e-9)

    def test_spectrum_matches_chi_paul(self):
        trap = PaulTrap.build(q=0.2, kappa=1 / 6, rf_over_secular=12.0,
                              secular_omega=OMEGA)
        spectrum = mode_spectrum(trap)
        assert [m.name for m in spectrum.modes] == ["com", "rocking"]
        # exact Mathieu rocking ratio agrees with the secular closed form
        # to O(beta^2) corrections
        assert spectrum.chi == pytest.approx(chi_paul(1 / 6).chi, rel=0.03)

    def test_kappa_validation(self):
        with pytest.raises(ValueError):
            PaulTrap(mathieu_radial=MathieuParams(0.0, 0.2), axial_a=0.01,
                     kappa=1.5, rf_angular_frequency=1e8)


@pytest.fixture(scope="module")
def trap():
    return MicrotrapArray.build(separation_d=100e-6, secular_omega=OMEGA,
                                q=0.2, rf_over_secular=12.0)


class TestMicrotrapArray:
    def test_build_consistency(self, trap):
        assert trap.beta == pytest.approx(1 / 6, abs=1e-12)
        assert trap.rf_angular_frequency == pytest.approx(12 * OMEGA)

    def test_inconsistent_triple_rejected(self):
        with pytest.raises(ValueError):
            MicrotrapArray(separation_d=100e-6, secular_omega=OMEGA,
                           mathieu=MathieuParams(a=0.04, q=0.0),
                           rf_angular_frequency=12 * OMEGA)

    def test_equilibrium_pushout(self, trap):
        eq = equilibrium_positions(trap)
        d = trap.separation_d
        # Coulomb repulsion pushes ions slightly beyond the trap centers
        assert eq[1] - eq[0] > d
        assert (eq[1] - eq[0] - d) / d < 1e-3
        assert eq[0] == pytest.approx(-eq[1], abs=1e-18)

    def test_crystal_residual_and_mirror_symmetry(self, trap):
        crystal = find_periodic_crystal(trap)
        assert crystal_residual(crystal, trap) < 1e-8
        np.testing.assert_allclose(crystal.cosine_coefficients[:, 0],
                                   -crystal.cosine_coefficients[:, 1],
                                   atol=1e-30)
        np.testing.assert_allclose(crystal.sine_coefficients[:, 0],
                                   -crystal.sine_coefficients[:, 1],
                                   atol=1e-30)

    def test_static_trap_crystal_is_constant(self):
        trap0 = MicrotrapArray.build(separation_d=100e-6,
                                     secular_omega=OMEGA, q=0.0,
                                     rf_over_secular=12.0)
        crystal = find_periodic_crystal(trap0)
        u, w = crystal.relative_series()
        assert np.all(u[1:] == 0.0) and np.all(w == 0.0)
        assert u[0] > 0.0  # static Coulomb pushout

    def test_spectrum_matches_chi_microtrap(self, trap):
        spectrum = mode_spectrum(trap)
        assert [m.name for m in spectrum.modes] == ["com", "breathing"]
        expected = chi_microtrap(trap.xi).chi
        assert spectrum.chi == pytest.approx(expected, rel=0.03)

    def test_hill_reduction_positive_shift(self, trap):
        crystal = find_periodic_crystal(trap)
        h = hill_coefficients(crystal, trap, j_max=2)
        assert h[0] > 0.0  # Coulomb curvature stiffens the breathing mode
        assert abs(h[1]) < h[0]


class TestSpectrumFromChi:
    def test_ratio_and_mode_name(self):
        spec = spectrum_from_chi(-1.4e-2)
        assert spec.chi == pytest.approx(-1.4e-2, abs=1e-15)
        assert spec.modes[1].name == "rocking"
        spec_pos = spectrum_from_chi(1.8e-4)
        assert spec_pos.modes[1].name == "breathing"

    def test_coupling_vectors_orthonormal(self):
        spec = spectrum_from_chi(-1.4e-2)
        b = np.array([m.b for m in spec.modes])
        np.testing.assert_allclose(b @ b.T, np.eye(2), atol=1e-15)
