import numpy as np
import pytest

from fastgates import (
    MathieuParams,
    Unstable,
    characteristic_exponent,
    floquet_solution,
    fourier_coefficients,
    kick_excitation,
    micromotion_sums,
    mu_at,
    mu_factor,
    stability,
)
from fastgates.errors import SingularDenominator
from fastgates.mathieu import (
    _closure_residual,
    floquet_mode_values,
    mu_approx,
)


class TestCharacteristicExponent:
    def test_static_trap_exact(self):
        assert characteristic_exponent(MathieuParams(a=0.04, q=0.0)) == 0.2

    def test_lowest_order_formula(self):
        # beta ~ sqrt(a + q^2/2) holds to 1% in the weak-drive corner
        for q in (0.02, 0.05, 0.1):
            for a in (0.001, 0.01, 0.05):
                beta = characteristic_exponent(MathieuParams(a=a, q=q))
                approx = np.sqrt(a + q**2 / 2.0)
                assert abs(beta - approx) / approx < 0.01

    def test_frozen_value_q02(self):
        beta = characteristic_exponent(MathieuParams(a=0.0, q=0.2))
        assert beta == pytest.approx(0.1425513265398053, abs=1e-12)

    def test_closure_agrees_with_monodromy(self):
        # the Newton closure root is an independent path to beta
        for a, q in ((0.0, 0.2), (0.01, 0.3), (0.0, 0.60945603)):
            beta = characteristic_exponent(MathieuParams(a=a, q=q))
            b = beta
            for _ in range(12):
                r = _closure_residual(a, q, b, 7)
                rp = _closure_residual(a, q, b + 1e-9, 7)
                b -= r / ((rp - r) / 1e-9)
            assert abs(b - beta) < 1e-8

    def test_unstable_raises(self):
        with pytest.raises(Unstable):
            characteristic_exponent(MathieuParams(a=0.0, q=1.0))
        with pytest.raises(Unstable):
            characteristic_exponent(MathieuParams(a=-0.1, q=0.05))

    def test_stability_predicate(self):
        assert stability(MathieuParams(a=0.0, q=0.2))
        assert not stability(MathieuParams(a=0.0, q=1.0))

    def test_negative_q_rejected(self):
        with pytest.raises(ValueError):
            MathieuParams(a=0.0, q=-0.1)


class TestFourierCoefficients:
    def test_static_trap_single_harmonic(self):
        coeffs = fourier_coefficients(MathieuParams(a=0.04, q=0.0), 0.2, 5)
        expected = np.zeros(11)
        expected[5] = 1.0
        np.testing.assert_array_equal(coeffs, expected)

    def test_normalization_and_decay(self):
        sol = floquet_solution(MathieuParams(a=0.0, q=0.2))
        J = sol.truncation_order
        assert sol.coefficients[J] == 1.0
        mags = np.abs(sol.coefficients)
        # coefficients decay away from j = 0 on both sides
        assert np.all(np.diff(mags[: J + 1]) > 0)
        assert np.all(np.diff(mags[J:]) < 0)

    def test_leading_coefficients_match_q_over_4(self):
        # to first order C_{+-1} ~ -q / 4 (weak drive, a = 0)
        q = 0.05
        sol = floquet_solution(MathieuParams(a=0.0, q=q))
        J = sol.truncation_order
        assert sol.coefficients[J + 1] == pytest.approx(-q / 4.0, rel=0.05)
        assert sol.coefficients[J - 1] == pytest.approx(-q / 4.0, rel=0.05)

    def test_recurrence_residual_machine_level(self):
        params = MathieuParams(a=0.005, q=0.3)
        sol = floquet_solution(params)
        c = sol.coefficients
        J = sol.truncation_order
        a, q = params.a, params.q
        for j in range(-J + 1, J):
            d = (a - (2 * j + sol.beta) ** 2) / q
            res = c[J + j + 1] - d * c[J + j] + c[J + j - 1]
            assert abs(res) < 1e-12

    def test_escalation_for_strong_drive(self):
        # J = 3 is too small for a strong drive; the solver escalates once
        sol = floquet_solution(MathieuParams(a=0.0, q=0.60945603), J=3)
        assert sol.truncation_order == 8


class TestModeValues:
    def test_floquet_mode_satisfies_ode(self):
        params = MathieuParams(a=0.0, q=0.2)
        sol = floquet_solution(params)
        s = np.linspace(0.0, 2 * np.pi, 101)
        h = 1e-5
        phi_m, _ = floquet_mode_values(sol, s - h)
        phi_0, dphi = floquet_mode_values(sol, s)
        phi_p, _ = floquet_mode_values(sol, s + h)
        second = (phi_p - 2 * phi_0 + phi_m) / h**2
        k = params.a - 2 * params.q * np.cos(2 * s)
        np.testing.assert_allclose(second, -k * phi_0, atol=1e-5)

    def test_derivative_consistency(self):
        sol = floquet_solution(MathieuParams(a=0.01, q=0.3))
        s = np.array([0.7])
        h = 1e-6
        phi_p, _ = floquet_mode_values(sol, s + h)
        phi_m, _ = floquet_mode_values(sol, s - h)
        _, dphi = floquet_mode_values(sol, s)
        assert dphi[0] == pytest.approx((phi_p[0] - phi_m[0]) / (2 * h),
                                        abs=1e-8)


class TestKickExcitation:
    def test_harmonic_limit_magnitude(self):
        # q = 0: |B| = 1 / (2 beta) independent of the kick instant
        params = MathieuParams(a=0.0425, q=0.0)
        sol = floquet_solution(params)
        B = kick_excitation(sol, np.array([0.3, 1.1, 2.9]))
        np.testing.assert_allclose(np.abs(B), 1.0 / (2.0 * sol.beta),
                                   rtol=1e-12)

    def test_jump_conditions(self):
        # 2 Re[B phi(s)] = 0 (position continuous), 2 Re[B phi'(s)] = 1
        sol = floquet_solution(MathieuParams(a=0.0, q=0.2))
        s = np.array([0.4, 1.9])
        B = kick_excitation(sol, s)
        phi, dphi = floquet_mode_values(sol, s)
        np.testing.assert_allclose(2 * np.real(B * phi), 0.0, atol=1e-12)
        np.testing.assert_allclose(2 * np.real(B * dphi), 1.0, rtol=1e-12)


class TestMuFactor:
    def test_mu_is_one_without_drive(self):
        assert mu_at(MathieuParams(a=0.04, q=0.0), np.pi) == 1.0

    def test_reference_value_at_pi(self, mathieu_q02):
        # kick at the maximally trapping RF phase, a = 0, q = 0.2
        assert mu_at(mathieu_q02, np.pi) == pytest.approx(1.2353, abs=5e-5)

    def test_frozen_values(self, mathieu_q02):
        assert mu_at(mathieu_q02, np.pi) == pytest.approx(
            1.2352936047662637, abs=1e-10)
        assert mu_at(mathieu_q02, 0.0) == pytest.approx(
            0.8219980734682623, abs=1e-10)

    def test_enhancement_flips_across_half_cycle(self, mathieu_q02):
        assert mu_at(mathieu_q02, np.pi) > 1.0 > mu_at(mathieu_q02, 0.0)

    def test_approx_matches_full_to_five_percent(self):
        for q in (0.1, 0.2, 0.3):
            params = MathieuParams(a=0.0, q=q)
            beta = characteristic_exponent(params)
            for phi in (0.0, np.pi):
                full = mu_at(params, phi)
                approx = mu_approx(params, beta, phi)
                assert abs(full - approx) / full < 0.05

    def test_invariant_under_coefficient_rescaling(self, mathieu_q02):
        sol = floquet_solution(mathieu_q02)
        sums = micromotion_sums(sol, np.pi)
        mu = mu_factor(sums, sol.beta)
        scaled = type(sol)(beta=sol.beta,
                           coefficients=sol.coefficients * 7.25,
                           truncation_order=sol.truncation_order)
        sums2 = micromotion_sums(scaled, np.pi)
        assert abs(mu_factor(sums2, sol.beta) - mu) < 1e-12

    def test_strong_drive_value(self):
        # drive strength chosen so mu(pi) = 2.31
        params = MathieuParams(a=0.0, q=0.60945603)
        assert mu_at(params, np.pi) == pytest.approx(2.31, abs=1e-6)
        assert characteristic_exponent(params) == pytest.approx(
            0.47114553181627994, abs=1e-10)
