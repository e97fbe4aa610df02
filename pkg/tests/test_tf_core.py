import numpy as np
import pytest

from qldet.errors import NotRealizable, PoleHit
from qldet.tf_core import (FrequencyGrid, QuadratureTransferMatrix,
                           RationalFunction, build_quadrature_tf,
                           check_realness, check_symplectic_realizability,
                           conjugate_partner, evaluate_rational, expander_g11,
                           free_parameter_count, internal_squeezing_g11,
                           picture_convert)


def brute_force_eval(rf, omega):
    """Independent oracle: expand to polynomial coefficients and take a ratio."""
    num = rf.gain * np.poly(rf.zeros) if rf.zeros else np.array([rf.gain])
    den = np.poly(rf.poles) if rf.poles else np.array([1.0])
    s = 1j * omega
    return np.polyval(num, s) / np.polyval(den, s)


class TestEvaluateRational:
    def test_dc_substitution(self):
        rf = RationalFunction(zeros=(-1.0,), poles=(-2.0,), gain=1.0)
        assert evaluate_rational(rf, 0.0) == pytest.approx(0.5)

    def test_passive_cavity_unit_modulus_at_dc(self):
        gamma = 1.3
        g11 = internal_squeezing_g11(gamma, gamma)
        assert abs(evaluate_rational(g11, 0.0)) == pytest.approx(1.0)

    def test_matches_polynomial_expansion(self, rng):
        zeros = rng.normal(size=3) + 1j * rng.normal(size=3)
        poles = rng.normal(size=4) + 1j * rng.normal(size=4)
        rf = RationalFunction(zeros=zeros, poles=poles,
                              gain=0.7 - 0.2j)
        grid = np.linspace(0.1, 30.0, 50)
        worst = max(abs(evaluate_rational(rf, w) - brute_force_eval(rf, w))
                    for w in grid)
        assert worst < 1e-12

    def test_pole_hit(self):
        rf = RationalFunction(poles=(2.0j,), gain=1.0)
        with pytest.raises(PoleHit):
            evaluate_rational(rf, 2.0)  # i*2.0 == pole at 2j

    def test_callable_shorthand(self):
        rf = RationalFunction(zeros=(-1.0,), poles=(-2.0,))
        assert rf(0.0) == evaluate_rational(rf, 0.0)


class TestRationalFunctionInvariants:
    def test_rejects_shared_root(self):
        with pytest.raises(ValueError):
            RationalFunction(zeros=(-1.0,), poles=(-1.0,))

    def test_rejects_improper(self):
        with pytest.raises(ValueError):
            RationalFunction(zeros=(-1.0, -2.0), poles=(-3.0,))

    def test_rejects_zero_gain(self):
        with pytest.raises(ValueError):
            RationalFunction(poles=(-1.0,), gain=0.0)


class TestBuildQuadratureTf:
    def test_first_order_partner(self):
        alpha, beta = 2.0, 1.0
        tf = build_quadrature_tf(internal_squeezing_g11(alpha, beta))
        for omega in (0.0, 0.7, -2.3):
            want = (beta + 1j * omega) / (alpha - 1j * omega)
            assert evaluate_rational(tf.g22, omega) == pytest.approx(want)

    def test_identity(self):
        tf = build_quadrature_tf(RationalFunction(gain=1.0))
        assert evaluate_rational(tf.g22, 1.7) == pytest.approx(1.0)

    def test_second_order_partner(self):
        a1, b1, a2, b2 = -0.5, -2.0, 0.25, 4.0  # a1 b1 = a2 b2 = 1
        tf = build_quadrature_tf(expander_g11(a1, b1, a2, b2))
        for omega in (0.3, 1.9):
            s = -1j * omega
            want = ((s - a2) * (s - b2)) / ((s - a1) * (s - b1))
            assert evaluate_rational(tf.g22, omega) == pytest.approx(want)

    def test_realness_failure(self):
        g11 = RationalFunction(zeros=(-0.5 + 0.1j,), poles=(-1.0 + 2.0j,))
        with pytest.raises(NotRealizable):
            build_quadrature_tf(g11)

    def test_strictly_proper_rejected(self):
        g11 = RationalFunction(zeros=(), poles=(-1.0,))
        with pytest.raises(NotRealizable):
            build_quadrature_tf(g11)


class TestSymplecticCheck:
    def test_internal_squeezing_passes(self):
        tf = build_quadrature_tf(internal_squeezing_g11(2.0, 1.0))
        grid = FrequencyGrid.default_for(tf, n=100)
        result = check_symplectic_realizability(tf, grid, 1e-10)
        assert result.passed

    def test_identity_zero_residual(self):
        tf = QuadratureTransferMatrix(RationalFunction(gain=1.0),
                                      RationalFunction(gain=1.0))
        result = check_symplectic_realizability(
            tf, FrequencyGrid.linear(0.1, 10, 20), 1e-12)
        assert result.passed and result.max_residual == 0.0

    def test_constant_gain_two_fails(self):
        tf = QuadratureTransferMatrix(RationalFunction(gain=2.0),
                                      RationalFunction(gain=2.0))
        result = check_symplectic_realizability(
            tf, FrequencyGrid.linear(0.1, 10, 20), 1e-10)
        assert not result.passed
        assert result.max_residual == pytest.approx(3.0)  # |2*2 - 1|


class TestRealness:
    def test_real_first_order(self):
        tf = build_quadrature_tf(internal_squeezing_g11(1.7, 0.4))
        assert check_realness(tf)

    def test_unmirrored_complex_pole(self):
        g11 = RationalFunction(zeros=(-0.3,), poles=(-1.0 + 2.0j,))
        tf = QuadratureTransferMatrix(g11, conjugate_partner(g11))
        assert not check_realness(tf)
        # independent oracle: realness means g(-w) == conj(g(w)) pointwise
        mismatch = max(
            abs(evaluate_rational(g11, -w) -
                np.conj(evaluate_rational(g11, w)))
            for w in (0.4, 1.1, 3.0))
        assert mismatch > 1e-3

    def test_identity(self):
        tf = QuadratureTransferMatrix(RationalFunction(gain=1.0),
                                      RationalFunction(gain=1.0))
        assert check_realness(tf)

    def test_conjugate_pair_poles_pass(self):
        g11 = RationalFunction(zeros=(-0.5 + 1j, -0.5 - 1j),
                               poles=(0.2 + 0.9j, 0.2 - 0.9j))
        tf = QuadratureTransferMatrix(g11, conjugate_partner(g11))
        assert check_realness(tf)


class TestFreeParameterCount:
    @pytest.mark.parametrize("n,expected", [(1, 2), (2, 4), (5, 10)])
    def test_values(self, n, expected):
        assert free_parameter_count(n) == expected

    def test_rejects_degenerate_order(self):
        with pytest.raises(ValueError):
            free_parameter_count(0)
        with pytest.raises(ValueError):
            free_parameter_count(1.5)


class TestPictureConvert:
    def test_identity(self):
        out = picture_convert(np.eye(2), "quadrature->sideband")
        assert np.abs(out - np.eye(2)).max() < 1e-15

    def test_squeezer_conjugation_oracle(self):
        r = 0.8
        m = np.diag([np.exp(r), np.exp(-r)])
        got = picture_convert(m, "quadrature->sideband")
        u = np.array([[1.0, 1.0], [-1.0j, 1.0j]]) / np.sqrt(2.0)
        want = u.conj().T @ m @ u  # direct conjugation oracle
        assert np.abs(got - want).max() < 1e-14
        assert got[0, 1] == pytest.approx(np.sinh(r))
        assert got[0, 0] == pytest.approx(np.cosh(r))

    def test_round_trip(self, rng):
        m = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        back = picture_convert(picture_convert(m, "quadrature->sideband"),
                               "sideband->quadrature")
        assert np.abs(back - m).max() < 1e-14


class TestInvariants:
    def test_build_passes_symplectic(self, rng):
        for _ in range(5):
            re = -np.abs(rng.normal(size=2)) - 0.1
            g11 = RationalFunction(zeros=(re[0],), poles=(-re[1],), gain=-1.0)
            tf = build_quadrature_tf(g11)
            grid = FrequencyGrid.default_for(tf)
            assert check_symplectic_realizability(tf, grid, 1e-10).passed

    def test_modulus_product_is_one(self, rng):
        tf = build_quadrature_tf(internal_squeezing_g11(2.4, 0.3))
        for omega in rng.uniform(0.01, 50.0, size=20):
            prod = (abs(evaluate_rational(tf.g11, omega))
                    * abs(evaluate_rational(tf.g22, omega)))
            assert prod == pytest.approx(1.0, abs=1e-12)


class TestFrequencyGrid:
    def test_validation(self):
        with pytest.raises(ValueError):
            FrequencyGrid(points=np.array([]))
        with pytest.raises(ValueError):
            FrequencyGrid(points=np.array([1.0, 1.0]))
        with pytest.raises(ValueError):
            FrequencyGrid(points=np.array([1.0, 2.0]), scale="cubic")

    def test_default_for(self):
        tf = build_quadrature_tf(internal_squeezing_g11(3.0, 1.0))
        grid = FrequencyGrid.default_for(tf)
        assert len(grid) == 400
        assert grid.points[0] == pytest.approx(1e-3 * 3.0)
        assert grid.points[-1] == pytest.approx(1e3 * 3.0)
