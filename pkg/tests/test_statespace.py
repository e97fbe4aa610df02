import numpy as np
import pytest

from conftest import appendix_b_primed, expander_pole_zero
from qldet.errors import (ImproperTransferFunction, SingularResolvent,
                          SingularTransform)
from qldet.physical_realization import verify_physical
from qldet.statespace import (StateSpace, canonical_realization,
                              frequency_response, is_hurwitz,
                              minimal_realization, similarity_transform,
                              tf_distance, time_response)
from qldet.tf_core import (FrequencyGrid, RationalFunction,
                           build_quadrature_tf, expander_g11,
                           internal_squeezing_g11)


def tuned_cavity(gamma=1.0):
    return StateSpace(a=[[-gamma]], b=[[np.sqrt(2 * gamma)]],
                      c=[[-np.sqrt(2 * gamma)]], d=[[1.0]])


def squeezing_sideband(alpha, beta):
    """The displayed realizable state space of the first-order pair."""
    a = 0.5 * np.array([[-alpha - beta, alpha - beta],
                        [alpha - beta, -alpha - beta]])
    b = np.sqrt(alpha + beta) * np.eye(2)
    return StateSpace(a, b, -b, np.eye(2))


class TestFrequencyResponse:
    def test_tuned_cavity_dc(self):
        h = frequency_response(tuned_cavity(1.0), 0.0)
        assert h[0, 0] == pytest.approx(-1.0)
        # matches (w - i gamma)/(w + i gamma) at w = 0
        assert h[0, 0] == pytest.approx((0 - 1j) / (0 + 1j))

    def test_realizable_matches_tf_modulo_sign(self):
        alpha, beta = 2.0, 1.0
        ss = squeezing_sideband(alpha, beta)
        tf = build_quadrature_tf(internal_squeezing_g11(alpha, beta))
        grid = FrequencyGrid.default_for(tf, n=120)
        assert tf_distance(ss, tf, grid, picture="sideband") < 1e-10

    def test_d_only(self):
        ss = StateSpace(a=np.zeros((0, 0)), b=np.zeros((0, 2)),
                        c=np.zeros((2, 0)), d=np.diag([2.0, 0.5]))
        for omega in (0.0, 3.7):
            assert np.abs(frequency_response(ss, omega)
                          - np.diag([2.0, 0.5])).max() == 0.0

    def test_singular_resolvent(self):
        ss = StateSpace(a=[[1j * 2.0]], b=[[1.0]], c=[[1.0]], d=[[0.0]])
        with pytest.raises(SingularResolvent):
            frequency_response(ss, -2.0)


class TestCanonicalRealization:
    def test_first_order_two_states(self):
        tf = build_quadrature_tf(internal_squeezing_g11(1.0, 0.6))
        ss = canonical_realization(tf)
        assert ss.n_states == 2
        grid = FrequencyGrid.default_for(tf, n=100)
        assert tf_distance(ss, tf, grid) < 1e-9

    def test_identity_empty_state(self):
        tf = build_quadrature_tf(RationalFunction(gain=1.0))
        ss = canonical_realization(tf)
        assert ss.n_states == 0
        assert np.abs(ss.d - np.eye(2)).max() == 0.0

    def test_second_order_grid_match(self):
        params = expander_pole_zero(0.4, 0.15, 1.0)
        tf = build_quadrature_tf(expander_g11(*params))
        ss = canonical_realization(tf)
        assert ss.n_states <= 4
        grid = FrequencyGrid.default_for(tf, n=150)
        # grid-match oracle: compare against direct rational evaluation
        worst = 0.0
        for omega in grid.points:
            h = frequency_response(ss, omega)
            worst = max(worst, float(np.abs(h - tf(omega)).max()))
        assert worst < 1e-9

    def test_improper_rejected(self):
        from qldet.statespace import _siso_companion
        good = RationalFunction(zeros=(-1.0,), poles=(-2.0,))
        object.__setattr__(good, "zeros", (-1.0, -3.0))  # force improper
        with pytest.raises(ImproperTransferFunction):
            _siso_companion(good)


class TestMinimalRealization:
    def test_removes_unobservable_copy(self):
        tf = build_quadrature_tf(internal_squeezing_g11(1.5, 0.5))
        ss = canonical_realization(tf)
        n = ss.n_states
        a = np.zeros((2 * n, 2 * n), complex)
        a[:n, :n] = ss.a
        a[n:, n:] = ss.a
        b = np.vstack([ss.b, ss.b])
        c = np.hstack([ss.c, np.zeros_like(ss.c)])
        bloated = StateSpace(a, b, c, ss.d)
        reduced = minimal_realization(bloated)
        assert reduced.n_states == n

    def test_canonical_first_order_stays_two(self):
        tf = build_quadrature_tf(internal_squeezing_g11(1.0, 0.5))
        ss = minimal_realization(canonical_realization(tf))
        assert ss.n_states == 2

    def test_unreachable_block_removed(self, rng):
        a1 = np.diag([-1.0, -2.0, -3.0])
        a2 = np.diag([-4.0, -5.0, -6.0])
        a = np.zeros((6, 6))
        a[:3, :3], a[3:, 3:] = a1, a2
        b = np.vstack([rng.normal(size=(3, 1)), np.zeros((3, 1))])
        c = rng.normal(size=(1, 6))
        ss = StateSpace(a, b, c, [[0.0]])
        # Kalman rank oracle computed directly from the data
        ctrb = np.hstack([np.linalg.matrix_power(a, k) @ b for k in range(6)])
        assert np.linalg.matrix_rank(ctrb) == 3
        reduced = minimal_realization(ss)
        assert reduced.n_states == 3
        for omega in (0.0, 1.3, 7.0):
            assert np.abs(frequency_response(reduced, omega)
                          - frequency_response(ss, omega)).max() < 1e-9

    def test_idempotent(self):
        tf = build_quadrature_tf(internal_squeezing_g11(2.0, 0.4))
        ss = minimal_realization(canonical_realization(tf))
        again = minimal_realization(ss)
        assert again.n_states == ss.n_states


class TestIsHurwitz:
    def test_diagonal(self):
        assert is_hurwitz(np.diag([-1.0, -2.0]))

    def test_internal_squeezing(self):
        alpha, beta = 2.0, 1.0
        assert is_hurwitz(squeezing_sideband(alpha, beta).a)

    def test_threshold_not_hurwitz(self):
        # beta = 0 puts one eigenvalue exactly at zero (gamma = chi)
        assert not is_hurwitz(squeezing_sideband(2.0, 0.0).a)


class TestTimeResponse:
    def test_zero_everything(self):
        ss = tuned_cavity()
        resp = time_response(ss, x0=None, input_fn=None, t_end=5.0, dt=0.05)
        assert np.abs(resp.natural).max() == 0.0
        assert np.abs(resp.forced).max() == 0.0

    def test_sinusoid_steady_state(self):
        gamma = 1.0
        ss = tuned_cavity(gamma)
        omega = gamma
        h = frequency_response(ss, omega)[0, 0]
        resp = time_response(ss, x0=None,
                             input_fn=lambda t: np.exp(-1j * omega * t),
                             t_end=10.0 / gamma + 2 * np.pi / omega,
                             dt=0.002)
        late = resp.forced[resp.times > 10.0 / gamma, 0]
        amplitude = np.abs(late).max()
        assert amplitude == pytest.approx(abs(h), rel=0.01)
        assert abs(h) == pytest.approx(1.0)

    def test_natural_envelope_decays(self):
        ss = StateSpace(np.diag([-0.5, -2.0]), np.zeros((2, 2)),
                        np.eye(2), np.zeros((2, 2)))
        resp = time_response(ss, x0=[1.0, -0.7], input_fn=None,
                             t_end=8.0, dt=0.1)
        norms = np.linalg.norm(resp.natural, axis=1)
        assert np.all(np.diff(norms) <= 1e-12)
        assert resp.growth_bound == pytest.approx(-0.5)


class TestSimilarityTransform:
    def test_identity(self):
        ss = squeezing_sideband(2.0, 1.0)
        out = similarity_transform(ss, np.eye(2))
        assert np.abs(out.a - ss.a).max() == 0.0

    def test_appendix_fixture_transform_realizes(self):
        ss_primed, x = appendix_b_primed(0.5)
        from qldet.physical_realization import factor_indefinite
        t = factor_indefinite(x)
        ss = similarity_transform(ss_primed, t)
        cert = verify_physical(ss)
        assert cert.residual1 < 1e-10 and cert.residual2 < 1e-10

    def test_random_transform_preserves_response(self, rng):
        ss = squeezing_sideband(1.3, 0.4)
        t = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        out = similarity_transform(ss, t)
        for omega in (0.1, 1.0, 9.0):
            assert np.abs(frequency_response(out, omega)
                          - frequency_response(ss, omega)).max() < 1e-10

    def test_singular_rejected(self):
        ss = squeezing_sideband(1.0, 0.2)
        with pytest.raises(SingularTransform):
            similarity_transform(ss, np.ones((2, 2)))


class TestTfDistance:
    def test_matched_pair(self):
        tf = build_quadrature_tf(internal_squeezing_g11(1.0, 0.3))
        ss = canonical_realization(tf)
        grid = FrequencyGrid.default_for(tf, n=80)
        assert tf_distance(ss, tf, grid) < 1e-10

    def test_tuned_cavity_sign_modulo(self):
        gamma = 1.0
        tf = build_quadrature_tf(internal_squeezing_g11(gamma, gamma))
        grid = FrequencyGrid.default_for(tf, n=80)
        assert tf_distance(tuned_cavity(gamma), tf, grid) < 1e-10

    def test_mismatched_cavities(self):
        tf = build_quadrature_tf(internal_squeezing_g11(1.0, 1.0))
        grid = FrequencyGrid.default_for(tf, n=80)
        assert tf_distance(tuned_cavity(2.0), tf, grid) > 0.3
