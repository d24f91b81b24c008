import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from dipcert.losses import lojasiewicz, mse


class TestObjective:
    def test_value_at_target_is_zero(self):
        y = np.array([1.0, -2.0, 0.5])
        assert mse(y).value(y) == 0.0

    def test_three_four_five(self):
        loss = mse(np.zeros(2))
        assert loss.value(np.array([3.0, 4.0])) == pytest.approx(25.0, abs=1e-14)

    def test_matches_elementwise_sum_oracle(self):
        rng = np.random.default_rng(0)
        y = rng.standard_normal(11)
        v = rng.standard_normal(11)
        naive = sum((a - b) ** 2 for a, b in zip(v, y))
        assert mse(y).value(v) == pytest.approx(naive, abs=1e-12)

    def test_length_mismatch(self):
        with pytest.raises(ValueError, match="mismatch"):
            mse(np.zeros(3)).value(np.zeros(4))

    def test_grad_formula(self):
        loss = mse(np.zeros(2))
        np.testing.assert_allclose(loss.grad(np.array([1.0, -2.0])), [2.0, -4.0])
        np.testing.assert_allclose(loss.grad(np.zeros(2)), [0.0, 0.0])

    def test_grad_matches_finite_differences(self):
        rng = np.random.default_rng(1)
        y = rng.standard_normal(6)
        v = rng.standard_normal(6)
        loss = mse(y)
        g = loss.grad(v)
        h = 1e-6
        for i in range(6):
            e = np.zeros(6)
            e[i] = h
            fd = (loss.value(v + e) - loss.value(v - e)) / (2 * h)
            assert g[i] == pytest.approx(fd, rel=1e-6)


class TestPsiFamily:
    def test_mse_psi_values(self):
        loss = mse(np.zeros(1))
        assert loss.psi(4.0) == pytest.approx(2.0, abs=1e-14)
        assert loss.psi_prime(4.0) == pytest.approx(0.25, abs=1e-14)
        assert loss.psi_inv(3.0) == pytest.approx(9.0, abs=1e-14)

    def test_lojasiewicz_psi(self):
        loss = lojasiewicz(np.zeros(1), c=2.0, alpha=0.5)
        assert loss.psi(9.0) == pytest.approx(6.0, abs=1e-12)

    def test_domain_errors(self):
        loss = mse(np.zeros(1))
        with pytest.raises(ValueError):
            loss.psi(-1.0)
        with pytest.raises(ValueError):
            loss.psi_prime(0.0)

    def test_invalid_parameters(self):
        with pytest.raises(ValueError):
            lojasiewicz(np.zeros(1), c=-1.0, alpha=0.5)
        with pytest.raises(ValueError):
            lojasiewicz(np.zeros(1), c=1.0, alpha=1.5)


class TestKlResidual:
    def test_mse_residual_is_one(self):
        rng = np.random.default_rng(2)
        y = rng.standard_normal(5)
        loss = mse(y)
        for _ in range(100):
            v = rng.standard_normal(5)
            assert abs(loss.kl_residual(v) - 1.0) <= 1e-12

    def test_lojasiewicz_matches_mse_at_half(self):
        rng = np.random.default_rng(3)
        y = rng.standard_normal(4)
        v = rng.standard_normal(4)
        assert lojasiewicz(y, 1.0, 0.5).kl_residual(v) == pytest.approx(1.0, abs=1e-12)

    def test_small_c_flags_violation(self):
        rng = np.random.default_rng(4)
        y = rng.standard_normal(4)
        v = rng.standard_normal(4)
        assert lojasiewicz(y, 0.1, 0.5).kl_residual(v) == pytest.approx(0.1, abs=1e-12)

    def test_at_minimizer_raises(self):
        y = np.ones(3)
        with pytest.raises(ValueError, match="minimizer"):
            mse(y).kl_residual(y)


class TestEnvelope:
    def test_mse_anchor_values(self):
        env = mse(np.zeros(1)).envelope()
        assert env.Psi(1.0) == pytest.approx(0.0, abs=1e-14)
        assert env.Psi_inv(0.0) == pytest.approx(1.0, abs=1e-14)

    @pytest.mark.parametrize("s", [1e-6, 0.5, 1.0, 37.0])
    def test_mse_round_trip(self, s):
        env = mse(np.zeros(1)).envelope()
        assert env.Psi_inv(env.Psi(s)) == pytest.approx(s, abs=1e-10)

    def test_lojasiewicz_matches_quadrature_oracle(self):
        loss = lojasiewicz(np.zeros(1), c=1.0, alpha=0.3)
        env = loss.envelope()
        for s in [0.01, 0.5, 2.0, 37.0]:
            tail, _ = quad(lambda r: -loss.psi_prime(r) ** 2, 1.0, s)
            assert env.Psi(s) == pytest.approx(env.Psi(1.0) + tail, abs=1e-6)

    @pytest.mark.parametrize("alpha", [0.3, 0.5, 0.8, 1.0])
    def test_round_trip_across_alphas(self, alpha):
        env = lojasiewicz(np.zeros(1), c=1.7, alpha=alpha).envelope()
        for s in np.geomspace(1e-8, 1e4, 25):
            assert env.Psi_inv(env.Psi(s)) == pytest.approx(s, rel=1e-10)

    def test_monotonicity_sampled(self):
        # psi strictly increasing, Psi strictly decreasing over (0, 1e4]
        for loss in [mse(np.zeros(1)), lojasiewicz(np.zeros(1), 0.7, 0.4)]:
            env = loss.envelope()
            s = np.geomspace(1e-8, 1e4, 10_000)
            psi_vals = np.array([loss.psi(x) for x in s])
            psi_big = np.asarray(env.Psi(s))
            assert np.all(np.diff(psi_vals) > 0)
            assert np.all(np.diff(psi_big) < 0)


@settings(max_examples=60, deadline=None)
@given(
    st.floats(min_value=0.1, max_value=5.0),
    st.floats(min_value=0.05, max_value=1.0),
    st.floats(min_value=1e-6, max_value=1e3),
)
def test_envelope_round_trip_property(c, alpha, s):
    env = lojasiewicz(np.zeros(1), c, alpha).envelope()
    assert env.Psi_inv(env.Psi(s)) == pytest.approx(s, rel=1e-8)
