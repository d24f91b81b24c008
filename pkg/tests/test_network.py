import numpy as np
import pytest

from dipcert.network import (
    ACTIVATIONS,
    TRAIN_BOTH,
    TRAIN_FIXED_V,
    Activation,
    DipNetwork,
    ParamVector,
    activation_moments,
    forward,
    init_network,
    jacobian,
    jacobian_gram,
    sigma_min_J,
    sigmoid,
    tanh,
)


def loop_forward(net, params):
    """Naive per-neuron evaluation of (1/sqrt(k)) V phi(W u) (oracle)."""
    x = np.zeros(net.n)
    for i in range(net.k):
        z_i = float(params.w[i] @ net.u)
        x += params.v[:, i] * net.act.fn(z_i)
    return x / np.sqrt(net.k)


def fd_jacobian(net, params, h=1e-6):
    theta = params.flatten()
    cols = []
    for i in range(theta.size):
        up, dn = theta.copy(), theta.copy()
        up[i] += h
        dn[i] -= h
        cols.append((forward(net, params.unflatten(up)) - forward(net, params.unflatten(dn))) / (2 * h))
    return np.column_stack(cols)


def constant_stub(c):
    """Test-only degenerate activation phi = c."""
    return Activation(
        name=f"const{c}",
        fn=lambda x: c * np.ones_like(np.asarray(x, dtype=float)),
        deriv=lambda x: np.zeros_like(np.asarray(x, dtype=float)),
        b_const=1.0,
        sup_abs=abs(c),
        cphi=abs(c),
        cphi_prime=0.0,
    )


class TestActivations:
    def test_moments_match_monte_carlo(self):
        act = sigmoid()
        rng = np.random.default_rng(6)
        x = rng.standard_normal(10_000_000)
        mc = np.sqrt(np.mean(act.fn(x) ** 2))
        assert act.cphi == pytest.approx(mc, abs=1e-3)
        mc_prime = np.sqrt(np.mean(act.deriv(x) ** 2))
        assert act.cphi_prime == pytest.approx(mc_prime, abs=1e-3)

    def test_tanh_moments_positive(self):
        act = tanh()
        assert act.cphi > 0 and act.cphi_prime > 0

    def test_constant_stub_moments(self):
        cphi, cphip = activation_moments(
            lambda x: 0.7 * np.ones_like(x), lambda x: np.zeros_like(x)
        )
        assert cphi == pytest.approx(0.7, abs=1e-12)
        assert cphip == pytest.approx(0.0, abs=1e-12)

    @pytest.mark.parametrize("name", ["sigmoid", "tanh"])
    def test_b_bounds_derivative(self, name):
        act = ACTIVATIONS[name]()
        x = np.linspace(-20, 20, 20_001)
        assert np.max(np.abs(act.deriv(x))) <= act.b_const + 1e-12


class TestInit:
    def test_unit_input(self):
        for seed in range(5):
            net, _ = init_network(7, 3, 2, sigmoid(), rng_seed=seed)
            assert abs(np.linalg.norm(net.u) - 1.0) < 1e-12

    def test_w_law_of_large_numbers(self):
        _, params = init_network(16, 10_000, 2, sigmoid(), rng_seed=1)
        entries = params.w.ravel()
        assert abs(entries.mean()) <= 4.0 / np.sqrt(entries.size)
        assert abs(entries.var() - 1.0) < 0.05

    def test_v_rademacher(self):
        net, params = init_network(4, 50, 6, sigmoid(), rng_seed=2)
        assert set(np.unique(params.v)) == {-1.0, 1.0}
        for i in range(net.k):
            col = params.v[:, i]
            assert np.trace(np.outer(col, col)) == net.n

    def test_zero_dims_rejected(self):
        with pytest.raises(ValueError):
            init_network(0, 3, 2, sigmoid())

    def test_flatten_round_trip(self):
        for mode in (TRAIN_BOTH, TRAIN_FIXED_V):
            _, params = init_network(3, 5, 4, sigmoid(), mode, rng_seed=3)
            again = params.unflatten(params.flatten())
            np.testing.assert_array_equal(again.w, params.w)
            np.testing.assert_array_equal(again.v, params.v)


class TestForward:
    def test_zero_weights_sigmoid(self):
        net, params = init_network(3, 8, 4, sigmoid(), rng_seed=4)
        zeroed = ParamVector(np.zeros_like(params.w), params.v, params.train_mode)
        expected = params.v.sum(axis=1) / (2.0 * np.sqrt(net.k))
        np.testing.assert_allclose(forward(net, zeroed), expected, atol=1e-14)

    def test_tanh_zero_point(self):
        net = DipNetwork(d=1, k=1, n=1, act=tanh(), u=np.array([1.0]))
        params = ParamVector(np.array([[0.0]]), np.array([[2.0]]))
        assert forward(net, params) == pytest.approx(0.0, abs=1e-15)

    def test_matches_loop_oracle(self):
        net, params = init_network(5, 17, 6, tanh(), rng_seed=5)
        np.testing.assert_allclose(forward(net, params), loop_forward(net, params), atol=1e-12)

    def test_homogeneous_in_v(self):
        net, params = init_network(4, 9, 3, sigmoid(), rng_seed=6)
        doubled = ParamVector(params.w, 2.0 * params.v, params.train_mode)
        np.testing.assert_allclose(forward(net, doubled), 2.0 * forward(net, params), atol=1e-13)

    def test_shape_mismatch(self):
        net, params = init_network(3, 4, 2, sigmoid(), rng_seed=7)
        bad = ParamVector(params.w[:, :2], params.v, params.train_mode)
        with pytest.raises(ValueError):
            forward(net, bad)


class TestJacobian:
    @pytest.mark.parametrize("act_name", ["sigmoid", "tanh"])
    @pytest.mark.parametrize("mode", [TRAIN_BOTH, TRAIN_FIXED_V])
    def test_finite_differences(self, act_name, mode):
        net, params = init_network(3, 8, 4, ACTIVATIONS[act_name](), mode, rng_seed=8)
        jac = jacobian(net, params)
        fd = fd_jacobian(net, params)
        assert np.linalg.norm(jac - fd) / np.linalg.norm(jac) <= 1e-5

    def test_gram_closed_form(self):
        for mode in (TRAIN_BOTH, TRAIN_FIXED_V):
            net, params = init_network(4, 12, 5, sigmoid(), mode, rng_seed=9)
            jac = jacobian(net, params)
            np.testing.assert_allclose(jac @ jac.T, jacobian_gram(net, params), atol=1e-10)

    def test_fixed_v_column_count(self):
        net, params = init_network(3, 8, 4, sigmoid(), TRAIN_FIXED_V, rng_seed=10)
        assert jacobian(net, params).shape == (4, 8 * 3)
        assert net.num_params == 24

    def test_doubling_v_doubles_w_block(self):
        net, params = init_network(3, 6, 4, sigmoid(), TRAIN_BOTH, rng_seed=11)
        kd = net.k * net.d
        j1 = jacobian(net, params)[:, :kd]
        doubled = ParamVector(params.w, 2.0 * params.v, params.train_mode)
        j2 = jacobian(net, doubled)[:, :kd]
        np.testing.assert_allclose(j2, 2.0 * j1, atol=1e-14)

    def test_sigma_min_hand_assembled_case(self):
        # k=1, n=2, V_1 = (1, 0)^T: J is an explicit 2 x (d + 2) matrix
        d = 3
        act = sigmoid()
        u = np.array([1.0, 0.0, 0.0])
        net = DipNetwork(d=d, k=1, n=2, act=act, u=u)
        w = np.array([[0.3, -0.2, 0.5]])
        v = np.array([[1.0], [0.0]])
        params = ParamVector(w, v)
        z = float(w[0] @ u)
        explicit = np.zeros((2, d + 2))
        explicit[:, :d] = act.deriv(z) * np.outer(v[:, 0], u)
        explicit[0, d] = act.fn(z)
        explicit[1, d + 1] = act.fn(z)
        svals = np.linalg.svd(explicit, compute_uv=False)
        assert sigma_min_J(net, params) == pytest.approx(svals[-1], rel=1e-12)

    def test_constant_stub_fixed_v_is_degenerate(self):
        net, params = init_network(3, 16, 4, constant_stub(0.5), TRAIN_FIXED_V, rng_seed=12)
        assert sigma_min_J(net, params) == pytest.approx(0.0, abs=1e-12)


class TestConcentration:
    def test_mean_gram_approaches_moment_identity(self):
        act = sigmoid()
        target = (act.cphi**2 + act.cphi_prime**2) * np.eye(3)
        acc = np.zeros((3, 3))
        trials = 200
        for seed in range(trials):
            net, params = init_network(8, 4096, 3, act, TRAIN_BOTH, rng_seed=seed)
            acc += jacobian_gram(net, params)
        scale = act.cphi**2 + act.cphi_prime**2
        assert np.max(np.abs(acc / trials - target)) < 0.05 * scale

    def test_sigma_min_concentration_event(self):
        # smaller sibling of the acceptance check
        act = sigmoid()
        thr = np.sqrt(act.cphi**2 + act.cphi_prime**2) / 2.0
        hits = sum(
            sigma_min_J(*init_network(10, 4096, 5, act, TRAIN_BOTH, rng_seed=s)) >= thr
            for s in range(5)
        )
        assert hits == 5
