"""Two-layer generator g(u, theta) = (1/sqrt(k)) V phi(W u), its Jacobian, and init.

The flattened parameter vector stacks W (k x d, row-major) first and, when
both layers are trained, V (n x k, row-major) after it, for a total length
p = k (d + n); with the linear layer fixed only the W part is a parameter
(p = k d).  The Jacobian follows the same column layout.

The n x n Gram matrix J J^T has the closed form

    (1/k) sum_i [ phi'(W^i u)^2 V_i V_i^T + phi(W^i u)^2 I_n ]

(the second term disappears when V is fixed); ``jacobian_gram`` evaluates it
directly so extreme singular values of very wide Jacobians never require
materializing J.
"""

from dataclasses import dataclass
from typing import Callable

import numpy as np

GH_NODES = 64


def gauss_hermite_moment(fn: Callable, nodes: int = GH_NODES) -> float:
    """E[fn(X)^2] for X ~ N(0,1) by Gauss-Hermite quadrature."""
    t, w = np.polynomial.hermite.hermgauss(nodes)
    vals = np.asarray(fn(np.sqrt(2.0) * t), dtype=float)
    return float(np.sum(w * vals * vals) / np.sqrt(np.pi))


def activation_moments(fn: Callable, deriv: Callable) -> tuple[float, float]:
    """Gaussian second moments (C_phi, C_phi') of an activation and its derivative."""
    return np.sqrt(gauss_hermite_moment(fn)), np.sqrt(gauss_hermite_moment(deriv))


@dataclass(frozen=True)
class Activation:
    """Elementwise activation with the constants the bounds need.

    ``b_const`` jointly bounds sup|phi'| and the Lipschitz constant of phi';
    ``sup_abs`` bounds |phi| itself.  ``cphi`` and ``cphi_prime`` are the
    Gaussian root second moments of phi and phi'.
    """

    name: str
    fn: Callable
    deriv: Callable
    b_const: float
    sup_abs: float
    cphi: float
    cphi_prime: float


def _make_activation(name, fn, deriv, b_const, sup_abs) -> Activation:
    cphi, cphi_prime = activation_moments(fn, deriv)
    return Activation(name, fn, deriv, b_const, sup_abs, cphi, cphi_prime)


def _sigmoid(x):
    # tanh form is stable for large |x|
    return 0.5 * (1.0 + np.tanh(0.5 * np.asarray(x, dtype=float)))


def _sigmoid_deriv(x):
    s = _sigmoid(x)
    return s * (1.0 - s)


def _tanh_deriv(x):
    t = np.tanh(np.asarray(x, dtype=float))
    return 1.0 - t * t


def sigmoid() -> Activation:
    """Sigmoid: sup|phi'| = 1/4 >= Lip(phi') = 1/(6 sqrt(3)), so B = 1/4."""
    return _make_activation("sigmoid", _sigmoid, _sigmoid_deriv, 0.25, 1.0)


def tanh() -> Activation:
    """Hyperbolic tangent: sup|phi'| = 1 and Lip(phi') = 4/(3 sqrt(3)) < 1, so B = 1."""
    return _make_activation("tanh", np.tanh, _tanh_deriv, 1.0, 1.0)


ACTIVATIONS = {"sigmoid": sigmoid, "tanh": tanh}

TRAIN_BOTH = "both"
TRAIN_FIXED_V = "fixed_v"


@dataclass(frozen=True)
class DipNetwork:
    """Architecture + fixed unit input; parameters live in ParamVector."""

    d: int
    k: int
    n: int
    act: Activation
    u: np.ndarray
    train_mode: str = TRAIN_BOTH
    v_bound: float = 1.0  # D: bound on |V| entries at init

    @property
    def num_params(self) -> int:
        if self.train_mode == TRAIN_FIXED_V:
            return self.k * self.d
        return self.k * (self.d + self.n)


@dataclass(frozen=True)
class ParamVector:
    """Weights (W, V); only W is trainable in fixed_v mode."""

    w: np.ndarray  # (k, d)
    v: np.ndarray  # (n, k)
    train_mode: str = TRAIN_BOTH

    def flatten(self) -> np.ndarray:
        if self.train_mode == TRAIN_FIXED_V:
            return self.w.ravel().copy()
        return np.concatenate([self.w.ravel(), self.v.ravel()])

    def unflatten(self, theta: np.ndarray) -> "ParamVector":
        """Rebuild a ParamVector from a flat vector with this one's shapes."""
        theta = np.asarray(theta, dtype=float)
        k, d = self.w.shape
        n = self.v.shape[0]
        if self.train_mode == TRAIN_FIXED_V:
            if theta.size != k * d:
                raise ValueError("flat vector has wrong length")
            return ParamVector(theta.reshape(k, d).copy(), self.v, self.train_mode)
        if theta.size != k * (d + n):
            raise ValueError("flat vector has wrong length")
        return ParamVector(
            theta[: k * d].reshape(k, d).copy(),
            theta[k * d :].reshape(n, k).copy(),
            self.train_mode,
        )

    def dist(self, other: "ParamVector") -> float:
        """Euclidean distance in flattened parameter space."""
        dw = self.w - other.w
        total = float(np.sum(dw * dw))
        if self.train_mode != TRAIN_FIXED_V:
            dv = self.v - other.v
            total += float(np.sum(dv * dv))
        return np.sqrt(total)


def init_network(
    d: int,
    k: int,
    n: int,
    act: Activation,
    train_mode: str = TRAIN_BOTH,
    rng_seed: int = 0,
) -> tuple[DipNetwork, ParamVector]:
    """Random network: unit-norm Gaussian u, standard normal W, Rademacher V.

    Rademacher columns are centered with identity covariance and entries
    bounded by D = 1, the simplest law meeting the init assumptions.
    """
    if d < 1 or k < 1 or n < 1:
        raise ValueError("network dimensions must be >= 1")
    if train_mode not in (TRAIN_BOTH, TRAIN_FIXED_V):
        raise ValueError(f"unknown train mode {train_mode!r}")
    rng = np.random.Generator(np.random.PCG64(rng_seed))
    u = rng.standard_normal(d)
    u = u / np.linalg.norm(u)
    w = rng.standard_normal((k, d))
    v = 2.0 * rng.integers(0, 2, size=(n, k)).astype(float) - 1.0
    net = DipNetwork(d=d, k=k, n=n, act=act, u=u, train_mode=train_mode, v_bound=1.0)
    return net, ParamVector(w=w, v=v, train_mode=train_mode)


def forward(net: DipNetwork, params: ParamVector) -> np.ndarray:
    """x = (1/sqrt(k)) V phi(W u)."""
    if params.w.shape != (net.k, net.d) or params.v.shape != (net.n, net.k):
        raise ValueError("parameter shapes do not match the network")
    z = params.w @ net.u
    return (params.v @ net.act.fn(z)) / np.sqrt(net.k)


def jacobian(net: DipNetwork, params: ParamVector) -> np.ndarray:
    """Dense n x p Jacobian of the forward map in the flattened parameters.

    Per neuron i the W-block is (1/sqrt(k)) phi'(W^i u) V_i u^T and the
    V-block contributes (1/sqrt(k)) phi(W^i u) on the matching identity
    columns; fixed_v mode emits the W-blocks only.
    """
    if params.w.shape != (net.k, net.d) or params.v.shape != (net.n, net.k):
        raise ValueError("parameter shapes do not match the network")
    k, d, n = net.k, net.d, net.n
    scale = 1.0 / np.sqrt(k)
    z = params.w @ net.u
    hp = net.act.deriv(z)
    # (n, k, d) -> (n, k*d): column k*d block ordered by (neuron, input dim)
    jw = np.einsum("nk,d->nkd", params.v * hp[None, :], net.u).reshape(n, k * d) * scale
    if net.train_mode == TRAIN_FIXED_V:
        return jw
    h = net.act.fn(z)
    jv = np.kron(np.eye(n), h[None, :] * scale)
    return np.concatenate([jw, jv], axis=1)


def jacobian_gram(net: DipNetwork, params: ParamVector) -> np.ndarray:
    """J J^T via the closed form, never materializing J."""
    z = params.w @ net.u
    hp = net.act.deriv(z)
    gram = (params.v * (hp * hp)[None, :]) @ params.v.T / net.k
    if net.train_mode != TRAIN_FIXED_V:
        h = net.act.fn(z)
        gram = gram + (float(h @ h) / net.k) * np.eye(net.n)
    return gram


def sigma_min_J(net: DipNetwork, params: ParamVector) -> float:
    """Smallest singular value of the Jacobian, from the n x n Gram eigensolve."""
    evals = np.linalg.eigvalsh(jacobian_gram(net, params))
    return float(np.sqrt(max(evals[0], 0.0)))


def sigma_extremes_J(net: DipNetwork, params: ParamVector) -> tuple[float, float]:
    """(smallest, largest) singular values of the Jacobian via the Gram matrix."""
    evals = np.linalg.eigvalsh(jacobian_gram(net, params))
    return float(np.sqrt(max(evals[0], 0.0))), float(np.sqrt(max(evals[-1], 0.0)))
