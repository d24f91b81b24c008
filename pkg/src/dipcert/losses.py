"""Loss models and their Kurdyka-Lojasiewicz reparametrization data.

Both loss kinds share the squared-distance objective ``|v - y|^2`` (no 1/2
factor, so the MSE desingularizer ``psi(s) = sqrt(s)`` satisfies
``psi'(L(v)) * |grad L(v)| = 1`` with constant exactly 1).  The Lojasiewicz
kind keeps the same objective and only changes the pair (psi, Psi) used by
the convergence-rate bounds, with ``psi(s) = c * s^alpha``.

``Psi`` is a primitive of ``-(psi')^2`` with integration constant 0; every
bound downstream only uses differences of ``Psi`` plus ``Psi^{-1}``, so the
constant choice is immaterial (and tested to be).
"""

from dataclasses import dataclass
from typing import Callable

import numpy as np


@dataclass(frozen=True)
class KlEnvelope:
    """Rate envelope pair: ``Psi`` (strictly decreasing) and its inverse."""

    Psi: Callable[[float], float]
    Psi_inv: Callable[[float], float]


@dataclass(frozen=True)
class LossModel:
    """Objective ``|v - y|^2`` with desingularizer ``psi(s) = c * s^alpha``."""

    y: np.ndarray
    kind: str = "mse"  # "mse" or "lojasiewicz"
    c: float = 1.0
    alpha: float = 0.5

    def __post_init__(self):
        if self.kind not in ("mse", "lojasiewicz"):
            raise ValueError(f"unknown loss kind {self.kind!r}")
        if self.kind == "mse" and (self.c != 1.0 or self.alpha != 0.5):
            raise ValueError("mse pins c = 1, alpha = 1/2")
        if not (self.c > 0.0):
            raise ValueError("c must be positive")
        if not (0.0 < self.alpha <= 1.0):
            raise ValueError("alpha must lie in (0, 1]")

    def _check_len(self, v: np.ndarray) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        if v.shape != self.y.shape:
            raise ValueError(f"length mismatch: v has shape {v.shape}, y has {self.y.shape}")
        return v

    def value(self, v) -> float:
        """Objective value ``|v - y|^2``."""
        v = self._check_len(v)
        d = v - self.y
        return float(d @ d)

    def grad(self, v) -> np.ndarray:
        """Gradient ``2 (v - y)`` of the objective."""
        v = self._check_len(v)
        return 2.0 * (v - self.y)

    def psi(self, s: float) -> float:
        """Desingularizing function ``c * s^alpha`` (sqrt(s) for MSE)."""
        if s < 0.0:
            raise ValueError("psi domain is s >= 0")
        return self.c * float(s) ** self.alpha

    def psi_prime(self, s: float) -> float:
        """Derivative ``c * alpha * s^(alpha-1)``; requires s > 0."""
        if s <= 0.0:
            raise ValueError("psi_prime domain is s > 0")
        return self.c * self.alpha * float(s) ** (self.alpha - 1.0)

    def psi_inv(self, r: float) -> float:
        """Inverse of psi: ``(r / c)^(1/alpha)`` (r^2 for MSE)."""
        if r < 0.0:
            raise ValueError("psi_inv domain is r >= 0")
        return (float(r) / self.c) ** (1.0 / self.alpha)

    def envelope(self) -> KlEnvelope:
        """Primitive ``Psi`` of ``-(psi')^2`` and its closed-form inverse.

        alpha = 1/2 gives ``Psi(s) = -(c^2/4) ln s``; otherwise
        ``Psi(s) = c^2 alpha^2 s^(2 alpha - 1) / (1 - 2 alpha)``.
        """
        c, alpha = self.c, self.alpha
        if alpha == 0.5:
            quarter_c2 = c * c / 4.0

            def big_psi(s, _q=quarter_c2):
                return -_q * np.log(s)

            def big_psi_inv(t, _q=quarter_c2):
                return np.exp(-np.asarray(t, dtype=float) / _q)

        else:
            a2c2 = c * c * alpha * alpha
            expo = 2.0 * alpha - 1.0

            def big_psi(s, _a=a2c2, _e=expo):
                return _a * np.asarray(s, dtype=float) ** _e / (-_e)

            def big_psi_inv(t, _a=a2c2, _e=expo):
                return (np.asarray(t, dtype=float) * (-_e) / _a) ** (1.0 / _e)

        return KlEnvelope(Psi=big_psi, Psi_inv=big_psi_inv)

    def kl_residual(self, v) -> float:
        """``psi'(L(v)) * |grad L(v)|``; >= 1 certifies the KL inequality at v."""
        v = self._check_len(v)
        val = self.value(v)
        if val == 0.0:
            raise ValueError("KL inequality evaluated at minimizer")
        g = self.grad(v)
        return self.psi_prime(val) * float(np.linalg.norm(g))


def mse(y) -> LossModel:
    """Squared-error loss ``|v - y|^2`` with psi(s) = sqrt(s)."""
    return LossModel(y=np.asarray(y, dtype=float), kind="mse")


def lojasiewicz(y, c: float, alpha: float) -> LossModel:
    """Squared-error objective carrying Lojasiewicz data psi(s) = c s^alpha."""
    return LossModel(y=np.asarray(y, dtype=float), kind="lojasiewicz", c=c, alpha=alpha)
