"""Forward operators for the experiments and noisy problem instances.

Three operator families: iid Gaussian, spectrum-crafted (orthogonal factors
from sign-fixed QR of Gaussian matrices, singular values evenly spaced in a
given band), and dense 2-D Gaussian-blur convolution matrices with circular
boundary.  All operators are explicit matrices so sigma_min is exact.
"""

from dataclasses import dataclass

import numpy as np

from .linalg import sigma_extremes


@dataclass(frozen=True)
class ForwardOperator:
    a: np.ndarray  # (m, n)
    sigma_min: float  # smallest nonzero singular value
    sigma_max: float
    label: str

    @property
    def m(self) -> int:
        return self.a.shape[0]

    @property
    def n(self) -> int:
        return self.a.shape[1]


@dataclass(frozen=True)
class ProblemInstance:
    """Observation y = A x_true + noise, with y_bar the noiseless part."""

    op: ForwardOperator
    x_true: np.ndarray
    noise: np.ndarray
    y: np.ndarray
    y_bar: np.ndarray

    @property
    def noise_norm(self) -> float:
        return float(np.linalg.norm(self.noise))


def _haar_orthogonal(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Orthogonal matrix, Haar-distributed via QR with sign-fixed R diagonal."""
    g = rng.standard_normal((dim, dim))
    q, r = np.linalg.qr(g)
    return q * np.sign(np.diag(r))[None, :]


def gaussian_operator(m: int, n: int, rng_seed: int) -> ForwardOperator:
    """iid standard normal m x n matrix."""
    if m < 1 or n < 1:
        raise ValueError("operator dimensions must be >= 1")
    rng = np.random.Generator(np.random.PCG64(rng_seed))
    a = rng.standard_normal((m, n))
    smin, smax = sigma_extremes(a)
    return ForwardOperator(a=a, sigma_min=smin, sigma_max=smax, label=f"gaussian({m}x{n})")


def crafted_spectrum_operator(
    n: int, spec_lo: float, spec_hi: float, rng_seed: int, m: int | None = None
) -> ForwardOperator:
    """A = U diag(s) V^T with random orthogonal factors and s evenly spaced.

    Square by default; an optional m < n keeps the same construction on the
    leading m x n block, so the smallest nonzero singular value is still
    spec_lo by design.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if not (0.0 < spec_lo <= spec_hi):
        raise ValueError("need 0 < spec_lo <= spec_hi")
    if m is None:
        m = n
    if m < 1 or m > n:
        raise ValueError("need 1 <= m <= n")
    rng = np.random.Generator(np.random.PCG64(rng_seed))
    u = _haar_orthogonal(m, rng)
    v = _haar_orthogonal(n, rng)
    s = np.linspace(spec_lo, spec_hi, m)
    a = (u * s[None, :]) @ v[:, :m].T
    return ForwardOperator(
        a=a,
        sigma_min=float(spec_lo),
        sigma_max=float(spec_hi),
        label=f"crafted({m}x{n},[{spec_lo},{spec_hi}])",
    )


def _blur_kernel_1d(sigma_blur: float) -> np.ndarray:
    """Gaussian kernel truncated at radius ceil(3 sigma), renormalized to sum 1."""
    radius = int(np.ceil(3.0 * sigma_blur))
    offsets = np.arange(-radius, radius + 1)
    kern = np.exp(-(offsets.astype(float) ** 2) / (2.0 * sigma_blur * sigma_blur))
    return kern / kern.sum()


def gaussian_blur_operator(side: int, sigma_blur: float) -> ForwardOperator:
    """Dense matrix of separable 2-D Gaussian blur with circular boundary.

    Acts on images flattened row-major; n = m = side^2.  The kernel sums to 1
    so constant images are fixed points (every row of A sums to 1).
    """
    if side < 3:
        raise ValueError("side must be >= 3")
    if sigma_blur <= 0.0:
        raise ValueError("sigma_blur must be positive")
    kern = _blur_kernel_1d(sigma_blur)
    radius = (len(kern) - 1) // 2
    if 2 * radius + 1 > side:
        raise ValueError(f"side {side} too small for kernel of radius {radius}")
    c = np.zeros((side, side))
    for j, kj in zip(range(-radius, radius + 1), kern):
        idx = (np.arange(side) + j) % side
        c[np.arange(side), idx] += kj
    a = np.kron(c, c)
    smin, smax = sigma_extremes(a)
    return ForwardOperator(
        a=a, sigma_min=smin, sigma_max=smax, label=f"blur(side={side},sigma={sigma_blur})"
    )


def make_instance(
    op: ForwardOperator, x_true, noise_std: float, rng_seed: int
) -> ProblemInstance:
    """Assemble y = A x_true + noise with iid N(0, noise_std^2) noise."""
    x_true = np.asarray(x_true, dtype=float)
    if x_true.shape != (op.n,):
        raise ValueError(f"x_true has shape {x_true.shape}, operator expects ({op.n},)")
    if noise_std < 0.0:
        raise ValueError("noise_std must be >= 0")
    y_bar = op.a @ x_true
    if noise_std == 0.0:
        noise = np.zeros(op.m)
    else:
        rng = np.random.Generator(np.random.PCG64(rng_seed))
        noise = noise_std * rng.standard_normal(op.m)
    return ProblemInstance(op=op, x_true=x_true, noise=noise, y=y_bar + noise, y_bar=y_bar)
