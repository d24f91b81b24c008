"""Dense linear algebra helpers: extreme singular values, range bases, conic minima.

Everything here works on plain float arrays.  Singular values below
``tol * sigma_max`` are treated as exact zeros when deciding numerical rank;
the default tolerance can be overridden per call.
"""

import numpy as np

RANK_TOL = 1e-10


def sigma_extremes(m, tol: float = RANK_TOL) -> tuple[float, float]:
    """Return (smallest nonzero, largest) singular values of a dense matrix.

    Raises ``ValueError`` for an all-zero matrix, which has no nonzero
    singular value.
    """
    a = np.asarray(m, dtype=float)
    s = np.linalg.svd(a, compute_uv=False)
    smax = float(s[0])
    if smax <= 0.0:
        raise ValueError("zero matrix has no nonzero singular value")
    nonzero = s[s > tol * smax]
    return float(nonzero[-1]), smax


def orthonormal_range_basis(m, tol: float = RANK_TOL) -> np.ndarray:
    """Orthonormal basis (as columns) of the column space of ``m``.

    Rank is decided at ``tol * sigma_max``.
    """
    a = np.asarray(m, dtype=float)
    u, s, _ = np.linalg.svd(a, full_matrices=False)
    if s[0] <= 0.0:
        raise ValueError("zero matrix has trivial range")
    rank = int(np.count_nonzero(s > tol * s[0]))
    return u[:, :rank]


def conic_sigma_min(a, q) -> float:
    """Smallest singular value (zeros included) of ``a`` restricted to range(q).

    ``q`` must have orthonormal columns, so the result equals
    ``inf { |a z| / |z| : z in range(q), z != 0 }``.
    """
    a = np.asarray(a, dtype=float)
    q = np.asarray(q, dtype=float)
    if a.ndim != 2 or q.ndim != 2 or a.shape[1] != q.shape[0]:
        raise ValueError(f"dimension mismatch: a is {a.shape}, q is {q.shape}")
    gram = q.T @ q
    if not np.allclose(gram, np.eye(q.shape[1]), atol=1e-8):
        raise ValueError("q does not have orthonormal columns")
    s = np.linalg.svd(a @ q, compute_uv=False)
    return float(s[-1])
