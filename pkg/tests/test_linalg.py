import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dipcert.linalg import conic_sigma_min, orthonormal_range_basis, sigma_extremes


def jacobi_eigvals(sym, sweeps=100):
    """Independent cyclic-Jacobi eigensolver for symmetric matrices (oracle)."""
    a = np.array(sym, dtype=float)
    n = a.shape[0]
    scale = np.linalg.norm(a)
    for _ in range(sweeps):
        off = np.sqrt(np.sum(a**2) - np.sum(np.diag(a) ** 2))
        if off <= 1e-14 * max(scale, 1.0):
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= 1e-300:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                if theta == 0.0:
                    t = 1.0
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                rot = np.eye(n)
                rot[p, p] = rot[q, q] = c
                rot[p, q] = s
                rot[q, p] = -s
                a = rot.T @ a @ rot
    return np.sort(np.diag(a))


class TestSigmaExtremes:
    def test_identity(self):
        assert sigma_extremes(np.eye(3)) == (1.0, 1.0)

    def test_zero_singular_value_excluded(self):
        smin, smax = sigma_extremes(np.diag([2.0, 1.0, 0.0]))
        assert smin == pytest.approx(1.0, abs=1e-12)
        assert smax == pytest.approx(2.0, abs=1e-12)

    def test_matches_jacobi_oracle(self):
        rng = np.random.default_rng(3)
        m = rng.standard_normal((4, 6))
        evals = jacobi_eigvals(m @ m.T)
        smin, smax = sigma_extremes(m)
        assert smax == pytest.approx(np.sqrt(evals[-1]), rel=1e-8)
        assert smin == pytest.approx(np.sqrt(evals[0]), rel=1e-8)

    def test_zero_matrix_raises(self):
        with pytest.raises(ValueError, match="zero matrix"):
            sigma_extremes(np.zeros((3, 2)))

    def test_transpose_invariance(self):
        rng = np.random.default_rng(7)
        for _ in range(10):
            m = rng.standard_normal((5, 3))
            assert sigma_extremes(m)[1] == pytest.approx(sigma_extremes(m.T)[1], abs=1e-10)

    def test_orthogonal_matrix(self):
        rng = np.random.default_rng(11)
        q, _ = np.linalg.qr(rng.standard_normal((6, 6)))
        smin, smax = sigma_extremes(q)
        assert abs(smin - 1.0) < 1e-10 and abs(smax - 1.0) < 1e-10


class TestRangeBasis:
    def test_axis_aligned_rank_one(self):
        basis = orthonormal_range_basis(np.diag([3.0, 0.0]))
        assert basis.shape == (2, 1)
        assert abs(abs(basis[0, 0]) - 1.0) < 1e-12
        assert abs(basis[1, 0]) < 1e-12

    def test_orthonormal_columns(self):
        rng = np.random.default_rng(5)
        for shape in [(4, 4), (6, 3), (3, 6)]:
            m = rng.standard_normal(shape)
            basis = orthonormal_range_basis(m)
            gram = basis.T @ basis
            assert np.max(np.abs(gram - np.eye(basis.shape[1]))) < 1e-12

    def test_dependent_columns_span(self):
        rng = np.random.default_rng(9)
        v = rng.standard_normal(5)
        m = np.column_stack([v, 2.0 * v])
        basis = orthonormal_range_basis(m)
        assert basis.shape == (5, 1)
        unit = v / np.linalg.norm(v)
        assert abs(abs(unit @ basis[:, 0]) - 1.0) < 1e-12

    def test_zero_matrix_raises(self):
        with pytest.raises(ValueError):
            orthonormal_range_basis(np.zeros((2, 2)))


class TestConicSigmaMin:
    def test_isometry(self):
        rng = np.random.default_rng(13)
        q, _ = np.linalg.qr(rng.standard_normal((5, 2)))
        assert conic_sigma_min(np.eye(5), q) == pytest.approx(1.0, abs=1e-12)

    def test_kernel_direction(self):
        q = np.array([[0.0], [1.0]])
        assert conic_sigma_min(np.diag([1.0, 0.0]), q) == pytest.approx(0.0, abs=1e-14)

    def test_matches_random_search_oracle(self):
        rng = np.random.default_rng(17)
        a = rng.standard_normal((3, 5))
        q, _ = np.linalg.qr(rng.standard_normal((5, 2)))
        got = conic_sigma_min(a, q)
        c = rng.standard_normal((100_000, 2))
        c /= np.linalg.norm(c, axis=1, keepdims=True)
        brute = np.min(np.linalg.norm(c @ (a @ q).T, axis=1))
        assert got == pytest.approx(brute, abs=1e-3)

    def test_full_basis_recovers_sigma_min(self):
        rng = np.random.default_rng(19)
        a = rng.standard_normal((6, 4))  # full column rank a.s.
        q, _ = np.linalg.qr(rng.standard_normal((4, 4)))
        assert conic_sigma_min(a, q) == pytest.approx(sigma_extremes(a)[0], rel=1e-10)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError, match="mismatch"):
            conic_sigma_min(np.eye(3), np.eye(4))

    def test_non_orthonormal_rejected(self):
        with pytest.raises(ValueError, match="orthonormal"):
            conic_sigma_min(np.eye(2), 2.0 * np.eye(2))


@settings(max_examples=30, deadline=None)
@given(st.integers(min_value=0, max_value=2**32 - 1))
def test_sigma_max_transpose_property(seed):
    rng = np.random.default_rng(seed)
    m = rng.standard_normal((rng.integers(1, 6), rng.integers(1, 6)))
    if np.linalg.norm(m) == 0.0:
        return
    assert sigma_extremes(m)[1] == pytest.approx(sigma_extremes(m.T)[1], abs=1e-10)
