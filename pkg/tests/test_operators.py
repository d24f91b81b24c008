import numpy as np
import pytest

from dipcert.linalg import sigma_extremes
from dipcert.operators import (
    crafted_spectrum_operator,
    gaussian_blur_operator,
    gaussian_operator,
    make_instance,
)
from dipcert.pgm import read_pgm, write_pgm


class TestGaussianOperator:
    def test_scalar_case(self):
        op = gaussian_operator(1, 1, rng_seed=0)
        assert op.sigma_min == pytest.approx(abs(op.a[0, 0]), abs=1e-14)
        assert op.sigma_max == pytest.approx(abs(op.a[0, 0]), abs=1e-14)

    def test_norm_concentration(self):
        for seed in range(50):
            op = gaussian_operator(200, 100, rng_seed=seed)
            assert op.sigma_max <= np.sqrt(100) + 2 * np.sqrt(200)

    def test_seed_determinism(self):
        a1 = gaussian_operator(5, 7, rng_seed=42).a
        a2 = gaussian_operator(5, 7, rng_seed=42).a
        assert a1.tobytes() == a2.tobytes()


class TestCraftedOperator:
    def test_even_spacing(self):
        op = crafted_spectrum_operator(4, 1.0, 2.0, rng_seed=1)
        svals = np.sort(np.linalg.svd(op.a, compute_uv=False))
        np.testing.assert_allclose(svals, [1.0, 4.0 / 3.0, 5.0 / 3.0, 2.0], atol=1e-10)

    def test_flat_spectrum_is_isometry(self):
        op = crafted_spectrum_operator(6, 1.0, 1.0, rng_seed=2)
        rng = np.random.default_rng(0)
        for _ in range(5):
            x = rng.standard_normal(6)
            assert np.linalg.norm(op.a @ x) == pytest.approx(np.linalg.norm(x), abs=1e-10)

    def test_condition_number(self):
        op = crafted_spectrum_operator(5, 0.5, 3.0, rng_seed=3)
        smin, smax = sigma_extremes(op.a)
        assert smax / smin == pytest.approx(6.0, abs=1e-10)

    def test_wide_variant(self):
        op = crafted_spectrum_operator(5, 1.0, 2.0, rng_seed=4, m=3)
        assert op.a.shape == (3, 5)
        smin, smax = sigma_extremes(op.a)
        assert smin == pytest.approx(1.0, abs=1e-10)
        assert smax == pytest.approx(2.0, abs=1e-10)

    def test_norm_band_property(self):
        op = crafted_spectrum_operator(7, 1.0, 2.0, rng_seed=5)
        rng = np.random.default_rng(1)
        for _ in range(100):
            x = rng.standard_normal(7)
            r = np.linalg.norm(op.a @ x)
            assert 1.0 * np.linalg.norm(x) - 1e-9 <= r <= 2.0 * np.linalg.norm(x) + 1e-9

    def test_invalid_band(self):
        with pytest.raises(ValueError):
            crafted_spectrum_operator(4, 2.0, 1.0, rng_seed=0)

    def test_reproducible(self):
        a1 = crafted_spectrum_operator(6, 1.0, 2.0, rng_seed=9).a
        a2 = crafted_spectrum_operator(6, 1.0, 2.0, rng_seed=9).a
        assert a1.tobytes() == a2.tobytes()


class TestBlurOperator:
    def test_constant_image_preserved(self):
        op = gaussian_blur_operator(8, 1.0)
        ones = np.ones(64)
        np.testing.assert_allclose(op.a @ ones, ones, atol=1e-12)

    def test_row_sums(self):
        op = gaussian_blur_operator(8, 1.0)
        np.testing.assert_allclose(op.a.sum(axis=1), np.ones(64), atol=1e-12)

    def test_symmetric(self):
        op = gaussian_blur_operator(8, 1.0)
        assert np.max(np.abs(op.a - op.a.T)) < 1e-12

    def test_badly_conditioned_at_16(self):
        op = gaussian_blur_operator(16, 1.0)
        assert op.sigma_max / op.sigma_min >= 1e3

    def test_side_too_small(self):
        with pytest.raises(ValueError, match="too small"):
            gaussian_blur_operator(5, 1.0)


class TestInstances:
    def test_noiseless_exact(self):
        op = gaussian_operator(4, 3, rng_seed=6)
        x = np.array([1.0, -1.0, 2.0])
        inst = make_instance(op, x, 0.0, rng_seed=0)
        np.testing.assert_array_equal(inst.y, inst.y_bar)
        np.testing.assert_array_equal(inst.noise, np.zeros(4))

    def test_noise_norm_concentration(self):
        op = gaussian_operator(400, 10, rng_seed=7)
        x = np.zeros(10)
        inst = make_instance(op, x, 2.5, rng_seed=1)
        expected = 2.5 * np.sqrt(400)
        assert abs(inst.noise_norm - expected) <= 0.2 * expected

    def test_noise_identity(self):
        op = gaussian_operator(6, 3, rng_seed=8)
        rng = np.random.default_rng(2)
        inst = make_instance(op, rng.standard_normal(3), 0.7, rng_seed=3)
        np.testing.assert_array_equal(inst.y - inst.y_bar, inst.noise)

    def test_seed_determinism(self):
        op = gaussian_operator(6, 3, rng_seed=8)
        x = np.ones(3)
        i1 = make_instance(op, x, 1.0, rng_seed=5)
        i2 = make_instance(op, x, 1.0, rng_seed=5)
        assert i1.y.tobytes() == i2.y.tobytes()

    def test_dimension_mismatch(self):
        op = gaussian_operator(4, 3, rng_seed=9)
        with pytest.raises(ValueError):
            make_instance(op, np.zeros(5), 0.0, rng_seed=0)


class TestPgm:
    def test_round_trip(self, tmp_path):
        img = np.arange(12, dtype=float).reshape(3, 4) * 20.0
        path = tmp_path / "img.pgm"
        write_pgm(path, img)
        back = read_pgm(path)
        np.testing.assert_array_equal(back, img)

    def test_comments_and_maxval(self, tmp_path):
        path = tmp_path / "odd.pgm"
        path.write_text("P2 # comment\n# another\n2 2\n100\n0 50\n100 25\n")
        img = read_pgm(path)
        np.testing.assert_allclose(img, np.array([[0, 127.5], [255, 63.75]]))

    def test_rejects_non_p2(self, tmp_path):
        path = tmp_path / "bad.pgm"
        path.write_text("P5\n2 2\n255\n")
        with pytest.raises(ValueError):
            read_pgm(path)

    def test_truncated_data(self, tmp_path):
        path = tmp_path / "short.pgm"
        path.write_text("P2\n2 2\n255\n1 2 3\n")
        with pytest.raises(ValueError, match="expected 4 pixels"):
            read_pgm(path)
