import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from headswap.imaging import (
    PnmFormatError,
    gaussian_filter,
    gaussian_kernel_1d,
    minmax_normalize,
    overlay_heatmap,
    quantize_bytes,
    read_gray,
    read_image,
    threshold,
    write_gray,
    write_image,
    write_mask,
)
from helpers import dense_gaussian_reference

# center weight of the normalized radius-3 kernel for sigma=1, squared for 2-D
CENTER_WEIGHT_SIGMA1 = 0.3990502796524549**2


class TestGaussianFilter:
    def test_constant_field_preserved(self, rng):
        for sigma in (0.5, 1.0, 2.7):
            const = np.full((9, 7), 3.25)
            out = gaussian_filter(const, sigma)
            np.testing.assert_allclose(out, const, atol=1e-12)

    def test_spike_matches_dense_reference(self):
        field = np.zeros((5, 5))
        field[2, 2] = 1.0
        out = gaussian_filter(field, 1.0)
        assert out[2, 2] == pytest.approx(CENTER_WEIGHT_SIGMA1, abs=1e-14)
        np.testing.assert_allclose(out, dense_gaussian_reference(field, 1.0), atol=1e-13)

    def test_random_fields_match_dense_reference(self, rng):
        for sigma in (0.8, 2.0):
            field = rng.normal(size=(12, 10))
            np.testing.assert_allclose(
                gaussian_filter(field, sigma),
                dense_gaussian_reference(field, sigma),
                atol=1e-12,
            )

    def test_output_within_input_range(self, rng):
        field = rng.uniform(-5, 5, size=(16, 16))
        out = gaussian_filter(field, 1.5)
        assert out.min() >= field.min() - 1e-12
        assert out.max() <= field.max() + 1e-12

    @settings(max_examples=20, deadline=None)
    @given(seed=st.integers(0, 2**31 - 1), sigma=st.floats(0.3, 3.0))
    def test_linearity(self, seed, sigma):
        gen = np.random.default_rng(seed)
        x = gen.normal(size=(8, 8))
        y = gen.normal(size=(8, 8))
        a, b = 1.7, -0.4
        lhs = gaussian_filter(a * x + b * y, sigma)
        rhs = a * gaussian_filter(x, sigma) + b * gaussian_filter(y, sigma)
        np.testing.assert_allclose(lhs, rhs, atol=1e-12)

    def test_interior_mass_preserved(self, rng):
        field = np.zeros((21, 21))
        field[8:13, 8:13] = rng.uniform(0, 1, size=(5, 5))
        out = gaussian_filter(field, 1.0)
        assert out.sum() == pytest.approx(field.sum(), abs=1e-9)

    def test_invalid_sigma(self):
        with pytest.raises(ValueError):
            gaussian_filter(np.zeros((4, 4)), 0.0)
        with pytest.raises(ValueError):
            gaussian_filter(np.zeros((4, 4)), -1.0)

    def test_kernel_unit_sum(self):
        for sigma in (0.4, 1.0, 3.3):
            assert gaussian_kernel_1d(sigma).sum() == pytest.approx(1.0, abs=1e-14)

    def test_rejects_non_finite(self):
        field = np.zeros((4, 4))
        field[1, 1] = np.nan
        with pytest.raises(ValueError):
            gaussian_filter(field, 1.0)


class TestMinmaxNormalize:
    def test_affine_example(self):
        out = minmax_normalize(np.array([[0.0, 5.0, 10.0]]))
        np.testing.assert_allclose(out, [[0.0, 0.5, 1.0]])

    def test_constant_maps_to_zeros(self):
        out = minmax_normalize(np.full((3, 4), 7.7))
        assert (out == 0.0).all()

    @settings(max_examples=25, deadline=None)
    @given(seed=st.integers(0, 2**31 - 1))
    def test_attains_both_endpoints(self, seed):
        gen = np.random.default_rng(seed)
        field = gen.normal(size=(6, 6))
        out = minmax_normalize(field)
        assert out.min() == 0.0
        assert out.max() == 1.0


class TestThreshold:
    def test_zero_tau_all_ones(self, rng):
        field = rng.uniform(0, 1, size=(5, 5))
        assert (threshold(field, 0.0) == 1).all()

    def test_inclusive_comparison(self):
        mask = threshold(np.array([[0.59, 0.60, 0.61]]), 0.6)
        np.testing.assert_array_equal(mask, [[0, 1, 1]])

    def test_tau_one_below_max(self):
        assert (threshold(np.full((3, 3), 0.99), 1.0) == 0).all()

    def test_tau_out_of_range(self):
        for tau in (-0.1, 1.1):
            with pytest.raises(ValueError):
                threshold(np.zeros((2, 2)), tau)

    def test_values_are_binary(self, rng):
        mask = threshold(rng.uniform(0, 1, size=(8, 8)), 0.35)
        assert set(np.unique(mask)) <= {0, 1}

    def test_normalized_then_zero_tau_is_all_ones(self, rng):
        field = rng.normal(size=(7, 9))
        assert (threshold(minmax_normalize(field), 0.0) == 1).all()


class TestPnmIO:
    def test_quantization_endpoints(self):
        assert quantize_bytes(np.array([1.0]))[0] == 255
        assert quantize_bytes(np.array([0.0]))[0] == 0
        assert quantize_bytes(np.array([0.5]))[0] == 128

    def test_ppm_round_trip(self, rng, tmp_path):
        grid = rng.uniform(-0.2, 1.2, size=(8, 8, 3))
        path = tmp_path / "grid.ppm"
        write_image(grid, path)
        back = read_image(path)
        expected = quantize_bytes(grid).astype(np.float64) / 255.0
        np.testing.assert_array_equal(back, expected)

    def test_pgm_round_trip(self, rng, tmp_path):
        field = rng.uniform(0, 1, size=(5, 9))
        path = tmp_path / "field.pgm"
        write_gray(field, path)
        back = read_gray(path)
        np.testing.assert_array_equal(back, quantize_bytes(field) / 255.0)

    def test_mask_bytes(self, tmp_path):
        mask = np.array([[0, 1], [1, 0]], dtype=np.uint8)
        path = tmp_path / "mask.pgm"
        write_mask(mask, path)
        raw = path.read_bytes()
        assert raw.endswith(bytes([0, 255, 255, 0]))

    def test_write_mask_rejects_non_binary(self, tmp_path):
        with pytest.raises(ValueError):
            write_mask(np.array([[0, 2]]), tmp_path / "bad.pgm")

    def test_write_image_requires_three_channels(self, tmp_path):
        with pytest.raises(ValueError):
            write_image(np.zeros((4, 4, 1)), tmp_path / "bad.ppm")

    def test_bad_magic_reports_offset(self, tmp_path):
        path = tmp_path / "bad.ppm"
        path.write_bytes(b"Q6\n2 2\n255\n" + bytes(12))
        with pytest.raises(PnmFormatError) as err:
            read_image(path)
        assert "byte 0" in str(err.value)
        assert str(path) in str(err.value)

    def test_truncated_raster_reports_offset(self, tmp_path):
        path = tmp_path / "short.ppm"
        path.write_bytes(b"P6\n2 2\n255\n" + bytes(5))
        with pytest.raises(PnmFormatError) as err:
            read_image(path)
        assert "truncated" in str(err.value)

    def test_wrong_maxval_rejected(self, tmp_path):
        path = tmp_path / "max.pgm"
        path.write_bytes(b"P5\n2 2\n65535\n" + bytes(8))
        with pytest.raises(PnmFormatError):
            read_gray(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(PnmFormatError):
            read_image(tmp_path / "absent.ppm")

    def test_comment_in_header(self, tmp_path):
        path = tmp_path / "c.pgm"
        path.write_bytes(b"P5\n# generated\n2 1\n255\n\x10\x20")
        np.testing.assert_array_equal(read_gray(path), [[16 / 255, 32 / 255]])


class TestOverlayHeatmap:
    def test_zero_field_is_identity(self, rng):
        base = rng.uniform(0, 1, size=(6, 6, 3))
        np.testing.assert_array_equal(overlay_heatmap(base, np.zeros((6, 6))), base)

    def test_full_field_on_black(self):
        base = np.zeros((4, 4, 3))
        out = overlay_heatmap(base, np.ones((4, 4)))
        np.testing.assert_allclose(out, np.broadcast_to([0.6, 0.0, 0.0], (4, 4, 3)))

    def test_output_in_unit_range(self, rng):
        base = rng.uniform(0, 1, size=(5, 5, 3))
        field = rng.uniform(0, 1, size=(5, 5))
        out = overlay_heatmap(base, field)
        assert out.min() >= 0.0 and out.max() <= 1.0

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            overlay_heatmap(np.zeros((4, 4, 3)), np.zeros((5, 4)))
