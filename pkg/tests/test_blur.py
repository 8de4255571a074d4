import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from blurkit.blur import (BoxBlurSpec, GaussianSpec, MotionBlurSpec,
                          box_blur_boundary_safe, box_blur_reference,
                          gaussian_filter, gaussian_kernel, gaussian_weight,
                          motion_blur, motion_kernel_taps)
from blurkit.tensor import ImageU8


def total_variation(plane):
    p = np.asarray(plane, dtype=np.float64)
    return np.abs(np.diff(p, axis=0)).sum() + np.abs(np.diff(p, axis=1)).sum()


class TestGaussianKernel:
    def test_unnormalized_center_sigma1(self):
        assert gaussian_weight(0, 0, 1.0) == pytest.approx(1 / (2 * math.pi), abs=1e-12)

    @pytest.mark.parametrize("sigma", [0.5, 1.0, 2.0, 4.0])
    def test_center_value(self, sigma):
        center = gaussian_kernel(GaussianSpec(sigma), normalized=False)
        r = GaussianSpec(sigma).radius
        assert center[r, r] == pytest.approx(1 / (2 * math.pi * sigma * sigma), abs=1e-9)

    @pytest.mark.parametrize("sigma", [0.5, 1.3, 3.0])
    def test_symmetry(self, sigma):
        k = gaussian_kernel(GaussianSpec(sigma))
        assert np.allclose(k, k[::-1, :])
        assert np.allclose(k, k[:, ::-1])
        assert np.allclose(k, k.T)

    def test_normalization_and_falloff(self):
        k = gaussian_kernel(GaussianSpec(1.0, radius=3))
        assert abs(k.sum() - 1.0) < 1e-6
        assert k[3, 4] / k[3, 3] == pytest.approx(math.exp(-0.5), abs=1e-12)
        assert k[3, 3] == k.max()

    def test_rejects_bad_sigma(self):
        with pytest.raises(ValueError):
            GaussianSpec(0.0)
        with pytest.raises(ValueError):
            GaussianSpec(-1.0)
        with pytest.raises(ValueError):
            GaussianSpec(1.0, radius=0)


class TestGaussianFilter:
    def test_constant_preserved_exactly(self):
        plane = np.full((9, 11), 13.5, dtype=np.float32)
        out = gaussian_filter(plane, GaussianSpec(1.5))
        assert np.array_equal(out, plane)

    def test_impulse_reproduces_kernel(self):
        plane = np.zeros((21, 21), dtype=np.float32)
        plane[10, 10] = 1.0
        spec = GaussianSpec(1.0)
        out = gaussian_filter(plane, spec)
        k = gaussian_kernel(spec)
        r = spec.radius
        assert np.allclose(out[10 - r:10 + r + 1, 10 - r:10 + r + 1], k, atol=1e-7)

    def test_larger_sigma_smooths_more(self, rng):
        lower = 0
        for _ in range(20):
            plane = rng.random((16, 16), dtype=np.float32)
            tv1 = total_variation(gaussian_filter(plane, GaussianSpec(1.0)))
            tv2 = total_variation(gaussian_filter(plane, GaussianSpec(2.0)))
            lower += tv2 <= tv1
        assert lower == 20

    def test_range_containment(self, rng):
        plane = rng.random((12, 9), dtype=np.float32) * 20 - 10
        out = gaussian_filter(plane, GaussianSpec(2.0))
        assert out.min() >= plane.min() - 1e-6
        assert out.max() <= plane.max() + 1e-6


class TestBoxBlur:
    def test_corner_averages_exactly_four(self, rng):
        img = ImageU8(rng.integers(0, 256, (6, 7, 1), dtype=np.uint8))
        out = box_blur_boundary_safe(img, BoxBlurSpec(1)).data[:, :, 0]
        a = img.data[:, :, 0].astype(int)
        assert out[0, 0] == (a[0, 0] + a[0, 1] + a[1, 0] + a[1, 1]) // 4
        assert out[-1, -1] == (a[-1, -1] + a[-1, -2] + a[-2, -1] + a[-2, -2]) // 4

    def test_interior_averages_nine_constant_unchanged(self):
        img = ImageU8(np.full((5, 5, 1), 201, dtype=np.uint8))
        out = box_blur_boundary_safe(img, BoxBlurSpec(1))
        assert np.array_equal(out.data, img.data)

    def test_matches_serial_reference(self, rng):
        img = ImageU8(rng.integers(0, 256, (7, 5, 1), dtype=np.uint8))
        fast = box_blur_boundary_safe(img, BoxBlurSpec(1), workers=3).data[:, :, 0]
        assert np.array_equal(fast, box_blur_reference(img.data[:, :, 0], 1))

    @given(h=st.integers(1, 12), w=st.integers(1, 12), radius=st.integers(1, 3),
           seed=st.integers(0, 2**31))
    @settings(max_examples=60, deadline=None)
    def test_reference_equivalence_property(self, h, w, radius, seed):
        plane = np.random.default_rng(seed).integers(0, 256, (h, w), dtype=np.uint8)
        fast = box_blur_boundary_safe(ImageU8(plane[:, :, None]),
                                      BoxBlurSpec(radius), workers=2)
        assert np.array_equal(fast.data[:, :, 0], box_blur_reference(plane, radius))

    def test_degenerate_shapes(self, rng):
        for shape in ((1, 1), (1, 9), (9, 1)):
            plane = rng.integers(0, 256, shape, dtype=np.uint8)
            fast = box_blur_boundary_safe(ImageU8(plane[:, :, None]), BoxBlurSpec(1))
            assert np.array_equal(fast.data[:, :, 0], box_blur_reference(plane, 1))

    def test_rejects_bad_radius(self):
        with pytest.raises(ValueError):
            BoxBlurSpec(0)


class TestMotionBlur:
    def test_length_one_is_identity(self, rng):
        img = ImageU8(rng.integers(0, 256, (8, 8, 3), dtype=np.uint8))
        for angle in (0, 37.0, 90, 245.5):
            out = motion_blur(img, MotionBlurSpec(1, angle))
            assert np.array_equal(out.data, img.data)

    def test_step_edge_ramp_widens(self):
        # horizontal 5-tap mean over a step: 4 intermediate columns, values
        # derived by hand-convolving the step with boundary renormalization
        plane = np.zeros((3, 12), dtype=np.float32)
        plane[:, 6:] = 100.0
        out = motion_blur(plane, MotionBlurSpec(5, 0.0))
        expected_row = [0, 0, 0, 0, 100 / 5, 200 / 5, 300 / 5, 400 / 5,
                        500 / 5, 100, 400 / 4, 300 / 3]
        assert np.allclose(out[1], expected_row, atol=1e-5)
        ramp_cols = np.flatnonzero((out[1] > 0) & (out[1] < 100))
        assert len(ramp_cols) == 4

    def test_angle_transpose_symmetry(self, rng):
        x = rng.integers(0, 256, (12, 9, 1), dtype=np.uint8)
        for length in (3, 5, 10):
            a0 = motion_blur(ImageU8(x), MotionBlurSpec(length, 0)).data[:, :, 0]
            a90 = motion_blur(ImageU8(np.ascontiguousarray(x.transpose(1, 0, 2))),
                              MotionBlurSpec(length, 90)).data[:, :, 0].T
            assert np.array_equal(a0, a90)

    def test_kernel_taps_normalized(self):
        for length, angle in ((5, 0), (10, 33.0), (25, 77.7), (15, 180)):
            taps = motion_kernel_taps(MotionBlurSpec(length, angle))
            assert sum(w for _, _, w in taps) == pytest.approx(1.0, abs=1e-12)

    def test_constant_preserved(self):
        img = ImageU8(np.full((10, 10, 1), 77, dtype=np.uint8))
        out = motion_blur(img, MotionBlurSpec(7, 21.0))
        assert np.array_equal(out.data, img.data)

    def test_range_containment(self, rng):
        img = ImageU8(rng.integers(0, 256, (10, 14, 1), dtype=np.uint8))
        out = motion_blur(img, MotionBlurSpec(9, 140.0)).data
        assert out.min() >= img.data.min()
        assert out.max() <= img.data.max()

    def test_rejects_zero_length(self):
        with pytest.raises(ValueError):
            MotionBlurSpec(0, 0)


def test_monotone_smoothing_with_radius(rng):
    wins = trials = 0
    for _ in range(40):
        plane = rng.integers(0, 256, (14, 14), dtype=np.uint8)
        img = ImageU8(plane[:, :, None])
        tv1 = total_variation(box_blur_boundary_safe(img, BoxBlurSpec(1)).data[:, :, 0])
        tv2 = total_variation(box_blur_boundary_safe(img, BoxBlurSpec(2)).data[:, :, 0])
        trials += 1
        wins += tv2 <= tv1
    assert wins / trials >= 0.95
