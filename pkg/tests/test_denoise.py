import numpy as np
import pytest

from cafbp.denoise import (
    Accumulator,
    FilterParams,
    denoise_frame,
    hard_threshold,
    pass1_basic_estimate,
    pass2_final_estimate,
    round_half_up_u8,
    wiener_shrink,
)
from cafbp.errors import BlockTooSmall, DimensionMismatch
from cafbp.frames import psnr

import pins


class TestHardThreshold:
    def test_cut_at_lambda_sigma(self):
        spectrum = np.zeros((2, 4, 4))
        spectrum[0, 1, 1] = 50.0
        spectrum[0, 2, 2] = 60.0
        spectrum[0, 0, 0] = 10.0
        out, retained = hard_threshold(spectrum, sigma=20.0, lambda_3d=2.7)
        assert out[0, 1, 1] == 0.0        # 50 < 54
        assert out[0, 2, 2] == 60.0       # 60 >= 54
        assert out[0, 0, 0] == 10.0       # DC always kept
        assert retained == 2

    def test_zero_sigma_keeps_everything(self):
        rng = np.random.default_rng(0)
        spectrum = rng.normal(0, 10, (4, 8, 8))
        out, retained = hard_threshold(spectrum, sigma=0.0, lambda_3d=2.7)
        np.testing.assert_array_equal(out, spectrum)
        assert retained == np.count_nonzero(spectrum)

    def test_all_zero_spectrum_counts_dc(self):
        out, retained = hard_threshold(np.zeros((2, 4, 4)), 25.0, 2.7)
        assert retained == 1
        assert np.all(out == 0.0)


class TestWienerShrink:
    def test_zero_sigma_passthrough(self):
        rng = np.random.default_rng(1)
        basic = rng.normal(0, 10, (2, 4, 4))
        basic[basic == 0] = 1.0
        noisy = rng.normal(0, 10, (2, 4, 4))
        out, _ = wiener_shrink(noisy, basic, sigma=0.0)
        np.testing.assert_allclose(out, noisy, atol=1e-12)

    def test_equal_power_halves(self):
        basic = np.full((1, 2, 2), 10.0)
        noisy = np.full((1, 2, 2), 8.0)
        out, weight_norm = wiener_shrink(noisy, basic, sigma=10.0)
        np.testing.assert_allclose(out, 4.0)
        assert weight_norm == pytest.approx(4 * 0.25)

    def test_zero_reference_zeroes_coefficient(self):
        noisy = np.full((1, 2, 2), 99.0)
        out, weight_norm = wiener_shrink(noisy, np.zeros((1, 2, 2)), sigma=5.0)
        assert np.all(out == 0.0)
        assert weight_norm == 0.0

    def test_zero_over_zero_is_zero(self):
        noisy = np.full((1, 2, 2), 99.0)
        out, _ = wiener_shrink(noisy, np.zeros((1, 2, 2)), sigma=0.0)
        assert np.all(out == 0.0)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            wiener_shrink(np.zeros((1, 4, 4)), np.zeros((1, 2, 2)), 1.0)


class TestRounding:
    def test_half_up_and_clamp(self):
        values = np.array([-3.0, -0.5, 0.49, 0.5, 254.5, 300.0])
        out = round_half_up_u8(values)
        assert out.dtype == np.uint8
        assert list(out) == [0, 0, 0, 1, 255, 255]


class TestAccumulator:
    def test_partition_of_unity(self):
        rng = np.random.default_rng(2)
        plane = rng.uniform(0, 255, (16, 16))
        acc = Accumulator(16, 16)
        for y in range(0, 9, 4):
            for x in range(0, 9, 4):
                acc.add(x, y, plane[y:y + 8, x:x + 8], weight=0.25)
        out = acc.finalize()
        np.testing.assert_array_equal(out, round_half_up_u8(plane))

    def test_uncovered_plane_rejected(self):
        acc = Accumulator(16, 16)
        acc.add(0, 0, np.ones((8, 8)), 1.0)
        with pytest.raises(DimensionMismatch):
            acc.finalize()


class TestPass1:
    def test_identity_at_zero_sigma(self):
        rng = np.random.default_rng(3)
        frame = rng.integers(0, 256, (32, 32), dtype=np.uint8)
        out = pass1_basic_estimate([frame], FilterParams(sigma=0.0), center=0)
        np.testing.assert_array_equal(out, frame)

    def test_constant_frame_stays_constant(self):
        frame = np.full((32, 32), 77, np.uint8)
        out = pass1_basic_estimate([frame], FilterParams(sigma=30.0), center=0)
        np.testing.assert_array_equal(out, frame)

    def test_denoising_gain_on_fixture(self, noisy_seq, clean_seq, denoised_frame1):
        basic, _ = denoised_frame1
        gain = psnr(basic, clean_seq.frames[1]) - psnr(noisy_seq.frames[1],
                                                       clean_seq.frames[1])
        assert gain >= 3.0
        assert psnr(basic, clean_seq.frames[1]) == pytest.approx(
            pins.PASS1_PSNR_FRAME1, abs=1e-9)


class TestPass2:
    def test_identity_when_basic_equals_noisy(self):
        rng = np.random.default_rng(4)
        frame = rng.integers(0, 256, (32, 32), dtype=np.uint8)
        out = pass2_final_estimate([frame], frame, FilterParams(sigma=0.0),
                                   center=0)
        np.testing.assert_array_equal(out, frame)

    def test_constant_frames(self):
        frame = np.full((32, 32), 123, np.uint8)
        out = pass2_final_estimate([frame], frame, FilterParams(sigma=20.0),
                                   center=0)
        np.testing.assert_array_equal(out, frame)

    def test_improves_on_pass1(self, clean_seq, denoised_frame1):
        basic, final = denoised_frame1
        p1 = psnr(basic, clean_seq.frames[1])
        p2 = psnr(final, clean_seq.frames[1])
        assert p2 >= p1
        assert p2 == pytest.approx(pins.PASS2_PSNR_FRAME1, abs=1e-9)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            pass2_final_estimate([np.zeros((16, 16), np.uint8)],
                                 np.zeros((8, 8), np.uint8),
                                 FilterParams(sigma=1.0), center=0)


class TestDenoiseFrame:
    def test_single_frame_spatial_only(self):
        rng = np.random.default_rng(5)
        frame = rng.integers(0, 256, (24, 24), dtype=np.uint8)
        out = denoise_frame([frame], 0, FilterParams(sigma=0.0))
        np.testing.assert_array_equal(out, frame)

    def test_identity_at_zero_sigma_with_neighbors(self):
        rng = np.random.default_rng(6)
        frames = [rng.integers(0, 256, (24, 24), dtype=np.uint8)
                  for _ in range(3)]
        out = denoise_frame(frames, 1, FilterParams(sigma=0.0))
        np.testing.assert_array_equal(out, frames[1])

    def test_index_out_of_range(self):
        with pytest.raises(IndexError):
            denoise_frame([np.zeros((16, 16), np.uint8)], 1,
                          FilterParams(sigma=1.0))

    def test_rejects_tiny_frames(self):
        with pytest.raises(BlockTooSmall):
            denoise_frame([np.zeros((4, 4), np.uint8)], 0,
                          FilterParams(sigma=1.0))

    def test_deterministic(self, noisy_seq):
        params = FilterParams(sigma=25.0)
        a = denoise_frame(noisy_seq.frames, 0, params)
        b = denoise_frame(noisy_seq.frames, 0, params)
        np.testing.assert_array_equal(a, b)

    def test_mean_preserved(self, noisy_seq, denoised_frame1):
        _, final = denoised_frame1
        delta = abs(float(final.mean()) - float(noisy_seq.frames[1].mean()))
        assert delta <= 0.5

    def test_output_range_and_dtype(self, denoised_frame1):
        _, final = denoised_frame1
        assert final.dtype == np.uint8


class TestFilterParams:
    def test_rejects_negative_sigma(self):
        with pytest.raises(ValueError):
            FilterParams(sigma=-1.0)

    def test_rejects_oversized_step(self):
        from cafbp.blocks import MatchParams
        with pytest.raises(ValueError):
            FilterParams(sigma=1.0, match_pass1=MatchParams(step=9))
