import numpy as np
import pytest

from cafbp.errors import (
    DimensionMismatch,
    MalformedHeader,
    SizeMismatch,
    TruncatedFrame,
    UnsupportedColorSpace,
)
from cafbp.frames import (
    VideoSequence,
    mse,
    parse_raw_yuv,
    parse_y4m,
    psnr,
    serialize_raw_yuv,
    write_y4m,
)


def plane(values, dtype=np.uint8):
    return np.array(values, dtype=dtype)


class TestParseY4m:
    def test_mono_single_frame(self):
        data = b"YUV4MPEG2 W4 H4 F25:1 Cmono\nFRAME\n" + bytes(range(16))
        seq = parse_y4m(data)
        assert len(seq) == 1
        assert seq.frames[0].shape == (4, 4)
        assert seq.frames[0][3, 3] == 15
        assert not seq.has_chroma
        assert seq.frame_rate == 25

    def test_420_frame_layout(self):
        payload = bytes(range(16)) + bytes([100] * 4) + bytes([200] * 4)
        data = b"YUV4MPEG2 W4 H4 F30:1 C420\nFRAME\n" + payload
        seq = parse_y4m(data)
        assert seq.frames[0].shape == (4, 4)
        u, v = seq.chroma[0]
        assert u.shape == (2, 2) and v.shape == (2, 2)
        assert np.all(u == 100) and np.all(v == 200)

    def test_default_colorspace_is_420(self):
        data = b"YUV4MPEG2 W2 H2 F25:1\nFRAME\n" + bytes(6)
        assert parse_y4m(data).has_chroma

    def test_frame_marker_with_parameters(self):
        data = b"YUV4MPEG2 W2 H2 F25:1 Cmono\nFRAME Ixxx\n" + bytes(4)
        assert len(parse_y4m(data)) == 1

    def test_truncated_payload(self):
        data = b"YUV4MPEG2 W4 H4 F25:1 Cmono\nFRAME\n" + bytes(10)
        with pytest.raises(TruncatedFrame):
            parse_y4m(data)

    def test_truncated_second_frame(self):
        data = (b"YUV4MPEG2 W2 H2 F25:1 Cmono\nFRAME\n" + bytes(4)
                + b"FRAME\n" + bytes(2))
        with pytest.raises(TruncatedFrame):
            parse_y4m(data)

    def test_missing_dimensions(self):
        with pytest.raises(MalformedHeader):
            parse_y4m(b"YUV4MPEG2 W4 F25:1\nFRAME\n" + bytes(16))

    def test_bad_signature(self):
        with pytest.raises(MalformedHeader):
            parse_y4m(b"RIFF W4 H4 F25:1\n")

    def test_bad_rate_token(self):
        with pytest.raises(MalformedHeader):
            parse_y4m(b"YUV4MPEG2 W4 H4 Fx:1\nFRAME\n" + bytes(16))

    def test_unsupported_colorspace(self):
        with pytest.raises(UnsupportedColorSpace):
            parse_y4m(b"YUV4MPEG2 W4 H4 F25:1 C422\nFRAME\n" + bytes(32))

    def test_garbage_between_frames(self):
        data = b"YUV4MPEG2 W2 H2 F25:1 Cmono\nHELLO\n" + bytes(4)
        with pytest.raises(MalformedHeader):
            parse_y4m(data)


class TestRawYuv:
    def test_mono_two_frames(self):
        seq = parse_raw_yuv(bytes(32), 4, 4, "mono")
        assert len(seq) == 2

    def test_not_a_multiple(self):
        with pytest.raises(SizeMismatch):
            parse_raw_yuv(bytes(30), 4, 4, "mono")

    def test_420_one_frame(self):
        seq = parse_raw_yuv(bytes(24), 4, 4, "420")
        assert len(seq) == 1
        assert seq.chroma[0][0].shape == (2, 2)

    def test_bad_dims(self):
        with pytest.raises(SizeMismatch):
            parse_raw_yuv(bytes(16), 0, 4, "mono")

    def test_bad_chroma_mode(self):
        with pytest.raises(UnsupportedColorSpace):
            parse_raw_yuv(bytes(16), 4, 4, "422")

    def test_serialize_round_trip(self):
        rng = np.random.default_rng(5)
        frames = [rng.integers(0, 256, (6, 4), dtype=np.uint8) for _ in range(3)]
        chroma = [(rng.integers(0, 256, (3, 2), dtype=np.uint8),
                   rng.integers(0, 256, (3, 2), dtype=np.uint8))
                  for _ in range(3)]
        seq = VideoSequence(frames=frames, chroma=chroma)
        back = parse_raw_yuv(serialize_raw_yuv(seq), 4, 6, "420")
        assert len(back) == 3
        for i in range(3):
            assert np.array_equal(back.frames[i], frames[i])
            assert np.array_equal(back.chroma[i][0], chroma[i][0])
            assert np.array_equal(back.chroma[i][1], chroma[i][1])


def test_y4m_write_parse_round_trip():
    rng = np.random.default_rng(9)
    frames = [rng.integers(0, 256, (8, 6), dtype=np.uint8) for _ in range(2)]
    seq = VideoSequence(frames=frames)
    back = parse_y4m(write_y4m(seq))
    assert back.frame_rate == seq.frame_rate
    for a, b in zip(seq.frames, back.frames):
        assert np.array_equal(a, b)


class TestMse:
    def test_identical(self):
        a = plane([[5, 5], [5, 5]])
        assert mse(a, a) == 0.0

    def test_plus_one_everywhere(self):
        a = plane([[5, 5], [5, 5]])
        assert mse(a, a + 1) == 1.0

    def test_hand_value(self):
        assert mse(plane([[0], [0]]), plane([[3], [4]])) == 12.5

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            mse(plane([[0, 0]]), plane([[0], [0]]))


class TestPsnr:
    def test_identical_is_infinite(self):
        a = plane([[1, 200], [30, 4]])
        assert psnr(a, a) == float("inf")

    def test_full_swing_is_zero_db(self):
        a = np.zeros((4, 4), np.uint8)
        b = np.full((4, 4), 255, np.uint8)
        assert psnr(a, b) == pytest.approx(0.0, abs=1e-12)

    def test_unit_mse(self):
        a = np.zeros((16, 16), np.uint8)
        assert psnr(a, a + 1) == pytest.approx(48.1308, abs=1e-3)

    def test_symmetry(self):
        rng = np.random.default_rng(3)
        a = rng.integers(0, 256, (8, 8), dtype=np.uint8)
        b = rng.integers(0, 256, (8, 8), dtype=np.uint8)
        assert psnr(a, b) == psnr(b, a)

    def test_decreases_with_mse(self):
        base = np.zeros((16, 16), np.uint8)
        values = [psnr(base, base + delta) for delta in (1, 2, 5, 9, 20)]
        assert all(x > y for x, y in zip(values, values[1:]))
