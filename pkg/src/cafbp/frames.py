"""Planar 8-bit video I/O (Y4M / raw YUV) and distortion metrics.

A frame plane is a plain ``(height, width)`` uint8 ndarray.  A video is a
:class:`VideoSequence`: a list of luma planes plus optional 4:2:0 chroma
plane pairs that are carried through the pipeline untouched by filtering.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import (
    DimensionMismatch,
    MalformedHeader,
    SizeMismatch,
    TruncatedFrame,
    UnsupportedColorSpace,
)

Y4M_SIGNATURE = b"YUV4MPEG2"

# 4:2:0 chroma siting variants share an identical payload layout.
_Y4M_420_SPACES = {b"420", b"420jpeg", b"420mpeg2", b"420paldv"}


def chroma_dims(width: int, height: int) -> tuple[int, int]:
    """4:2:0 chroma plane dimensions for a luma plane of width x height."""
    return (width + 1) // 2, (height + 1) // 2


@dataclass
class VideoSequence:
    frames: list[np.ndarray]
    frame_rate: Fraction = Fraction(25, 1)
    chroma: list[tuple[np.ndarray, np.ndarray]] | None = None

    @property
    def width(self) -> int:
        return self.frames[0].shape[1]

    @property
    def height(self) -> int:
        return self.frames[0].shape[0]

    @property
    def has_chroma(self) -> bool:
        return self.chroma is not None

    def __len__(self) -> int:
        return len(self.frames)


def mse(a: np.ndarray, b: np.ndarray) -> float:
    """Mean squared sample difference, accumulated exactly in integers."""
    if a.shape != b.shape:
        raise DimensionMismatch(f"plane shapes differ: {a.shape} vs {b.shape}")
    diff = a.astype(np.int64) - b.astype(np.int64)
    return int(np.sum(diff * diff)) / a.size


def psnr(a: np.ndarray, b: np.ndarray) -> float:
    """Peak signal-to-noise ratio in dB against a 255 peak; inf when equal."""
    m = mse(a, b)
    if m == 0.0:
        return math.inf
    return 10.0 * math.log10(255.0 ** 2 / m)


def _parse_positive_int(raw: bytes, name: str) -> int:
    try:
        value = int(raw)
    except ValueError:
        raise MalformedHeader(f"invalid {name} token: {raw!r}") from None
    if value <= 0:
        raise MalformedHeader(f"{name} must be positive, got {value}")
    return value


def _take_plane(data: bytes, pos: int, count: int, height: int, width: int) -> np.ndarray:
    return np.frombuffer(data, np.uint8, count, pos).reshape(height, width).copy()


def parse_y4m(data: bytes) -> VideoSequence:
    """Parse a YUV4MPEG2 byte stream (8-bit 4:2:0 or mono).

    Raises MalformedHeader for a bad signature or missing W/H/F tokens,
    UnsupportedColorSpace for anything but 8-bit 420/mono, and
    TruncatedFrame when the stream ends mid-frame.
    """
    nl = data.find(b"\n")
    if nl < 0:
        raise MalformedHeader("missing stream header line")
    tokens = data[:nl].split(b" ")
    if tokens[0] != Y4M_SIGNATURE:
        raise MalformedHeader(f"bad signature: {tokens[0]!r}")

    width = height = None
    rate = None
    space = b"420"
    for token in tokens[1:]:
        if not token:
            continue
        key, value = token[:1], token[1:]
        if key == b"W":
            width = _parse_positive_int(value, "W")
        elif key == b"H":
            height = _parse_positive_int(value, "H")
        elif key == b"F":
            num, _, den = value.partition(b":")
            rate = Fraction(_parse_positive_int(num, "F numerator"),
                            _parse_positive_int(den, "F denominator"))
        elif key == b"C":
            space = value
        # I (interlacing), A (aspect), X (extensions) are ignored.

    if width is None or height is None or rate is None:
        raise MalformedHeader("header must declare W, H and F")
    if space == b"mono":
        has_chroma = False
    elif space in _Y4M_420_SPACES:
        has_chroma = True
    else:
        raise UnsupportedColorSpace(f"unsupported color space: {space!r}")

    cw, ch = chroma_dims(width, height)
    y_size = width * height
    c_size = cw * ch
    frame_size = y_size + (2 * c_size if has_chroma else 0)

    frames: list[np.ndarray] = []
    chroma: list[tuple[np.ndarray, np.ndarray]] = []
    pos = nl + 1
    while pos < len(data):
        marker_end = data.find(b"\n", pos)
        if marker_end < 0:
            raise TruncatedFrame("unterminated FRAME marker")
        marker = data[pos:marker_end]
        if marker != b"FRAME" and not marker.startswith(b"FRAME "):
            raise MalformedHeader(f"expected FRAME marker, got {marker!r}")
        pos = marker_end + 1
        if pos + frame_size > len(data):
            raise TruncatedFrame(
                f"frame {len(frames)} needs {frame_size} bytes, "
                f"{len(data) - pos} left")
        frames.append(_take_plane(data, pos, y_size, height, width))
        pos += y_size
        if has_chroma:
            u = _take_plane(data, pos, c_size, ch, cw)
            v = _take_plane(data, pos + c_size, c_size, ch, cw)
            chroma.append((u, v))
            pos += 2 * c_size

    return VideoSequence(frames=frames, frame_rate=rate,
                         chroma=chroma if has_chroma else None)


def write_y4m(seq: VideoSequence) -> bytes:
    """Serialize a sequence back to YUV4MPEG2 bytes."""
    space = "420" if seq.has_chroma else "mono"
    header = (f"YUV4MPEG2 W{seq.width} H{seq.height} "
              f"F{seq.frame_rate.numerator}:{seq.frame_rate.denominator} "
              f"C{space}\n").encode()
    parts = [header]
    for i, y in enumerate(seq.frames):
        parts.append(b"FRAME\n")
        parts.append(np.ascontiguousarray(y, np.uint8).tobytes())
        if seq.has_chroma:
            u, v = seq.chroma[i]
            parts.append(np.ascontiguousarray(u, np.uint8).tobytes())
            parts.append(np.ascontiguousarray(v, np.uint8).tobytes())
    return b"".join(parts)


def parse_raw_yuv(data: bytes, width: int, height: int,
                  chroma_mode: str = "mono") -> VideoSequence:
    """Split a headerless planar byte stream into frames.

    chroma_mode is "mono" or "420".  The stream length must be an exact
    multiple of the frame byte size, else SizeMismatch is raised.
    """
    if width <= 0 or height <= 0:
        raise SizeMismatch(f"dimensions must be positive: {width}x{height}")
    if chroma_mode not in ("mono", "420"):
        raise UnsupportedColorSpace(f"unsupported chroma mode: {chroma_mode!r}")
    has_chroma = chroma_mode == "420"
    cw, ch = chroma_dims(width, height)
    y_size = width * height
    c_size = cw * ch
    frame_size = y_size + (2 * c_size if has_chroma else 0)
    if len(data) % frame_size != 0:
        raise SizeMismatch(
            f"stream of {len(data)} bytes is not a multiple of the "
            f"{frame_size}-byte frame size")

    frames = []
    chroma = []
    for pos in range(0, len(data), frame_size):
        frames.append(_take_plane(data, pos, y_size, height, width))
        if has_chroma:
            u = _take_plane(data, pos + y_size, c_size, ch, cw)
            v = _take_plane(data, pos + y_size + c_size, c_size, ch, cw)
            chroma.append((u, v))
    return VideoSequence(frames=frames,
                         chroma=chroma if has_chroma else None)


def serialize_raw_yuv(seq: VideoSequence) -> bytes:
    """Headerless planar bytes; inverse of parse_raw_yuv for same geometry."""
    parts = []
    for i, y in enumerate(seq.frames):
        parts.append(np.ascontiguousarray(y, np.uint8).tobytes())
        if seq.has_chroma:
            u, v = seq.chroma[i]
            parts.append(np.ascontiguousarray(u, np.uint8).tobytes())
            parts.append(np.ascontiguousarray(v, np.uint8).tobytes())
    return b"".join(parts)
