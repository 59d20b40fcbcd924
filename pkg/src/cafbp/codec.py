"""Minimal intra-frame block codec: DCT, uniform quantization, zigzag
scan, and run-length + exp-Golomb entropy coding.

There is no prediction between blocks, so the coded residual is the block
itself and a skipped (gated-off) block reconstructs to zero.  The point of
the codec is measurement: bits and reconstruction error are real numbers
with a bit-exact, deterministic decode.  The byte-level format is written
out in docs/bitstream.md.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .bitstream import BitReader, BitWriter
from .blocks import BlockMap, walk_partition
from .denoise import round_half_up_u8
from .errors import (
    DimensionMismatch,
    MalformedHeader,
    ReservedRunCollision,
    TruncatedStream,
    UnsupportedSize,
)
from .frames import VideoSequence, chroma_dims
from .transforms import dct2_forward, dct2_inverse

PLANE_MAGIC = b"CFBP"
SEQUENCE_MAGIC = b"CFBPSEQ1"
FORMAT_VERSION = 1

# Reserved zero-run value marking end of block; real runs top out at 64*64.
EOB_RUN = (1 << 16) - 1

_MAX_PLANE_DIM = 0xFFFF


@dataclass(frozen=True)
class QuantParams:
    """Uniform quantizer; step doubles every six qp, with qp=4 -> step 1."""

    qp: int

    def __post_init__(self):
        if not 0 <= self.qp <= 51:
            raise ValueError(f"qp must be in [0, 51], got {self.qp}")

    @property
    def step(self) -> float:
        return 2.0 ** ((self.qp - 4) / 6.0)


@dataclass(frozen=True)
class Bitstream:
    """A coded plane: byte payload plus the pre-padding bit count."""

    data: bytes
    bit_count: int

    @property
    def padded_bits(self) -> int:
        return 8 * len(self.data)


def quantize(coeffs: np.ndarray, q: QuantParams) -> np.ndarray:
    """Round half away from zero after dividing by the step."""
    c = np.asarray(coeffs, np.float64)
    return (np.sign(c) * np.floor(np.abs(c) / q.step + 0.5)).astype(np.int64)


def dequantize(levels: np.ndarray, q: QuantParams) -> np.ndarray:
    return np.asarray(levels, np.float64) * q.step


@lru_cache(maxsize=None)
def zigzag_order(n: int) -> np.ndarray:
    """Flat row-major indices in diagonal scan order, DC first."""
    if n < 1:
        raise UnsupportedSize(f"block side must be >= 1, got {n}")
    order = []
    for s in range(2 * n - 1):
        if s % 2 == 0:
            rows = range(min(s, n - 1), max(0, s - n + 1) - 1, -1)
        else:
            rows = range(max(0, s - n + 1), min(s, n - 1) + 1)
        order.extend(i * n + (s - i) for i in rows)
    perm = np.array(order)
    perm.setflags(write=False)
    return perm


def zigzag(matrix: np.ndarray) -> np.ndarray:
    matrix = np.asarray(matrix)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise UnsupportedSize(f"expected a square matrix, got {matrix.shape}")
    return matrix.reshape(-1)[zigzag_order(matrix.shape[0])]


def inverse_zigzag(sequence: np.ndarray, n: int) -> np.ndarray:
    sequence = np.asarray(sequence)
    if sequence.size != n * n:
        raise UnsupportedSize(f"expected {n * n} values, got {sequence.size}")
    out = np.empty(n * n, sequence.dtype)
    out[zigzag_order(n)] = sequence
    return out.reshape(n, n)


def encode_block(samples: np.ndarray, q: QuantParams, coded: bool,
                 writer: BitWriter) -> None:
    """One gate flag bit, then (run, level) pairs and EOB when coded."""
    writer.write_bit(1 if coded else 0)
    if not coded:
        return
    levels = quantize(dct2_forward(samples), q)
    run = 0
    for level in zigzag(levels):
        if level == 0:
            run += 1
            continue
        if run >= EOB_RUN:
            raise ReservedRunCollision(f"zero run {run} hits the EOB code")
        writer.write_ue(run)
        writer.write_se(int(level))
        run = 0
    writer.write_ue(EOB_RUN)


def decode_block(reader: BitReader, q: QuantParams, size: int) -> np.ndarray:
    """Inverse of encode_block; a skipped block reconstructs to zero."""
    coded = reader.read_bit()
    scan = np.zeros(size * size, np.int64)
    if coded:
        pos = 0
        while True:
            run = reader.read_ue()
            if run == EOB_RUN:
                break
            pos += run
            if pos >= size * size:
                raise TruncatedStream("coefficient index past end of block")
            scan[pos] = reader.read_se()
            pos += 1
    recon = dct2_inverse(dequantize(inverse_zigzag(scan, size), q))
    return round_half_up_u8(recon)


def encode_frame(plane: np.ndarray, block_map: BlockMap, q: QuantParams,
                 gates=None) -> Bitstream:
    """Code one plane: header, quad-tree split flags, then blocks in
    map order.  gates gives the per-block flag (None codes everything)."""
    plane = np.asarray(plane)
    h, w = plane.shape
    if w < 8 or h < 8:
        raise UnsupportedSize(f"plane {w}x{h} is below the 8-pixel minimum")
    if w > _MAX_PLANE_DIM or h > _MAX_PLANE_DIM:
        raise UnsupportedSize(f"plane {w}x{h} exceeds the 16-bit header field")
    blocks = block_map.blocks
    if gates is None:
        gates = [True] * len(blocks)
    if len(gates) != len(blocks):
        raise DimensionMismatch(
            f"{len(gates)} gate decisions for {len(blocks)} blocks")

    writer = BitWriter()
    writer.write_bytes(PLANE_MAGIC)
    writer.write_bytes(struct.pack(">BHHB", FORMAT_VERSION, w, h, q.qp))
    for flag in block_map.split_flags:
        writer.write_bit(flag)
    source = plane.astype(np.float64)
    for block, coded in zip(blocks, gates):
        x, y = block.origin
        encode_block(source[y:y + block.size, x:x + block.size], q, coded, writer)
    bits = writer.bit_count
    writer.align()
    return Bitstream(data=writer.getvalue(), bit_count=bits)


def read_plane(reader: BitReader) -> np.ndarray:
    """Decode one plane from a reader positioned at a plane header."""
    magic = reader.read_bytes(4)
    if magic != PLANE_MAGIC:
        raise MalformedHeader(f"bad plane magic {magic!r}")
    version, w, h, qp = struct.unpack(">BHHB", reader.read_bytes(6))
    if version != FORMAT_VERSION:
        raise MalformedHeader(f"unsupported format version {version}")
    q = QuantParams(qp)

    leaves: list[tuple[int, int, int]] = []
    walk_partition(w, h,
                   should_split=lambda x, y, s: bool(reader.read_bit()),
                   on_leaf=lambda x, y, s: leaves.append((x, y, s)))
    plane = np.zeros((h, w), np.uint8)
    for x, y, size in leaves:
        plane[y:y + size, x:x + size] = decode_block(reader, q, size)
    reader.align()
    return plane


def decode_frame(source) -> np.ndarray:
    """Decode a single coded plane from a Bitstream or raw bytes."""
    data = source.data if isinstance(source, Bitstream) else source
    return read_plane(BitReader(data))


def pack_sequence_header(frame_count: int, frame_rate: Fraction,
                         has_chroma: bool) -> bytes:
    return SEQUENCE_MAGIC + struct.pack(
        ">IIIB", frame_rate.numerator, frame_rate.denominator,
        frame_count, 1 if has_chroma else 0)


SEQUENCE_HEADER_SIZE = len(SEQUENCE_MAGIC) + 13


def decode_sequence(data: bytes) -> VideoSequence:
    """Decode a full .cfbp byte string back into a video sequence."""
    if len(data) < SEQUENCE_HEADER_SIZE or not data.startswith(SEQUENCE_MAGIC):
        raise MalformedHeader("not a coded sequence (bad magic)")
    num, den, frame_count, chroma_flag = struct.unpack(
        ">IIIB", data[len(SEQUENCE_MAGIC):SEQUENCE_HEADER_SIZE])
    if den == 0:
        raise MalformedHeader("zero frame-rate denominator")
    reader = BitReader(data)
    reader.read_bytes(SEQUENCE_HEADER_SIZE)

    frames = []
    chroma = []
    for _ in range(frame_count):
        frames.append(read_plane(reader))
        if chroma_flag:
            u = read_plane(reader)
            v = read_plane(reader)
            chroma.append((u, v))
    seq = VideoSequence(frames=frames, frame_rate=Fraction(num, den),
                        chroma=chroma if chroma_flag else None)
    _check_chroma_dims(seq)
    return seq


def _check_chroma_dims(seq: VideoSequence) -> None:
    if not seq.has_chroma:
        return
    cw, ch = chroma_dims(seq.width, seq.height)
    for u, v in seq.chroma:
        if u.shape != (ch, cw) or v.shape != (ch, cw):
            raise MalformedHeader("chroma plane dimensions do not match luma")
