"""Variance-driven frame partitioning and similarity grouping.

Two jobs live here.  First, splitting a plane into a quad-tree of coding
blocks (8/16/32/64 per side) chosen by local variance: flat regions get
large blocks, busy regions small ones.  Second, building 3D groups of
mutually similar blocks for collaborative filtering, using a full search
window in the current frame and a halved, prediction-centered window in
temporal neighbors.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import BlockTooSmall, SizeMismatch, ThresholdOrderInvalid

BLOCK_SIZES = (8, 16, 32, 64)
MIN_BLOCK = 8
MAX_BLOCK = 64
GROUP_SIZES = (1, 2, 4, 8, 16, 32)

# Full-swing 8-bit variance: a half-and-half 0/255 block.
MAX_VARIANCE = 16256.25


@dataclass(eq=False)
class Block:
    """A square region of a plane: side length, (x, y) origin, samples."""

    size: int
    origin: tuple[int, int]
    samples: np.ndarray


@dataclass(frozen=True)
class MatchParams:
    """Knobs for similarity grouping.

    match_threshold is a per-pixel normalized squared distance, so one
    value works for every block size.  tau_edge, when set, halves the
    threshold for reference blocks whose edge energy exceeds it, which
    tightens matching on edges; None disables that adaptation.
    """

    search_radius: int = 12
    max_group_size: int = 16
    match_threshold: float = 2500.0
    temporal_depth: int = 1
    step: int = 4
    tau_edge: float | None = 30.0

    def __post_init__(self):
        if self.max_group_size not in GROUP_SIZES:
            raise ValueError(f"max_group_size must be one of {GROUP_SIZES}")
        if self.step < 1:
            raise ValueError("step must be positive")
        if self.search_radius < 1:
            raise ValueError("search_radius must be positive")
        if self.temporal_depth < 0:
            raise ValueError("temporal_depth must be nonnegative")
        if self.match_threshold < 0:
            raise ValueError("match_threshold must be nonnegative")


@dataclass(eq=False)
class BlockGroup:
    """A stack of similar blocks; entry 0 is always the reference.

    coords holds (frame_index, x, y) per member; distances are the
    per-pixel normalized squared distances to the reference, ascending.
    """

    size: int
    coords: list[tuple[int, int, int]]
    distances: np.ndarray
    stack: np.ndarray

    def __len__(self) -> int:
        return len(self.coords)


@dataclass(eq=False)
class BlockMap:
    """A quad-tree partition of a plane: leaves plus the split decisions.

    split_flags records, for every fully-inside node larger than 8 in
    canonical traversal order, whether it was split; the codec serializes
    exactly these bits so a decoder can rebuild the map.
    """

    blocks: list[Block]
    split_flags: list[int]


def block_variance(samples: np.ndarray) -> float:
    """Population variance of the block's samples."""
    return float(np.var(np.asarray(samples, np.float64)))


def select_block_size(frame_dims: tuple[int, int], variance: float,
                      thresholds: tuple[float, float, float]) -> int:
    """Pick a coding block size from local variance.

    Flat content (low variance) gets the coarsest block.  The result is
    clamped so the block fits the frame: a 64 on a 48-pixel-tall frame
    degrades to 32, and so on.
    """
    t1, t2, t3 = thresholds
    if not (t1 < t2 < t3):
        raise ThresholdOrderInvalid(f"need T1 < T2 < T3, got {thresholds}")
    if variance < t1:
        size = 64
    elif variance < t2:
        size = 32
    elif variance < t3:
        size = 16
    else:
        size = 8
    limit = min(frame_dims)
    if limit < MIN_BLOCK:
        raise BlockTooSmall(f"frame {frame_dims} is smaller than {MIN_BLOCK} pixels")
    while size > limit:
        size //= 2
    return size


def edge_energy(samples: np.ndarray) -> float:
    """Mean 3x3 Sobel gradient magnitude over the block's interior."""
    p = np.asarray(samples, np.float64)
    if min(p.shape) < 3:
        raise BlockTooSmall(f"edge energy needs at least 3x3, got {p.shape}")
    gx = ((p[:-2, 2:] + 2.0 * p[1:-1, 2:] + p[2:, 2:])
          - (p[:-2, :-2] + 2.0 * p[1:-1, :-2] + p[2:, :-2]))
    gy = ((p[2:, :-2] + 2.0 * p[2:, 1:-1] + p[2:, 2:])
          - (p[:-2, :-2] + 2.0 * p[:-2, 1:-1] + p[:-2, 2:]))
    return float(np.hypot(gx, gy).mean())


def match_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Per-pixel normalized SSD, so thresholds are size-independent."""
    a = np.asarray(a, np.float64)
    b = np.asarray(b, np.float64)
    if a.shape != b.shape:
        raise SizeMismatch(f"block shapes differ: {a.shape} vs {b.shape}")
    return float(np.sum((a - b) ** 2)) / a.size


def build_group(ref: Block, frames: Sequence[np.ndarray], params: MatchParams,
                center: int | None = None,
                prediction: tuple[int, int] | None = None) -> BlockGroup:
    """Collect blocks similar to ref into a power-of-two sized stack.

    The center frame is searched over the full +/-search_radius window;
    each temporal neighbor over a halved window around `prediction` (the
    reference origin when no prediction is given).  Candidates within
    match_threshold are kept, sorted by (distance, y, x, frame), and the
    list is truncated to the largest power of two that fits
    max_group_size.  The reference itself is always member 0, so a group
    is never empty.
    """
    if center is None:
        center = len(frames) // 2
    size = ref.size
    x0_ref, y0_ref = ref.origin
    ref_samples = np.asarray(ref.samples, np.float64)

    threshold = params.match_threshold
    if params.tau_edge is not None and size >= 3:
        if edge_energy(ref_samples) > params.tau_edge:
            threshold = threshold / 2.0

    cand_d, cand_y, cand_x, cand_f = [], [], [], []
    for f_idx, plane in enumerate(frames):
        h, w = plane.shape
        if h < size or w < size:
            continue
        if f_idx == center:
            cx, cy = x0_ref, y0_ref
            radius = params.search_radius
        else:
            cx, cy = prediction if prediction is not None else (x0_ref, y0_ref)
            radius = params.search_radius // 2
        ylo, yhi = max(0, cy - radius), min(h - size, cy + radius)
        xlo, xhi = max(0, cx - radius), min(w - size, cx + radius)
        if yhi < ylo or xhi < xlo:
            continue
        window = np.lib.stride_tricks.sliding_window_view(
            plane, (size, size))[ylo:yhi + 1, xlo:xhi + 1]
        dists = np.sum((window - ref_samples) ** 2, axis=(2, 3)) / (size * size)
        mask = dists <= threshold
        if f_idx == center:
            mask[y0_ref - ylo, x0_ref - xlo] = False
        ys, xs = np.nonzero(mask)
        if ys.size:
            cand_d.append(dists[ys, xs])
            cand_y.append(ys + ylo)
            cand_x.append(xs + xlo)
            cand_f.append(np.full(ys.size, f_idx))

    if cand_d:
        d = np.concatenate(cand_d)
        yy = np.concatenate(cand_y)
        xx = np.concatenate(cand_x)
        ff = np.concatenate(cand_f)
        # lexsort's last key is primary: distance, then y, x, frame.
        order = np.lexsort((ff, xx, yy, d))
    else:
        d = yy = xx = ff = np.empty(0)
        order = np.empty(0, np.intp)

    count = min(1 + order.size, params.max_group_size)
    count = 1 << (count.bit_length() - 1)
    take = order[:count - 1]

    coords = [(center, x0_ref, y0_ref)]
    coords += [(int(ff[i]), int(xx[i]), int(yy[i])) for i in take]
    distances = np.concatenate([[0.0], d[take]])
    stack = np.stack([
        np.asarray(frames[f][y:y + size, x:x + size], np.float64)
        for (f, x, y) in coords
    ])
    return BlockGroup(size=size, coords=coords, distances=distances, stack=stack)


def walk_partition(width: int, height: int,
                   should_split: Callable[[int, int, int], bool],
                   on_leaf: Callable[[int, int, int], None]) -> None:
    """Canonical quad-tree traversal shared by map building and the codec.

    Macro tiles of 64 are visited in raster order; children in NW, NE, SW,
    SE order.  should_split is consulted only for fully-inside nodes larger
    than 8 (nodes sticking out of the plane are always split; size-8 leaves
    that stick out are clamped back inside, which may overlap neighbors).
    """
    if width < MIN_BLOCK or height < MIN_BLOCK:
        raise BlockTooSmall(f"plane {width}x{height} is below {MIN_BLOCK} pixels")
    for my in range(0, height, MAX_BLOCK):
        for mx in range(0, width, MAX_BLOCK):
            _descend(mx, my, MAX_BLOCK, width, height, should_split, on_leaf)


def _descend(x: int, y: int, size: int, width: int, height: int,
             should_split, on_leaf) -> None:
    inside = x + size <= width and y + size <= height
    if inside and not (size > MIN_BLOCK and should_split(x, y, size)):
        on_leaf(x, y, size)
        return
    if size == MIN_BLOCK:
        on_leaf(min(x, width - size), min(y, height - size), size)
        return
    half = size // 2
    for cy in (y, y + half):
        for cx in (x, x + half):
            if cx < width and cy < height:
                _descend(cx, cy, half, width, height, should_split, on_leaf)


def build_block_map(plane: np.ndarray,
                    thresholds: tuple[float, float, float]) -> BlockMap:
    """Partition a plane into variance-chosen blocks.

    Each fully-inside node keeps its size when select_block_size, fed the
    node's own variance, asks for that size or larger; otherwise it splits
    and the children are re-examined.
    """
    p = np.asarray(plane, np.float64)
    h, w = p.shape
    blocks: list[Block] = []
    flags: list[int] = []

    def should_split(x: int, y: int, size: int) -> bool:
        variance = block_variance(p[y:y + size, x:x + size])
        split = select_block_size((w, h), variance, thresholds) < size
        flags.append(1 if split else 0)
        return split

    def on_leaf(x: int, y: int, size: int) -> None:
        blocks.append(Block(size=size, origin=(x, y),
                            samples=p[y:y + size, x:x + size]))

    walk_partition(w, h, should_split, on_leaf)
    return BlockMap(blocks=blocks, split_flags=flags)
