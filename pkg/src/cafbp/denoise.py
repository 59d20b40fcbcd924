"""Two-pass collaborative 3D-transform denoising.

Pass 1 groups similar 8x8 blocks (spatially and across temporal
neighbors), hard-thresholds the group spectrum at lambda*sigma, and
aggregates the overlapping block estimates with weights inverse to the
number of retained coefficients.  Pass 2 regroups on the pass-1 estimate
and applies empirical Wiener shrinkage, using the pass-1 spectrum as the
signal-power reference; its aggregation weights are inverse to the total
squared shrinkage.  Filtering always works on 8x8 blocks regardless of the
codec's partition.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .blocks import Block, MatchParams, build_group
from .errors import BlockTooSmall, DimensionMismatch
from .transforms import group_forward, group_inverse

FILTER_BLOCK = 8
_WIENER_EPS = 1e-12


@dataclass(frozen=True)
class FilterParams:
    """Denoiser configuration; sigma is the assumed noise std in 8-bit units."""

    sigma: float
    lambda_3d: float = 2.7
    match_pass1: MatchParams = MatchParams()
    match_pass2: MatchParams = MatchParams(match_threshold=400.0)
    max_pipeline_iters: int = 4
    sigma_decay: bool = True

    def __post_init__(self):
        if self.sigma < 0:
            raise ValueError("sigma must be nonnegative")
        if self.lambda_3d <= 0:
            raise ValueError("lambda_3d must be positive")
        if self.max_pipeline_iters < 1:
            raise ValueError("max_pipeline_iters must be >= 1")
        for params in (self.match_pass1, self.match_pass2):
            if params.step > FILTER_BLOCK:
                raise ValueError(
                    f"step {params.step} exceeds the {FILTER_BLOCK}-pixel "
                    f"filter block; the frame would not be covered")


class Accumulator:
    """Weighted-average buffers for overlapping block estimates."""

    def __init__(self, height: int, width: int):
        self.numerator = np.zeros((height, width))
        self.denominator = np.zeros((height, width))

    def add(self, x: int, y: int, estimate: np.ndarray, weight: float) -> None:
        side = estimate.shape[0]
        self.numerator[y:y + side, x:x + side] += weight * estimate
        self.denominator[y:y + side, x:x + side] += weight

    def finalize(self) -> np.ndarray:
        if not np.all(self.denominator > 0):
            raise DimensionMismatch("aggregation did not cover the full plane")
        return round_half_up_u8(self.numerator / self.denominator)


def round_half_up_u8(values: np.ndarray) -> np.ndarray:
    """Round half toward +inf, clamp to [0, 255], return uint8."""
    return np.clip(np.floor(values + 0.5), 0, 255).astype(np.uint8)


def hard_threshold(spectrum: np.ndarray, sigma: float, lambda_3d: float):
    """Zero every coefficient below lambda*sigma except the joint DC.

    Returns (thresholded spectrum, retained count).  The (0,0,0) joint-DC
    coefficient always counts as retained, even when it happens to be zero.
    """
    cut = lambda_3d * sigma
    out = np.where(np.abs(spectrum) < cut, 0.0, spectrum)
    out[0, 0, 0] = spectrum[0, 0, 0]
    retained = int(np.count_nonzero(out))
    if out[0, 0, 0] == 0.0:
        retained += 1
    return out, retained


def wiener_shrink(noisy_spec: np.ndarray, basic_spec: np.ndarray, sigma: float):
    """Scale each noisy coefficient by basic^2 / (basic^2 + sigma^2).

    Returns (shrunk spectrum, sum of squared shrink factors).  The 0/0
    case (zero reference and zero sigma) shrinks to zero: that coefficient
    carries no evidence.
    """
    if noisy_spec.shape != basic_spec.shape:
        raise DimensionMismatch(
            f"spectra differ: {noisy_spec.shape} vs {basic_spec.shape}")
    power = basic_spec * basic_spec
    denom = power + sigma * sigma
    shrink = np.divide(power, denom, out=np.zeros_like(power), where=denom > 0)
    return shrink * noisy_spec, float(np.sum(shrink * shrink))


def _positions(dim: int, step: int) -> list[int]:
    last = dim - FILTER_BLOCK
    pos = list(range(0, last + 1, step))
    if pos[-1] != last:
        pos.append(last)
    return pos


def _as_planes(frames) -> list[np.ndarray]:
    planes = [np.asarray(f, np.float64) for f in frames]
    h, w = planes[0].shape
    if h < FILTER_BLOCK or w < FILTER_BLOCK:
        raise BlockTooSmall(f"frames must be at least {FILTER_BLOCK} pixels per side")
    return planes


def pass1_basic_estimate(frames, params: FilterParams,
                         center: int | None = None) -> np.ndarray:
    """Grouping plus hard thresholding; the intermediary estimate."""
    planes = _as_planes(frames)
    if center is None:
        center = len(planes) // 2
    h, w = planes[center].shape
    mp = params.match_pass1
    acc = Accumulator(h, w)
    for y in _positions(h, mp.step):
        for x in _positions(w, mp.step):
            ref = Block(FILTER_BLOCK, (x, y),
                        planes[center][y:y + FILTER_BLOCK, x:x + FILTER_BLOCK])
            group = build_group(ref, planes, mp, center=center)
            spectrum = group_forward(group.stack)
            spectrum, retained = hard_threshold(spectrum, params.sigma,
                                                params.lambda_3d)
            estimates = group_inverse(spectrum)
            weight = 1.0 / max(retained, 1)
            for member, (f, bx, by) in enumerate(group.coords):
                if f != center:
                    continue
                acc.add(bx, by, estimates[member], weight)
    return acc.finalize()


def pass2_final_estimate(frames, basic: np.ndarray, params: FilterParams,
                         center: int | None = None) -> np.ndarray:
    """Regroup on the basic estimate and apply empirical Wiener shrinkage.

    Grouping runs on the basic plane alone; the coordinates it finds pull
    matching stacks out of both the basic and the noisy center frame.
    """
    planes = _as_planes(frames)
    if center is None:
        center = len(planes) // 2
    noisy = planes[center]
    basic_plane = np.asarray(basic, np.float64)
    if basic_plane.shape != noisy.shape:
        raise DimensionMismatch(
            f"basic {basic_plane.shape} does not match frame {noisy.shape}")
    h, w = noisy.shape
    mp = params.match_pass2
    acc = Accumulator(h, w)
    for y in _positions(h, mp.step):
        for x in _positions(w, mp.step):
            ref = Block(FILTER_BLOCK, (x, y),
                        basic_plane[y:y + FILTER_BLOCK, x:x + FILTER_BLOCK])
            group = build_group(ref, [basic_plane], mp, center=0)
            noisy_stack = np.stack([
                noisy[by:by + FILTER_BLOCK, bx:bx + FILTER_BLOCK]
                for (_, bx, by) in group.coords
            ])
            basic_spec = group_forward(group.stack)
            noisy_spec = group_forward(noisy_stack)
            shrunk, weight_norm = wiener_shrink(noisy_spec, basic_spec,
                                                params.sigma)
            estimates = group_inverse(shrunk)
            weight = 1.0 / max(weight_norm, _WIENER_EPS)
            for member, (_, bx, by) in enumerate(group.coords):
                acc.add(bx, by, estimates[member], weight)
    return acc.finalize()


def denoise_frame(frames, index: int, params: FilterParams) -> np.ndarray:
    """Both passes for the frame at `index`, using temporal neighbors
    within match_pass1.temporal_depth where they exist.  A single-frame
    input degrades to purely spatial filtering."""
    if not 0 <= index < len(frames):
        raise IndexError(f"frame index {index} out of range")
    depth = params.match_pass1.temporal_depth
    lo = max(0, index - depth)
    hi = min(len(frames), index + depth + 1)
    window = [np.asarray(f, np.float64) for f in frames[lo:hi]]
    center = index - lo
    basic = pass1_basic_estimate(window, params, center=center)
    return pass2_final_estimate(window, basic, params, center=center)
