#!/usr/bin/env python3
"""Regenerate the committed test fixtures under tests/data/.

The y4m files written here are the authoritative fixtures; tests read the
files, not this script, so regression values stay pinned even if numpy's
random stream ever changes.  golden_rd.csv is not rewritten here: it is a
frozen regression artifact produced by a verified harness run.
"""

import pathlib
import sys

import numpy as np

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "src"))

from cafbp.frames import VideoSequence, write_y4m  # noqa: E402

DATA_DIR = pathlib.Path(__file__).resolve().parents[1] / "tests" / "data"

NOISE_SEED = 20250808
NOISE_SIGMA = 25.0


def piecewise_clean_frame(t: int) -> np.ndarray:
    """Piecewise-constant 128x128 scene: three moving/static rectangles on
    a mid-gray background, plus a near-black strip along the bottom whose
    blocks are cheap to skip when coding."""
    f = np.full((128, 128), 90, np.float64)
    f[18:58, 16 + 2 * t:56 + 2 * t] = 130
    f[22:54, 72:112] = 170
    f[62 + t:94 + t, 40:88] = 210
    f[120:, :] = 8
    return f


def make_piecewise_fixtures():
    rng = np.random.default_rng(NOISE_SEED)
    cleans, noisys = [], []
    for t in range(4):
        clean = piecewise_clean_frame(t)
        noise = rng.normal(0.0, NOISE_SIGMA, clean.shape)
        noisys.append(np.clip(np.round(clean + noise), 0, 255).astype(np.uint8))
        cleans.append(clean.astype(np.uint8))
    return cleans, noisys


def rd_frame(t: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """64x64 4:2:0 frame mixing gradients, a checkerboard and edges, so
    every qp on the ladder produces a distinct, monotone bit count."""
    rows = np.arange(64)
    cols = np.arange(64)
    y = 40 + (rows[:, None] * 5 // 2) + cols[None, :] // 4
    y = y.astype(np.int64)
    board = ((rows[:, None] // 4 + cols[None, :] // 4) % 2) * 50 - 25
    y[8:32, 8:32] += board[8:32, 8:32]
    y[40:60, 12 + 2 * t:44 + 2 * t] = 210
    y[12:24, 44:60] = 70
    u = 60 + cols[None, :] * 2 + rows[:, None] * 0
    v = 190 - rows[:, None] * 2 + cols[None, :] * 0
    u = np.broadcast_to(u, (64, 64))[::2, ::2]
    v = np.broadcast_to(v, (64, 64))[::2, ::2]
    clip = lambda a: np.clip(a, 0, 255).astype(np.uint8)
    return clip(y), clip(u), clip(v)


def main():
    DATA_DIR.mkdir(parents=True, exist_ok=True)
    cleans, noisys = make_piecewise_fixtures()
    clean_seq = VideoSequence(frames=cleans)
    noisy_seq = VideoSequence(frames=noisys)
    (DATA_DIR / "fixture_clean.y4m").write_bytes(write_y4m(clean_seq))
    (DATA_DIR / "fixture_noisy.y4m").write_bytes(write_y4m(noisy_seq))

    frames, chroma = [], []
    for t in range(2):
        y, u, v = rd_frame(t)
        frames.append(y)
        chroma.append((u, v))
    rd_seq = VideoSequence(frames=frames, chroma=chroma)
    (DATA_DIR / "fixture_rd.y4m").write_bytes(write_y4m(rd_seq))
    for name in ("fixture_clean.y4m", "fixture_noisy.y4m", "fixture_rd.y4m"):
        print(f"wrote {DATA_DIR / name}")


if __name__ == "__main__":
    main()
