"""Orthonormal transforms for block stacks.

The 3D transform of a group is separable: a 2D DCT-II on every block
followed by a 1D Walsh-Hadamard transform along the stacking axis.  All
transforms here are orthonormal, so energy is preserved exactly and the
inverses are the transposed operations.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

from .errors import NotPowerOfTwo, UnsupportedSize

_INV_SQRT2 = 1.0 / math.sqrt(2.0)


@lru_cache(maxsize=None)
def dct_matrix(n: int) -> np.ndarray:
    """Orthonormal DCT-II basis: row k is c(k)*cos(pi*(2i+1)*k/(2n))."""
    if n < 1:
        raise UnsupportedSize(f"transform size must be >= 1, got {n}")
    k = np.arange(n)[:, None]
    i = np.arange(n)[None, :]
    scale = np.full((n, 1), math.sqrt(2.0 / n))
    scale[0, 0] = math.sqrt(1.0 / n)
    basis = scale * np.cos(np.pi * (2 * i + 1) * k / (2 * n))
    basis.setflags(write=False)
    return basis


def dct2_forward(block: np.ndarray) -> np.ndarray:
    """2D orthonormal DCT-II of a square block."""
    block = np.asarray(block, np.float64)
    n = _square_side(block)
    m = dct_matrix(n)
    return m @ block @ m.T


def dct2_inverse(coeffs: np.ndarray) -> np.ndarray:
    """Exact inverse of dct2_forward."""
    coeffs = np.asarray(coeffs, np.float64)
    n = _square_side(coeffs)
    m = dct_matrix(n)
    return m.T @ coeffs @ m


def _square_side(a: np.ndarray) -> int:
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise UnsupportedSize(f"expected a square 2D block, got shape {a.shape}")
    if a.shape[0] < 1:
        raise UnsupportedSize("empty block")
    return a.shape[0]


def _is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


def wht_forward(values: np.ndarray) -> np.ndarray:
    """Orthonormal Walsh-Hadamard transform along the first axis.

    Implemented as the butterfly with a 1/sqrt(2) scale per stage; length 1
    is the identity.  Accepts a vector or a stack (the transform is applied
    to axis 0 of any array), which is how block groups are transformed.
    """
    out = np.array(values, np.float64)
    n = out.shape[0]
    if not _is_power_of_two(n):
        raise NotPowerOfTwo(f"length must be a power of two, got {n}")
    h = 1
    while h < n:
        for start in range(0, n, 2 * h):
            top = out[start:start + h].copy()
            bottom = out[start + h:start + 2 * h]
            out[start:start + h] = (top + bottom) * _INV_SQRT2
            out[start + h:start + 2 * h] = (top - bottom) * _INV_SQRT2
        h *= 2
    return out


def wht_inverse(values: np.ndarray) -> np.ndarray:
    """Inverse WHT; the orthonormal transform is its own inverse."""
    return wht_forward(values)


@lru_cache(maxsize=None)
def wht_matrix(n: int) -> np.ndarray:
    """The WHT as a matrix (the butterfly applied to the identity); used as
    a fast path for stacks and pinned against the butterfly by tests."""
    basis = wht_forward(np.eye(n))
    basis.setflags(write=False)
    return basis


def group_forward(stack: np.ndarray) -> np.ndarray:
    """3D transform of a block stack: per-block 2D DCT, then WHT across blocks.

    stack has shape (group_size, side, side) with group_size a power of two.
    """
    stack = np.asarray(stack, np.float64)
    if stack.ndim != 3 or stack.shape[1] != stack.shape[2]:
        raise UnsupportedSize(f"expected (count, side, side), got {stack.shape}")
    if not _is_power_of_two(stack.shape[0]):
        raise NotPowerOfTwo(f"group size must be a power of two, got {stack.shape[0]}")
    m = dct_matrix(stack.shape[1])
    h = wht_matrix(stack.shape[0])
    return np.tensordot(h, m @ stack @ m.T, axes=(1, 0))


def group_inverse(spectrum: np.ndarray) -> np.ndarray:
    """Exact inverse of group_forward."""
    spectrum = np.asarray(spectrum, np.float64)
    if spectrum.ndim != 3 or spectrum.shape[1] != spectrum.shape[2]:
        raise UnsupportedSize(f"expected (count, side, side), got {spectrum.shape}")
    if not _is_power_of_two(spectrum.shape[0]):
        raise NotPowerOfTwo(f"group size must be a power of two, got {spectrum.shape[0]}")
    m = dct_matrix(spectrum.shape[1])
    h = wht_matrix(spectrum.shape[0])
    return m.T @ np.tensordot(h, spectrum, axes=(1, 0)) @ m
