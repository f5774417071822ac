"""Shared framing conventions: every contour uses a 10 ms hop on the same grid."""

import numpy as np

HOP_S = 0.010


def frame_starts(n_samples: int, frame_len: int, hop: int) -> np.ndarray:
    if n_samples < frame_len:
        return np.zeros(0, dtype=int)
    return np.arange(0, n_samples - frame_len + 1, hop)


def frame_matrix(x: np.ndarray, frame_len: int, hop: int) -> np.ndarray:
    """Stack frames as rows (a copy; safe to modify)."""
    starts = frame_starts(x.size, frame_len, hop)
    return x[starts[:, None] + np.arange(frame_len)[None, :]]


def hann(n: int) -> np.ndarray:
    """Symmetric Hann window."""
    if n == 1:
        return np.ones(1)
    return 0.5 - 0.5 * np.cos(2 * np.pi * np.arange(n) / (n - 1))


def parabolic_peak(left, centre, right):
    """Offset in (-0.5, 0.5) and height of the parabola through three samples."""
    denom = left - 2.0 * centre + right
    with np.errstate(divide="ignore", invalid="ignore"):
        offset = np.where(denom < 0, 0.5 * (left - right) / denom, 0.0)
    offset = np.clip(offset, -0.5, 0.5)
    height = centre - 0.25 * (left - right) * offset
    return offset, height
