"""Mel-frequency cepstral coefficients with regression deltas."""

from __future__ import annotations

from functools import lru_cache

import numpy as np
from scipy.fft import dct

from ..audio import AudioSegment
from .framing import HOP_S, frame_matrix, hann

N_MFCC = 13
N_FILTERS = 26
LOG_FLOOR = 1e-10
DELTA_WIDTH = 2


def hz_to_mel(f):
    return 2595.0 * np.log10(1.0 + np.asarray(f) / 700.0)


def mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m) / 2595.0) - 1.0)


@lru_cache(maxsize=32)
def mel_filterbank(sample_rate: int, nfft: int, n_filters: int = N_FILTERS) -> np.ndarray:
    """Triangular filters equally spaced on the mel scale over 0..rate/2.

    Cached per (rate, nfft); the returned array is read-only so concurrent
    callers can share it.
    """
    edges = mel_to_hz(np.linspace(0.0, hz_to_mel(sample_rate / 2.0), n_filters + 2))
    freqs = np.arange(nfft // 2 + 1) * sample_rate / nfft
    lo, mid, hi = edges[:-2, None], edges[1:-1, None], edges[2:, None]
    up = (freqs[None, :] - lo) / (mid - lo)
    down = (hi - freqs[None, :]) / (hi - mid)
    bank = np.maximum(0.0, np.minimum(up, down))
    bank.setflags(write=False)
    return bank


def deltas(c: np.ndarray, width: int = DELTA_WIDTH) -> np.ndarray:
    """Regression deltas along axis 0 with edge frames replicated."""
    if c.shape[0] == 0:
        return c.copy()
    padded = np.concatenate([np.repeat(c[:1], width, axis=0), c, np.repeat(c[-1:], width, axis=0)])
    t = c.shape[0]
    num = sum(n * (padded[width + n : width + n + t] - padded[width - n : width - n + t]) for n in range(1, width + 1))
    return num / (2.0 * sum(n * n for n in range(1, width + 1)))


def mfcc_frames(seg: AudioSegment, window_s: float = 0.025) -> np.ndarray:
    """Per-frame c0..c12, shape (n_frames, 13)."""
    sr = seg.sample_rate
    n = min(int(round(window_s * sr)), seg.samples.size)
    hop = max(int(round(HOP_S * sr)), 1)
    nfft = max(512, 1 << int(np.ceil(np.log2(n))))
    frames = frame_matrix(seg.samples, n, hop) * hann(n)
    power = np.abs(np.fft.rfft(frames, nfft, axis=1)) ** 2
    energies = power @ mel_filterbank(sr, nfft).T
    logs = np.log(np.maximum(energies, LOG_FLOOR))
    return dct(logs, type=2, norm="ortho", axis=1)[:, :N_MFCC]


def mfcc_features(seg: AudioSegment) -> np.ndarray:
    """39 aggregates: mean c0..c12, mean |delta|, mean |delta-delta|."""
    c = mfcc_frames(seg)
    d = deltas(c)
    dd = deltas(d)
    return np.concatenate([c.mean(axis=0), np.abs(d).mean(axis=0), np.abs(dd).mean(axis=0)])
