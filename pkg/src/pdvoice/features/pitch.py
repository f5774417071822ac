"""Fundamental frequency tracking by normalized autocorrelation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..audio import AudioSegment
from .framing import HOP_S, frame_matrix, frame_starts, parabolic_peak

VOICING_THRESHOLD = 0.45
OCTAVE_COST = 0.01
SILENCE_THRESHOLD = 0.03


@dataclass(frozen=True)
class PitchContour:
    frame_times: np.ndarray
    f0: np.ndarray
    voicing_strength: np.ndarray
    floor: float = 75.0
    ceiling: float = 500.0
    window_s: float = 0.040

    @property
    def voiced(self) -> np.ndarray:
        return self.f0 > 0

    def voiced_runs(self) -> list[tuple[int, int]]:
        """Inclusive (first, last) frame indices of each run of voiced frames."""
        v = np.concatenate([[False], self.voiced, [False]]).astype(int)
        edges = np.diff(v)
        starts = np.flatnonzero(edges == 1)
        stops = np.flatnonzero(edges == -1) - 1
        return list(zip(starts.tolist(), stops.tolist()))


def estimate_pitch(
    seg: AudioSegment,
    floor: float = 75.0,
    ceiling: float = 500.0,
    window_s: float = 0.040,
    voicing_threshold: float = VOICING_THRESHOLD,
) -> PitchContour:
    """Track f0 with a 40 ms / 10 ms normalized-autocorrelation analysis.

    For each frame the normalized cross-correlation between the frame's head
    and its lag-shifted tail is computed for every lag in
    ``[1/ceiling, 1/floor]``. Among local maxima (refined by parabolic
    interpolation) the lag with the best strength ``r - 0.01 * log2(floor * lag)``
    wins, which breaks the near-ties between a period and its multiples in
    favour of the shortest one. A frame is voiced when its peak ``r`` reaches
    ``voicing_threshold`` and its peak amplitude is above 3% of the segment peak.

    Raises ``ValueError`` when the segment is shorter than two periods of
    ``floor``.
    """
    if not 0 < floor < ceiling:
        raise ValueError("need 0 < floor < ceiling")
    sr = seg.sample_rate
    x = seg.samples
    if x.size < 2.0 / floor * sr:
        raise ValueError(
            f"segment of {seg.duration:.4f} s is shorter than two periods at {floor} Hz"
        )
    n = min(int(round(window_s * sr)), x.size)
    hop = max(int(round(HOP_S * sr)), 1)
    min_lag = max(int(np.floor(sr / ceiling)), 2)
    max_lag = min(int(np.ceil(sr / floor)), n - 2)

    frames = frame_matrix(x, n, hop)
    starts = frame_starts(x.size, n, hop)
    times = (starts + n / 2.0) / sr
    frames = frames - frames.mean(axis=1, keepdims=True)

    nfft = 1 << int(np.ceil(np.log2(2 * n)))
    spec = np.fft.rfft(frames, nfft, axis=1)
    ac = np.fft.irfft(spec * spec.conj(), nfft, axis=1)[:, : max_lag + 2]
    csum = np.concatenate([np.zeros((frames.shape[0], 1)), np.cumsum(frames**2, axis=1)], axis=1)
    lags = np.arange(max_lag + 2)
    head = csum[:, n - lags]
    tail = csum[:, n : n + 1] - csum[:, lags]
    with np.errstate(divide="ignore", invalid="ignore"):
        r = np.where(head * tail > 0, ac / np.sqrt(head * tail), 0.0)

    lo, hi = min_lag, max_lag
    left, centre, right = r[:, lo - 1 : hi], r[:, lo : hi + 1], r[:, lo + 1 : hi + 2]
    is_peak = (centre > left) & (centre >= right) & (centre > 0)
    offset, height = parabolic_peak(left, centre, right)
    height = np.minimum(height, 1.0)
    lag_s = (np.arange(lo, hi + 1)[None, :] + offset) / sr
    strength = np.where(is_peak, height - OCTAVE_COST * np.log2(floor * lag_s), -np.inf)
    best = np.argmax(strength, axis=1)
    rows = np.arange(frames.shape[0])
    has_peak = np.isfinite(strength[rows, best])
    best_r = np.where(has_peak, height[rows, best], 0.0)
    best_lag = lag_s[rows, best]

    global_peak = np.max(np.abs(x))
    frame_peak = np.max(np.abs(frames), axis=1)
    loud = frame_peak >= SILENCE_THRESHOLD * global_peak if global_peak > 0 else np.zeros_like(has_peak)
    voiced = has_peak & loud & (best_r >= voicing_threshold)
    f0 = np.where(voiced, 1.0 / best_lag, 0.0)
    f0 = np.where(voiced, np.clip(f0, floor, ceiling), 0.0)
    strength_out = np.clip(np.where(loud, best_r, 0.0), 0.0, 1.0)
    return PitchContour(times, f0, strength_out, floor, ceiling, window_s)


def pitch_features(pc: PitchContour) -> tuple[tuple[float, float], list[str]]:
    """(min, max) voiced f0 in Hz, with a flag when nothing is voiced."""
    voiced = pc.f0[pc.voiced]
    if voiced.size == 0:
        return (0.0, 0.0), ["pitch:unvoiced"]
    return (float(voiced.min()), float(voiced.max())), []
