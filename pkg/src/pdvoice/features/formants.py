"""Formant frequencies from Burg LPC root solving."""

from __future__ import annotations

import numpy as np

from ..audio import AudioSegment, resample
from .framing import HOP_S, frame_matrix, frame_starts, hann
from .pitch import PitchContour, estimate_pitch

FORMANT_RATE = 10000
LPC_ORDER = 12
MAX_BANDWIDTH = 400.0
MIN_FREQUENCY = 50.0


def burg(frames: np.ndarray, order: int) -> np.ndarray:
    """Burg LPC coefficients for each row of ``frames``.

    Returns an array of shape (n_frames, order + 1) holding the prediction
    polynomial ``[1, a1, ..., a_order]`` per row.
    """
    frames = np.atleast_2d(np.asarray(frames, dtype=np.float64))
    m = frames.shape[0]
    a = np.zeros((m, order + 1))
    a[:, 0] = 1.0
    f = frames[:, 1:]
    b = frames[:, :-1]
    for k in range(order):
        num = -2.0 * np.sum(f * b, axis=1)
        den = np.sum(f * f, axis=1) + np.sum(b * b, axis=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            refl = np.where(den > 0, num / den, 0.0)
        a_prev = a.copy()
        for j in range(1, k + 2):
            a[:, j] = a_prev[:, j] + refl * a_prev[:, k + 1 - j]
        f, b = (f + refl[:, None] * b)[:, 1:], (b + refl[:, None] * f)[:, :-1]
    return a


def _roots(coeffs: np.ndarray) -> np.ndarray:
    """Polynomial roots per row via batched companion-matrix eigenvalues."""
    m, p1 = coeffs.shape
    p = p1 - 1
    comp = np.zeros((m, p, p))
    comp[:, 0, :] = -coeffs[:, 1:]
    comp[:, np.arange(1, p), np.arange(p - 1)] = 1.0
    return np.linalg.eigvals(comp)


def formant_tracks(seg: AudioSegment, order: int = LPC_ORDER, window_s: float = 0.025):
    """Per-frame candidate formants: (frame times, list of ascending Hz arrays)."""
    s = resample(seg, FORMANT_RATE)
    sr = s.sample_rate
    alpha = np.exp(-2 * np.pi * 50.0 / sr)
    x = np.append(s.samples[0], s.samples[1:] - alpha * s.samples[:-1])
    n = min(int(round(window_s * sr)), x.size)
    hop = max(int(round(HOP_S * sr)), 1)
    frames = frame_matrix(x, n, hop) * hann(n)
    times = (frame_starts(x.size, n, hop) + n / 2.0) / sr
    energy = np.sum(frames**2, axis=1)
    coeffs = burg(frames, order)
    roots = _roots(coeffs)
    tracks = []
    for e, z in zip(energy, roots):
        if e <= 0:
            tracks.append(np.zeros(0))
            continue
        z = z[np.imag(z) > 0]
        freq = np.angle(z) * sr / (2 * np.pi)
        bw = -np.log(np.maximum(np.abs(z), 1e-12)) * sr / np.pi
        keep = (bw < MAX_BANDWIDTH) & (freq > MIN_FREQUENCY) & (freq < sr / 2 - MIN_FREQUENCY)
        tracks.append(np.sort(freq[keep]))
    return times, tracks


def formant_features(
    seg: AudioSegment, pc: PitchContour | None = None
) -> tuple[tuple[float, float, float, float], list[str]]:
    """Median f1..f4 (Hz) over voiced frames.

    Each frame contributes its lowest candidates with bandwidth under 400 Hz.
    A formant nobody found is reported as 0 with a flag; non-zero outputs are
    made non-decreasing so the ordering holds even when the per-index medians
    come from different frame subsets.
    """
    if pc is None:
        pc = estimate_pitch(seg)
    times, tracks = formant_tracks(seg)
    if not np.any(pc.voiced):
        return (0.0, 0.0, 0.0, 0.0), ["formants:unvoiced"]
    nearest = np.clip(np.searchsorted(pc.frame_times, times), 0, pc.frame_times.size - 1)
    prev = np.clip(nearest - 1, 0, pc.frame_times.size - 1)
    closer = np.where(
        np.abs(pc.frame_times[prev] - times) <= np.abs(pc.frame_times[nearest] - times), prev, nearest
    )
    voiced_frames = [t for t, v in zip(tracks, pc.voiced[closer]) if v]
    values, flags = [], []
    for k in range(4):
        cand = [t[k] for t in voiced_frames if t.size > k]
        if cand:
            values.append(float(np.median(cand)))
        else:
            values.append(0.0)
            flags.append(f"formants:f{k + 1} missing")
    nz = [v for v in values if v > 0]
    nz = list(np.maximum.accumulate(nz)) if nz else []
    values = [float(v) for v in nz] + [0.0] * (4 - len(nz))
    return tuple(values), flags
