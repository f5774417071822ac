"""Harmonicity (from voicing strength) and intensity / log-energy contours."""

from __future__ import annotations

import numpy as np

from ..audio import AudioSegment
from .framing import HOP_S, frame_matrix, hann
from .pitch import PitchContour

R_CLAMP = 1e-6
REFERENCE_POWER = 4e-10  # (20 uPa)^2
SILENT_DB = -100.0


def hnr_db(r):
    r = np.clip(r, R_CLAMP, 1.0 - R_CLAMP)
    return 10.0 * np.log10(r / (1.0 - r))


def harmonicity_features(pc: PitchContour) -> tuple[tuple[float, ...], list[str]]:
    """(autocorr, mean_autocorr, hnr [dB], nhr) over voiced frames.

    ``autocorr`` is the mean voiced-frame correlation peak and
    ``mean_autocorr`` its standard deviation across frames.
    """
    r = pc.voicing_strength[pc.voiced]
    if r.size == 0:
        return (0.0,) * 4, ["harmonicity:unvoiced"]
    rc = np.clip(r, R_CLAMP, 1.0 - R_CLAMP)
    return (
        float(r.mean()),
        float(r.std()),
        float(hnr_db(rc).mean()),
        float(((1.0 - rc) / rc).mean()),
    ), []


def intensity_contour(seg: AudioSegment, window_s: float = 0.040):
    """Per-frame intensity (dB re 4e-10) and natural-log energy, Hann weighted."""
    sr = seg.sample_rate
    n = min(int(round(window_s * sr)), seg.samples.size)
    hop = max(int(round(HOP_S * sr)), 1)
    frames = frame_matrix(seg.samples, n, hop)
    w = hann(n) if n > 2 else np.ones(n)
    power = (frames**2) @ w / w.sum()
    with np.errstate(divide="ignore"):
        db = 10.0 * np.log10(power / REFERENCE_POWER)
    db = np.maximum(np.nan_to_num(db, neginf=SILENT_DB), SILENT_DB)
    log_energy = np.log((frames**2) @ w + 1e-12)
    return db, log_energy


def intensity_features(seg: AudioSegment) -> tuple[float, ...]:
    """(min, max, mean dB, mean log-energy, std of 1st/2nd/3rd differenced log-energy)."""
    db, log_energy = intensity_contour(seg)
    deltas = []
    d = log_energy
    for _ in range(3):
        d = np.diff(d)
        deltas.append(float(d.std()) if d.size else 0.0)
    return (float(db.min()), float(db.max()), float(db.mean()), float(log_energy.mean()), *deltas)
