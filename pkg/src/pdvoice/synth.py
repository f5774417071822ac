"""Synthetic voice generators.

Used by the test-suite oracles and by ``pdvoice synth`` to build a small demo
corpus. Signals are built from Gaussian glottal pulses placed at known
(fractional) instants, optionally shaped by two-pole formant resonators, so
ground-truth periods, amplitudes and resonances are known exactly.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np
from scipy.signal import lfilter

from .audio import AudioSegment, write_wav

VOWELS = {
    "a": (730.0, 1090.0, 2440.0, 3400.0),
    "i": (270.0, 2290.0, 3010.0, 3700.0),
    "u": (300.0, 870.0, 2240.0, 3300.0),
    "e": (530.0, 1840.0, 2480.0, 3500.0),
    "o": (570.0, 840.0, 2410.0, 3300.0),
}


def pulse_signal(pulse_times, amplitudes, sample_rate, duration, width=3e-4):
    """Sum of Gaussian pulses of std ``width`` seconds centred on ``pulse_times``."""
    n = int(round(duration * sample_rate))
    x = np.zeros(n)
    half = int(np.ceil(6 * width * sample_rate))
    for t, a in zip(pulse_times, amplitudes):
        c = t * sample_rate
        lo, hi = max(int(c) - half, 0), min(int(c) + half + 2, n)
        if lo >= hi:
            continue
        k = np.arange(lo, hi)
        x[lo:hi] += a * np.exp(-0.5 * ((k - c) / (width * sample_rate)) ** 2)
    return x


def periodic_pulses(periods, start=0.01):
    """Pulse instants from a period sequence."""
    return start + np.concatenate([[0.0], np.cumsum(periods)])


def alternating_periods(mean_period, perturbation, count):
    """Periods alternating ``mean_period * (1 +/- perturbation/2)``; jitter (local) equals ``perturbation``."""
    signs = np.where(np.arange(count) % 2 == 0, -1.0, 1.0)
    return mean_period * (1.0 + signs * perturbation / 2.0)


def resonate(x, sample_rate, formants, bandwidths=None):
    """Cascade of unity-DC-gain two-pole resonators."""
    if bandwidths is None:
        bandwidths = [60.0 + 0.05 * f for f in formants]
    y = np.asarray(x, dtype=np.float64)
    for f, bw in zip(formants, bandwidths):
        r = np.exp(-np.pi * bw / sample_rate)
        theta = 2 * np.pi * f / sample_rate
        a = [1.0, -2 * r * np.cos(theta), r * r]
        y = lfilter([sum(a)], a, y)
    return y


def vowel(
    f0=100.0,
    formants=(700.0, 1200.0),
    duration=1.0,
    sample_rate=16000,
    jitter=0.0,
    shimmer=0.0,
    noise=0.0,
    seed=0,
    bandwidths=None,
):
    """A sustained vowel: jittered pulse source through formant resonators, peak-normalised to 0.5.

    The source is a train of narrow (50 us) pulses with a one-pole -6 dB/oct
    tilt, broadband enough for LPC to see the resonances rather than single
    harmonics.
    """
    rng = np.random.default_rng(seed)
    count = int(duration * f0) + 2
    periods = (1.0 / f0) * (1.0 + jitter * rng.standard_normal(count))
    times = periodic_pulses(periods, start=0.5 / f0)
    amps = 1.0 + shimmer * rng.standard_normal(times.size)
    src = pulse_signal(times, np.abs(amps), sample_rate, duration, width=5e-5)
    src = lfilter([1.0], [1.0, -0.95], src - src.mean())
    if bandwidths is None:
        bandwidths = [80.0 + 0.02 * f for f in formants]
    y = resonate(src, sample_rate, formants, bandwidths)
    y = 0.5 * y / np.max(np.abs(y))
    if noise:
        y = y + noise * rng.standard_normal(y.size)
    return np.clip(y, -1, 1)


def speech_like(duration=20.0, sample_rate=16000, pd=False, seed=0):
    """Syllable-like voiced bursts separated by pauses.

    The first 0.6 s hold breath noise only (a usable noise profile).
    ``pd=True`` raises jitter/shimmer, flattens pitch movement, lowers level
    and breathiness-to-voice ratio, loosely following hypokinetic dysarthria.
    """
    rng = np.random.default_rng(seed)
    n = int(round(duration * sample_rate))
    out = np.zeros(n)
    base_f0 = rng.uniform(100, 220)
    jitter = rng.uniform(0.008, 0.02) if pd else rng.uniform(0.002, 0.006)
    shimmer = rng.uniform(0.08, 0.16) if pd else rng.uniform(0.02, 0.06)
    excursion = 0.05 if pd else 0.2
    level = rng.uniform(0.15, 0.3) if pd else rng.uniform(0.3, 0.5)
    breath = 0.02 if pd else 0.006
    t = 0.6
    names = sorted(VOWELS)
    while t < duration - 0.5:
        syl = rng.uniform(0.15, 0.45)
        f0 = base_f0 * (1 + excursion * rng.uniform(-1, 1))
        formants = np.array(VOWELS[names[rng.integers(len(names))]]) * rng.uniform(0.92, 1.08)
        v = vowel(f0, formants, syl, sample_rate, jitter, shimmer, seed=int(rng.integers(1 << 31)))
        env = np.hanning(v.size) ** 0.5
        s = int(t * sample_rate)
        out[s : s + v.size] += level * 2 * v[: n - s] * env[: n - s]
        t += syl + rng.uniform(0.05, 0.35)
    out += breath * rng.standard_normal(n)
    return np.clip(out, -1, 1)


def make_corpus(directory, n_files=20, duration=20.0, sample_rate=16000, seed=0):
    """Write ``n_files`` WAVs (half PD, half HC) plus ``manifest.csv``; returns the manifest path."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    rows = []
    for i in range(n_files):
        pd = i % 2 == 0
        label = "PD" if pd else "HC"
        speaker = f"spk{i:02d}"
        x = speech_like(duration, sample_rate, pd=pd, seed=seed * 1000 + i)
        name = f"{speaker}_{label}.wav"
        write_wav(AudioSegment(x, sample_rate), directory / name)
        rows.append((name, speaker, label))
    manifest = directory / "manifest.csv"
    with open(manifest, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["file", "speaker_id", "label"])
        w.writerows(rows)
    return manifest
