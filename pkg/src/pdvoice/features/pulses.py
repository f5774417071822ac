"""Glottal pulse marking inside voiced runs."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..audio import AudioSegment
from .framing import parabolic_peak
from .pitch import PitchContour


@dataclass(frozen=True)
class PulseTrain:
    """Pulse instants, per-pulse peak amplitudes and per-run period sequences.

    ``pulse_run[i]`` is the voiced-run index of pulse ``i``; ``period_run[j]``
    the run of period ``j``. Perturbation measures never difference across runs.
    """

    pulse_times: np.ndarray = field(default_factory=lambda: np.zeros(0))
    amplitudes: np.ndarray = field(default_factory=lambda: np.zeros(0))
    periods: np.ndarray = field(default_factory=lambda: np.zeros(0))
    pulse_run: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))
    period_run: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))

    @classmethod
    def from_periods(cls, periods, amplitudes=None, start=0.0) -> "PulseTrain":
        """Single-run train from a period sequence (amplitudes default to 1)."""
        periods = np.asarray(periods, dtype=np.float64)
        times = start + np.concatenate([[0.0], np.cumsum(periods)])
        if amplitudes is None:
            amplitudes = np.ones(times.size)
        amplitudes = np.asarray(amplitudes, dtype=np.float64)
        if amplitudes.size != times.size:
            raise ValueError("need one amplitude per pulse (len(periods) + 1)")
        return cls(
            times,
            amplitudes,
            periods,
            np.zeros(times.size, dtype=int),
            np.zeros(periods.size, dtype=int),
        )

    def period_groups(self) -> list[np.ndarray]:
        return [self.periods[self.period_run == r] for r in np.unique(self.period_run)]

    def amplitude_groups(self) -> list[np.ndarray]:
        return [self.amplitudes[self.pulse_run == r] for r in np.unique(self.pulse_run)]


def _track(y, start, stop, p0, period_at, direction):
    """Follow peaks from index p0 one local period at a time."""
    found = []
    cur = p0
    while True:
        period = period_at(cur)
        if direction > 0:
            lo, hi = cur + int(np.floor(0.8 * period)), cur + int(np.ceil(1.2 * period))
            if hi >= stop:
                hi = stop - 1
            if lo >= stop or lo > hi:
                break
        else:
            lo, hi = cur - int(np.ceil(1.2 * period)), cur - int(np.floor(0.8 * period))
            lo = max(lo, start)
            if hi < start or lo > hi:
                break
        idx = lo + int(np.argmax(y[lo : hi + 1]))
        if y[idx] <= 0:
            break
        found.append(idx)
        cur = idx
    return found


def mark_pulses(seg: AudioSegment, pc: PitchContour) -> PulseTrain:
    """Locate one pulse per glottal cycle inside every voiced run.

    A run spans its voiced frames' analysis windows. Starting from the run's
    strongest peak (polarity chosen by that peak's sign), peaks are tracked
    forwards and backwards within 0.8-1.2 local periods of the previous pulse;
    positions and amplitudes are refined by parabolic interpolation.
    """
    sr = seg.sample_rate
    x = seg.samples
    half = pc.window_s / 2.0
    times, amps, periods, pulse_run, period_run = [], [], [], [], []
    for run, (a, b) in enumerate(pc.voiced_runs()):
        start = max(int(np.floor((pc.frame_times[a] - half) * sr)), 1)
        stop = min(int(np.ceil((pc.frame_times[b] + half) * sr)), x.size - 1)
        if stop - start < 3:
            continue
        seg_x = x[start:stop]
        sign = 1.0 if seg_x[np.argmax(np.abs(seg_x))] >= 0 else -1.0
        y = sign * x
        ft = pc.frame_times[a : b + 1]
        f0 = pc.f0[a : b + 1]

        def period_at(i, ft=ft, f0=f0):
            return sr / np.interp(i / sr, ft, f0)

        p0 = start + int(np.argmax(y[start:stop]))
        idx = sorted(
            _track(y, start, stop, p0, period_at, -1)
            + [p0]
            + _track(y, start, stop, p0, period_at, +1)
        )
        idx = np.asarray(idx)
        offset, height = parabolic_peak(y[idx - 1], y[idx], y[idx + 1])
        times.append((idx + offset) / sr)
        amps.append(np.abs(height))
        periods.append((np.diff(idx) + np.diff(offset)) / sr)
        pulse_run.append(np.full(idx.size, run))
        period_run.append(np.full(idx.size - 1, run))
    if not times:
        return PulseTrain()
    return PulseTrain(
        np.concatenate(times),
        np.concatenate(amps),
        np.concatenate(periods),
        np.concatenate(pulse_run),
        np.concatenate(period_run),
    )


def pulse_features(pt: PulseTrain) -> tuple[int, int, float, float]:
    """(num_pulses, num_periods, mean period s, std period s); zeros when empty."""
    if pt.periods.size == 0:
        return int(pt.pulse_times.size), 0, 0.0, 0.0
    return (
        int(pt.pulse_times.size),
        int(pt.periods.size),
        float(pt.periods.mean()),
        float(pt.periods.std()),
    )
