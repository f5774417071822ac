"""Jitter and shimmer: cycle-to-cycle perturbation of periods and amplitudes.

All measures pool their difference terms over voiced runs (never across a
run boundary) and normalise by the mean over all periods or amplitudes.
"""

from __future__ import annotations

import numpy as np

from .pulses import PulseTrain

MIN_PERIODS = 6
MIN_AMPLITUDES = 12


def _abs_diff(groups):
    return np.concatenate([np.abs(np.diff(g)) for g in groups if g.size >= 2] or [np.zeros(0)])


def _centred_dev(groups, width):
    """|v_i - mean(v_{i-h..i+h})| for every i with a full window inside its run.

    Summed as neighbour-minus-centre differences so a constant run gives exactly 0.
    """
    h = width // 2
    out = []
    for g in groups:
        if g.size < width:
            continue
        centre = g[h : g.size - h]
        acc = np.zeros(centre.size)
        for k in range(width):
            if k != h:
                acc += g[k : g.size - width + 1 + k] - centre
        out.append(np.abs(acc) / width)
    return np.concatenate(out or [np.zeros(0)])


def _second_diff(groups):
    return np.concatenate(
        [np.abs(g[2:] - 2.0 * g[1:-1] + g[:-2]) for g in groups if g.size >= 3] or [np.zeros(0)]
    )


def _mean(v):
    return float(v.mean()) if v.size else 0.0


def jitter_features(pt: PulseTrain) -> tuple[tuple[float, ...], list[str]]:
    """(local, local_abs [s], rap, ppq5, ddp) and quality flags."""
    if pt.periods.size < MIN_PERIODS:
        return (0.0,) * 5, ["jitter:insufficient cycles"]
    groups = pt.period_groups()
    mean_t = float(pt.periods.mean())
    local_abs = _mean(_abs_diff(groups))
    # rap and ddp share the index set (interior periods), so ddp == 3 * rap
    rap = _mean(_centred_dev(groups, 3)) / mean_t
    ppq5 = _mean(_centred_dev(groups, 5)) / mean_t
    ddp = _mean(_second_diff(groups)) / mean_t
    return (local_abs / mean_t, local_abs, rap, ppq5, ddp), []


def shimmer_features(pt: PulseTrain) -> tuple[tuple[float, ...], list[str]]:
    """(local, local_db [dB], apq3, apq5, apq11, dda) and quality flags."""
    if pt.amplitudes.size < MIN_AMPLITUDES:
        return (0.0,) * 6, ["shimmer:insufficient cycles"]
    groups = pt.amplitude_groups()
    mean_a = float(pt.amplitudes.mean())
    if mean_a <= 0:
        return (0.0,) * 6, ["shimmer:zero amplitude"]
    flags = []
    ratios = []
    for g in groups:
        a0, a1 = g[:-1], g[1:]
        ok = (a0 > 0) & (a1 > 0)
        if not np.all(ok):
            flags = ["shimmer:zero amplitude pair skipped"]
        ratios.append(np.abs(20.0 * np.log10(a1[ok] / a0[ok])))
    local = _mean(_abs_diff(groups)) / mean_a
    local_db = _mean(np.concatenate(ratios or [np.zeros(0)]))
    apq3 = _mean(_centred_dev(groups, 3)) / mean_a
    apq5 = _mean(_centred_dev(groups, 5)) / mean_a
    apq11 = _mean(_centred_dev(groups, 11)) / mean_a
    dda = _mean(_second_diff(groups)) / mean_a
    return (local, local_db, apq3, apq5, apq11, dda), flags
