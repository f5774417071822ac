"""The 71-dimensional acoustic feature vector."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from ..audio import AudioSegment
from .energy import harmonicity_features, intensity_features
from .formants import formant_features
from .mfcc import mfcc_features
from .perturbation import jitter_features, shimmer_features
from .pitch import estimate_pitch, pitch_features
from .pulses import mark_pulses, pulse_features

FEATURE_NAMES: tuple[str, ...] = (
    *(f"mfcc_{i}" for i in range(13)),
    *(f"delta_mfcc_{i}" for i in range(13)),
    *(f"delta2_mfcc_{i}" for i in range(13)),
    "jitter_local",
    "jitter_local_abs",
    "jitter_rap",
    "jitter_ppq5",
    "jitter_ddp",
    "shimmer_local",
    "shimmer_local_db",
    "shimmer_apq3",
    "shimmer_apq5",
    "shimmer_apq11",
    "shimmer_dda",
    "autocorr_harmonicity",
    "mean_autocorr_harmonicity",
    "hnr",
    "nhr",
    "intensity_min",
    "intensity_max",
    "intensity_mean",
    "log_energy_mean",
    "log_energy_delta_std",
    "log_energy_delta2_std",
    "log_energy_delta3_std",
    "f1",
    "f2",
    "f3",
    "f4",
    "pitch_min",
    "pitch_max",
    "num_pulses",
    "num_periods",
    "mean_period",
    "std_period",
)

# feature-name prefix -> category, used for per-category selection counts
CATEGORIES: dict[str, tuple[str, ...]] = {
    "Pulse": ("num_pulses", "num_periods", "mean_period", "std_period"),
    "MFCC": FEATURE_NAMES[:39],
    "Jitter": FEATURE_NAMES[39:44],
    "Shimmer": FEATURE_NAMES[44:50],
    "Harmonicity": FEATURE_NAMES[50:54],
    "Intensity": FEATURE_NAMES[54:61],
    "Formants": ("f1", "f2", "f3", "f4"),
    "Pitch": ("pitch_min", "pitch_max"),
}

MIN_DURATION_S = 1.0


@dataclass(frozen=True)
class FeatureVector:
    values: np.ndarray
    speaker_id: str = ""
    label: str = "unknown"
    segment_index: int = 0
    flags: tuple[str, ...] = field(default_factory=tuple)
    names: tuple[str, ...] = FEATURE_NAMES

    def as_dict(self) -> dict[str, float]:
        return dict(zip(self.names, self.values.tolist()))


def extract_all(seg: AudioSegment, floor: float = 75.0, ceiling: float = 500.0) -> FeatureVector:
    """Compute all 71 features for one segment.

    Degenerate sub-results (unvoiced audio, too few cycles) become zeros and
    are listed in ``FeatureVector.flags`` instead of raising.
    """
    if seg.duration < MIN_DURATION_S:
        raise ValueError(f"segment of {seg.duration:.3f} s is shorter than {MIN_DURATION_S} s")
    flags: list[str] = []
    pc = estimate_pitch(seg, floor, ceiling)
    pt = mark_pulses(seg, pc)
    jit, f = jitter_features(pt)
    flags += f
    shim, f = shimmer_features(pt)
    flags += f
    harm, f = harmonicity_features(pc)
    flags += f
    formants, f = formant_features(seg, pc)
    flags += f
    pitch, f = pitch_features(pc)
    flags += f
    values = np.concatenate(
        [
            mfcc_features(seg),
            jit,
            shim,
            harm,
            intensity_features(seg),
            formants,
            pitch,
            pulse_features(pt),
        ]
    ).astype(np.float64)
    if not np.all(np.isfinite(values)):
        bad = [n for n, v in zip(FEATURE_NAMES, values) if not np.isfinite(v)]
        flags.append("nonfinite:" + ",".join(bad))
        values = np.nan_to_num(values, nan=0.0, posinf=0.0, neginf=0.0)
    return FeatureVector(values, seg.speaker_id, seg.label, seg.segment_index, tuple(flags))


class AcousticFeatureExtractor(BaseEstimator, TransformerMixin):
    """Stateless transformer mapping a list of :class:`AudioSegment` to an (n, 71) matrix."""

    def __init__(self, pitch_floor=75.0, pitch_ceiling=500.0):
        self.pitch_floor = pitch_floor
        self.pitch_ceiling = pitch_ceiling

    def fit(self, X, y=None):
        return self

    def transform(self, X):
        return np.vstack([extract_all(s, self.pitch_floor, self.pitch_ceiling).values for s in X])

    def get_feature_names_out(self, input_features=None):
        return np.asarray(FEATURE_NAMES, dtype=object)
