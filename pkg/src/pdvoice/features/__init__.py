from .energy import harmonicity_features, hnr_db, intensity_features
from .extract import CATEGORIES, FEATURE_NAMES, AcousticFeatureExtractor, FeatureVector, extract_all
from .formants import burg, formant_features
from .mfcc import mfcc_features
from .perturbation import jitter_features, shimmer_features
from .pitch import PitchContour, estimate_pitch, pitch_features
from .pulses import PulseTrain, mark_pulses, pulse_features

__all__ = [
    "AcousticFeatureExtractor",
    "CATEGORIES",
    "FEATURE_NAMES",
    "FeatureVector",
    "PitchContour",
    "PulseTrain",
    "burg",
    "estimate_pitch",
    "extract_all",
    "formant_features",
    "harmonicity_features",
    "hnr_db",
    "intensity_features",
    "jitter_features",
    "mark_pulses",
    "mfcc_features",
    "pitch_features",
    "pulse_features",
    "shimmer_features",
]
