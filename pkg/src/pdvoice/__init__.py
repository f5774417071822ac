"""Voice-based Parkinson's disease screening: acoustic features, selection, learners, evaluation and attributions."""

__version__ = "0.1.0"
