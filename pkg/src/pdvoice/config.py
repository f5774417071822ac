"""Pipeline configuration: JSON file plus command-line overrides."""

from __future__ import annotations

import copy
import hashlib
import json
from pathlib import Path

DEFAULTS = {
    "audio_dir": None,
    "manifest": None,  # defaults to <audio_dir>/manifest.csv
    "feature_csv": None,
    "group_column": "speaker_id",
    "label_column": "label",
    "out": "pdvoice_out",
    "seed": 0,
    "folds": 10,
    "jobs": 1,
    "audio": {
        "noise_window": [0.0, 0.5],
        "noise_reduction": True,
        "over_subtraction": 1.5,
        "floor": 0.05,
        "segment_seconds": 10.0,
        "sample_rate": None,
        "pitch_floor": 75.0,
        "pitch_ceiling": 500.0,
    },
    "selection": {
        "method": "rfecv",
        "learner": {"algorithm": "gboost", "params": {}},
        "alpha": 0.05,
        "step": 1,
        "k": 10,
        "max_size": None,
        "lambda_rule": "min",
    },
    "learner": {"algorithm": "svm", "params": {}},
    "tuning": {"enabled": True, "n_iter": 60, "nested": False, "space": None},
    "explain": {"max_rows": 50, "waterfall_rows": [0], "n_samples": 2048, "background": 100, "top_n": 10},
}

# keys that do not influence any result
_VOLATILE = ("out", "jobs")


class ConfigError(ValueError):
    """Invalid or inconsistent configuration."""


def _merge(base: dict, over: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in over.items():
        if k not in base:
            raise ConfigError(f"unknown config key {k!r}")
        if isinstance(base[k], dict) and isinstance(v, dict) and k not in ("params", "space"):
            out[k] = _merge(base[k], v) if base[k] else dict(v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def load_config(path=None, overrides: dict | None = None) -> dict:
    """Defaults, then the JSON file, then ``overrides`` (dotted keys allowed, e.g. ``selection.method``)."""
    cfg = copy.deepcopy(DEFAULTS)
    if path is not None:
        try:
            with open(path, encoding="utf-8") as fh:
                cfg = _merge(cfg, json.load(fh))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from None
        except FileNotFoundError:
            raise ConfigError(f"config file {path} not found") from None
    for key, value in (overrides or {}).items():
        if value is None:
            continue
        node = cfg
        *parents, leaf = key.split(".")
        for p in parents:
            node = node[p]
        if leaf not in node:
            raise ConfigError(f"unknown config key {key!r}")
        node[leaf] = value
    validate(cfg)
    return cfg


def validate(cfg: dict) -> None:
    if int(cfg["folds"]) < 2:
        raise ConfigError("folds must be >= 2")
    win = cfg["audio"]["noise_window"]
    if win is not None and (len(win) != 2 or not 0 <= win[0] < win[1]):
        raise ConfigError("noise_window must be [start, end] with 0 <= start < end")
    if cfg["selection"]["method"] not in ("mannwhitney", "lasso", "relieff", "sfs", "rfecv", "none"):
        raise ConfigError(f"unknown selection method {cfg['selection']['method']!r}")


def require_input(cfg: dict) -> str:
    """Return ``"audio"`` or ``"features"``; exactly one input kind must be configured."""
    has_audio, has_csv = cfg["audio_dir"] is not None, cfg["feature_csv"] is not None
    if has_audio == has_csv:
        raise ConfigError("configure exactly one of audio_dir or feature_csv")
    return "audio" if has_audio else "features"


def parse_window(text: str):
    """``"start:end"`` seconds -> [start, end]."""
    try:
        a, b = (float(t) for t in text.split(":"))
    except ValueError:
        raise ConfigError(f"noise window {text!r} must look like start:end") from None
    return [a, b]


def config_hash(cfg: dict) -> str:
    """SHA-256 (first 16 hex digits) of the result-relevant configuration."""
    relevant = {k: v for k, v in cfg.items() if k not in _VOLATILE}
    blob = json.dumps(relevant, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def file_digest(path) -> str:
    h = hashlib.sha256()
    with open(Path(path), "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()
