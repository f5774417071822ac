"""Command-line entry point: ``pdvoice <command> [options]``.

Exit codes: 0 success, 1 runtime failure, 2 usage, configuration or schema error.
"""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import json
import logging
import platform
import sys
from pathlib import Path

import numpy as np
from joblib import Parallel, delayed

from . import __version__
from .audio import WavReadError, estimate_noise_profile, read_wav, reduce_noise, resample, segment
from .config import ConfigError, config_hash, file_digest, load_config, parse_window, require_input
from .dataset import SchemaError, Standardizer, build_table, group_stats, read_csv, write_csv
from .evaluation import EvalReport, SearchSpace, cross_validate, group_kfold, nested_search, random_search
from .explain import (
    kernel_shap,
    select_background,
    summary_stats,
    summary_svg,
    waterfall_export,
    waterfall_svg,
    write_waterfall_csv,
)
from .features import FEATURE_NAMES, extract_all
from .learn import LearnerSpec, dump_model, make_learner
from .select import SelectionResult, lasso_select, mw_select, relieff_select, rfecv, sfs

log = logging.getLogger("pdvoice")

FEATURES_CSV = "features.csv"
FLAGS_CSV = "features_flags.csv"
STATS_CSV = "stats.csv"
SELECTION_TXT = "selection.txt"
TUNING_CSV = "tuning.csv"
TUNED_JSON = "tuned_learner.json"
EVAL_CSV = "eval.csv"
EVAL_TXT = "eval_summary.txt"
MODEL_JSON = "model.json"
SHAP_SUMMARY_CSV = "shap_summary.csv"
SHAP_PAIRS_CSV = "shap_pairs.csv"
RUN_META = "run_meta.json"


class UsageError(ValueError):
    """Bad input that the user must fix (exit code 2)."""


class StageError(RuntimeError):
    def __init__(self, stage, exc):
        super().__init__(f"stage {stage}: {exc}")
        self.stage = stage
        self.cause = exc


# -- helpers ------------------------------------------------------------------------


def _out(cfg) -> Path:
    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    return out


def _hash_extra(cfg) -> dict:
    return {"config_hash": config_hash(cfg)}


def _features_path(cfg) -> Path:
    if cfg["feature_csv"] is not None:
        path = Path(cfg["feature_csv"])
    else:
        path = Path(cfg["out"]) / FEATURES_CSV
    if not path.exists():
        raise UsageError(f"feature table {path} not found (run 'extract' or pass --features)")
    return path


def _load_table(cfg):
    path = _features_path(cfg)
    if cfg["feature_csv"] is not None:
        return read_csv(path, cfg["group_column"], cfg["label_column"])
    return read_csv(path)


def _plan(cfg, table):
    return group_kfold(table.groups, table.labels, int(cfg["folds"]), int(cfg["seed"]))


def _selection_mask(cfg, table):
    path = Path(cfg["out"]) / SELECTION_TXT
    if not path.exists():
        return None
    sel = SelectionResult.from_text(path.read_text())
    missing = set(sel.selected) - set(table.column_names)
    if missing:
        raise SchemaError(f"{path} names columns absent from the feature table: {sorted(missing)[:5]}")
    keep = set(sel.selected)
    return np.array([c in keep for c in table.column_names])


def _learner(cfg) -> LearnerSpec:
    """Tuned spec when tuning ran and is enabled, else the configured learner."""
    tuned = Path(cfg["out"]) / TUNED_JSON
    if cfg["tuning"]["enabled"] and tuned.exists():
        doc = json.loads(tuned.read_text())
        if doc.get("config_hash") == config_hash(cfg):
            return LearnerSpec.from_dict(doc["learner"])
    lc = cfg["learner"]
    return LearnerSpec(lc["algorithm"], lc.get("params", {}), int(cfg["seed"]))


def _write_meta(cfg, command, extra=None) -> None:
    import scipy
    import sklearn

    meta = {
        "command": command,
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(),
        "seed": cfg["seed"],
        "config_hash": config_hash(cfg),
        "versions": {
            "pdvoice": __version__,
            "python": platform.python_version(),
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "scikit-learn": sklearn.__version__,
        },
        "config": cfg,
        **(extra or {}),
    }
    (_out(cfg) / RUN_META).write_text(json.dumps(meta, indent=1, sort_keys=True, default=str) + "\n")


# -- extraction ---------------------------------------------------------------------


def read_manifest(path):
    """``file,speaker_id,label`` rows."""
    path = Path(path)
    if not path.exists():
        raise UsageError(f"manifest {path} not found")
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        need = {"file", "speaker_id", "label"}
        if reader.fieldnames is None or not need <= set(reader.fieldnames):
            raise SchemaError(f"{path}: manifest needs columns file, speaker_id, label")
        rows = [(r["file"], r["speaker_id"], r["label"]) for r in reader]
    for _, _, label in rows:
        if label not in ("PD", "HC"):
            raise SchemaError(f"{path}: label {label!r} must be PD or HC")
    return rows


def _process_file(path, speaker, label, acfg):
    """Features for every window of one recording, or an error string."""
    try:
        seg = read_wav(path, speaker, label)
        if acfg["sample_rate"]:
            seg = resample(seg, int(acfg["sample_rate"]))
        flags = []
        if acfg["noise_reduction"] and acfg["noise_window"] is not None:
            start, end = acfg["noise_window"]
            try:
                profile = estimate_noise_profile(seg, start, end)
                seg = reduce_noise(seg, profile, acfg["over_subtraction"], acfg["floor"])
            except ValueError as exc:
                flags.append(f"noise-reduction-skipped:{exc}")
        out = []
        for piece in segment(seg, acfg["segment_seconds"]):
            fv = extract_all(piece, acfg["pitch_floor"], acfg["pitch_ceiling"])
            out.append((fv, tuple(flags) + fv.flags))
        return out, None
    except (OSError, ValueError, WavReadError) as exc:
        return None, f"{type(exc).__name__}: {exc}"


def cmd_extract(cfg) -> int:
    if cfg["audio_dir"] is None:
        raise UsageError("extract needs --audio-dir (or audio_dir in the config)")
    audio_dir = Path(cfg["audio_dir"])
    wavs = sorted(audio_dir.glob("*.wav")) + sorted(audio_dir.glob("*.WAV")) if audio_dir.is_dir() else []
    if not wavs:
        raise UsageError(f"no input: no .wav files in {audio_dir}")
    manifest = read_manifest(cfg["manifest"] or audio_dir / "manifest.csv")
    if not manifest:
        raise UsageError("no input: manifest lists no files")
    acfg = cfg["audio"]
    jobs = [(audio_dir / f, spk, lab) for f, spk, lab in manifest]
    results = Parallel(n_jobs=int(cfg["jobs"]))(delayed(_process_file)(p, s, l, acfg) for p, s, l in jobs)
    vectors, flag_rows, failed = [], [], 0
    for (path, spk, _), (res, err) in zip(jobs, results):
        if err is not None:
            failed += 1
            log.warning("skipped %s (%s)", path.name, err)
            continue
        if not res:
            log.warning("%s is shorter than one %.3g s window; no rows", path.name, acfg["segment_seconds"])
        for fv, flags in res:
            vectors.append(fv)
            flag_rows.append((path.name, spk, fv.segment_index, ";".join(flags)))
    if failed == len(jobs):
        raise RuntimeError("every input file failed to process")
    if not vectors:
        raise RuntimeError("no analysis windows were produced")
    out = _out(cfg)
    write_csv(build_table(vectors), out / FEATURES_CSV)
    with open(out / FLAGS_CSV, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["file", "speaker_id", "segment_index", "flags", "config_hash"])
        for row in flag_rows:
            w.writerow([*row, config_hash(cfg)])
    log.info("extract: %d rows from %d files (%d skipped)", len(vectors), len(jobs) - failed, failed)
    return 0


# -- analysis stages ------------------------------------------------------------------


def cmd_stats(cfg) -> int:
    table = _load_table(cfg)
    group_stats(table).write_csv(_out(cfg) / STATS_CSV, _hash_extra(cfg))
    log.info("stats: %d features", table.shape[1])
    return 0


def run_selection(cfg, table) -> SelectionResult:
    sc = cfg["selection"]
    seed = int(cfg["seed"])
    method = sc["method"]
    if method == "mannwhitney":
        return mw_select(table, sc["alpha"])
    if method == "relieff":
        return relieff_select(table, sc["k"], seed=seed)
    plan = _plan(cfg, table)
    if method == "lasso":
        return lasso_select(table, plan, seed=seed, rule=sc["lambda_rule"])
    spec = LearnerSpec(sc["learner"]["algorithm"], sc["learner"].get("params", {}), seed)
    if method == "sfs":
        return sfs(table, spec, plan, max_size=sc["max_size"], n_jobs=int(cfg["jobs"]), seed=seed)
    if method == "rfecv":
        return rfecv(table, spec, plan, sc["step"], seed=seed)
    raise UsageError(f"unknown selection method {method!r}")


def cmd_select(cfg) -> int:
    table = _load_table(cfg)
    out = _out(cfg)
    if cfg["selection"]["method"] == "none":
        res = SelectionResult("none", table.column_names, np.ones(table.shape[1], bool), np.zeros(table.shape[1]))
    else:
        res = run_selection(cfg, table)
    (out / SELECTION_TXT).write_text(res.to_text(_hash_extra(cfg)))
    log.info("select: %s kept %d of %d features", res.method, int(res.mask.sum()), res.mask.size)
    return 0


def cmd_tune(cfg) -> int:
    table = _load_table(cfg)
    mask = _selection_mask(cfg, table)
    tc = cfg["tuning"]
    algo = cfg["learner"]["algorithm"]
    space = SearchSpace(algo, tc["space"]) if tc["space"] else SearchSpace.default(algo)
    plan = _plan(cfg, table)
    seed = int(cfg["seed"])
    res = random_search(space, table, plan, int(tc["n_iter"]), seed, mask, int(cfg["jobs"]))
    out = _out(cfg)
    res.write_csv(out / TUNING_CSV, _hash_extra(cfg))
    doc = {"learner": res.best.to_dict(), "mean_accuracy": res.best_score, **_hash_extra(cfg)}
    if tc["nested"]:
        accs, bests = nested_search(space, table, plan, int(tc["n_iter"]), seed, mask=mask, n_jobs=int(cfg["jobs"]))
        doc["nested"] = {"outer_accuracy": accs.tolist(), "fold_best": [b.to_dict() for b in bests]}
    (out / TUNED_JSON).write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n")
    log.info("tune: best %s %s (mean accuracy %.4f)", algo, json.dumps(dict(res.best.params)), res.best_score)
    return 0


def cmd_evaluate(cfg) -> int:
    table = _load_table(cfg)
    mask = _selection_mask(cfg, table)
    spec = _learner(cfg)
    report = cross_validate(spec, table, _plan(cfg, table), mask, int(cfg["jobs"]))
    out = _out(cfg)
    report.write_csv(out / EVAL_CSV, _hash_extra(cfg))
    text = "\n".join(
        [
            EvalReport.table_header(),
            report.table_row(),
            f"learner: {json.dumps(spec.to_dict(), sort_keys=True)}",
            f"config_hash: {config_hash(cfg)}",
            *(f"flag: {f}" for f in report.flags),
        ]
    )
    (out / EVAL_TXT).write_text(text + "\n")
    X = table.matrix if mask is None else table.matrix[:, mask]
    std = Standardizer().fit(X)
    model = make_learner(spec).fit(std.transform(X), table.labels)
    dump_model(model, spec, out / MODEL_JSON, {"standardizer": std, "columns": _columns(table, mask)})
    print(EvalReport.table_header())
    print(report.table_row())
    return 0


def _columns(table, mask):
    return list(table.column_names) if mask is None else [c for c, k in zip(table.column_names, mask) if k]


def cmd_explain(cfg) -> int:
    table = _load_table(cfg)
    mask = _selection_mask(cfg, table)
    spec = _learner(cfg)
    ec = cfg["explain"]
    seed = int(cfg["seed"])
    X = table.matrix if mask is None else table.matrix[:, mask]
    names = _columns(table, mask)
    Xs = Standardizer().fit_transform(X)
    model = make_learner(spec).fit(Xs, table.labels)
    background = Xs[select_background(Xs, int(ec["background"]), seed)]
    n = Xs.shape[0]
    wf_rows = sorted({int(r) for r in ec["waterfall_rows"] if 0 <= int(r) < n})
    if n <= int(ec["max_rows"]):
        rows = list(range(n))
    else:
        rows = sorted(np.random.default_rng(seed).choice(n, int(ec["max_rows"]), replace=False).tolist())
    rows = sorted(set(rows) | set(wf_rows))
    n_samples = max(int(ec["n_samples"]), 2 * Xs.shape[1] + 2)
    attrs = {r: kernel_shap(model.decision_function, Xs[r], background, n_samples, seed + r) for r in rows}
    # report raw feature values alongside attributions computed on standardized inputs
    attrs_raw = [_with_x(attrs[r], X[r]) for r in rows]
    summary = summary_stats(attrs_raw, names)
    out = _out(cfg)
    extra = _hash_extra(cfg)
    summary.write_csv(out / SHAP_SUMMARY_CSV, extra)
    summary.write_pairs_csv(out / SHAP_PAIRS_CSV, rows, extra)
    (out / "shap_summary.svg").write_text(summary_svg(summary))
    for r in wf_rows:
        a = _with_x(attrs[r], X[r])
        wf = waterfall_export(a, names, int(ec["top_n"]))
        write_waterfall_csv(wf, out / f"shap_waterfall_{r}.csv", a.base_value, extra)
        (out / f"shap_waterfall_{r}.svg").write_text(waterfall_svg(wf, a.base_value))
    log.info("explain: %d rows, %d features", len(rows), len(names))
    return 0


def _with_x(attr, x):
    from dataclasses import replace

    return replace(attr, x=np.asarray(x, dtype=np.float64))


# -- pipeline -------------------------------------------------------------------------


def _stage_key(cfg, stage, inputs) -> str:
    import hashlib

    h = hashlib.sha256(f"{stage}|{config_hash(cfg)}".encode())
    for p in inputs:
        h.update(file_digest(p).encode())
    return h.hexdigest()


def _outputs_of(out: Path, stage: str) -> list:
    fixed = {
        "extract": [FEATURES_CSV, FLAGS_CSV],
        "stats": [STATS_CSV],
        "select": [SELECTION_TXT],
        "tune": [TUNING_CSV, TUNED_JSON],
        "evaluate": [EVAL_CSV, EVAL_TXT, MODEL_JSON],
        "explain": [SHAP_SUMMARY_CSV, SHAP_PAIRS_CSV, "shap_summary.svg"],
    }[stage]
    paths = [out / f for f in fixed]
    if stage == "explain":
        paths += sorted(out.glob("shap_waterfall_*"))
    return paths


def cmd_pipeline(cfg) -> int:
    kind = require_input(cfg)
    out = _out(cfg)
    cache_dir = out / ".cache"
    cache_dir.mkdir(exist_ok=True)
    stages = [("extract", cmd_extract)] if kind == "audio" else []
    stages += [("stats", cmd_stats), ("select", cmd_select)]
    if cfg["tuning"]["enabled"]:
        stages.append(("tune", cmd_tune))
    stages += [("evaluate", cmd_evaluate), ("explain", cmd_explain)]
    log_lines = []
    inputs: list = []
    if kind == "audio":
        audio_dir = Path(cfg["audio_dir"])
        manifest = Path(cfg["manifest"] or audio_dir / "manifest.csv")
        if not manifest.exists():
            raise UsageError(f"manifest {manifest} not found")
        inputs = [manifest] + [audio_dir / f for f, _, _ in read_manifest(manifest) if (audio_dir / f).exists()]
    else:
        inputs = [_features_path(cfg)]
    for name, fn in stages:
        key = _stage_key(cfg, name, inputs)
        record = cache_dir / f"{name}.json"
        cached = False
        if record.exists():
            doc = json.loads(record.read_text())
            files = doc.get("files", {})
            cached = doc.get("key") == key and all(
                (out / f).exists() and file_digest(out / f) == d for f, d in files.items()
            )
        if cached:
            msg = f"stage {name}: cached"
        else:
            try:
                fn(cfg)
            except (UsageError, SchemaError, ConfigError):
                raise
            except Exception as exc:
                raise StageError(name, exc) from exc
            produced = {p.name: file_digest(p) for p in _outputs_of(out, name) if p.exists()}
            record.write_text(json.dumps({"key": key, "files": produced}, indent=1, sort_keys=True))
            msg = f"stage {name}: done"
        log.info(msg)
        log_lines.append(msg)
        # downstream stages depend on everything produced so far
        inputs = inputs + [p for p in _outputs_of(out, name) if p.exists() and p.suffix != ".svg"]
        if name == "extract":
            inputs = [out / FEATURES_CSV]
    _write_meta(cfg, "pipeline", {"stages": log_lines})
    return 0


# -- synthetic corpus -----------------------------------------------------------------


def cmd_synth(args) -> int:
    from .synth import make_corpus

    manifest = make_corpus(args.out, args.n_files, args.duration, args.sample_rate, args.seed)
    print(manifest)
    return 0


# -- argument parsing -----------------------------------------------------------------


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--config", help="JSON configuration file")
    p.add_argument("--seed", type=int)
    p.add_argument("--folds", type=int, help="number of group-wise CV folds")
    p.add_argument("--method", choices=["mannwhitney", "lasso", "relieff", "sfs", "rfecv", "none"])
    p.add_argument("--learner", help="learner tag: logreg, tree, forest, gboost, adaboost, knn, svm, dummy")
    p.add_argument("--out", help="output directory")
    p.add_argument("--noise-window", help="noise-only interval start:end in seconds")
    p.add_argument("--jobs", type=int, help="parallel workers")
    p.add_argument("--audio-dir", help="directory of WAV files")
    p.add_argument("--manifest", help="CSV with columns file, speaker_id, label")
    p.add_argument("--features", help="existing feature CSV (skips extraction)")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


COMMANDS = {
    "extract": cmd_extract,
    "stats": cmd_stats,
    "select": cmd_select,
    "tune": cmd_tune,
    "evaluate": cmd_evaluate,
    "explain": cmd_explain,
    "pipeline": cmd_pipeline,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pdvoice", description="Voice-based Parkinson's disease screening pipeline")
    parser.add_argument("--version", action="version", version=f"pdvoice {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    common = _common()
    helps = {
        "extract": "WAV recordings -> features.csv",
        "stats": "per-class statistics and rank-test p-values -> stats.csv",
        "select": "feature selection -> selection.txt",
        "tune": "randomized hyperparameter search -> tuning.csv",
        "evaluate": "group-wise cross-validation -> eval.csv",
        "explain": "Shapley attributions -> shap_summary.csv, shap_waterfall_<row>.csv",
        "pipeline": "all stages with caching",
    }
    for name, text in helps.items():
        sub.add_parser(name, parents=[common], help=text)
    syn = sub.add_parser("synth", help="write a synthetic demo corpus with manifest.csv")
    syn.add_argument("--out", required=True)
    syn.add_argument("--n-files", type=int, default=20)
    syn.add_argument("--duration", type=float, default=20.0)
    syn.add_argument("--sample-rate", type=int, default=16000)
    syn.add_argument("--seed", type=int, default=0)
    return parser


def _config_from_args(args):
    overrides = {
        "seed": args.seed,
        "folds": args.folds,
        "out": args.out,
        "jobs": args.jobs,
        "audio_dir": args.audio_dir,
        "manifest": args.manifest,
        "feature_csv": args.features,
        "selection.method": args.method,
    }
    if args.noise_window is not None:
        overrides["audio.noise_window"] = parse_window(args.noise_window)
    cfg = load_config(args.config, overrides)
    if args.learner is not None:
        target = cfg["selection"]["learner"] if args.command == "select" else cfg["learner"]
        if target["algorithm"] != args.learner:
            target["algorithm"] = args.learner
            target["params"] = {}
    if args.audio_dir is not None and args.features is None:
        cfg["feature_csv"] = None
    return cfg


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(
        level=logging.DEBUG if getattr(args, "verbose", False) else logging.INFO,
        format="%(name)s: %(message)s",
        stream=sys.stderr,
    )
    if args.command == "synth":
        return cmd_synth(args)
    try:
        cfg = _config_from_args(args)
        LearnerSpec(cfg["learner"]["algorithm"], cfg["learner"].get("params", {}))
        code = COMMANDS[args.command](cfg)
        if args.command != "pipeline":
            _write_meta(cfg, args.command)
        return code
    except (UsageError, SchemaError, ConfigError) as exc:
        print(f"pdvoice: error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        if "unknown learner" in str(exc) or "unknown hyperparameters" in str(exc):
            print(f"pdvoice: error: {exc}", file=sys.stderr)
            return 2
        print(f"pdvoice: {args.command} failed: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # runtime failure
        print(f"pdvoice: {args.command} failed: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
