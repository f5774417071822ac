import csv
import json

import numpy as np
import pytest

from pdvoice.audio import AudioSegment, write_wav
from pdvoice.cli import main, read_manifest
from pdvoice.config import ConfigError, config_hash, load_config, parse_window
from pdvoice.dataset import FeatureTable, SchemaError, write_csv
from pdvoice.features import FEATURE_NAMES
from pdvoice.synth import speech_like

from .conftest import random_table

FAST = {
    "folds": 3,
    "selection": {"method": "mannwhitney"},
    "learner": {"algorithm": "logreg", "params": {}},
    "tuning": {"n_iter": 3},
    "explain": {"max_rows": 6, "n_samples": 64, "background": 10, "waterfall_rows": [0, 2]},
}


@pytest.fixture
def features_csv(tmp_path):
    t = random_table(n_groups=12, per_group=2, d=6, seed=0, shift=1.5)
    path = tmp_path / "features_in.csv"
    write_csv(t, path)
    return path


@pytest.fixture
def config(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(FAST))
    return path


def _corpus(directory, seconds, n=2, sr=8000):
    directory.mkdir()
    rows = [("file", "speaker_id", "label")]
    for i in range(n):
        label = "PD" if i % 2 == 0 else "HC"
        write_wav(AudioSegment(speech_like(seconds, sr, pd=label == "PD", seed=i), sr), directory / f"s{i}.wav")
        rows.append((f"s{i}.wav", f"spk{i}", label))
    with open(directory / "manifest.csv", "w", newline="") as fh:
        csv.writer(fh).writerows(rows)


def test_extract_row_count_and_header(tmp_path):
    _corpus(tmp_path / "audio", 65.0)
    out = tmp_path / "out"
    assert main(["extract", "--audio-dir", str(tmp_path / "audio"), "--out", str(out)]) == 0
    with open(out / "features.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["speaker_id", "label", *FEATURE_NAMES]
    assert len(rows) - 1 == 12
    meta = json.loads((out / "run_meta.json").read_text())
    assert meta["seed"] == 0 and meta["config_hash"] == config_hash(meta["config"])


def test_empty_directory_is_usage_error(tmp_path, capsys):
    (tmp_path / "empty").mkdir()
    assert main(["extract", "--audio-dir", str(tmp_path / "empty"), "--out", str(tmp_path / "o")]) == 2
    assert "no input" in capsys.readouterr().err


def test_all_files_failing_is_runtime_error(tmp_path, capsys):
    d = tmp_path / "bad"
    d.mkdir()
    (d / "a.wav").write_bytes(b"RIFF....WAVEjunk")
    (d / "manifest.csv").write_text("file,speaker_id,label\na.wav,s1,PD\n")
    assert main(["extract", "--audio-dir", str(d), "--out", str(tmp_path / "o")]) == 1
    assert "extract failed" in capsys.readouterr().err


def test_bad_manifest_label(tmp_path):
    d = tmp_path / "m"
    d.mkdir()
    (d / "manifest.csv").write_text("file,speaker_id,label\na.wav,s1,maybe\n")
    with pytest.raises(SchemaError):
        read_manifest(d / "manifest.csv")


def test_usage_errors(tmp_path, features_csv, capsys):
    assert main(["frobnicate"]) == 2
    assert main(["evaluate", "--features", str(features_csv), "--learner", "nope", "--out", str(tmp_path)]) == 2
    assert main(["evaluate", "--features", str(tmp_path / "missing.csv"), "--out", str(tmp_path)]) == 2
    assert main(["evaluate", "--features", str(features_csv), "--noise-window", "3", "--out", str(tmp_path)]) == 2


def test_schema_error_exit_code(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("speaker_id,x\na,1\n")
    assert main(["stats", "--features", str(bad), "--out", str(tmp_path / "o")]) == 2


def test_evaluate_dummy_prints_half(tmp_path, capsys):
    t = random_table(n_groups=20, per_group=2, d=3, seed=1)
    write_csv(t, tmp_path / "f.csv")
    code = main(["evaluate", "--features", str(tmp_path / "f.csv"), "--learner", "dummy", "--out", str(tmp_path / "o")])
    assert code == 0
    row = capsys.readouterr().out.strip().splitlines()[-1].split("\t")
    assert row[0] == "dummy"
    assert float(row[1].split(" ± ")[0]) == pytest.approx(50.0, abs=10.0)


def test_stage_commands_and_config_hash(tmp_path, features_csv, config):
    out = tmp_path / "o"
    args = ["--features", str(features_csv), "--config", str(config), "--out", str(out)]
    for cmd in ("stats", "select", "tune", "evaluate", "explain"):
        assert main([cmd, *args]) == 0, cmd
    h = config_hash(load_config(config, {"feature_csv": str(features_csv)}))
    for name in ("stats.csv", "tuning.csv", "eval.csv", "shap_summary.csv", "shap_pairs.csv", "shap_waterfall_2.csv"):
        with open(out / name) as fh:
            assert all(r["config_hash"] == h for r in csv.DictReader(fh)), name
    assert f"config_hash: {h}" in (out / "selection.txt").read_text()
    assert f"config_hash: {h}" in (out / "eval_summary.txt").read_text()
    from pdvoice.learn import load_model

    model, spec, extra = load_model(out / "model.json", with_extra=True)
    assert spec.algorithm == "logreg"
    assert extra["standardizer"].mean_.shape == (len(extra["columns"]),)


def test_select_learner_flag_targets_selection(tmp_path, features_csv, config):
    out = tmp_path / "o"
    code = main(["select", "--features", str(features_csv), "--config", str(config), "--out", str(out),
                 "--method", "rfecv", "--learner", "tree"])
    assert code == 0
    meta = json.loads((out / "run_meta.json").read_text())
    assert meta["config"]["selection"]["learner"]["algorithm"] == "tree"
    assert meta["config"]["learner"]["algorithm"] == "logreg"


def _reports(out):
    return {p.name: p.read_bytes() for p in sorted(out.iterdir()) if p.is_file() and p.name != "run_meta.json"}


def test_pipeline_deterministic_cached_and_skips_extraction(tmp_path, features_csv, config, caplog):
    args = ["pipeline", "--features", str(features_csv), "--config", str(config)]
    assert main([*args, "--out", str(tmp_path / "a")]) == 0
    assert main([*args, "--out", str(tmp_path / "b")]) == 0
    a, b = _reports(tmp_path / "a"), _reports(tmp_path / "b")
    assert a == b
    assert "features.csv" not in a
    caplog.clear()
    with caplog.at_level("INFO", logger="pdvoice"):
        assert main([*args, "--out", str(tmp_path / "a")]) == 0
    assert "stage stats: cached" in caplog.text and "stage explain: cached" in caplog.text
    assert "stage extract" not in caplog.text


def test_pipeline_reruns_after_input_change(tmp_path, features_csv, config, caplog):
    args = ["pipeline", "--features", str(features_csv), "--config", str(config), "--out", str(tmp_path / "a")]
    assert main(args) == 0
    t = random_table(n_groups=12, per_group=2, d=6, seed=1, shift=1.5)
    write_csv(t, features_csv)
    with caplog.at_level("INFO", logger="pdvoice"):
        assert main(args) == 0
    assert "stage stats: done" in caplog.text


def test_pipeline_needs_one_input(tmp_path, config):
    assert main(["pipeline", "--config", str(config), "--out", str(tmp_path)]) == 2


def test_config_layering(tmp_path):
    p = tmp_path / "c.json"
    p.write_text(json.dumps({"seed": 4, "selection": {"alpha": 0.01}}))
    cfg = load_config(p, {"seed": 9, "selection.method": "lasso", "folds": None})
    assert (cfg["seed"], cfg["selection"]["alpha"], cfg["selection"]["method"], cfg["folds"]) == (9, 0.01, "lasso", 10)
    assert config_hash(cfg) == config_hash({**cfg, "out": "elsewhere", "jobs": 8})
    assert config_hash(cfg) != config_hash({**cfg, "seed": 1})
    with pytest.raises(ConfigError):
        load_config(None, {"bogus": 1})
    p.write_text("{not json")
    with pytest.raises(ConfigError):
        load_config(p)


@pytest.mark.parametrize("text, ok", [("0:0.5", True), ("1.5:2", True), ("2:1", False), ("abc", False)])
def test_noise_window_parsing(text, ok):
    if ok:
        load_config(None, {"audio.noise_window": parse_window(text)})
    else:
        with pytest.raises(ConfigError):
            load_config(None, {"audio.noise_window": parse_window(text)})


def test_synth_command(tmp_path, capsys):
    assert main(["synth", "--out", str(tmp_path / "c"), "--n-files", "2", "--duration", "2"]) == 0
    assert len(read_manifest(tmp_path / "c" / "manifest.csv")) == 2
