import json
import re
import shutil
from pathlib import Path

import pytest

from ldeb.cli import main
from ldeb.dataset_io import load_dataset, load_vocabulary

FAST_CONFIG = {
    "dialogues_path": "dialogues.txt",
    "emotions_path": "emotions.txt",
    "learner": "both",
    "n_trees": 8,
    "hidden_layer_sizes": [8],
    "epochs": 2,
    "batch_size": 8,
    "learning_rate": 0.05,
    "seed": 0,
}


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def _stage(tmp_path, fixture_dir, config=None):
    """Copy the bundled corpus into tmp_path and drop a config next to it."""
    shutil.copy(fixture_dir / "dialogues.txt", tmp_path / "dialogues.txt")
    shutil.copy(fixture_dir / "emotions.txt", tmp_path / "emotions.txt")
    cfg = dict(FAST_CONFIG)
    cfg.update(config or {})
    (tmp_path / "cfg.json").write_text(json.dumps(cfg), encoding="utf-8")
    return tmp_path


@pytest.fixture()
def workdir(tmp_path, fixture_dir, monkeypatch):
    _stage(tmp_path, fixture_dir)
    monkeypatch.chdir(tmp_path)
    return tmp_path


# -- stats ------------------------------------------------------------------

def test_stats_writes_expected_histogram(workdir, capsys, expected):
    code, out, err = run(capsys, "stats", "--config", "cfg.json")
    assert code == 0 and err == ""
    assert f"{expected['n_dialogues']} dialogues" in out

    lines = (workdir / "out" / "reports" / "histogram.csv").read_text().splitlines()
    assert lines[0] == "emo_sum,binary,description,count"
    values = [int(row.split(",")[0]) for row in lines[1:]]
    assert values == sorted(values)
    got = {row.split(",")[0]: int(row.rsplit(",", 1)[1]) for row in lines[1:]}
    assert got == {k: v for k, v in expected["histogram"].items()}

    manifest = json.loads((workdir / "out" / "manifest.json").read_text())
    assert manifest["stages"]["stats"]["n_dialogues"] == expected["n_dialogues"]
    assert manifest["config_hash"]

    before = (workdir / "out" / "reports" / "histogram.csv").read_bytes()
    assert run(capsys, "stats", "--config", "cfg.json")[0] == 0
    assert (workdir / "out" / "reports" / "histogram.csv").read_bytes() == before


def test_stats_reads_env_data_dir(tmp_path, fixture_dir, monkeypatch, capsys):
    datadir = tmp_path / "dd"
    datadir.mkdir()
    shutil.copy(fixture_dir / "dialogues.txt", datadir / "dialogues_text.txt")
    shutil.copy(fixture_dir / "emotions.txt", datadir / "dialogues_emotion.txt")
    monkeypatch.chdir(tmp_path)
    monkeypatch.setenv("LDEB_DAILYDIALOG_DIR", str(datadir))
    code, out, err = run(capsys, "stats")
    assert code == 0 and "dialogues" in out


# -- export -----------------------------------------------------------------

def test_export_round_trips_the_dataset(workdir, capsys, expected, corpus,
                                        fitted_vectorizer, X):
    code, out, _ = run(capsys, "export", "--config", "cfg.json")
    assert code == 0
    assert f"{expected['vocab_size']} features" in out

    vocab = load_vocabulary(workdir / "out" / "vocab.txt")
    assert len(vocab) == expected["vocab_size"]
    assert list(vocab.tokens[:8]) == expected["first_tokens"]

    matrix = load_dataset(workdir / "out" / "dataset.ldeb")
    assert matrix.n_rows == len(corpus.dialogues)
    assert matrix.n_features == expected["vocab_size"]
    assert (matrix.X != X).nnz == 0
    assert matrix.labels[:12].tolist() == expected["values_head"]

    manifest = json.loads((workdir / "out" / "manifest.json").read_text())
    assert manifest["stages"]["export"]["total_tokens"] == expected["total_tokens"]


# -- split --------------------------------------------------------------------

def test_split_writes_levels_and_balance(workdir, capsys, expected):
    code, out, _ = run(capsys, "split", "--config", "cfg.json")
    assert code == 0
    for k, (c0, c1) in enumerate(expected["level_sizes"], 1):
        assert (workdir / "out" / "splits" / f"level{k}.ldeb").exists()
        assert f"level {k}: {c0}/{c1}" in out

    lines = (workdir / "out" / "reports" / "balance.csv").read_text().splitlines()
    assert lines[0] == "level,count0,count1,pct0,pct1"
    for line, (c0, c1), (p0, p1) in zip(lines[1:], expected["level_sizes"],
                                        expected["balances"]):
        cells = line.split(",")
        assert [int(cells[1]), int(cells[2])] == [c0, c1]
        assert [float(cells[3]), float(cells[4])] == [p0, p1]


# -- train / evaluate ---------------------------------------------------------

def _train(workdir, capsys):
    return run(capsys, "train", "--config", "cfg.json")


def test_train_writes_models_and_metrics(workdir, capsys):
    code, out, _ = _train(workdir, capsys)
    assert code == 0
    for learner in ("forest", "mlp"):
        for k in (1, 2, 3, 4):
            assert (workdir / "out" / "models" / f"{learner}_m{k}.json").exists()
            assert re.search(rf"{learner} M{k}: train \d+ test \d+ accuracy \d\.\d\d\d", out)
    manifest = json.loads((workdir / "out" / "manifest.json").read_text())
    record = manifest["stages"]["train"]["forest"]["m1"]
    assert record["n_train"] == 48 and record["n_test"] == 12
    assert record["model_file"] == "forest_m1.json"
    assert 0.0 <= record["metrics"]["accuracy"] <= 1.0


def test_evaluate_reports_match_training_metrics(workdir, capsys):
    _train(workdir, capsys)
    code, out, _ = run(capsys, "evaluate", "--config", "cfg.json")
    assert code == 0
    table = (workdir / "out" / "reports" / "table.txt").read_text()
    assert out == table
    assert table.splitlines()[0].split() == ["learner", "metric", "M1", "M2", "M3", "M4"]

    scores = json.loads((workdir / "out" / "reports" / "scores.json").read_text())
    manifest = json.loads((workdir / "out" / "manifest.json").read_text())
    for learner in ("forest", "mlp"):
        for k in (1, 2, 3, 4):
            trained = manifest["stages"]["train"][learner][f"m{k}"]["metrics"]
            scored = scores["learners"][learner][f"M{k}"]
            assert scored == trained    # same rows, same model, same numbers
            cm = (workdir / "out" / "reports" / f"confusion_{learner}_m{k}.csv")
            assert cm.read_text().splitlines()[0] == ",pred_0,pred_1"


def test_evaluate_trials_summary(workdir, capsys):
    _train(workdir, capsys)
    code, out, _ = run(capsys, "evaluate", "--config", "cfg.json", "--trials", "2")
    assert code == 0
    trials = json.loads((workdir / "out" / "reports" / "trials.json").read_text())
    assert trials["seeds"] == [0, 1]
    assert set(trials["learners"]) == {"forest", "mlp"}
    summary = trials["learners"]["forest"]["M1"]
    assert summary["best_seed"] in (0, 1)
    assert len(summary["per_seed"]) == 2
    assert re.search(r"forest M1 over 2 seeds: best accuracy \d\.\d+, "
                     r"mean \d\.\d+ \+/- \d\.\d+", out)


# -- predict -------------------------------------------------------------------

def test_predict_text_and_file(workdir, capsys):
    _train(workdir, capsys)
    code, out, _ = run(capsys, "predict", "--text",
                       "The kitchen stinks . __eou__ I'll throw out the garbage .")
    assert code == 0
    line = out.strip()
    assert re.fullmatch(r"[0-4]\t(residual|\d+(,\d+)*)\t.+", line)

    batch = workdir / "batch.txt"
    batch.write_text("hello there . __eou__ hi .\n\nwhat a surprise !\n",
                     encoding="utf-8")
    code, out, _ = run(capsys, "predict", "--input", str(batch), "--learner", "mlp")
    assert code == 0
    lines = out.strip().splitlines()
    assert len(lines) == 2            # the blank line is skipped
    for line in lines:
        assert re.fullmatch(r"[0-4]\t(residual|\d+(,\d+)*)\t.+", line)


# -- failure modes -------------------------------------------------------------

def test_exit_codes(workdir, capsys, tmp_path):
    code, _, err = run(capsys, "stats", "--dialogues", "missing.txt",
                       "--emotions", "missing.txt")
    assert code == 3
    assert err.startswith("error: FileNotFoundError:") and err.count("\n") == 1

    (workdir / "bad.json").write_text("{not json", encoding="utf-8")
    code, _, err = run(capsys, "stats", "--config", "bad.json")
    assert code == 2 and err.startswith("error: ConfigError:")

    (workdir / "unknown.json").write_text('{"made_up_key": 1}', encoding="utf-8")
    code, _, err = run(capsys, "stats", "--config", "unknown.json")
    assert code == 2 and "made_up_key" in err

    # out dir already holds results for a different config
    assert run(capsys, "stats", "--config", "cfg.json")[0] == 0
    code, _, err = run(capsys, "stats", "--config", "cfg.json", "--seed", "5")
    assert code == 2 and "different config" in err

    code, _, err = run(capsys, "evaluate", "--config", "cfg.json", "--out", "fresh")
    assert code == 2 and "earlier stages" in err

    code, _, err = run(capsys, "predict", "--out", "nowhere", "--text", "hi .")
    assert code == 2

    # sanity: the good path still works after all the failures above
    assert run(capsys, "stats", "--config", "cfg.json")[0] == 0


def test_evaluate_with_deleted_models_is_a_model_error(workdir, capsys):
    _train(workdir, capsys)
    shutil.rmtree(workdir / "out" / "models")
    code, _, err = run(capsys, "evaluate", "--config", "cfg.json")
    assert code == 4 and err.startswith("error: ModelError:")


def test_predict_requires_input(workdir, capsys):
    _train(workdir, capsys)
    code, _, err = run(capsys, "predict")
    assert code == 2 and "pass --text or --input" in err
    code, _, err = run(capsys, "predict", "--text", "")
    assert code == 3 and err.startswith("error: EmptyDialogueError:")


def test_no_subcommand_prints_help(capsys):
    code = main([])
    captured = capsys.readouterr()
    assert code == 2
    assert "stats" in captured.out and "predict" in captured.out


# -- determinism ----------------------------------------------------------------

def test_pipeline_is_byte_identical_across_directories(tmp_path, fixture_dir,
                                                       monkeypatch, capsys):
    outputs = {}
    for name in ("first", "second"):
        base = tmp_path / name
        base.mkdir()
        _stage(base, fixture_dir)
        monkeypatch.chdir(base)
        for cmd in ("stats", "export", "split", "train", "evaluate"):
            code, _, err = run(capsys, cmd, "--config", "cfg.json")
            assert code == 0, f"{name}/{cmd}: {err}"
        outputs[name] = {
            p.relative_to(base / "out"): p.read_bytes()
            for p in sorted((base / "out").rglob("*")) if p.is_file()
        }
    assert set(outputs["first"]) == set(outputs["second"])
    for rel, blob in outputs["first"].items():
        assert outputs["second"][rel] == blob, f"{rel} differs between runs"
