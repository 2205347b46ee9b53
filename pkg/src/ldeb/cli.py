"""Command-line pipeline.

Subcommands cover the stages end to end: ``stats`` (value histogram),
``export`` (vocabulary + sparse dataset), ``split`` (per-level files and
balance), ``train`` (hold-out training per level, models on disk),
``evaluate`` (score tables, optionally across several seeds), ``predict``
(route new dialogues through a trained cascade).

Every run writes into one output directory governed by one config; the
manifest written there records the config hash, and a later stage refuses
to mix with results from a different config.  Exit codes: 0 success,
2 configuration, 3 data, 4 model.  Diagnostics are single lines on stderr:
``error: <ErrorType>: <message>``.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import os
import sys
from pathlib import Path

from .config import RunConfig
from .corpus import Corpus, load_corpus, load_corpus_jsonl, parse_dialogue_line
from .dataset_io import (
    load_vocabulary,
    save_dataset,
    save_sparse_rows,
    save_vocabulary,
)
from .encoding import emo_binary, emo_describe, emo_histogram, label_corpus
from .evaluate import (
    CascadeClassifier,
    MetricsReport,
    confusion_matrix,
    evaluate_level,
    format_score_table,
    run_trials,
    train_test_split,
)
from .exceptions import ConfigError, DataError, LdebError, ModelError
from .featurize import DialogueVectorizer, build_feature_matrix
from .hiersplit import balance_report, build_split_sets
from .model_io import load_model, save_model

STANDARD_DIALOGUES = "dialogues_text.txt"
STANDARD_EMOTIONS = "dialogues_emotion.txt"
DATA_DIR_ENV = "LDEB_DAILYDIALOG_DIR"


# -- plumbing ------------------------------------------------------------

def _fail(exc: BaseException, code: int) -> int:
    message = " ".join(str(exc).split())
    print(f"error: {type(exc).__name__}: {message}", file=sys.stderr)
    return code


def _resolve_config(args) -> RunConfig:
    cfg = RunConfig.from_file(args.config) if args.config else RunConfig()
    if getattr(args, "data_dir", None):
        cfg.dialogues_path = str(Path(args.data_dir) / STANDARD_DIALOGUES)
        cfg.emotions_path = str(Path(args.data_dir) / STANDARD_EMOTIONS)
    for flag, key in (
        ("seed", "seed"), ("jobs", "jobs"), ("out", "out_dir"),
        ("dialogues", "dialogues_path"), ("emotions", "emotions_path"),
        ("jsonl", "jsonl_path"), ("learner", "learner"),
        ("trials", "trials"), ("ratio", "ratio"),
    ):
        value = getattr(args, flag, None)
        if value is not None:
            setattr(cfg, key, value)
    if getattr(args, "stratify", False):
        cfg.stratify = True
    # round-trip through the constructor so overrides are validated too
    return RunConfig.from_dict(dataclasses.asdict(cfg))


def _load_input_corpus(cfg: RunConfig) -> Corpus:
    if cfg.jsonl_path:
        return load_corpus_jsonl(cfg.jsonl_path)
    dialogues, emotions = cfg.dialogues_path, cfg.emotions_path
    if not dialogues or not emotions:
        env = os.environ.get(DATA_DIR_ENV)
        if env:
            dialogues = dialogues or str(Path(env) / STANDARD_DIALOGUES)
            emotions = emotions or str(Path(env) / STANDARD_EMOTIONS)
    if not dialogues or not emotions:
        raise ConfigError(
            "no input data: pass --dialogues and --emotions, --jsonl, "
            f"--data-dir, or set {DATA_DIR_ENV}")
    return load_corpus(dialogues, emotions, on_length_mismatch=cfg.on_length_mismatch)


def _vectorizer(cfg: RunConfig) -> DialogueVectorizer:
    return DialogueVectorizer(
        lowercase=cfg.lowercase,
        strip_edge_punct=cfg.strip_edge_punct,
        remove_interior_punct=cfg.remove_interior_punct,
        n_jobs=cfg.jobs,
    )


def _out_dir(cfg: RunConfig) -> Path:
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load_manifest(out: Path, cfg: RunConfig, require: bool = False) -> dict:
    path = out / "manifest.json"
    if path.exists():
        try:
            manifest = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise DataError(f"{path}: corrupt manifest: {exc}") from None
        if manifest.get("config_hash") != cfg.config_hash():
            raise ConfigError(
                f"{out} holds results for a different config "
                f"(hash {manifest.get('config_hash', '?')[:12]}..., "
                f"this run {cfg.config_hash()[:12]}...); use a fresh --out")
        return manifest
    if require:
        raise ConfigError(f"{path} not found; run the earlier stages first")
    return {
        "format": "ldeb-manifest",
        "version": 1,
        "config": json.loads(cfg.canonical_json()),
        "config_hash": cfg.config_hash(),
        "stages": {},
    }


def _write_manifest(out: Path, manifest: dict) -> None:
    text = json.dumps(manifest, sort_keys=True, indent=2) + "\n"
    (out / "manifest.json").write_text(text, encoding="utf-8")


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _prototype(cfg: RunConfig, learner: str):
    return cfg.make_forest() if learner == "forest" else cfg.make_mlp()


# -- subcommands ---------------------------------------------------------

def cmd_stats(args) -> int:
    cfg = _resolve_config(args)
    corpus = _load_input_corpus(cfg)
    labeled = label_corpus(corpus)
    histogram = emo_histogram(labeled)
    out = _out_dir(cfg)
    rows = [
        [value, emo_binary(value), emo_describe(value), count]
        for value, count in sorted(histogram.items())
    ]
    _write_csv(out / "reports" / "histogram.csv",
               ["emo_sum", "binary", "description", "count"], rows)
    manifest = _load_manifest(out, cfg)
    manifest["stages"]["stats"] = {
        "n_dialogues": len(corpus),
        "n_distinct_values": len(histogram),
    }
    _write_manifest(out, manifest)
    print(f"{len(corpus)} dialogues, {len(histogram)} distinct values")
    print(f"wrote {out / 'reports' / 'histogram.csv'}")
    return 0


def cmd_export(args) -> int:
    cfg = _resolve_config(args)
    corpus = _load_input_corpus(cfg)
    vectorizer = _vectorizer(cfg).fit(corpus)
    labeled = label_corpus(corpus)
    matrix = build_feature_matrix(
        corpus, labeled, vectorizer.vocabulary_,
        tokenizer=vectorizer._tokenizer(), n_jobs=cfg.jobs)
    out = _out_dir(cfg)
    save_vocabulary(vectorizer.vocabulary_, out / "vocab.txt")
    save_dataset(matrix, out / "dataset.ldeb")
    manifest = _load_manifest(out, cfg)
    manifest["stages"]["export"] = {
        "n_rows": matrix.n_rows,
        "vocab_size": len(vectorizer.vocabulary_),
        "total_tokens": vectorizer.total_tokens_,
    }
    _write_manifest(out, manifest)
    print(f"{matrix.n_rows} rows, {len(vectorizer.vocabulary_)} features, "
          f"{vectorizer.total_tokens_} tokens")
    print(f"wrote {out / 'vocab.txt'} and {out / 'dataset.ldeb'}")
    return 0


def cmd_split(args) -> int:
    cfg = _resolve_config(args)
    corpus = _load_input_corpus(cfg)
    vectorizer = _vectorizer(cfg).fit(corpus)
    X = vectorizer.transform(corpus)
    labeled = label_corpus(corpus)
    splits = build_split_sets(labeled, cfg.split_spec())
    out = _out_dir(cfg)
    (out / "splits").mkdir(exist_ok=True)
    for s in splits:
        save_sparse_rows(X[s.row_ids], s.labels, out / "splits" / f"level{s.level}.ldeb")
    balances = balance_report(splits)
    _write_csv(out / "reports" / "balance.csv",
               ["level", "count0", "count1", "pct0", "pct1"],
               [list(b) for b in balances])
    manifest = _load_manifest(out, cfg)
    manifest["stages"]["split"] = {
        "levels": [dict(b._asdict()) for b in balances],
    }
    _write_manifest(out, manifest)
    for b in balances:
        print(f"level {b.level}: {b.count0}/{b.count1} ({b.pct0}%/{b.pct1}%)")
    return 0


def cmd_train(args) -> int:
    cfg = _resolve_config(args)
    corpus = _load_input_corpus(cfg)
    vectorizer = _vectorizer(cfg).fit(corpus)
    X = vectorizer.transform(corpus)
    labeled = label_corpus(corpus)
    splits = build_split_sets(labeled, cfg.split_spec())
    out = _out_dir(cfg)
    save_vocabulary(vectorizer.vocabulary_, out / "vocab.txt")
    (out / "models").mkdir(exist_ok=True)
    manifest = _load_manifest(out, cfg)
    stage = manifest["stages"].setdefault("train", {})
    for learner in cfg.learners():
        per_level = {}
        for s in splits:
            result = evaluate_level(
                X[s.row_ids], s.labels, _prototype(cfg, learner),
                level=s.level, ratio=cfg.ratio, seed=cfg.seed,
                stratify=cfg.stratify)
            model_path = out / "models" / f"{learner}_m{s.level}.json"
            save_model(result.model, model_path)
            record = result.to_dict()
            record["model_file"] = model_path.name
            per_level[f"m{s.level}"] = record
            acc = result.metrics.accuracy
            print(f"{learner} M{s.level}: train {result.n_train} "
                  f"test {result.n_test} accuracy {acc:.3f}")
        stage[learner] = per_level
    _write_manifest(out, manifest)
    return 0


def _level_reports(cfg: RunConfig, X, splits, out: Path, learner: str) -> dict[int, MetricsReport]:
    """Score the persisted models of one learner on the held-out rows the
    training stage left aside (same seed, same ratio, same shuffle)."""
    scores: dict[int, MetricsReport] = {}
    for s in splits:
        model = load_model(out / "models" / f"{learner}_m{s.level}.json")
        _, test_idx = train_test_split(
            s.n_rows, ratio=cfg.ratio, seed=cfg.seed,
            stratify_labels=s.labels if cfg.stratify else None)
        X_level = X[s.row_ids]
        preds = model.predict(X_level[test_idx])
        cm = confusion_matrix(s.labels[test_idx], preds)
        report = MetricsReport.from_confusion(cm)
        scores[s.level] = report
        _write_csv(
            out / "reports" / f"confusion_{learner}_m{s.level}.csv",
            ["", "pred_0", "pred_1"],
            [["true_0", cm.tn, cm.fp], ["true_1", cm.fn, cm.tp]])
    return scores


def cmd_evaluate(args) -> int:
    cfg = _resolve_config(args)
    corpus = _load_input_corpus(cfg)
    vectorizer = _vectorizer(cfg).fit(corpus)
    X = vectorizer.transform(corpus)
    labeled = label_corpus(corpus)
    splits = build_split_sets(labeled, cfg.split_spec())
    out = _out_dir(cfg)
    manifest = _load_manifest(out, cfg, require=True)
    trained = manifest["stages"].get("train", {})
    learners = [l for l in cfg.learners() if l in trained]
    if not learners:
        raise ModelError(
            f"no trained models for {cfg.learner!r} in {out}; run train first")
    scores = {learner: _level_reports(cfg, X, splits, out, learner)
              for learner in learners}
    table = format_score_table(scores)
    (out / "reports").mkdir(exist_ok=True)
    (out / "reports" / "table.txt").write_text(table, encoding="utf-8")
    payload = {
        "learners": {
            learner: {f"M{lvl}": report.to_dict() for lvl, report in per.items()}
            for learner, per in scores.items()
        }
    }
    (out / "reports" / "scores.json").write_text(
        json.dumps(payload, sort_keys=True, indent=2) + "\n", encoding="utf-8")
    manifest["stages"]["evaluate"] = payload
    print(table, end="")

    if cfg.trials > 1:
        seeds = [cfg.seed + i for i in range(cfg.trials)]
        trials_payload: dict = {"seeds": seeds, "learners": {}}
        for learner in learners:
            per_level = {}
            for s in splits:
                summary = run_trials(
                    X[s.row_ids], s.labels, _prototype(cfg, learner),
                    seeds, level=s.level, ratio=cfg.ratio,
                    stratify=cfg.stratify)
                per_level[f"M{s.level}"] = summary.to_dict()
                best = summary.best.metrics.accuracy
                mean = summary.mean["accuracy"]
                sd = summary.sd["accuracy"]
                print(f"{learner} M{s.level} over {len(seeds)} seeds: "
                      f"best accuracy {best:.3f}, mean {mean:.3f} +/- {sd:.3f}")
            trials_payload["learners"][learner] = per_level
        (out / "reports" / "trials.json").write_text(
            json.dumps(trials_payload, sort_keys=True, indent=2) + "\n",
            encoding="utf-8")
        manifest["stages"]["trials"] = {"seeds": seeds}
    _write_manifest(out, manifest)
    return 0


def cmd_predict(args) -> int:
    out = Path(args.out) if args.out else Path(RunConfig().out_dir)
    manifest_path = out / "manifest.json"
    if not manifest_path.exists():
        raise ConfigError(f"{manifest_path} not found; train a model first")
    try:
        manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise DataError(f"{manifest_path}: corrupt manifest: {exc}") from None
    cfg = RunConfig.from_dict(manifest.get("config", {}))
    trained = manifest.get("stages", {}).get("train", {})
    learner = args.learner or next(iter(sorted(trained)), None)
    if learner is None or learner not in trained:
        raise ModelError(f"no trained models in {out}; run train first")

    vectorizer = _vectorizer(cfg)
    vectorizer.vocabulary_ = load_vocabulary(out / "vocab.txt")
    vectorizer.total_tokens_ = 0
    spec = cfg.split_spec()
    models = [load_model(out / "models" / f"{learner}_m{k}.json")
              for k in range(1, spec.n_levels + 1)]
    cascade = CascadeClassifier.from_parts(spec, models, vectorizer)

    if args.text is not None:
        lines = [args.text]
    elif args.input:
        lines = [ln for ln in Path(args.input).read_text(encoding="utf-8").splitlines()
                 if ln.strip()]
    else:
        raise ConfigError("pass --text or --input")
    dialogues = [" ".join(parse_dialogue_line(ln)) for ln in lines]
    leaves = cascade.predict_dialogues(dialogues)
    for leaf in leaves:
        if leaf < spec.n_levels:
            members = sorted(spec.levels[leaf])
            name = ",".join(str(v) for v in members)
            described = "; ".join(emo_describe(v) for v in members)
        else:
            name = "residual"
            described = "any other emotion combination"
        print(f"{leaf}\t{name}\t{described}")
    return 0


# -- parser ---------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file")
    common.add_argument("--seed", type=int, help="master random seed")
    common.add_argument("--jobs", type=int, help="worker count for parallel stages")
    common.add_argument("--out", help="output directory (default: out)")

    data = argparse.ArgumentParser(add_help=False)
    data.add_argument("--dialogues", help="dialogue text file")
    data.add_argument("--emotions", help="emotion label file")
    data.add_argument("--jsonl", help="JSON-lines corpus file")
    data.add_argument("--data-dir", help=f"directory holding {STANDARD_DIALOGUES} "
                                         f"and {STANDARD_EMOTIONS}")

    fitopts = argparse.ArgumentParser(add_help=False)
    fitopts.add_argument("--learner", choices=["forest", "mlp", "both"])
    fitopts.add_argument("--ratio", type=float, help="train fraction (default 0.8)")
    fitopts.add_argument("--stratify", action="store_true",
                         help="stratify the train/test split by label")

    parser = argparse.ArgumentParser(
        prog="ldeb",
        description="Emotion-aggregate dialogue labeling and cascade classification.")
    sub = parser.add_subparsers(dest="command", metavar="command")

    p = sub.add_parser("stats", parents=[common, data],
                       help="histogram of encoded values")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("export", parents=[common, data],
                       help="write vocabulary and sparse dataset")
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("split", parents=[common, data],
                       help="write per-level datasets and class balance")
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("train", parents=[common, data, fitopts],
                       help="train per-level models with a hold-out split")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", parents=[common, data, fitopts],
                       help="score trained models; optionally across seeds")
    p.add_argument("--trials", type=int,
                   help="number of seeds for a best/mean report")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("predict", parents=[common],
                       help="route dialogues through a trained cascade")
    p.add_argument("--text", help="one dialogue (utterances may be "
                                  "separated by __eou__)")
    p.add_argument("--input", help="file with one dialogue per line")
    p.add_argument("--learner", choices=["forest", "mlp"])
    p.set_defaults(func=cmd_predict)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if not hasattr(args, "func"):
        parser.print_help()
        return 2
    try:
        return args.func(args)
    except ConfigError as exc:
        return _fail(exc, 2)
    except ModelError as exc:
        return _fail(exc, 4)
    except DataError as exc:
        return _fail(exc, 3)
    except LdebError as exc:
        return _fail(exc, 3)
    except OSError as exc:
        return _fail(exc, 3)


if __name__ == "__main__":
    sys.exit(main())
