"""Command-line pipeline driver.

One declarative YAML config describes dataset sources, the label heuristic,
feature settings, and the experiment matrix; subcommands execute stages:

    offlang synth       -c cfg.yaml          generate synthetic TSV datasets
    offlang ingest      -c cfg.yaml          parse sources, print stats table
    offlang preprocess  --text "..."         (or --in/--out TSV)
    offlang featurize   -c cfg.yaml --dataset ID --out DIR
    offlang train       -c cfg.yaml --experiment NAME --out model.bin
    offlang evaluate    --model model.bin --in data.tsv
    offlang experiment  -c cfg.yaml          run the matrix, write reports
    offlang predict     --model model.bin --in in.tsv --out preds.tsv

Progress goes to stderr as line-delimited JSON; results go to stdout or to
files. Exit codes: 0 success, 1 usage error, 2 data error, 3 internal error.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace

import numpy as np
import yaml

from . import corpus as C
from .experiments import ExperimentError, ExperimentSpec, run_experiment_matrix
from .features import BaselineFeaturizer, FeatureError
from .gbdt import GbdtError, GbdtParams
from .metrics import MetricsError, confusion, metrics, render_report, select_best
from .preprocess import preprocess
from .resources import load_default_resources
from .serialize import (
    GbdtPipeline,
    SerializeError,
    load_model,
    save_model,
)
from .synth import SynthError, SynthSpec, generate
from .transformer import (
    ModelError,
    TrainingConfig,
    TransformerClassifier,
    TransformerConfig,
)

DATA_ERRORS = (
    C.CorpusError,
    FeatureError,
    GbdtError,
    ModelError,
    MetricsError,
    ExperimentError,
    SerializeError,
    SynthError,
    FileNotFoundError,
    IsADirectoryError,
    yaml.YAMLError,
)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _log(event: str, **fields):
    rec = {"event": event}
    rec.update(fields)
    print(json.dumps(rec), file=sys.stderr)


def _load_config(path: str) -> dict:
    with open(path, "r", encoding="utf-8") as f:
        cfg = yaml.safe_load(f) or {}
    if not isinstance(cfg, dict):
        raise UsageError("config root must be a mapping")
    return cfg


def _heuristic(cfg: dict) -> C.LabelHeuristic:
    h = cfg.get("heuristic") or {}
    return C.LabelHeuristic(
        hi_threshold=h.get("hi_threshold", 0.6),
        lo_threshold=h.get("lo_threshold", 0.5),
        std_threshold=h.get("std_threshold", 0.1),
    )


def _synth_spec(entry: dict) -> SynthSpec:
    kw = {
        "n_samples": entry["n_samples"],
        "positive_ratio": entry["positive_ratio"],
        "language_tag": entry.get("language", "xx"),
        "noise_rate": entry.get("noise_rate", 0.0),
        "seed": entry.get("seed", 0),
    }
    if "marker_words" in entry:
        kw["offensive_marker_words"] = tuple(entry["marker_words"])
    if "benign_words" in entry:
        kw["benign_vocabulary"] = tuple(entry["benign_words"])
    return SynthSpec(**kw)


def _register(registry: dict, d: C.Dataset, split_cfg) -> None:
    registry[d.name] = d
    if split_cfg:
        spec = C.SplitSpec(
            validation_ratio=split_cfg.get("ratio", 0.1), seed=split_cfg.get("seed", 0)
        )
        train, val = C.stratified_split(d, spec)
        registry[train.name] = train
        registry[val.name] = val


def _build_registry(cfg: dict, require_files: bool = True) -> dict[str, C.Dataset]:
    """Parse every declared dataset (and synth entry) into a name registry."""
    heuristic = _heuristic(cfg)
    registry: dict[str, C.Dataset] = {}
    for entry in cfg.get("datasets", []) or []:
        path = entry["path"]
        if not os.path.exists(path):
            raise FileNotFoundError("dataset file not found: %s" % path)
        try:
            with open(path, "rb") as f:
                d = C.parse_labeled_tsv(
                    f, entry.get("format", "olid_labeled"),
                    name=entry["id"], language=entry.get("language", "en"),
                )
        except C.CorpusError as e:
            raise C.CorpusError("%s: %s" % (path, e)) from None
        d = C.apply_heuristic(d, heuristic)
        _register(registry, d, entry.get("split"))
    for entry in cfg.get("synthesize", []) or []:
        path = entry.get("path")
        if path and os.path.exists(path):
            with open(path, "rb") as f:
                d = C.parse_labeled_tsv(
                    f, "olid_labeled", name=entry["id"], language=entry.get("language", "xx")
                )
        elif path and require_files:
            raise FileNotFoundError(
                "synthetic dataset %s not generated yet (run `offlang synth`): %s"
                % (entry["id"], path)
            )
        else:
            d = generate(_synth_spec(entry), name=entry["id"])
        _register(registry, d, entry.get("split"))
    return registry


def _experiment_specs(cfg: dict, seed_override: int | None = None) -> list[ExperimentSpec]:
    specs = []
    global_seed = cfg.get("seed", 0) if seed_override is None else seed_override
    feat = cfg.get("features") or {}
    for entry in cfg.get("experiments", []) or []:
        kw = dict(
            name=entry["name"],
            model=entry["model"],
            fine_tuning=list(entry["fine_tuning"]),
            validation=entry["validation"],
            seed=global_seed if seed_override is not None else entry.get("seed", global_seed),
        )
        if "gbdt" in entry:
            kw["gbdt_params"] = GbdtParams(**entry["gbdt"])
        if "transformer" in entry:
            kw["transformer_config"] = TransformerConfig(**entry["transformer"])
        if "training" in entry:
            kw["training"] = TrainingConfig(**entry["training"])
        if "vocab_size" in entry:
            kw["vocab_size"] = entry["vocab_size"]
        for key in ("min_df_word", "min_df_pos", "min_df_char"):
            if key in entry:
                kw[key] = entry[key]
            elif key in feat:
                kw[key] = feat[key]
        specs.append(ExperimentSpec(**kw))
    return specs


# ---------------------------------------------------------------------------
# subcommands


def cmd_synth(args) -> int:
    cfg = _load_config(args.config)
    entries = cfg.get("synthesize", []) or []
    if not entries:
        raise UsageError("config declares nothing to synthesize")
    for entry in entries:
        d = generate(_synth_spec(entry), name=entry["id"])
        path = entry.get("path")
        if not path:
            _log("synth", dataset=d.name, samples=len(d), written=False)
            continue
        os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
        with open(path, "wb") as f:
            C.write_olid_tsv(d, f)
        _log("synth", dataset=d.name, samples=len(d), path=path)
    return 0


def cmd_ingest(args) -> int:
    cfg = _load_config(args.config)
    registry = _build_registry(cfg)
    summaries = []
    for name in registry:
        d = registry[name]
        summaries.append(C.summarize(d))
        _log("ingest", dataset=name, samples=len(d))
    sys.stdout.write(C.stats_table(summaries))
    return 0


def cmd_preprocess(args) -> int:
    res = load_default_resources()
    if args.text is not None:
        sys.stdout.write(preprocess(args.text, res.emoji_table, res.seg_lexicon) + "\n")
        return 0
    if not args.infile or not args.outfile:
        raise UsageError("preprocess needs --text or both --in and --out")
    with open(args.infile, "rb") as f:
        d = C.parse_labeled_tsv(f, args.format, name="input")
    out_samples = [
        replace(s, text=preprocess(s.text, res.emoji_table, res.seg_lexicon))
        for s in d.samples
    ]
    d2 = C.Dataset(d.name, out_samples, d.language)
    if args.format != "olid_labeled":
        d2 = C.apply_heuristic(d2)
    with open(args.outfile, "wb") as f:
        C.write_olid_tsv(d2, f)
    _log("preprocess", rows=len(d2), path=args.outfile)
    return 0


def cmd_featurize(args) -> int:
    cfg = _load_config(args.config)
    registry = _build_registry(cfg)
    if args.dataset not in registry:
        raise UsageError("unknown dataset id %r" % args.dataset)
    d = registry[args.dataset]
    res = load_default_resources()
    feat = cfg.get("features") or {}
    featurizer = BaselineFeaturizer(
        res.emoji_table, res.seg_lexicon, res.pos_lexicon, res.sent_lexicon,
        min_df_word=feat.get("min_df_word", 2),
        min_df_pos=feat.get("min_df_pos", 2),
        min_df_char=feat.get("min_df_char", 5),
    ).fit([s.text for s in d.samples])
    os.makedirs(args.out, exist_ok=True)
    for fam, model in (
        ("word", featurizer.word_model),
        ("pos", featurizer.pos_model),
        ("char", featurizer.char_model),
    ):
        path = os.path.join(args.out, "tfidf_%s.bin" % fam)
        with open(path, "wb") as f:
            f.write(save_model(model))
        _log("featurize", family=fam, columns=model.n_cols, path=path)
    _log("featurize_done", dataset=args.dataset, total_columns=featurizer.n_cols)
    return 0


def _progress_logger(name):
    def cb(cell, kind, i, loss):
        _log("progress", experiment=cell, unit=kind, index=i, loss=round(loss, 6))
    return cb


def cmd_train(args) -> int:
    cfg = _load_config(args.config)
    registry = _build_registry(cfg)
    specs = [s for s in _experiment_specs(cfg, args.seed) if s.name == args.experiment]
    if not specs:
        raise UsageError("config has no experiment named %r" % args.experiment)
    results, models = run_experiment_matrix(
        specs, registry, progress=_progress_logger(args.experiment) if not args.quiet else None,
        return_models=True,
    )
    payload = save_model(models[0])
    with open(args.out, "wb") as f:
        f.write(payload)
    spec, report = results[0]
    _log("trained", experiment=spec.name, f1=round(report.f1_positive, 4), out=args.out)
    return 0


def _read_texts_tsv(path: str) -> list[tuple[str, str, int | None]]:
    """(id, text, label-or-None) rows; label column optional per row."""
    rows = []
    with open(path, "r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.rstrip("\r\n")
            if not line:
                continue
            cols = line.split("\t")
            if lineno == 1 and cols[0].strip().lower() == "id":
                continue
            if len(cols) < 2:
                raise C.CorpusError("line %d: expected id<TAB>text" % lineno)
            label = None
            if len(cols) >= 3 and cols[2].strip() in ("OFF", "NOT"):
                label = 1 if cols[2].strip() == "OFF" else 0
            rows.append((cols[0], cols[1], label))
    return rows


def _predict_texts(model, texts: list[str]) -> np.ndarray:
    if isinstance(model, GbdtPipeline):
        return model.predict(texts)
    if isinstance(model, TransformerClassifier):
        res = load_default_resources()
        return model.predict([preprocess(t, res.emoji_table, res.seg_lexicon) for t in texts])
    raise SerializeError("loaded payload is not a text classifier")


def cmd_evaluate(args) -> int:
    with open(args.model, "rb") as f:
        model = load_model(f.read())
    rows = _read_texts_tsv(args.infile)
    labeled = [(t, y) for _, t, y in rows if y is not None]
    if not labeled:
        raise C.CorpusError("no labeled rows in %s" % args.infile)
    texts = [t for t, _ in labeled]
    y = [y for _, y in labeled]
    preds = _predict_texts(model, texts)
    report = metrics(confusion(list(preds), y))
    json.dump(
        {
            "accuracy": report.accuracy,
            "precision": report.precision,
            "recall": report.recall,
            "f1_positive": report.f1_positive,
            "f1_macro": report.f1_macro,
        },
        sys.stdout,
        indent=2,
    )
    sys.stdout.write("\n")
    return 0


def cmd_experiment(args) -> int:
    cfg = _load_config(args.config)
    registry = _build_registry(cfg)
    specs = _experiment_specs(cfg, args.seed)
    if not specs:
        raise UsageError("config declares no experiments")
    results = run_experiment_matrix(
        specs, registry,
        progress=None if args.quiet else _progress_logger("matrix"),
        max_parallel=args.max_parallel if args.max_parallel else cfg.get("max_parallel", 1),
    )
    out_dir = args.out or cfg.get("output_dir", ".")
    os.makedirs(out_dir, exist_ok=True)
    md = render_report(results, "markdown")
    cs = render_report(results, "csv")
    with open(os.path.join(out_dir, "report.md"), "w", encoding="utf-8") as f:
        f.write(md)
    with open(os.path.join(out_dir, "report.csv"), "w", encoding="utf-8", newline="") as f:
        f.write(cs)
    sys.stdout.write(md)
    by_val: dict[str, list] = {}
    for spec, rep in results:
        by_val.setdefault(spec.validation, []).append((spec, rep))
    for val, rows in by_val.items():
        best = select_best(rows)
        _log("best", validation=val, experiment=best.name, model=best.model)
    return 0


def cmd_predict(args) -> int:
    """Empty input produces an empty output file: no header row is written
    in either direction (the TSV formats here are headerless by default)."""
    with open(args.model, "rb") as f:
        model = load_model(f.read())
    rows = _read_texts_tsv(args.infile)
    texts = [t for _, t, _ in rows]
    preds = _predict_texts(model, texts) if rows else []
    with open(args.outfile, "w", encoding="utf-8") as f:
        for (sid, _, _), p in zip(rows, preds):
            f.write("%s\t%s\n" % (sid, "OFF" if p == 1 else "NOT"))
    _log("predict", rows=len(rows), path=args.outfile)
    return 0


# ---------------------------------------------------------------------------


def build_parser() -> _Parser:
    p = _Parser(prog="offlang", description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--quiet", action="store_true", help="suppress progress logs")
    p.add_argument("--seed", type=int, default=None,
                   help="override the config seed (including per-experiment seeds)")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, **kw):
        sp = sub.add_parser(name, **kw)
        sp.set_defaults(fn=fn)
        return sp

    sp = add("synth", cmd_synth, help="generate synthetic datasets from the config")
    sp.add_argument("-c", "--config", required=True)

    sp = add("ingest", cmd_ingest, help="parse datasets, apply the label heuristic, print stats")
    sp.add_argument("-c", "--config", required=True)

    sp = add("preprocess", cmd_preprocess, help="emoji + hashtag normalization")
    sp.add_argument("--text", default=None)
    sp.add_argument("--in", dest="infile", default=None)
    sp.add_argument("--out", dest="outfile", default=None)
    sp.add_argument("--format", default="olid_labeled", choices=["olid_labeled", "scored_english"])

    sp = add("featurize", cmd_featurize, help="fit the TF-IDF families on a dataset")
    sp.add_argument("-c", "--config", required=True)
    sp.add_argument("--dataset", required=True)
    sp.add_argument("--out", required=True, help="directory for the fitted models")

    sp = add("train", cmd_train, help="train one named experiment and save its model")
    sp.add_argument("-c", "--config", required=True)
    sp.add_argument("--experiment", required=True)
    sp.add_argument("--out", required=True)

    sp = add("evaluate", cmd_evaluate, help="evaluate a saved model on a labeled TSV")
    sp.add_argument("--model", required=True)
    sp.add_argument("--in", dest="infile", required=True)

    sp = add("experiment", cmd_experiment, help="run the experiment matrix, write reports")
    sp.add_argument("-c", "--config", required=True)
    sp.add_argument("--out", default=None, help="report directory (default: config output_dir)")
    sp.add_argument("--max-parallel", type=int, default=None,
                    help="concurrent matrix cells (default 1; results identical regardless)")

    sp = add("predict", cmd_predict, help="label a TSV with a saved model")
    sp.add_argument("--model", required=True)
    sp.add_argument("--in", dest="infile", required=True)
    sp.add_argument("--out", dest="outfile", required=True)

    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.fn(args)
    except UsageError as e:
        print("usage error: %s" % e, file=sys.stderr)
        return 1
    except DATA_ERRORS as e:
        print("data error: %s" % e, file=sys.stderr)
        return 2
    except (KeyError, TypeError, ValueError) as e:
        print("config error: %s" % e, file=sys.stderr)
        return 2
    except Exception as e:  # pragma: no cover - defensive
        print("internal error: %s" % e, file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
