"""Command-line workflows: ingest, extract, train, evaluate, build-index,
retrieval-eval, analyze, and serve.

Exit codes: 0 success, 1 generic failure, 2 unreadable dataset,
3 single-class training data.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from . import corpus as corpus_mod
from .classify import (
    DEFAULT_GRIDS,
    FIT_FUNCTIONS,
    compute_class_weight,
    evaluate_predictions,
    grid_search,
    load_model,
    save_model,
)
from .classify.model import ModelError
from .corpus import CorpusError, Dataset, load_dataset_csv, write_dataset_csv
from .extraction import RuleBasedExtractor, extract_batch
from .lexicon import default_lexicon, load_lexicon
from .markers import MARKER_NAMES
from .report import generate_report, render_json, render_text
from .retrieve import (
    BuiltinEncoder,
    ExternalEncoder,
    RetrieveError,
    build_index,
    evaluate_retrieval,
    load_index,
    save_index,
)
from .service import ServiceConfig, resolve_config_path, serve

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_BAD_DATASET = 2
EXIT_SINGLE_CLASS = 3


def _fail(message: str, code: int = EXIT_ERROR) -> int:
    print(f"error: {message}", file=sys.stderr)
    return code


def _load_dataset_or_fail(path: str) -> Dataset:
    try:
        return load_dataset_csv(path)
    except (OSError, CorpusError) as exc:
        raise _DatasetUnreadable(str(exc)) from exc


class _DatasetUnreadable(Exception):
    pass


def _dataset_features(dataset: Dataset, features_path: str | None, lexicon) -> np.ndarray:
    """Marker matrix for a dataset, from a features CSV or rule extraction."""
    if features_path:
        by_id = _read_features_csv(features_path)
        missing = [r.id for r in dataset.reviews if r.id not in by_id]
        if missing:
            raise CorpusError(f"features file lacks rows for ids: {missing[:5]}")
        return np.array([by_id[r.id] for r in dataset.reviews])
    extractor = RuleBasedExtractor(lexicon)
    result = extract_batch(list(dataset.reviews), extractor)
    return np.array([result[r.id].as_tuple() for r in dataset.reviews])


FEATURES_HEADER = ("id", *MARKER_NAMES, "extractor")


def _read_features_csv(path: str) -> dict[str, tuple[float, ...]]:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = tuple(next(reader))
        if header != FEATURES_HEADER:
            raise CorpusError(f"unexpected features header {header!r}")
        return {row[0]: tuple(float(v) for v in row[1:9]) for row in reader}


def _labels(dataset: Dataset) -> np.ndarray:
    labels = []
    for r in dataset.reviews:
        if r.label is None:
            raise CorpusError(f"review {r.id!r} is unlabeled")
        labels.append(r.label)
    return np.array(labels, dtype=int)


# -- subcommands ----------------------------------------------------------------

def cmd_ingest(args) -> int:
    parts: list[Dataset] = []
    for path in args.peerread or []:
        raw = Path(path).read_bytes()
        reviews = corpus_mod.parse_peerread_file(
            raw, source=args.source, id_prefix=f"{Path(path).stem}-"
        )
        parts.append(Dataset(reviews=tuple(reviews)))
    for path in args.csv or []:
        parts.append(_load_dataset_or_fail(path))
    if not parts:
        return _fail("nothing to ingest: pass --peerread and/or --csv")
    merged = corpus_mod.merge_datasets(parts).shuffled(args.seed)
    write_dataset_csv(merged, args.out)
    human, ai = _safe_counts(merged)
    print(f"wrote {len(merged)} reviews ({human} human / {ai} ai) to {args.out}")
    return EXIT_OK


def _safe_counts(dataset: Dataset) -> tuple[int, int]:
    human = sum(1 for r in dataset.reviews if r.label == 0)
    ai = sum(1 for r in dataset.reviews if r.label == 1)
    return human, ai


def cmd_extract(args) -> int:
    dataset = _load_dataset_or_fail(args.dataset)
    lexicon = load_lexicon(args.lexicon) if args.lexicon else default_lexicon()
    if args.extractor == "llm":
        from .extraction import LlmClientConfig, LlmExtractor

        extractor = LlmExtractor(LlmClientConfig(endpoint=args.llm_endpoint, model=args.llm_model))
    else:
        extractor = RuleBasedExtractor(lexicon)
    result = extract_batch(
        list(dataset.reviews),
        extractor,
        workers=args.workers,
        checkpoint_every=args.checkpoint_every,
        checkpoint_path=args.checkpoint,
    )
    with open(args.out, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(FEATURES_HEADER)
        for r in dataset.reviews:
            vector = result[r.id]
            writer.writerow(
                [r.id, *(repr(v) for v in vector.as_tuple()), result.provenance[r.id]]
            )
    for warning in result.warnings:
        print(f"warning: {warning}", file=sys.stderr)
    print(f"extracted {len(result)} marker vectors to {args.out}")
    return EXIT_OK


def cmd_train(args) -> int:
    dataset = _load_dataset_or_fail(args.dataset)
    lexicon = load_lexicon(args.lexicon) if args.lexicon else default_lexicon()
    y = _labels(dataset)
    X = _dataset_features(dataset, args.features, lexicon)

    grid = DEFAULT_GRIDS[args.family]
    if args.grid:
        grid = json.loads(Path(args.grid).read_text() if Path(args.grid).exists() else args.grid)

    result = grid_search(args.family, grid, X, y, k=args.folds, seed=args.seed)
    w_plus = compute_class_weight(y)
    model = FIT_FUNCTIONS[args.family](X, y, result.best_params, w_plus, seed=args.seed)
    model = _with_metadata(
        model,
        cv_best_auc=result.best_score,
        cv_folds=args.folds,
        grid_cells=len(result.cells),
    )
    save_model(model, args.out)

    if args.json:
        print(
            json.dumps(
                {
                    "family": args.family,
                    "cells": [{"params": p, "mean_auc": s} for p, s in result.cells],
                    "best_params": result.best_params,
                    "best_auc": result.best_score,
                    "class_weight": w_plus,
                    "model_path": str(args.out),
                },
                indent=2,
            )
        )
    else:
        print(result.format_table())
        print(f"best: {result.best_params} (mean AUC {result.best_score:.4f})")
        print(f"class weight: {w_plus:.4f}")
        print(f"model written to {args.out}")
    return EXIT_OK


def _with_metadata(model, **extra):
    from dataclasses import replace

    return replace(model, metadata={**model.metadata, **extra})


def cmd_evaluate(args) -> int:
    if args.confusion:
        doc = json.loads(Path(args.confusion).read_text())
        confusion = (doc["tp"], doc["fp"], doc["fn"], doc["tn"])
        from .classify.metrics import accuracy, f1_score, fpr_fnr, precision, recall

        fpr, fnr = fpr_fnr(confusion)
        metrics = {
            "accuracy": accuracy(confusion),
            "precision": precision(confusion),
            "recall": recall(confusion),
            "f1": f1_score(confusion),
            "fpr": fpr,
            "fnr": fnr,
        }
        if args.json:
            print(json.dumps(metrics, indent=2))
        else:
            for name, value in metrics.items():
                if name in ("fpr", "fnr"):
                    print(f"{name:<12}{value * 100:.2f}%")
                else:
                    print(f"{name:<12}{value:.4f}")
        return EXIT_OK

    model = load_model(args.model)
    dataset = _load_dataset_or_fail(args.dataset)
    if len(dataset) == 0:
        return _fail("evaluation dataset is empty", EXIT_BAD_DATASET)
    lexicon = load_lexicon(args.lexicon) if args.lexicon else default_lexicon()
    y = _labels(dataset)
    X = _dataset_features(dataset, args.features, lexicon)
    scores = model.proba_ai(X)
    predictions = (scores >= 0.5).astype(int)
    report = evaluate_predictions(y, predictions, scores)
    if args.json:
        print(json.dumps(report.to_dict(), indent=2))
    else:
        print(report.format_table())
    return EXIT_OK


def _encoder_from_args(args):
    if args.encoder == "external":
        return ExternalEncoder(endpoint=args.encoder_endpoint, model=args.encoder_model)
    return BuiltinEncoder()


def cmd_build_index(args) -> int:
    dataset = _load_dataset_or_fail(args.dataset)
    index = build_index(dataset, encoder=_encoder_from_args(args), batch_size=args.batch_size)
    save_index(index, args.out)
    print(f"indexed {len(index)} reviews to {args.out}")
    return EXIT_OK


def cmd_retrieval_eval(args) -> int:
    index = load_index(args.index)
    dataset = _load_dataset_or_fail(args.dataset)
    rng = np.random.default_rng(args.seed)
    human = [r.text for r in dataset.reviews if r.label == 0]
    ai = [r.text for r in dataset.reviews if r.label == 1]
    if not human or not ai:
        return _fail("dataset must contain both classes", EXIT_SINGLE_CLASS)

    def sample(texts: list[str]) -> list[str]:
        if len(texts) <= args.queries_per_class:
            return texts
        picks = rng.choice(len(texts), size=args.queries_per_class, replace=False)
        return [texts[i] for i in sorted(picks)]

    result = evaluate_retrieval(
        index, sample(human), sample(ai), K=args.k, encoder=_encoder_from_args(args)
    )
    if args.json:
        print(json.dumps(result.to_dict(), indent=2))
    else:
        print(result.format_table())
    return EXIT_OK


def cmd_analyze(args) -> int:
    if args.text is not None:
        text = args.text
    else:
        text = Path(args.file).read_text(encoding="utf-8")
    model = load_model(args.model)
    index = None
    if args.index and not args.no_evidence:
        index = load_index(args.index)
    lexicon = load_lexicon(args.lexicon) if args.lexicon else default_lexicon()
    extractor = None
    if args.extractor == "llm":
        from .extraction import LlmClientConfig, LlmExtractor

        extractor = LlmExtractor(LlmClientConfig(endpoint=args.llm_endpoint, model=args.llm_model))
    report = generate_report(text, model, index, extractor=extractor, lexicon=lexicon)
    sys.stdout.write(render_json(report) if args.json else render_text(report))
    return EXIT_OK


def cmd_serve(args) -> int:
    config_path = resolve_config_path(args.config)
    if config_path:
        config = ServiceConfig.from_file(config_path)
    elif args.model:
        config = ServiceConfig(model_path=args.model, index_path=args.index)
    else:
        return _fail("serve needs --config or --model")
    if args.port is not None:
        config.port = args.port
    if args.host is not None:
        config.host = args.host
    try:
        serve(config)
    except OSError as exc:
        return _fail(f"could not start service: {exc}")
    return EXIT_OK


# -- parser ----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="reviewscope",
        description="Explainable AI-generated peer-review detection toolkit",
    )
    parser.add_argument("--config", help="service config file (JSON)")
    parser.add_argument("--seed", type=int, default=0, help="random seed")
    parser.add_argument("--json", action="store_true", help="machine-readable output")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="parse review files into the corpus CSV")
    p.add_argument("--peerread", action="append", help="PeerRead-style JSON file")
    p.add_argument("--source", default="PeerRead-ICLR", choices=corpus_mod.SOURCES)
    p.add_argument("--csv", action="append", help="existing corpus CSV to merge")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("extract", help="extract marker vectors to a features CSV")
    p.add_argument("--dataset", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--extractor", choices=("rule", "llm"), default="rule")
    p.add_argument("--lexicon")
    p.add_argument("--checkpoint", help="line-delimited checkpoint file")
    p.add_argument("--checkpoint-every", type=int, default=50)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--llm-endpoint")
    p.add_argument("--llm-model")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("train", help="grid-search, cross-validate, and fit a model")
    p.add_argument("--dataset", required=True)
    p.add_argument("--family", required=True, choices=tuple(DEFAULT_GRIDS))
    p.add_argument("--out", required=True)
    p.add_argument("--features", help="precomputed features CSV")
    p.add_argument("--grid", help="JSON grid override (inline or a file path)")
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--lexicon")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="score a model on a labeled dataset")
    p.add_argument("--model")
    p.add_argument("--dataset")
    p.add_argument("--features")
    p.add_argument("--confusion", help="JSON file with tp/fp/fn/tn counts")
    p.add_argument("--lexicon")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("build-index", help="encode a dataset into the evidence index")
    p.add_argument("--dataset", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--encoder", choices=("builtin", "external"), default="builtin")
    p.add_argument("--encoder-endpoint")
    p.add_argument("--encoder-model")
    p.add_argument("--batch-size", type=int, default=32)
    p.set_defaults(func=cmd_build_index)

    p = sub.add_parser("retrieval-eval", help="run the retrieval evaluation harness")
    p.add_argument("--index", required=True)
    p.add_argument("--dataset", required=True)
    p.add_argument("--queries-per-class", type=int, default=100)
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--encoder", choices=("builtin", "external"), default="builtin")
    p.add_argument("--encoder-endpoint")
    p.add_argument("--encoder-model")
    p.set_defaults(func=cmd_retrieval_eval)

    p = sub.add_parser("analyze", help="produce an editor report for one review")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--text")
    group.add_argument("--file")
    p.add_argument("--model", required=True)
    p.add_argument("--index")
    p.add_argument("--no-evidence", action="store_true")
    p.add_argument("--lexicon")
    p.add_argument("--extractor", choices=("rule", "llm", "auto"), default="rule")
    p.add_argument("--llm-endpoint")
    p.add_argument("--llm-model")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("serve", help="run the HTTP analysis service")
    p.add_argument("--model")
    p.add_argument("--index")
    p.add_argument("--host")
    p.add_argument("--port", type=int)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except _DatasetUnreadable as exc:
        return _fail(f"cannot read dataset: {exc}", EXIT_BAD_DATASET)
    except ModelError as exc:
        if "single class" in str(exc):
            return _fail(str(exc), EXIT_SINGLE_CLASS)
        return _fail(str(exc))
    except (CorpusError, RetrieveError, OSError, ValueError) as exc:
        return _fail(str(exc))


if __name__ == "__main__":
    sys.exit(main())
