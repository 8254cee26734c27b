"""Command-line entry point for reproducible batch runs.

Every command takes an --out directory and leaves behind the fully
resolved configuration (config.json), a plain log (run.log, no
timestamps so reruns are byte-comparable), and its outputs.  Flags
override values from an optional --config JSON file, whose sections are
"pipeline", "training", "logreg", "generator", and "evaluate" with keys
matching the corresponding dataclass fields.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .archive import canonical_json, load_archive, save_archive
from .baseline import LogRegPredictor, aggregate_document_vector, train_logreg
from .corpus import (
    LABEL_NAMES,
    corpus_stats,
    filter_neutral,
    load_corpus,
    save_corpus,
)
from .errors import (
    ConfigurationError,
    EnumerationBudgetError,
    FileFormatError,
    InvalidInputError,
    TrainingDivergedError,
)
from .evaluation import HcrfLearner, LogRegLearner, cross_validate
from .features.pipeline import FeaturePipeline, PipelineConfig
from .features.segmentation import ipu_index_per_token
from .features.tokenizer import get_normalizer, tokenize_many
from .introspection import build_state_report
from .synthetic import (
    SyntheticSpec,
    generate_corpus,
    generate_embeddings,
    order_insensitive_bayes_accuracy,
    write_embeddings,
)
from .training import TrainingConfig, fit_predictor

log = logging.getLogger(__name__)

PREDICTIONS_VERSION = "predictions/v1"

_HANDLED_ERRORS = (
    InvalidInputError,
    ConfigurationError,
    FileFormatError,
    EnumerationBudgetError,
    TrainingDivergedError,
    OSError,
)


def _load_config_file(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise FileFormatError(f"{path}: invalid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise FileFormatError(f"{path}: config file must hold a JSON object")
    known = {"pipeline", "training", "logreg", "generator", "evaluate"}
    unknown = sorted(set(doc) - known)
    if unknown:
        raise ConfigurationError(f"unknown config sections {unknown}; known: {sorted(known)}")
    return doc


def _build_dataclass(cls, section: dict, overrides: dict):
    merged = dict(section)
    merged.update({k: v for k, v in overrides.items() if v is not None})
    field_names = {f.name for f in dataclasses.fields(cls)}
    unknown = sorted(set(merged) - field_names)
    if unknown:
        raise ConfigurationError(
            f"unknown {cls.__name__} keys {unknown}; known: {sorted(field_names)}"
        )
    return cls(**merged)


def _pipeline_config(args, file_config: dict) -> PipelineConfig:
    overrides = {
        "threshold_ms": args.threshold_ms,
        "blocks": tuple(args.features.split(",")) if args.features else None,
    }
    return _build_dataclass(PipelineConfig, file_config.get("pipeline", {}), overrides)


def _training_config(args, file_config: dict) -> TrainingConfig:
    overrides = {
        "num_hidden_states": args.hidden_states,
        "context_window": args.context_window,
        "l2_lambda": args.l2,
        "seed": args.seed,
    }
    return _build_dataclass(TrainingConfig, file_config.get("training", {}), overrides)


def _prepare_out_dir(out: str) -> Path:
    out_dir = Path(out)
    out_dir.mkdir(parents=True, exist_ok=True)
    return out_dir


def _configure_logging(out_dir: Path):
    root = logging.getLogger("opinionchain")
    for handler in list(root.handlers):
        root.removeHandler(handler)
    handler = logging.FileHandler(out_dir / "run.log", mode="w", encoding="utf-8")
    handler.setFormatter(logging.Formatter("%(levelname)s %(name)s: %(message)s"))
    root.addHandler(handler)
    root.setLevel(logging.INFO)


def _write_resolved_config(out_dir: Path, resolved: dict):
    (out_dir / "config.json").write_text(canonical_json(resolved), encoding="utf-8")


def _labeled_corpus(path: str, threshold_ms: int):
    corpus = load_corpus(path)
    stats = corpus_stats(corpus, threshold_ms)
    log.info(
        "loaded %d documents (%s), %d words, %d IPUs at %d ms",
        stats.document_count,
        ", ".join(f"{v} {k}" for k, v in sorted(stats.class_counts.items())),
        stats.word_count,
        stats.ipu_count,
        stats.threshold_ms,
    )
    labeled = filter_neutral(corpus)
    dropped = len(corpus) - len(labeled)
    if dropped:
        log.info("dropped %d neutral or unlabeled documents", dropped)
    if not labeled:
        raise InvalidInputError(f"{path}: no labeled non-neutral documents")
    return labeled


def cmd_generate(args) -> int:
    file_config = _load_config_file(args.config)
    spec = _build_dataclass(SyntheticSpec, file_config.get("generator", {}), {})
    seed = args.seed if args.seed is not None else 0
    out_dir = _prepare_out_dir(args.out)
    _configure_logging(out_dir)
    resolved = {
        "command": "generate",
        "seed": seed,
        "generator": dataclasses.asdict(spec),
    }
    _write_resolved_config(out_dir, resolved)

    bayes = order_insensitive_bayes_accuracy(spec)
    corpus = generate_corpus(spec, seed=seed)
    save_corpus(corpus, out_dir / "corpus")
    write_embeddings(generate_embeddings(spec, seed=seed), out_dir / "embeddings.txt")
    stats = {
        "format": "generator-stats/v1",
        "documents": len(corpus),
        "order_insensitive_bayes_accuracy": bayes,
        "seed": seed,
        "spec": dataclasses.asdict(spec),
    }
    (out_dir / "generator_stats.json").write_text(canonical_json(stats), encoding="utf-8")
    log.info(
        "generated %d documents; order-insensitive Bayes accuracy %.4f (seed %d)",
        len(corpus),
        bayes,
        seed,
    )
    print(f"generated {len(corpus)} documents into {out_dir / 'corpus'}")
    print(f"order-insensitive Bayes accuracy: {100 * bayes:.2f}%")
    return 0


def cmd_segment(args) -> int:
    out_dir = _prepare_out_dir(args.out)
    _configure_logging(out_dir)
    threshold = args.threshold_ms if args.threshold_ms is not None else 300
    _write_resolved_config(
        out_dir, {"command": "segment", "corpus": args.corpus, "threshold_ms": threshold}
    )
    corpus = load_corpus(args.corpus)
    index = {doc.doc_id: ipu_index_per_token(doc, threshold) for doc in corpus}
    save_corpus(corpus, out_dir / "corpus", ipu_index=index)
    stats = corpus_stats(corpus, threshold)
    log.info("segmented %d documents into %d IPUs", len(corpus), stats.ipu_count)
    print(f"segmented {len(corpus)} documents into {stats.ipu_count} IPUs at {threshold} ms")
    return 0


def _fit_from_args(args, file_config):
    """Shared by train and evaluate: (pipeline_config, fit callable)."""
    pipeline_config = _pipeline_config(args, file_config)
    if args.model == "hcrf":
        training_config = _training_config(args, file_config)

        def fit(sequences, labels):
            predictor, trace = fit_predictor(list(zip(sequences, labels)), training_config)
            log.info(
                "hcrf training %s after %d evaluations, objective %.6f",
                trace.status,
                len(trace.entries),
                trace.entries[-1].objective,
            )
            return predictor, {"training": dataclasses.asdict(training_config)}

        return pipeline_config, fit

    logreg_section = dict(file_config.get("logreg", {}))
    c_value = float(logreg_section.pop("c", 1.0))
    if logreg_section:
        raise ConfigurationError(f"unknown logreg keys {sorted(logreg_section)}")
    seed = args.seed if args.seed is not None else 0

    def fit(sequences, labels):
        matrix = np.stack([aggregate_document_vector(s) for s in sequences])
        predictor = LogRegPredictor(train_logreg(matrix, labels, c=c_value, seed=seed))
        return predictor, {"logreg": {"c": c_value, "seed": seed}}

    return pipeline_config, fit


def cmd_train(args) -> int:
    file_config = _load_config_file(args.config)
    out_dir = _prepare_out_dir(args.out)
    _configure_logging(out_dir)
    pipeline_config, fit = _fit_from_args(args, file_config)
    labeled = _labeled_corpus(args.corpus, pipeline_config.threshold_ms)

    pipeline = FeaturePipeline(pipeline_config).fit(labeled)
    log.info("feature dimension %d", pipeline.schema.dim)
    sequences = pipeline.transform_corpus(labeled)
    labels = [doc.polarity for doc in labeled]
    predictor, model_resolved = fit(sequences, labels)

    resolved = {
        "command": "train",
        "corpus": args.corpus,
        "model": args.model,
        "pipeline": dataclasses.asdict(pipeline_config),
        **model_resolved,
    }
    _write_resolved_config(out_dir, resolved)
    model_path = out_dir / "model.json"
    save_archive(model_path, predictor, pipeline)
    correct = sum(predictor.predict(s) == y for s, y in zip(sequences, labels))
    log.info("training accuracy %.4f", correct / len(labels))
    print(f"saved model to {model_path} (training accuracy {100 * correct / len(labels):.1f}%)")
    return 0


def cmd_predict(args) -> int:
    out_dir = _prepare_out_dir(args.out)
    _configure_logging(out_dir)
    _write_resolved_config(
        out_dir, {"command": "predict", "corpus": args.corpus, "model": args.model}
    )
    loaded = load_archive(args.model)
    corpus = load_corpus(args.corpus)
    if not corpus:
        raise InvalidInputError(f"{args.corpus}: empty corpus")
    names = loaded.label_names
    lines = [PREDICTIONS_VERSION, "doc_id\tpredicted\t" + "\t".join(f"p_{n}" for n in names)]
    for doc in corpus:
        label, posterior = loaded.predict_transcript(doc)
        lines.append(
            doc.doc_id
            + "\t"
            + names[label]
            + "\t"
            + "\t".join(repr(float(p)) for p in posterior)
        )
    path = out_dir / "predictions.tsv"
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    log.info("predicted %d documents with the %s model", len(corpus), loaded.kind)
    print(f"wrote {len(corpus)} predictions to {path}")
    return 0


def cmd_evaluate(args) -> int:
    file_config = _load_config_file(args.config)
    out_dir = _prepare_out_dir(args.out)
    _configure_logging(out_dir)
    pipeline_config = _pipeline_config(args, file_config)
    labeled = _labeled_corpus(args.corpus, pipeline_config.threshold_ms)

    eval_section = dict(file_config.get("evaluate", {}))
    folds = args.folds if args.folds is not None else int(eval_section.pop("folds", 10))
    eval_section.pop("folds", None)
    if eval_section:
        raise ConfigurationError(f"unknown evaluate keys {sorted(eval_section)}")
    seed = args.seed if args.seed is not None else 0

    if args.model == "hcrf":
        training_config = _training_config(args, file_config)
        learner = HcrfLearner(config=training_config)
        model_resolved = {"training": dataclasses.asdict(training_config)}
    else:
        logreg_section = dict(file_config.get("logreg", {}))
        c_grid = tuple(float(c) for c in logreg_section.pop("c_grid", ())) or (
            float(logreg_section.pop("c", 1.0)),
        )
        logreg_section.pop("c", None)
        if logreg_section:
            raise ConfigurationError(f"unknown logreg keys {sorted(logreg_section)}")
        learner = LogRegLearner(c_grid=c_grid, seed=seed)
        model_resolved = {"logreg": {"c_grid": list(c_grid), "seed": seed}}

    resolved = {
        "command": "evaluate",
        "corpus": args.corpus,
        "model": args.model,
        "folds": folds,
        "seed": seed,
        "pipeline": dataclasses.asdict(pipeline_config),
        **model_resolved,
    }
    _write_resolved_config(out_dir, resolved)

    report, details = cross_validate(
        labeled, pipeline_config, learner, k=folds, seed=seed, return_details=True
    )
    (out_dir / "report.txt").write_text(report.render_text(), encoding="utf-8")
    report_doc = report.to_jsonable()
    report_doc["folds"] = [
        {
            "fold": d.fold_index,
            "test_doc_ids": list(d.test_doc_ids),
            "pipeline_checksum": d.pipeline_checksum,
            "selection": d.selection,
        }
        for d in details
    ]
    (out_dir / "report.json").write_text(canonical_json(report_doc), encoding="utf-8")
    log.info(
        "%d-fold accuracy %.2f, weighted F1 %.2f", folds, report.accuracy, report.weighted_f1
    )
    print(report.render_text(), end="")
    return 0


def cmd_inspect(args) -> int:
    out_dir = _prepare_out_dir(args.out)
    _configure_logging(out_dir)
    _write_resolved_config(
        out_dir,
        {
            "command": "inspect",
            "model": args.model,
            "corpus": args.corpus,
            "top_k": args.top_k,
        },
    )
    loaded = load_archive(args.model)
    if loaded.kind != "hcrf":
        raise ConfigurationError("state reports require an hcrf archive")

    table = loaded.pipeline._resources.embedding
    vocab: list[str] = []
    if args.corpus is not None and table is not None:
        normalizer = get_normalizer(loaded.pipeline.config.normalizer)
        words = set()
        for doc in load_corpus(args.corpus):
            words.update(tokenize_many([t.text for t in doc.tokens], normalizer))
        vocab = sorted(words)
    report = build_state_report(
        loaded.predictor.params,
        loaded.pipeline.schema,
        k=args.top_k,
        embedding_table=table if vocab else None,
        corpus_vocab=vocab,
        label_names=loaded.label_names,
    )
    (out_dir / "state_report.txt").write_text(report.render_text(), encoding="utf-8")
    (out_dir / "state_report.json").write_text(
        canonical_json(report.to_jsonable()), encoding="utf-8"
    )
    print(report.render_text(), end="")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="opinionchain",
        description="Whole-sequence opinion classification of pause-segmented transcripts.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, corpus=True):
        if corpus:
            p.add_argument("--corpus", required=True, help="corpus directory (manifest.tsv)")
        p.add_argument("--out", required=True, help="run directory for outputs")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--config", default=None, help="JSON config file")

    def add_pipeline_flags(p):
        p.add_argument("--threshold-ms", type=int, default=None, dest="threshold_ms")
        p.add_argument(
            "--features",
            default=None,
            help="comma-separated blocks: bong,embedding,lexicon,pattern,paralinguistic",
        )

    def add_model_flags(p):
        p.add_argument("--model", choices=("hcrf", "logreg"), default="hcrf")
        p.add_argument("--hidden-states", type=int, default=None, dest="hidden_states")
        p.add_argument("--context-window", type=int, default=None, dest="context_window")
        p.add_argument("--l2", type=float, default=None)

    p = sub.add_parser("generate", help="emit a synthetic opinion-dynamics corpus")
    add_common(p, corpus=False)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("segment", help="materialize IPU indices for a corpus")
    add_common(p)
    p.add_argument("--threshold-ms", type=int, default=None, dest="threshold_ms")
    p.set_defaults(func=cmd_segment)

    p = sub.add_parser("train", help="fit a model on every labeled document")
    add_common(p)
    add_pipeline_flags(p)
    add_model_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="apply a saved model to a corpus")
    p.add_argument("--model", required=True, help="model archive (model.json)")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--config", default=None)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("evaluate", help="stratified cross-validation with a report")
    add_common(p)
    add_pipeline_flags(p)
    add_model_flags(p)
    p.add_argument("--folds", type=int, default=None)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("inspect", help="state report for a trained hcrf archive")
    p.add_argument("--model", required=True, help="model archive (model.json)")
    p.add_argument("--corpus", default=None, help="corpus for activation words")
    p.add_argument("--out", required=True)
    p.add_argument("--top-k", type=int, default=10, dest="top_k")
    p.add_argument("--config", default=None)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_inspect)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except _HANDLED_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
