"""Lossless persistence for trained models and their feature pipelines.

Archives are canonical JSON: sorted keys, two-space indent, no NaN or
infinity, one trailing newline.  Floats go through Python's shortest
round-trip repr, so save → load → save reproduces identical bytes and a
loaded model re-predicts any dataset bitwise.

Static resource files (lexicons, embeddings, word lists) are not copied
into the archive; their resolved paths and content digests are.  Loading
re-reads them and refuses to proceed when a digest has drifted, since
silently changed resources would break the re-prediction guarantee.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .baseline import LogRegModel, LogRegPredictor
from .corpus import LABEL_NAMES, Transcript
from .errors import FileFormatError
from .features.ngrams import NGramVocabulary
from .features.pipeline import (
    FeatureSchema,
    FittedFeaturePipeline,
    PipelineConfig,
    _load_resources,
)
from .features.resources import default_resource_path
from .features.standardize import Standardizer
from .model import HcrfParameters, ObservationSequence
from .training import HcrfPredictor, TrainingConfig

ARCHIVE_FORMAT = "model-archive/v1"


def canonical_json(doc) -> str:
    return json.dumps(doc, sort_keys=True, indent=2, allow_nan=False) + "\n"


def _sha256(path: Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _resource_paths(config: PipelineConfig) -> dict[str, Path]:
    """Every static file the pipeline reads, keyed by role."""

    def resolved(value, name):
        return Path(value) if value else default_resource_path(name)

    paths: dict[str, Path] = {}
    blocks = config.blocks
    if "embedding" in blocks:
        paths["embedding"] = Path(config.embedding_path)
        paths["stopwords"] = resolved(config.stopwords_path, "stopwords")
    for i, lex in enumerate(config.lexicon_paths if "lexicon" in blocks else ()):
        paths[f"lexicon:{i}"] = Path(lex)
    if "lexicon" in blocks or "pattern" in blocks:
        paths["negations"] = resolved(config.negations_path, "negations")
        paths["amplifiers"] = resolved(config.amplifiers_path, "amplifiers")
        paths["downtoners"] = resolved(config.downtoners_path, "downtoners")
    if "pattern" in blocks:
        paths["disfluencies"] = resolved(config.disfluencies_path, "disfluencies")
        paths["tagger_lexicon"] = resolved(config.tagger_lexicon_path, "tagger_lexicon")
    if "paralinguistic" in blocks:
        paths["markers"] = resolved(config.markers_path, "markers")
    return paths


def _pipeline_doc(pipeline: FittedFeaturePipeline) -> dict:
    vocab = pipeline.vocabulary
    std = pipeline.standardizer
    return {
        "config": dataclasses.asdict(pipeline.config),
        "schema": pipeline.schema.to_jsonable(),
        "vocabulary": None
        if vocab is None
        else {
            "terms": list(vocab.terms),
            "doc_freq": vocab.doc_freq.tolist(),
            "num_docs": vocab.num_docs,
            "max_order": vocab.max_order,
        },
        "standardizer": None
        if std is None
        else {"mean": std.mean.tolist(), "std": std.std.tolist()},
    }


def _model_doc(predictor) -> tuple[str, dict]:
    if isinstance(predictor, HcrfPredictor):
        theta = predictor.params
        return "hcrf", {
            "theta_obs": theta.theta_obs.tolist(),
            "theta_state": theta.theta_state.tolist(),
            "theta_trans": theta.theta_trans.tolist(),
            "training": dataclasses.asdict(predictor.config),
        }
    if isinstance(predictor, LogRegPredictor):
        model = predictor.model
        return "logreg", {
            "weights": model.weights.tolist(),
            "intercept": model.intercept,
            "c": model.c,
        }
    raise FileFormatError(f"cannot archive predictor of type {type(predictor).__name__}")


def save_archive(
    path,
    predictor,
    pipeline: FittedFeaturePipeline,
    label_names: tuple[str, ...] = LABEL_NAMES,
) -> None:
    kind, model_doc = _model_doc(predictor)
    doc = {
        "format": ARCHIVE_FORMAT,
        "kind": kind,
        "label_names": list(label_names),
        "pipeline": _pipeline_doc(pipeline),
        "resources": {
            role: {"sha256": _sha256(p)}
            for role, p in sorted(_resource_paths(pipeline.config).items())
        },
        "model": model_doc,
    }
    Path(path).write_text(canonical_json(doc), encoding="utf-8")


@dataclass(frozen=True, eq=False)
class LoadedModel:
    kind: str  # "hcrf" | "logreg"
    pipeline: FittedFeaturePipeline
    predictor: HcrfPredictor | LogRegPredictor
    label_names: tuple[str, ...]

    def predict_sequence(self, seq: ObservationSequence) -> tuple[int, np.ndarray]:
        if self.kind == "hcrf":
            post = self.predictor.posterior(seq)
            return int(np.argmax(post)), post
        prob = self.predictor.predict_proba(seq)
        return self.predictor.predict(seq), np.array([1.0 - prob, prob])

    def predict_transcript(self, doc: Transcript) -> tuple[int, np.ndarray]:
        return self.predict_sequence(self.pipeline.transform(doc))


def _check_resource_digests(config: PipelineConfig, stored: dict, archive_path):
    problems = []
    current = {role: str(p) for role, p in _resource_paths(config).items()}
    for role in sorted(set(stored) | set(current)):
        if role not in current:
            problems.append((str(archive_path), 0, f"archived resource {role!r} is no longer used"))
            continue
        if role not in stored:
            problems.append((str(archive_path), 0, f"resource {role!r} missing from archive"))
            continue
        path = Path(current[role])
        if not path.exists():
            problems.append((str(archive_path), 0, f"resource {role!r} not found at {path}"))
            continue
        digest = _sha256(path)
        if digest != stored[role]["sha256"]:
            problems.append(
                (str(archive_path), 0, f"resource {role!r} at {path} changed since archiving")
            )
    if problems:
        raise FileFormatError(
            "archived resources drifted; re-train or pass allow_resource_drift=True",
            problems,
        )


def load_archive(path, allow_resource_drift: bool = False) -> LoadedModel:
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise FileFormatError(f"{path}: cannot read archive: {exc}") from None
    if not isinstance(doc, dict) or doc.get("format") != ARCHIVE_FORMAT:
        raise FileFormatError(f"{path}: not a {ARCHIVE_FORMAT} file")

    pipe_doc = doc["pipeline"]
    config = PipelineConfig(**pipe_doc["config"])
    if not allow_resource_drift:
        _check_resource_digests(config, doc["resources"], path)

    vocab = None
    if pipe_doc["vocabulary"] is not None:
        v = pipe_doc["vocabulary"]
        vocab = NGramVocabulary(
            terms=tuple(v["terms"]),
            doc_freq=np.array(v["doc_freq"], dtype=np.int64),
            num_docs=int(v["num_docs"]),
            max_order=int(v["max_order"]),
        )
    standardizer = None
    if pipe_doc["standardizer"] is not None:
        s = pipe_doc["standardizer"]
        standardizer = Standardizer(
            mean=np.array(s["mean"], dtype=np.float64),
            std=np.array(s["std"], dtype=np.float64),
        )
    pipeline = FittedFeaturePipeline(
        config=config,
        schema=FeatureSchema.from_jsonable(pipe_doc["schema"]),
        vocabulary=vocab,
        standardizer=standardizer,
        _resources=_load_resources(config),
    )

    model_doc = doc["model"]
    if doc["kind"] == "hcrf":
        predictor = HcrfPredictor(
            params=HcrfParameters(
                theta_obs=np.array(model_doc["theta_obs"], dtype=np.float64),
                theta_state=np.array(model_doc["theta_state"], dtype=np.float64),
                theta_trans=np.array(model_doc["theta_trans"], dtype=np.float64),
            ),
            config=TrainingConfig(**model_doc["training"]),
        )
    elif doc["kind"] == "logreg":
        predictor = LogRegPredictor(
            LogRegModel(
                weights=np.array(model_doc["weights"], dtype=np.float64),
                intercept=float(model_doc["intercept"]),
                c=float(model_doc["c"]),
            )
        )
    else:
        raise FileFormatError(f"{path}: unknown model kind {doc['kind']!r}")
    return LoadedModel(
        kind=doc["kind"],
        pipeline=pipeline,
        predictor=predictor,
        label_names=tuple(doc["label_names"]),
    )
