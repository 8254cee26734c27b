"""End-to-end featurization: transcripts -> per-IPU observation sequences.

``FeaturePipeline.fit`` learns everything that depends on data (n-gram
vocabulary with IDF, standardizer statistics) from the given training
documents only; the returned ``FittedFeaturePipeline`` is immutable and
its ``transform`` is a pure function, so fitting on a training fold and
transforming held-out documents cannot leak fold statistics.

Feature blocks are concatenated in a fixed canonical order (bong |
embedding | lexicon | pattern | paralinguistic) and the layout is
recorded as a ``FeatureSchema`` for downstream introspection.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

import numpy as np

from ..corpus import Transcript
from ..errors import ConfigurationError, InvalidInputError
from ..model import ObservationSequence
from . import resources as res
from .embeddings import EmbeddingTable, embed_tokens, load_embeddings
from .lexicons import Lexicon, lexicon_features, load_lexicon
from .ngrams import NGramVocabulary, fit_bong, vectorize_bong
from .paralinguistic import FEATURE_NAMES as PARA_NAMES
from .paralinguistic import paralinguistic_features
from .patterns import DEFAULT_TAG_SET, pattern_feature_names, pattern_features
from .segmentation import segment_into_ipus
from .standardize import Standardizer, fit_standardizer
from .tokenizer import get_normalizer, tokenize_many

CANONICAL_BLOCKS = ("bong", "embedding", "lexicon", "pattern", "paralinguistic")
DEFAULT_BLOCKS = ("bong", "pattern", "paralinguistic")


@dataclass(frozen=True)
class PipelineConfig:
    """What to extract and from which resources.

    Blocks needing external files (``embedding``, ``lexicon``) must be
    pointed at their paths; the remaining resources fall back to the
    files shipped with the package when their path is None.
    """

    threshold_ms: int = 300
    blocks: tuple[str, ...] = DEFAULT_BLOCKS
    normalizer: str = "identity"
    bong_max_order: int = 3
    bong_min_df: int = 1
    embedding_path: str | None = None
    embedding_lowercase: bool = True
    lexicon_paths: tuple[str, ...] = ()
    tag_set: tuple[str, ...] = DEFAULT_TAG_SET
    standardize: bool = True
    stopwords_path: str | None = None
    markers_path: str | None = None
    negations_path: str | None = None
    amplifiers_path: str | None = None
    downtoners_path: str | None = None
    disfluencies_path: str | None = None
    tagger_lexicon_path: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "blocks", tuple(self.blocks))
        object.__setattr__(self, "lexicon_paths", tuple(self.lexicon_paths))
        object.__setattr__(self, "tag_set", tuple(self.tag_set))
        unknown = sorted(set(self.blocks) - set(CANONICAL_BLOCKS))
        if unknown:
            raise ConfigurationError(
                f"unknown feature blocks {unknown}; known: {list(CANONICAL_BLOCKS)}"
            )
        if not self.blocks:
            raise ConfigurationError("at least one feature block must be enabled")
        if len(set(self.blocks)) != len(self.blocks):
            raise ConfigurationError(f"duplicate feature blocks: {self.blocks}")
        ordered = tuple(b for b in CANONICAL_BLOCKS if b in self.blocks)
        object.__setattr__(self, "blocks", ordered)
        if self.threshold_ms <= 0:
            raise ConfigurationError("threshold_ms must be positive")
        if "embedding" in self.blocks and not self.embedding_path:
            raise ConfigurationError("embedding block enabled but embedding_path missing")
        if "lexicon" in self.blocks and not self.lexicon_paths:
            raise ConfigurationError("lexicon block enabled but lexicon_paths empty")


@dataclass(frozen=True)
class FeatureSchema:
    """Block layout of a feature vector: (name, offset, width) triples
    plus one human-readable name per dimension."""

    blocks: tuple[tuple[str, int, int], ...]
    feature_names: tuple[str, ...]

    def __post_init__(self):
        expected = 0
        for name, offset, width in self.blocks:
            if offset != expected or width < 0:
                raise ConfigurationError(f"schema block {name!r} is not contiguous")
            expected = offset + width
        if len(self.feature_names) != expected:
            raise ConfigurationError(
                f"{len(self.feature_names)} feature names for dimension {expected}"
            )

    @property
    def dim(self) -> int:
        if not self.blocks:
            return 0
        name, offset, width = self.blocks[-1]
        return offset + width

    def block_slice(self, name: str) -> slice:
        for block, offset, width in self.blocks:
            if block == name:
                return slice(offset, offset + width)
        raise KeyError(f"no block named {name!r}")

    def to_jsonable(self) -> dict:
        return {
            "blocks": [list(b) for b in self.blocks],
            "feature_names": list(self.feature_names),
        }

    @classmethod
    def from_jsonable(cls, data: dict) -> "FeatureSchema":
        return cls(
            blocks=tuple((n, int(o), int(w)) for n, o, w in data["blocks"]),
            feature_names=tuple(data["feature_names"]),
        )


@dataclass(frozen=True)
class _Resources:
    stopwords: frozenset = frozenset()
    marker_map: dict = field(default_factory=dict)
    modifiers: object = None
    pattern: object = None
    tagger: object = None
    embedding: EmbeddingTable | None = None
    lexicons: tuple[Lexicon, ...] = ()


def _load_resources(config: PipelineConfig) -> _Resources:
    kwargs = {}
    if "embedding" in config.blocks:
        kwargs["embedding"] = load_embeddings(
            config.embedding_path, lowercase=config.embedding_lowercase
        )
        kwargs["stopwords"] = res.load_stopwords(config.stopwords_path)
    if "lexicon" in config.blocks:
        kwargs["lexicons"] = tuple(load_lexicon(p) for p in config.lexicon_paths)
        kwargs["modifiers"] = res.load_modifier_lists(
            config.negations_path, config.amplifiers_path, config.downtoners_path
        )
    if "pattern" in config.blocks:
        kwargs["pattern"] = res.load_pattern_resources(
            tag_set=config.tag_set,
            negations_path=config.negations_path,
            amplifiers_path=config.amplifiers_path,
            downtoners_path=config.downtoners_path,
            disfluencies_path=config.disfluencies_path,
        )
        kwargs["tagger"] = res.load_tagger(
            config.tagger_lexicon_path, tag_set=config.tag_set
        )
    if "paralinguistic" in config.blocks:
        kwargs["marker_map"] = res.load_marker_map(config.markers_path)
    return _Resources(**kwargs)


def _doc_ipu_tokens(doc: Transcript, config: PipelineConfig, normalizer):
    ipus = segment_into_ipus(doc, config.threshold_ms)
    return ipus, [tokenize_many(ipu.tokens, normalizer) for ipu in ipus]


class FeaturePipeline:
    """Unfitted pipeline; ``fit`` returns the immutable fitted form."""

    def __init__(self, config: PipelineConfig):
        self.config = config

    def fit(self, train_docs: list[Transcript]) -> "FittedFeaturePipeline":
        if not train_docs:
            raise InvalidInputError("cannot fit a pipeline on zero documents")
        config = self.config
        loaded = _load_resources(config)
        normalizer = get_normalizer(config.normalizer)

        vocab = None
        if "bong" in config.blocks:
            doc_tokens = []
            for doc in train_docs:
                _, per_ipu = _doc_ipu_tokens(doc, config, normalizer)
                doc_tokens.append([tok for toks in per_ipu for tok in toks])
            vocab = fit_bong(
                doc_tokens, max_order=config.bong_max_order, min_df=config.bong_min_df
            )

        schema = _build_schema(config, loaded, vocab)
        fitted = FittedFeaturePipeline(
            config=config,
            schema=schema,
            vocabulary=vocab,
            standardizer=None,
            _resources=loaded,
        )
        if config.standardize:
            rows = [
                row
                for doc in train_docs
                for row in fitted._raw_matrix(doc)
            ]
            fitted = FittedFeaturePipeline(
                config=config,
                schema=schema,
                vocabulary=vocab,
                standardizer=fit_standardizer(np.array(rows)),
                _resources=loaded,
            )
        return fitted


def _build_schema(config, loaded: _Resources, vocab) -> FeatureSchema:
    blocks = []
    names: list[str] = []
    offset = 0
    for block in config.blocks:
        if block == "bong":
            local = [f"bong:{t}" for t in vocab.terms]
        elif block == "embedding":
            table = loaded.embedding
            local = [f"emb:dim{i}" for i in range(table.dim)] + ["emb:coverage"]
        elif block == "lexicon":
            local = [
                f"lex:{channel}"
                for lexicon in loaded.lexicons
                for channel in lexicon.output_channels
            ]
        elif block == "pattern":
            local = [f"pat:{n}" for n in pattern_feature_names(config.tag_set)]
        else:
            local = [f"para:{n.removeprefix('para_')}" for n in PARA_NAMES]
        blocks.append((block, offset, len(local)))
        names.extend(local)
        offset += len(local)
    return FeatureSchema(blocks=tuple(blocks), feature_names=tuple(names))


@dataclass(frozen=True)
class FittedFeaturePipeline:
    config: PipelineConfig
    schema: FeatureSchema
    vocabulary: NGramVocabulary | None
    standardizer: Standardizer | None
    _resources: _Resources

    def _ipu_vector(self, ipu, tokens) -> np.ndarray:
        config, loaded = self.config, self._resources
        parts = []
        for block in config.blocks:
            if block == "bong":
                parts.append(vectorize_bong(tokens, self.vocabulary))
            elif block == "embedding":
                parts.append(embed_tokens(tokens, loaded.embedding, loaded.stopwords))
            elif block == "lexicon":
                parts.append(lexicon_features(tokens, loaded.lexicons, loaded.modifiers))
            elif block == "pattern":
                tags = loaded.tagger.tag(tokens)
                parts.append(pattern_features(tokens, tags, loaded.pattern))
            else:
                parts.append(
                    paralinguistic_features(ipu.para_events, loaded.marker_map)
                )
        return np.concatenate(parts)

    def _raw_matrix(self, doc: Transcript) -> np.ndarray:
        normalizer = get_normalizer(self.config.normalizer)
        ipus, per_ipu_tokens = _doc_ipu_tokens(doc, self.config, normalizer)
        if not ipus:
            raise InvalidInputError(
                f"{doc.doc_id}: no IPUs (tokenless document cannot be featurized)"
            )
        return np.array(
            [self._ipu_vector(ipu, toks) for ipu, toks in zip(ipus, per_ipu_tokens)]
        )

    def transform(self, doc: Transcript) -> ObservationSequence:
        matrix = self._raw_matrix(doc)
        if self.standardizer is not None:
            matrix = self.standardizer.apply(matrix)
        return ObservationSequence(doc_id=doc.doc_id, features=matrix)

    def transform_corpus(self, docs) -> list[ObservationSequence]:
        return [self.transform(doc) for doc in docs]

    def state_checksum(self) -> str:
        """Digest of everything learned from data; used to prove that
        held-out documents do not influence the fit."""
        payload: dict = {"config_blocks": list(self.config.blocks)}
        if self.vocabulary is not None:
            payload["vocab"] = {
                "terms": list(self.vocabulary.terms),
                "doc_freq": self.vocabulary.doc_freq.tolist(),
                "num_docs": self.vocabulary.num_docs,
            }
        if self.standardizer is not None:
            payload["standardizer"] = {
                "mean": self.standardizer.mean.tolist(),
                "std": self.standardizer.std.tolist(),
            }
        blob = json.dumps(payload, sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()
