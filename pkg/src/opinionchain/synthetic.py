"""Synthetic opinion-dynamics corpora with a known analytic ceiling.

Each document is a sequence of pause-separated segments.  The final
``decisive_segments`` segments carry the document's true polarity; every
earlier segment matches the label independently with probability
``match_prob``.  A segment holds ``polar_tokens_per_segment`` words
drawn from its polarity's vocabulary plus a few neutral words, so the
label is decided by WHERE the polarity sits, not how much of it there
is.

Because token identities and neutral counts are drawn identically for
both labels given the segment polarities, the whole token multiset tells
an order-insensitive classifier nothing beyond (sequence length, number
of positive segments).  ``order_insensitive_bayes_accuracy`` exhausts
the finite outcome space of polarity sequences and returns the exact
optimum any order-blind model can reach; sequence-aware models can
instead read the final segment directly.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .corpus import Transcript, TranscriptToken
from .errors import EnumerationBudgetError, InvalidInputError

ENUMERATION_BUDGET = 10**6


@dataclass(frozen=True)
class SyntheticSpec:
    num_docs_per_label: int = 250
    min_segments: int = 4
    max_segments: int = 8
    decisive_segments: int = 1
    match_prob: float = 0.5
    polar_tokens_per_segment: int = 1
    neutral_tokens_per_segment: tuple[int, int] = (1, 3)
    num_polar_words: int = 6  # per polarity
    num_neutral_words: int = 20
    embedding_dim: int = 8
    embedding_separation: float = 1.0
    embedding_noise: float = 0.1
    word_ms: int = 200
    within_gap_ms: int = 100  # below every standard threshold
    between_gap_ms: int = 600  # above every standard threshold

    def __post_init__(self):
        if self.num_docs_per_label < 1:
            raise InvalidInputError("num_docs_per_label must be >= 1")
        if not 1 <= self.min_segments <= self.max_segments:
            raise InvalidInputError("need 1 <= min_segments <= max_segments")
        if not 1 <= self.decisive_segments <= self.min_segments:
            raise InvalidInputError(
                "decisive_segments must be in [1, min_segments]"
            )
        if not 0.0 <= self.match_prob <= 1.0:
            raise InvalidInputError("match_prob must be a probability")
        if self.polar_tokens_per_segment < 1 or self.num_polar_words < 1:
            raise InvalidInputError("spec needs polarity-bearing tokens")
        lo, hi = self.neutral_tokens_per_segment
        if not 0 <= lo <= hi:
            raise InvalidInputError("bad neutral_tokens_per_segment range")
        if hi > 0 and self.num_neutral_words < 1:
            raise InvalidInputError("neutral tokens requested but vocabulary empty")
        if self.embedding_dim < 1:
            raise InvalidInputError("embedding_dim must be >= 1")
        if not 0 < self.within_gap_ms < self.between_gap_ms:
            raise InvalidInputError("need 0 < within_gap_ms < between_gap_ms")


def vocabulary(spec: SyntheticSpec):
    positive = [f"pos{i}" for i in range(spec.num_polar_words)]
    negative = [f"neg{i}" for i in range(spec.num_polar_words)]
    neutral = [f"neu{i}" for i in range(spec.num_neutral_words)]
    return positive, negative, neutral


def _segment_polarities(spec: SyntheticSpec, label: int, rng) -> list[int]:
    """Per-segment polarity (0/1); the final decisive ones equal the label."""
    length = int(rng.integers(spec.min_segments, spec.max_segments + 1))
    free = length - spec.decisive_segments
    matches = rng.random(free) < spec.match_prob
    head = [label if m else 1 - label for m in matches]
    return head + [label] * spec.decisive_segments


def _segment_tokens(spec: SyntheticSpec, polarity: int, rng, words) -> list[str]:
    positive, negative, neutral = words
    pool = positive if polarity == 1 else negative
    polar = [pool[int(i)] for i in rng.integers(len(pool), size=spec.polar_tokens_per_segment)]
    lo, hi = spec.neutral_tokens_per_segment
    n_neutral = int(rng.integers(lo, hi + 1))
    toks = polar + [neutral[int(i)] for i in rng.integers(max(1, len(neutral)), size=n_neutral)]
    rng.shuffle(toks)
    return toks


def generate_corpus(spec: SyntheticSpec, seed: int) -> list[Transcript]:
    """Deterministic labeled corpus; positive docs get valence 5, negative 1.

    Documents alternate positive/negative in id order.  Within-segment
    gaps stay below and between-segment gaps above all the standard
    pause thresholds, so segmentation recovers the intended segments.
    """
    rng = np.random.default_rng(seed)
    words = vocabulary(spec)
    corpus = []
    for i in range(2 * spec.num_docs_per_label):
        label = 1 if i % 2 == 0 else 0
        polarities = _segment_polarities(spec, label, rng)
        tokens = []
        t = 0
        for j, polarity in enumerate(polarities):
            if j > 0:
                t += spec.between_gap_ms
            for k, text in enumerate(_segment_tokens(spec, polarity, rng, words)):
                if k > 0:
                    t += spec.within_gap_ms
                tokens.append(TranscriptToken(text, t, t + spec.word_ms))
                t += spec.word_ms
        corpus.append(
            Transcript(
                doc_id=f"syn{i:04d}",
                tokens=tuple(tokens),
                valences=(5.0,) if label == 1 else (1.0,),
            )
        )
    return corpus


def generate_embeddings(spec: SyntheticSpec, seed: int) -> dict:
    """word -> vector table separating the two polar vocabularies along
    the first axis, with isotropic noise; neutral words are pure noise."""
    rng = np.random.default_rng(seed)
    positive, negative, neutral = vocabulary(spec)
    table = {}
    for word in positive + negative + neutral:
        vec = spec.embedding_noise * rng.standard_normal(spec.embedding_dim)
        if word in positive:
            vec[0] += spec.embedding_separation
        elif word in negative:
            vec[0] -= spec.embedding_separation
        table[word] = vec
    return table


def write_embeddings(table: dict, path):
    lines = [
        word + " " + " ".join(repr(float(v)) for v in vec)
        for word, vec in table.items()
    ]
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def order_insensitive_bayes_accuracy(spec: SyntheticSpec) -> float:
    """Exact optimal accuracy of any classifier blind to segment order.

    Enumerates every polarity sequence the generator can emit.  Given
    the per-segment polarities, everything else (token identities,
    neutral counts, timing) is drawn from label-independent
    distributions, so the only label evidence in a bag of tokens is the
    pair (L, number of positive segments); the optimum picks the likelier
    label per pair.  Balanced label prior, ties split 50/50.
    """
    lengths = range(spec.min_segments, spec.max_segments + 1)
    total_patterns = sum(2 ** (L - spec.decisive_segments) for L in lengths)
    if total_patterns > ENUMERATION_BUDGET:
        raise EnumerationBudgetError(
            f"{total_patterns} polarity sequences exceed the budget {ENUMERATION_BUDGET}"
        )

    # mass[(L, n_pos)][y] accumulated by brute enumeration
    mass: dict[tuple[int, int], list[float]] = {}
    length_prob = 1.0 / len(list(lengths))
    for L in lengths:
        free = L - spec.decisive_segments
        for pattern in itertools.product((True, False), repeat=free):
            n_match = sum(pattern)
            p_pattern = (
                spec.match_prob**n_match * (1.0 - spec.match_prob) ** (free - n_match)
            )
            if p_pattern == 0.0:
                continue
            for y in (0, 1):
                matching_polarity_count = n_match if y == 1 else free - n_match
                n_pos = matching_polarity_count + (
                    spec.decisive_segments if y == 1 else 0
                )
                key = (L, n_pos)
                mass.setdefault(key, [0.0, 0.0])[y] += length_prob * p_pattern
    correct = 0.0
    for p_neg, p_pos in mass.values():
        correct += 0.5 * max(p_neg, p_pos)
    return correct
