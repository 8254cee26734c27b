"""Linguistic pattern counts per IPU and the fallback rule tagger.

The tagger is intentionally small: a closed-class lexicon plus suffix
heuristics, just rich enough for the pattern counters.  Any POS tagger
producing the same tag strings can be plugged in instead, and pre-tagged
input is accepted directly by ``pattern_features``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import InvalidInputError

# default tag set: six content/function classes plus interjections and
# pronouns; configurable because downstream counters just count tags
DEFAULT_TAG_SET = ("ADJ", "ADV", "NOUN", "VERB", "CONJ", "PREP", "INTJ", "PRON")
OTHER_TAG = "OTHER"

_SUFFIX_RULES = (
    ("ly", "ADV"),
    ("ing", "VERB"),
    ("ed", "VERB"),
    ("ize", "VERB"),
    ("ise", "VERB"),
    ("ous", "ADJ"),
    ("ful", "ADJ"),
    ("ive", "ADJ"),
    ("able", "ADJ"),
    ("ible", "ADJ"),
    ("ic", "ADJ"),
    ("al", "ADJ"),
    ("est", "ADJ"),
    ("tion", "NOUN"),
    ("sion", "NOUN"),
    ("ness", "NOUN"),
    ("ment", "NOUN"),
    ("ity", "NOUN"),
    ("er", "NOUN"),
    ("ism", "NOUN"),
)


@dataclass(frozen=True)
class RuleTagger:
    """Lexicon lookup first, then longest-suffix heuristic, else NOUN."""

    lexicon: dict  # lowercased word -> tag
    tag_set: tuple[str, ...] = DEFAULT_TAG_SET

    def __post_init__(self):
        bad = sorted(
            {t for t in self.lexicon.values()} - set(self.tag_set) - {OTHER_TAG}
        )
        if bad:
            raise InvalidInputError(f"tagger lexicon uses unknown tags: {bad}")

    def tag(self, tokens) -> list[str]:
        out = []
        for token in tokens:
            low = token.lower()
            tag = self.lexicon.get(low)
            if tag is None:
                tag = "NOUN"
                for suffix, candidate in sorted(
                    _SUFFIX_RULES, key=lambda r: -len(r[0])
                ):
                    if len(low) > len(suffix) + 1 and low.endswith(suffix):
                        tag = candidate
                        break
            out.append(tag)
        return out


@dataclass(frozen=True)
class PatternResources:
    negations: frozenset
    amplifiers: frozenset
    downtoners: frozenset
    disfluencies: frozenset
    tag_set: tuple[str, ...] = DEFAULT_TAG_SET


def pattern_feature_names(tag_set=DEFAULT_TAG_SET) -> tuple[str, ...]:
    return (
        "adj_noun",
        "negation",
        "amplifier",
        "downtoner",
        "disfluency",
        "capitalized",
    ) + tuple(f"pos_{t.lower()}" for t in tag_set)


def pattern_features(tokens, tags, resources: PatternResources) -> np.ndarray:
    """Counts: adjective+noun bigrams, negations, amplifiers, downtoners,
    disfluencies, capitalized tokens, then one count per tag."""
    tokens = list(tokens)
    tags = list(tags)
    if len(tokens) != len(tags):
        raise InvalidInputError(
            f"{len(tokens)} tokens vs {len(tags)} tags; must align 1:1"
        )
    lows = [t.lower() for t in tokens]
    adj_noun = sum(
        1 for a, b in zip(tags, tags[1:]) if a == "ADJ" and b == "NOUN"
    )
    counts = [
        float(adj_noun),
        float(sum(1 for t in lows if t in resources.negations)),
        float(sum(1 for t in lows if t in resources.amplifiers)),
        float(sum(1 for t in lows if t in resources.downtoners)),
        float(sum(1 for t in lows if t in resources.disfluencies)),
        float(sum(1 for t in tokens if t[:1].isupper())),
    ]
    counts.extend(float(tags.count(tag)) for tag in resources.tag_set)
    return np.array(counts)
