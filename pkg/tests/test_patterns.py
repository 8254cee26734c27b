import re
from collections import Counter

import numpy as np
import pytest

from opinionchain.errors import InvalidInputError
from opinionchain.features.patterns import (
    DEFAULT_TAG_SET,
    PatternResources,
    RuleTagger,
    pattern_feature_names,
    pattern_features,
)
from opinionchain.features.resources import (
    load_pattern_resources,
    load_tagger,
)

RES = PatternResources(
    negations=frozenset({"not", "never"}),
    amplifiers=frozenset({"really", "very"}),
    downtoners=frozenset({"slightly"}),
    disfluencies=frozenset({"uh", "um"}),
)


class TestPatternCounts:
    def test_adjective_noun_bigram(self):
        out = pattern_features(["great", "movie"], ["ADJ", "NOUN"], RES)
        names = pattern_feature_names()
        assert out[names.index("adj_noun")] == 1.0

    def test_negation_and_amplifier(self):
        tokens = ["not", "really", "good"]
        out = pattern_features(tokens, ["ADV", "ADV", "ADJ"], RES)
        names = pattern_feature_names()
        assert out[names.index("negation")] == 1.0
        assert out[names.index("amplifier")] == 1.0
        assert out[names.index("downtoner")] == 0.0

    def test_capitalized_counts_raw_case(self):
        out = pattern_features(["Great", "MOVIE", "plot"], ["ADJ", "NOUN", "NOUN"], RES)
        names = pattern_feature_names()
        assert out[names.index("capitalized")] == 2.0

    def test_mismatched_lengths_rejected(self):
        with pytest.raises(InvalidInputError):
            pattern_features(["a", "b"], ["ADJ"], RES)

    def test_twenty_token_recount(self):
        """Independent recount with regex + Counter over the same inputs."""
        tokens = (
            "uh this Movie was not really great um but the Acting was "
            "very very good and never slightly Boring at"
        ).split()
        assert len(tokens) == 20
        tags = [
            "INTJ", "PRON", "NOUN", "VERB", "ADV", "ADV", "ADJ", "INTJ",
            "CONJ", "OTHER", "NOUN", "VERB", "ADV", "ADV", "ADJ", "CONJ",
            "ADV", "ADV", "ADJ", "PREP",
        ]
        out = pattern_features(tokens, tags, RES)
        names = pattern_feature_names()

        lows = [t.lower() for t in tokens]
        expect = {
            "adj_noun": sum(
                tags[i] == "ADJ" and tags[i + 1] == "NOUN" for i in range(19)
            ),
            "negation": sum(t in {"not", "never"} for t in lows),
            "amplifier": sum(t in {"really", "very"} for t in lows),
            "downtoner": sum(t in {"slightly"} for t in lows),
            "disfluency": sum(t in {"uh", "um"} for t in lows),
            "capitalized": len([t for t in tokens if re.match(r"[A-Z]", t)]),
        }
        tag_counts = Counter(tags)
        for tag in DEFAULT_TAG_SET:
            expect[f"pos_{tag.lower()}"] = tag_counts[tag]
        for name, want in expect.items():
            assert out[names.index(name)] == float(want), name

    def test_vector_width_matches_names(self):
        out = pattern_features([], [], RES)
        assert out.shape == (len(pattern_feature_names()),)


class TestRuleTagger:
    def test_lexicon_hits_win(self):
        tagger = RuleTagger(lexicon={"great": "ADJ", "movie": "NOUN", "i": "PRON"})
        assert tagger.tag(["I", "great", "movie"]) == ["PRON", "ADJ", "NOUN"]

    def test_suffix_fallbacks(self):
        tagger = RuleTagger(lexicon={})
        assert tagger.tag(["quickly"]) == ["ADV"]
        assert tagger.tag(["watching"]) == ["VERB"]
        assert tagger.tag(["spacious"]) == ["ADJ"]
        assert tagger.tag(["resolution"]) == ["NOUN"]

    def test_default_is_noun(self):
        tagger = RuleTagger(lexicon={})
        assert tagger.tag(["zorp"]) == ["NOUN"]

    def test_unknown_lexicon_tag_rejected(self):
        with pytest.raises(InvalidInputError):
            RuleTagger(lexicon={"x": "BANANA"})

    def test_shipped_resources_load(self):
        tagger = load_tagger()
        assert tagger.tag(["i", "watched", "a", "great", "movie"]) == [
            "PRON",
            "VERB",
            "OTHER",
            "ADJ",
            "NOUN",
        ]
        res = load_pattern_resources()
        assert "not" in res.negations
        assert "very" in res.amplifiers
        assert "slightly" in res.downtoners
        assert "um" in res.disfluencies
