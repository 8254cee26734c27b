import numpy as np
import pytest

from opinionchain.corpus import ParaMarker, Transcript, TranscriptToken


def make_transcript(
    doc_id="doc",
    words=("hello", "world"),
    gaps=None,
    valences=None,
    markers=(),
    word_ms=200,
    start_ms=0,
):
    """Build a transcript with the given inter-token silent gaps (ms).

    ``gaps[i]`` is the silence between word i and word i+1; default 100.
    ``markers`` is a list of (text, time_ms).
    """
    words = list(words)
    gaps = list(gaps) if gaps is not None else [100] * (len(words) - 1)
    assert len(gaps) == max(0, len(words) - 1)
    tokens = []
    t = start_ms
    for i, word in enumerate(words):
        tokens.append(TranscriptToken(word, t, t + word_ms))
        t += word_ms
        if i < len(gaps):
            t += gaps[i]
    return Transcript(
        doc_id=doc_id,
        tokens=tuple(tokens),
        para_markers=tuple(ParaMarker(m, tm) for m, tm in markers),
        valences=valences,
    )


@pytest.fixture
def embedding_file(tmp_path):
    """Small deterministic embedding table written in the text format."""
    words = {
        "great": (1.0, 0.0, 2.0),
        "awful": (-1.0, 0.5, 0.0),
        "movie": (0.0, 1.0, 0.0),
        "plot": (0.5, 0.5, 1.0),
        "acting": (0.25, -0.5, 0.75),
        "good": (0.9, 0.1, 1.1),
        "bad": (-0.8, 0.2, -0.4),
    }
    path = tmp_path / "vectors.txt"
    lines = [f"{w} " + " ".join(str(v) for v in vec) for w, vec in words.items()]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path, words


@pytest.fixture
def socal_lexicon_file(tmp_path):
    path = tmp_path / "orientation.tsv"
    rows = [
        "word\tvalue",
        "good\t3",
        "great\t4",
        "bad\t-3",
        "awful\t-4",
        "terrible\t-5",
        "excellent\t5",
        "okay\t0",
        "fine\t1",
    ]
    path.write_text("\n".join(rows) + "\n", encoding="utf-8")
    return path


@pytest.fixture
def swn_lexicon_file(tmp_path):
    path = tmp_path / "swn.tsv"
    rows = [
        "word\tpos\tneg\tneu",
        "good\t0.5\t0.125\t0.375",
        "bad\t0.0\t0.875\t0.125",
        "movie\t0.0\t0.0\t1.0",
    ]
    path.write_text("\n".join(rows) + "\n", encoding="utf-8")
    return path
