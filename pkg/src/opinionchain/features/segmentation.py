"""Pause-based segmentation of transcripts into inter-pausal units."""

from __future__ import annotations

import logging
from dataclasses import dataclass

from ..corpus import Transcript
from ..errors import InvalidInputError

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class IPU:
    """A maximal run of tokens with no silent gap above the threshold."""

    tokens: tuple[str, ...]
    start_ms: int
    end_ms: int
    para_events: tuple[str, ...] = ()
    following_pause_ms: int | None = None  # absent for the last IPU

    def __post_init__(self):
        if self.end_ms < self.start_ms:
            raise InvalidInputError("IPU ends before it starts")
        if not self.tokens and not self.para_events:
            raise InvalidInputError("IPU must carry tokens or paralinguistic events")


def segment_into_ipus(transcript: Transcript, threshold_ms: int) -> list[IPU]:
    """Split at every silent gap strictly longer than ``threshold_ms``.

    The gap between consecutive tokens is ``next.start_ms - prev.end_ms``;
    the strict comparison makes the boundary value itself deterministic.
    Markers attach to the last IPU starting at or before their timestamp
    (the first IPU for earlier timestamps).  A tokenless transcript
    segments to an empty list; its markers, if any, are dropped with a
    warning since there is no unit to attach them to.
    """
    if threshold_ms <= 0:
        raise InvalidInputError("threshold_ms must be positive")
    if not transcript.tokens:
        if transcript.para_markers:
            log.warning(
                "%s: dropping %d markers from tokenless transcript",
                transcript.doc_id,
                len(transcript.para_markers),
            )
        return []

    groups: list[list] = [[transcript.tokens[0]]]
    for prev, cur in zip(transcript.tokens, transcript.tokens[1:]):
        if cur.start_ms - prev.end_ms > threshold_ms:
            groups.append([cur])
        else:
            groups[-1].append(cur)

    spans = [(g[0].start_ms, g[-1].end_ms) for g in groups]
    events: list[list[str]] = [[] for _ in groups]
    for marker in transcript.para_markers:
        idx = 0
        for i, (start, _) in enumerate(spans):
            if start <= marker.time_ms:
                idx = i
        events[idx].append(marker.text)

    ipus = []
    for i, group in enumerate(groups):
        following = (
            groups[i + 1][0].start_ms - group[-1].end_ms if i + 1 < len(groups) else None
        )
        ipus.append(
            IPU(
                tokens=tuple(t.text for t in group),
                start_ms=group[0].start_ms,
                end_ms=group[-1].end_ms,
                para_events=tuple(events[i]),
                following_pause_ms=following,
            )
        )
    return ipus


def ipu_index_per_token(transcript: Transcript, threshold_ms: int) -> list[int]:
    """Parallel list mapping each transcript token to its IPU index."""
    out = []
    for i, ipu in enumerate(segment_into_ipus(transcript, threshold_ms)):
        out.extend([i] * len(ipu.tokens))
    return out
