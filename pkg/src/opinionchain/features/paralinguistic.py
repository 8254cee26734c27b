"""Counts of paralinguistic events per IPU, bucketed by category.

Markers arrive as asterisk-delimited strings (``*chuckling*``) and map
to one of four categories through a versioned resource file; anything
unmapped lands in the ``other`` bucket with a log line, never an error.
"""

from __future__ import annotations

import logging

import numpy as np

log = logging.getLogger(__name__)

CATEGORIES = ("intonation", "pronunciation", "laughter", "volume")
OTHER = "other"
FEATURE_NAMES = tuple(f"para_{c}" for c in CATEGORIES + (OTHER,))


def paralinguistic_features(para_events, marker_map: dict) -> np.ndarray:
    """Counts per category plus an 'other' bucket, in FEATURE_NAMES order."""
    counts = dict.fromkeys(CATEGORIES + (OTHER,), 0.0)
    for event in para_events:
        key = event.strip("*").lower()
        category = marker_map.get(key)
        if category is None:
            log.info("unknown paralinguistic marker %r counted as other", event)
            category = OTHER
        counts[category] += 1.0
    return np.array([counts[c] for c in CATEGORIES + (OTHER,)])
