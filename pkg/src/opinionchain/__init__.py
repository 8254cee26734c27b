"""Whole-review opinion classification of pause-segmented spoken transcripts."""

__version__ = "0.1.0"
