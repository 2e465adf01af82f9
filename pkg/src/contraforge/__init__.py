"""Synthetic structural contradiction detection: generation, labeling, realization, baseline."""

__version__ = "0.1.0"
