"""Confidence intervals for rare-event probabilities."""

__version__ = "0.1.0"
