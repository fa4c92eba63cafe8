"""Dual-attention model for aspect-level sentiment classification."""

__version__ = "0.1.0"
