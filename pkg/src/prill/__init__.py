"""Explicit degree-36 étale tower over a genus-2 curve, with certificates."""

__version__ = "0.1.0"
