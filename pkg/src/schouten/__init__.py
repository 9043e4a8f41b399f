"""Curvature and conformal tensors of coordinate metrics, and numerical
checks for gradient Schouten solitons."""

__version__ = "0.1.0"
