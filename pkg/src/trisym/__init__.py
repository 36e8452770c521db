"""Riemannian 3-symmetric Lie algebra models and their invariant geometry."""

__version__ = "0.1.0"
