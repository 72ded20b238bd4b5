"""Riemannian gradient flows for quantum-circuit energy minimization."""

__version__ = "0.1.0"
