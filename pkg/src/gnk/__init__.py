"""Generalized knot groups: presentations, homomorphism counting, and
twisted Alexander invariants over prime fields."""

__version__ = "0.1.0"
