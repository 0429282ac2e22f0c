"""Invariant generation by exact and inexact polyhedral hulls for k-induction."""

__version__ = "0.1.0"
