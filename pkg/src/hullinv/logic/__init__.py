"""Formulas, normal forms and structural operations."""

from .formula import *  # noqa: F401,F403
from .formula import Sort, SortError  # noqa: F401
