"""Satisfiability oracles."""

import os
import shutil

from .base import SAT, UNKNOWN, UNSAT, Oracle, OracleError, SatResult
from .builtin import BuiltinOracle
from .smtlib import SmtLibOracle


def default_solver() -> str:
    """``$HULLINV_SOLVER``, else ``z3 -in`` when z3 is on the path, else ``builtin``."""
    env = os.environ.get("HULLINV_SOLVER")
    if env:
        return env
    if shutil.which("z3"):
        return "z3 -in"
    return "builtin"


def make_oracle(command: str | None = None, timeout: float | None = 10.0) -> Oracle:
    """An SMT-LIB process for ``command`` ("builtin" selects the in-process fallback)."""
    command = command or default_solver()
    if command != "builtin":
        return SmtLibOracle(command, timeout)
    return BuiltinOracle(timeout)


__all__ = [
    "SAT", "UNSAT", "UNKNOWN", "Oracle", "OracleError", "SatResult",
    "BuiltinOracle", "SmtLibOracle", "default_solver", "make_oracle",
]
