"""Oracle interface shared by the built-in solver and the SMT-LIB client."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from ..logic.formula import Formula, Sort, evaluate, free_vars, mk_and, mk_not

log = logging.getLogger(__name__)

SAT = "sat"
UNSAT = "unsat"
UNKNOWN = "unknown"


class OracleError(RuntimeError):
    """The backend misbehaved (bad model, crash, protocol error)."""


@dataclass
class SatResult:
    status: str
    model: dict = field(default_factory=dict)
    reason: str = ""
    violated: frozenset = frozenset()

    @property
    def sat(self) -> bool:
        return self.status == SAT

    @property
    def unsat(self) -> bool:
        return self.status == UNSAT

    @property
    def unknown(self) -> bool:
        return self.status == UNKNOWN


def complete_model(model: Mapping, sorts: Mapping[str, Sort], names) -> dict:
    out = {}
    for n in names:
        if n in model:
            v = model[n]
        else:
            v = False if sorts[n] is Sort.BOOL else Fraction(0)
        if sorts[n] is Sort.BOOL:
            out[n] = bool(v)
        else:
            out[n] = Fraction(v)
    return out


class Oracle:
    """Satisfiability of quantifier-free LIA/LRA formulas with Booleans.

    Subclasses implement ``_solve``.  Every model is re-checked here with the
    exact evaluator before it is handed out.
    """

    name = "oracle"

    def __init__(self, timeout: float | None = 10.0):
        self.timeout = timeout
        self.queries = 0
        self.unknowns = 0

    def _solve(self, f: Formula, sorts: Mapping[str, Sort]) -> SatResult:
        raise NotImplementedError

    def check_sat(self, f: Formula, sorts: Mapping[str, Sort]) -> SatResult:
        self.queries += 1
        names = sorted(free_vars(f))
        missing = [n for n in names if n not in sorts]
        if missing:
            raise KeyError(f"no sort for {', '.join(missing)}")
        res = self._solve(f, sorts)
        if res.sat:
            model = complete_model(res.model, sorts, names)
            if not evaluate(f, model):
                raise OracleError(f"{self.name}: returned model does not satisfy the query")
            res.model = model
        elif res.unknown:
            self.unknowns += 1
            log.debug("%s: unknown (%s)", self.name, res.reason)
        return res

    def check_sat_assuming(
        self,
        base: Formula,
        assumptions: Sequence[tuple[object, Formula]],
        sorts: Mapping[str, Sort],
    ) -> SatResult:
        """Is ``base`` consistent with the failure of some named assumption?

        Sat models report every assumption they violate in ``violated``.
        """
        if not assumptions:
            return SatResult(UNSAT)
        query = mk_and(base, mk_not(mk_and(*[a for _, a in assumptions])))
        res = self.check_sat(query, sorts)
        if res.sat:
            res.violated = frozenset(k for k, a in assumptions if not evaluate(a, res.model))
        return res

    def is_valid(self, f: Formula, sorts) -> bool | None:
        res = self.check_sat(mk_not(f), sorts)
        if res.unknown:
            return None
        return res.unsat

    def close(self) -> None:
        pass

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()
