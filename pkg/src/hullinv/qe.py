"""Quantifier elimination into a list of polyhedra.

Pipeline: substitute functionally defined variables, Shannon-expand the
eliminated Booleans, distribute into DNF, project each cube with
Fourier-Motzkin, then prune empty and subsumed cubes.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterable, Mapping

from .logic.dnf import DnfBudgetExceeded, to_dnf
from .logic.formula import (
    FALSE, TRUE, BoolVar, Compare, Formula, Iff, Ite, Sort, TermIte, Var, conjuncts,
    free_vars, is_term, mk_and, mk_not, substitute,
)
from .polyhedra import (
    Polyhedron, ProjectionBudgetExceeded, includes, is_empty, meet, project, remove_redundant, union_formula,
)

log = logging.getLogger(__name__)

SHANNON_LIMIT = 8


class QEResourceLimit(Exception):
    """Elimination aborted by a disjunct budget; nothing is returned."""

    def __init__(self, msg: str, partial: int = 0):
        super().__init__(msg)
        self.partial = partial


@dataclass(frozen=True)
class QETask:
    body: Formula
    eliminate: frozenset
    keep: frozenset
    sorts: Mapping[str, Sort]

    def __post_init__(self):
        if self.eliminate & self.keep:
            raise ValueError("eliminate and keep overlap")
        extra = free_vars(self.body) - self.eliminate - self.keep
        if extra:
            raise ValueError(f"free variables outside eliminate/keep: {sorted(extra)}")


def _definition(f: Formula, v: str):
    """A term/formula t with f equivalent to v = t (v not free in t), else None."""
    if isinstance(f, Compare) and f.rel == "=":
        for a, b in ((f.left, f.right), (f.right, f.left)):
            if isinstance(a, Var) and a.name == v and v not in free_vars(b):
                return b
        return None
    if isinstance(f, Iff):
        for a, b in ((f.left, f.right), (f.right, f.left)):
            if isinstance(a, BoolVar) and a.name == v and v not in free_vars(b):
                return b
        return None
    if isinstance(f, Ite) and v not in free_vars(f.cond):
        a = _definition(f.then, v)
        if a is None:
            return None
        b = _definition(f.else_, v)
        if b is None:
            return None
        if is_term(a) != is_term(b):
            return None
        return TermIte(f.cond, a, b) if is_term(a) else Ite(f.cond, a, b)
    return None


def functional_substitute(body: Formula, eliminate: Iterable[str]) -> tuple[Formula, set[str]]:
    """Substitute variables defined by a top-level conjunct ``v = term``."""
    remaining = set(eliminate)
    parts = conjuncts(body)
    changed = True
    while changed:
        changed = False
        for v in sorted(remaining):
            for idx, c in enumerate(parts):
                t = _definition(c, v)
                if t is None:
                    continue
                rest = parts[:idx] + parts[idx + 1:]
                parts = [substitute(r, {v: t}) for r in rest]
                flat = []
                for r in parts:
                    flat.extend(conjuncts(r) if r != TRUE else [])
                    if r == FALSE:
                        flat = [FALSE]
                        break
                parts = flat
                remaining.discard(v)
                changed = True
                break
            if changed:
                break
    return mk_and(*parts), remaining


def _shannon(f: Formula, names: list[str]) -> list[Formula]:
    out = [f]
    for b in names:
        nxt = []
        for g in out:
            if b not in free_vars(g):
                nxt.append(g)
                continue
            for val in (TRUE, FALSE):
                h = substitute(g, {b: val})
                if h != FALSE:
                    nxt.append(h)
        out = nxt
    return out


def prune_subsumed(ps: list[Polyhedron], oracle) -> list[Polyhedron]:
    """Drop polyhedra included in another one (first occurrence wins on ties)."""
    keep: list[Polyhedron] = []
    for p in ps:
        if any(includes(q, p, oracle) for q in keep):
            continue
        keep = [q for q in keep if not includes(p, q, oracle)]
        keep.append(p)
    return sort_polys(keep)


def sort_polys(ps: Iterable[Polyhedron]) -> list[Polyhedron]:
    return sorted(ps, key=lambda p: str(p))


def expand(ps: list[Polyhedron], care: Polyhedron | None, oracle) -> list[Polyhedron]:
    """Enlarge each cube inside the union, relative to a care polyhedron.

    A constraint is dropped when the remaining cube, met with ``care``, still
    lies in the union; the result is met with ``care`` again, so the union is
    unchanged whenever it was inside ``care`` to begin with.
    """
    if len(ps) < 2:
        return ps
    sorts: dict = {}
    for p in ps:
        sorts.update(p.sorts)
    if care is not None:
        sorts.update(care.sorts)
    outside = mk_not(union_formula(ps))
    ctx = care.to_formula() if care is not None else TRUE
    out = []
    for p in ps:
        cons = list(p.constraints)
        i = 0
        while i < len(cons):
            trial = cons[:i] + cons[i + 1:]
            q = mk_and(*trial, *p.literal_atoms(), ctx, outside)
            if oracle.check_sat(q, sorts).unsat:
                cons = trial
            else:
                i += 1
        if len(cons) == len(p.constraints):
            out.append(p)
            continue
        grown = p.with_constraints(cons)
        if care is not None:
            grown = meet(grown, care)
        out.append(remove_redundant(grown))
    return out


def eliminate(task: QETask, oracle, budget: int = 256, care: Polyhedron | None = None) -> list[Polyhedron]:
    sorts = task.sorts
    body, rest = functional_substitute(task.body, task.eliminate)
    bools = sorted(v for v in rest if sorts[v] is Sort.BOOL and v in free_vars(body))
    numeric = {v for v in rest if sorts[v] is not Sort.BOOL}
    if len(bools) <= SHANNON_LIMIT:
        cofactors = _shannon(body, bools)
        drop_lits = set()
    else:
        cofactors = [body]
        drop_lits = set(bools)
    cubes: list[Polyhedron] = []
    try:
        for g in cofactors:
            for cube in to_dnf(g, oracle, sorts, budget=budget):
                if drop_lits:
                    cube = Polyhedron.make(
                        cube.constraints, sorts, [l for l in cube.literals if l[0] not in drop_lits]
                    )
                cubes.extend(project(cube, numeric, budget=budget))
                if len(cubes) > budget:
                    raise QEResourceLimit(f"more than {budget} disjuncts", len(cubes))
    except (DnfBudgetExceeded, ProjectionBudgetExceeded) as e:
        raise QEResourceLimit(str(e), len(cubes)) from e
    uniq = list(dict.fromkeys(cubes))
    uniq = [p for p in uniq if not is_empty(p, oracle)]
    uniq = prune_subsumed(uniq, oracle)
    if care is not None:
        uniq = prune_subsumed(expand(uniq, care, oracle), oracle)
    return uniq
