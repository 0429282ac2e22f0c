"""Backward exploration of gray states by successive preimages."""

from __future__ import annotations

from dataclasses import dataclass

from .logic.cone import cone_of_influence
from .logic.formula import BoolVar, Constraint, Formula, Not, conjuncts, free_vars, mk_and, mk_not, nnf
from .polyhedra import Polyhedron, includes, union_formula
from .qe import QETask, eliminate
from .system import TransitionSystem


@dataclass(frozen=True)
class GrayRegion:
    """All preimages so far and their deduplicated union.

    ``union`` holds (index, polyhedron) pairs; indices never change once given.
    """

    preimages: tuple = ()
    union: tuple = ()
    next_index: int = 1

    def polyhedra(self) -> list[Polyhedron]:
        return [p for _, p in self.union]

    def indexed(self) -> dict[int, Polyhedron]:
        return dict(self.union)


def _task(sys: TransitionSystem, invs: Formula, target_next: Formula) -> QETask:
    keep = frozenset(cone_of_influence(sys, sys.prop))
    body = mk_and(sys.prop, invs, sys.trans, sys.prime(invs), target_next)
    elim = frozenset(sys.sorts) - keep
    return QETask(body, elim, keep, sys.sorts)


def care_set(sys: TransitionSystem, invs: Formula) -> Polyhedron:
    """Polyhedral conjuncts of the invariants over cone variables."""
    keep = cone_of_influence(sys, sys.prop)
    atoms = [
        c for c in conjuncts(nnf(invs, sys.sorts))
        if isinstance(c, (Constraint, BoolVar, Not)) and free_vars(c) <= keep
    ]
    return Polyhedron.make(atoms, sys.sorts)


def first_preimage(sys: TransitionSystem, invs: Formula, oracle, budget: int = 256) -> list[Polyhedron]:
    """States satisfying the PO with a successor violating it."""
    task = _task(sys, invs, mk_not(sys.prime(sys.prop)))
    return eliminate(task, oracle, budget, care=care_set(sys, invs))


def next_preimage(
    sys: TransitionSystem, invs: Formula, prev: list[Polyhedron], oracle, budget: int = 256
) -> list[Polyhedron]:
    if not prev:
        return []
    task = _task(sys, invs, sys.prime(union_formula(prev)))
    return eliminate(task, oracle, budget, care=care_set(sys, invs))


def accumulate(region: GrayRegion, new: list[Polyhedron], oracle) -> GrayRegion:
    union = list(region.union)
    nxt = region.next_index
    for p in new:
        if any(includes(q, p, oracle) for _, q in union):
            continue
        union.append((nxt, p))
        nxt += 1
    return GrayRegion(region.preimages + (tuple(new),), tuple(union), nxt)


def is_fixpoint(region: GrayRegion, new: list[Polyhedron], oracle) -> bool:
    """Every polyhedron of ``new`` is already covered by the union."""
    f = union_formula(region.polyhedra())
    sorts: dict = {}
    for p in new:
        sorts.update(p.sorts)
    for _, q in region.union:
        sorts.update(q.sorts)
    for p in new:
        res = oracle.check_sat(mk_and(p.to_formula(), mk_not(f)), sorts)
        if not res.unsat:
            return False
    return True
