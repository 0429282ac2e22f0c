"""Disjunctive normal form as a list of polyhedra."""

from __future__ import annotations

from typing import Mapping

from .formula import FALSE, TRUE, And, BoolConst, Formula, Or, Sort, mk_and, mk_not, nnf


class DnfBudgetExceeded(Exception):
    """More disjuncts than the configured budget."""


def to_dnf(
    f: Formula,
    oracle,
    sorts: Mapping[str, Sort],
    budget: int = 256,
    generalize: bool = False,
) -> list:
    """Satisfiable polyhedra whose disjunction is equivalent to ``f``.

    Distribution is done under the current partial cube so contradictory
    branches are cut as soon as they appear.
    """
    from ..polyhedra import Polyhedron, is_empty, meet, rational_empty

    g = nnf(f, sorts)
    if g == FALSE:
        return []
    top = Polyhedron.universe(sorts)
    if g == TRUE:
        return [top]

    def lit_poly(n):
        return Polyhedron.make([n], sorts)

    lit_cache: dict = {}

    def extend(ctx, n):
        p = lit_cache.get(n)
        if p is None:
            p = lit_cache[n] = lit_poly(n)
        q = meet(ctx, p)
        if q.bottom or q == ctx:
            return None if q.bottom else q
        if rational_empty(q.constraints):
            return None
        return q

    count = [0]

    def walk(n, ctx) -> list:
        if isinstance(n, And):
            kids = sorted(n.args, key=_weight)
            cubes = [ctx]
            for k in kids:
                nxt = []
                for c in cubes:
                    nxt.extend(walk(k, c))
                cubes = _unique(nxt)
                if not cubes:
                    return []
                if len(cubes) > budget:
                    raise DnfBudgetExceeded(f"more than {budget} disjuncts")
            return cubes
        if isinstance(n, Or):
            out = []
            for k in n.args:
                out.extend(walk(k, ctx))
                if len(out) > budget:
                    raise DnfBudgetExceeded(f"more than {budget} disjuncts")
            return _unique(out)
        if isinstance(n, BoolConst):
            return [ctx] if n.value else []
        count[0] += 1
        q = extend(ctx, n)
        return [] if q is None else [q]

    cubes = walk(g, top)
    cubes = [c for c in cubes if not is_empty(c, oracle)]
    if generalize:
        cubes = _unique([_generalize(c, f, oracle, sorts) for c in cubes])
    return cubes


def _weight(n) -> tuple:
    if isinstance(n, Or):
        return (2, len(n.args))
    if isinstance(n, And):
        return (1, len(n.args))
    return (0, 0)


def _unique(ps: list) -> list:
    seen = set()
    out = []
    for p in ps:
        if p not in seen:
            seen.add(p)
            out.append(p)
    return out


def _generalize(cube, f: Formula, oracle, sorts):
    """Drop atoms from ``cube`` while it still implies ``f``."""
    from ..polyhedra import Polyhedron

    atoms = cube.atoms()
    neg = mk_not(f)
    i = 0
    while i < len(atoms):
        trial = atoms[:i] + atoms[i + 1:]
        res = oracle.check_sat(mk_and(*trial, neg), sorts)
        if res.unsat:
            atoms = trial
        else:
            i += 1
    return Polyhedron.make(atoms, sorts)
