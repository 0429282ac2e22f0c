"""Exact-rational, not necessarily closed polyhedra in constraint form.

A polyhedron is a conjunction of canonical linear ``Constraint`` atoms plus
Boolean literals.  Canonical form scales every constraint to coprime
integer coefficients, tightens pure-integer atoms, solves equalities into
the remaining constraints, and keeps only the tightest bound per direction.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import count
from math import ceil, floor
from typing import Iterable, Mapping, Sequence

from .kernels import fm_combine
from .logic.formula import (
    FALSE, TRUE, BoolVar, Constraint, Formula, LinearTerm, Not, Sort, canonical_constraint,
    evaluate, mk_and, mk_not, mk_or,
)
from .logic.printer import constraint_str
from .smt.simplex import ZERO, Simplex

log = logging.getLogger(__name__)


class ProjectionBudgetExceeded(Exception):
    """Integer projection would need more disjuncts than allowed."""


class LiteralMismatch(ValueError):
    """Hull requested between polyhedra in different Boolean cells."""


def _key(c: Constraint):
    return (tuple(n for n, _ in c.term.coeffs), tuple(k for _, k in c.term.coeffs), c.rel, c.term.const)


@dataclass(frozen=True)
class Polyhedron:
    constraints: tuple = ()
    literals: tuple = ()
    bottom: bool = False
    sorts: Mapping = field(default_factory=dict, compare=False, hash=False, repr=False)

    # -- construction -----------------------------------------------------------

    @staticmethod
    def make(atoms: Iterable, sorts: Mapping[str, Sort], literals: Iterable = ()) -> "Polyhedron":
        cons: list = []
        lits = list(literals)
        for a in atoms:
            if isinstance(a, Constraint):
                cons.append(a)
            elif isinstance(a, BoolVar):
                lits.append((a.name, True))
            elif isinstance(a, Not) and isinstance(a.arg, BoolVar):
                lits.append((a.arg.name, False))
            elif a == TRUE:
                continue
            elif a == FALSE:
                return Polyhedron.empty(sorts)
            else:
                raise TypeError(f"not a polyhedral atom: {a!r}")
        return canonicalize_parts(cons, lits, sorts)

    @staticmethod
    def empty(sorts: Mapping[str, Sort]) -> "Polyhedron":
        return Polyhedron((), (), True, dict(sorts))

    @staticmethod
    def universe(sorts: Mapping[str, Sort]) -> "Polyhedron":
        return Polyhedron((), (), False, dict(sorts))

    # -- views -------------------------------------------------------------------

    @property
    def variables(self) -> frozenset[str]:
        out: set[str] = set()
        for c in self.constraints:
            out.update(n for n, _ in c.term.coeffs)
        out.update(n for n, _ in self.literals)
        return frozenset(out)

    @property
    def numeric_variables(self) -> frozenset[str]:
        out: set[str] = set()
        for c in self.constraints:
            out.update(n for n, _ in c.term.coeffs)
        return frozenset(out)

    def literal_atoms(self) -> list[Formula]:
        return [BoolVar(n) if v else Not(BoolVar(n)) for n, v in self.literals]

    def atoms(self) -> list[Formula]:
        return list(self.constraints) + self.literal_atoms()

    def to_formula(self) -> Formula:
        if self.bottom:
            return FALSE
        return mk_and(*self.atoms())

    def contains_point(self, model: Mapping) -> bool:
        return evaluate(self.to_formula(), model)

    def with_constraints(self, cons: Iterable[Constraint]) -> "Polyhedron":
        return canonicalize_parts(list(cons), list(self.literals), self.sorts)

    def __str__(self) -> str:
        if self.bottom:
            return "{false}"
        parts = [constraint_str(c) for c in self.constraints]
        parts += [n if v else f"not {n}" for n, v in self.literals]
        return "{" + ", ".join(parts) + "}"

    def __len__(self) -> int:
        return len(self.constraints) + len(self.literals)


# ---------------------------------------------------------------------------
# canonical form


def _direction(c: Constraint):
    """(positive-lead direction, sign) for parallel-constraint merging."""
    coeffs = c.term.coeffs
    if coeffs[0][1] > 0:
        return coeffs, 1
    return tuple((n, -k) for n, k in coeffs), -1


def _merge_parallel(cons: list[Constraint], sorts) -> list[Constraint] | None:
    """Tightest bound per direction; None when a direction is infeasible."""
    groups: dict[tuple, list] = {}
    for c in cons:
        d, sign = _direction(c)
        g = groups.setdefault(d, [None, None])  # lo, hi as (value, strict)
        # sign * (d.x) + const rel 0
        v = -c.term.const * sign
        strict = c.rel == "<"
        if c.rel == "=" or sign < 0:
            cur = g[0]
            if cur is None or v > cur[0] or (v == cur[0] and strict and not cur[1]):
                g[0] = (v, strict)
        if c.rel == "=" or sign > 0:
            cur = g[1]
            if cur is None or v < cur[0] or (v == cur[0] and strict and not cur[1]):
                g[1] = (v, strict)
    out: list[Constraint] = []
    for d, (lo, hi) in groups.items():
        if lo is not None and hi is not None:
            if lo[0] > hi[0] or (lo[0] == hi[0] and (lo[1] or hi[1])):
                return None
            if lo[0] == hi[0]:
                out.append(Constraint(LinearTerm(d, -lo[0]), "="))
                continue
        if hi is not None:
            out.append(Constraint(LinearTerm(d, -hi[0]), "<" if hi[1] else "<="))
        if lo is not None:
            neg = tuple((n, -k) for n, k in d)
            out.append(Constraint(LinearTerm(neg, lo[0]), "<" if lo[1] else "<="))
    return out


def _solve_equalities(cons: list[Constraint], sorts):
    """Gauss-Jordan on the equalities, substituting pivots into everything else.

    Returns the rewritten list or None if inconsistent.
    """
    eqs = [c for c in cons if c.rel == "="]
    if not eqs:
        return cons
    rest = [c for c in cons if c.rel != "="]
    done: list[tuple[str, LinearTerm]] = []  # pivot var -> expression
    pending = sorted(eqs, key=_key)
    while pending:
        c = pending.pop(0)
        t = c.term
        for v, expr in done:
            k = t.coef(v)
            if k:
                t = t.substitute({v: expr})
        if t.is_constant():
            if t.const != 0:
                return None
            continue
        # pivot: last variable (keeps earliest names in the solved form)
        v, k = t.coeffs[-1]
        expr = LinearTerm(tuple((n, -a / k) for n, a in t.coeffs if n != v), -t.const / k)
        done = [(u, e.substitute({v: expr}) if e.coef(v) else e) for u, e in done]
        done.append((v, expr))
    out: list[Constraint] = []
    for v, expr in done:
        out.append(Constraint(LinearTerm.var(v) - expr, "="))
    binding = dict(done)
    for c in rest:
        t = c.term
        if any(n in binding for n, _ in t.coeffs):
            t = t.substitute(binding)
        out.append(Constraint(t, c.rel))
    return out


def canonicalize_parts(cons: list, lits: list, sorts: Mapping[str, Sort]) -> Polyhedron:
    sorts = dict(sorts)
    seen_lits: dict[str, bool] = {}
    for n, v in lits:
        if seen_lits.get(n, v) != v:
            return Polyhedron.empty(sorts)
        seen_lits[n] = v
    for _ in range(4):
        norm: list[Constraint] = []
        for c in cons:
            r = canonical_constraint(c.term, c.rel, sorts)
            if r == FALSE:
                return Polyhedron.empty(sorts)
            if r != TRUE:
                norm.append(r)
        merged = _merge_parallel(norm, sorts)
        if merged is None:
            return Polyhedron.empty(sorts)
        solved = _solve_equalities(merged, sorts)
        if solved is None:
            return Polyhedron.empty(sorts)
        cons = solved
        if solved is merged or set(solved) == set(merged):
            break
    final = []
    for c in cons:
        r = canonical_constraint(c.term, c.rel, sorts)
        if r == FALSE:
            return Polyhedron.empty(sorts)
        if r != TRUE:
            final.append(r)
    merged = _merge_parallel(final, sorts)
    if merged is None:
        return Polyhedron.empty(sorts)
    merged = sorted(set(merged), key=_key)
    return Polyhedron(tuple(merged), tuple(sorted(seen_lits.items())), False, sorts)


def canonicalize(p: Polyhedron) -> Polyhedron:
    if p.bottom:
        return p
    return canonicalize_parts(list(p.constraints), list(p.literals), p.sorts)


# ---------------------------------------------------------------------------
# rational LP helpers


def _simplex_for(cons: Sequence[Constraint], sorts=None):
    spx = Simplex()
    handles = []
    for c in cons:
        coeffs = c.term.coeffs
        for n, _ in coeffs:
            spx.var(n)
        lead = coeffs[0][1]
        if len(coeffs) == 1:
            x = spx.index[coeffs[0][0]]
        else:
            x = spx.slack(tuple((n, k / lead) for n, k in coeffs))
        handles.append((x, -c.term.const / lead, lead < 0))
    return spx, handles


def _assert(spx, handle, rel, why, negate=False):
    x, b, flip = handle
    if negate:
        # not (t rel 0) for rel in {<, <=}: t (>= | >) 0
        rel = "<=" if rel == "<" else "<"
        flip = not flip
    if rel == "=":
        return spx.assert_upper(x, (b, ZERO), why) or spx.assert_lower(x, (b, ZERO), why)
    d = ZERO if rel == "<=" else Fraction(-1 if not flip else 1)
    if not flip:
        return spx.assert_upper(x, (b, d), why)
    return spx.assert_lower(x, (b, d), why)


def rational_empty(cons: Sequence[Constraint]) -> bool:
    if not cons:
        return False
    spx, handles = _simplex_for(cons)
    for i, c in enumerate(cons):
        if _assert(spx, handles[i], c.rel, i) is not None:
            return True
    return spx.check() is not None


def remove_redundant(p: Polyhedron) -> Polyhedron:
    """Drop inequalities implied (over the rationals) by the others."""
    if p.bottom or len(p.constraints) < 2:
        return p
    cons = list(p.constraints)
    spx, handles = _simplex_for(cons)
    eqs = [i for i, c in enumerate(cons) if c.rel == "="]
    ineqs = [i for i, c in enumerate(cons) if c.rel != "="]
    if rational_empty(cons):
        return Polyhedron.empty(p.sorts)
    keep = set(range(len(cons)))
    for i in reversed(ineqs):
        mark = spx.mark()
        conflict = None
        for j in keep:
            if j == i:
                continue
            conflict = _assert(spx, handles[j], cons[j].rel, j)
            if conflict is not None:
                break
        if conflict is None:
            conflict = _assert(spx, handles[i], cons[i].rel, i, negate=True)
        if conflict is None:
            conflict = spx.check()
        spx.backtrack(mark)
        if conflict is not None:
            keep.discard(i)
    del eqs
    return Polyhedron(tuple(c for i, c in enumerate(cons) if i in keep), p.literals, False, p.sorts)


# ---------------------------------------------------------------------------
# projection


def _is_int(name: str, sorts) -> bool:
    return sorts.get(name) is Sort.INT


def _eliminate_real(cons: list[Constraint], v: str, sorts) -> list[Constraint]:
    pos, neg, other = [], [], []
    for c in cons:
        k = c.term.coef(v)
        if k > 0:
            pos.append(c)
        elif k < 0:
            neg.append(c)
        else:
            other.append(c)
    if not pos or not neg:
        return other
    for a in pos:
        for b in neg:
            term, strict = fm_combine(a.term, a.rel == "<", b.term, b.rel == "<", v)
            other.append(Constraint(term, "<" if strict else "<="))
    return other


def _substitute_eq(cons: list[Constraint], v: str, eq: Constraint) -> list[Constraint]:
    k = eq.term.coef(v)
    expr = LinearTerm(tuple((n, -a / k) for n, a in eq.term.coeffs if n != v), -eq.term.const / k)
    out = []
    for c in cons:
        if c is eq:
            continue
        if c.term.coef(v):
            out.append(Constraint(c.term.substitute({v: expr}), c.rel))
        else:
            out.append(c)
    return out


def _prune(cons: list[Constraint], lits, sorts, nvars: int) -> Polyhedron:
    p = canonicalize_parts(cons, lits, sorts)
    if not p.bottom and len(p.constraints) > 2 * nvars + 2:
        p = remove_redundant(p)
    return p


def _const_range(cons: list[Constraint], v: str, sorts) -> tuple:
    """Rational bounds of ``v`` over the polyhedron (by LP over the relaxation)."""
    others = sorted({n for c in cons for n, _ in c.term.coeffs} - {v})
    cur = list(cons)
    for u in others:
        cur = _eliminate_real(_equalities_first(cur, u), u, sorts)
    lo = hi = None
    for c in cur:
        k = c.term.coef(v)
        if not k:
            continue
        b = -c.term.const / k
        if c.rel == "=":
            lo = b if lo is None else max(lo, b)
            hi = b if hi is None else min(hi, b)
        elif k > 0:
            hi = b if hi is None else min(hi, b)
        else:
            lo = b if lo is None else max(lo, b)
    return lo, hi


def _equalities_first(cons, u):
    for c in cons:
        if c.rel == "=" and c.term.coef(u):
            return _substitute_eq(cons, u, c)
    return cons


def project(p: Polyhedron, drop: Iterable[str], budget: int = 256) -> list[Polyhedron]:
    """Disjunction of polyhedra equivalent to ``exists drop. p`` over the sorts."""
    drop = set(drop) & p.numeric_variables
    bad = {n for n, _ in p.literals} & set(drop)
    if bad:
        raise ValueError(f"cannot project Boolean variables {sorted(bad)}")
    if p.bottom:
        return []
    work = [p]
    out: list[Polyhedron] = []
    while work:
        q = work.pop()
        if q.bottom:
            continue
        todo = drop & q.numeric_variables
        if not todo:
            out.append(q)
            continue
        res = _eliminate_one(q, todo, budget)
        work.extend(res)
        if len(work) + len(out) > budget:
            raise ProjectionBudgetExceeded(f"more than {budget} disjuncts")
    return _dedupe([remove_redundant(q) for q in out])


def _dedupe(ps: list[Polyhedron]) -> list[Polyhedron]:
    seen = set()
    res = []
    for q in ps:
        if q.bottom or q in seen:
            continue
        seen.add(q)
        res.append(q)
    return res


def _pick(q: Polyhedron, todo: set[str]) -> str:
    cons = q.constraints

    def cost(v):
        np = sum(1 for c in cons if c.term.coef(v) > 0)
        nn = sum(1 for c in cons if c.term.coef(v) < 0)
        eq = any(c.rel == "=" and c.term.coef(v) for c in cons)
        return (0 if eq else 1, np * nn - np - nn, v)

    return min(todo, key=cost)


def _eliminate_one(q: Polyhedron, todo: set[str], budget: int) -> list[Polyhedron]:
    sorts = q.sorts
    cons = list(q.constraints)
    lits = list(q.literals)
    nvars = len(q.numeric_variables)
    v = _pick(q, todo)
    is_int = _is_int(v, sorts)
    involved = [c for c in cons if c.term.coef(v)]
    eq = next((c for c in involved if c.rel == "="), None)
    if eq is not None:
        k = eq.term.coef(v)
        if not is_int or abs(k) == 1:
            return [_prune(_substitute_eq(cons, v, eq), lits, sorts, nvars)]
        return _enumerate(q, v, budget)
    ups = [c for c in involved if c.term.coef(v) > 0]
    lows = [c for c in involved if c.term.coef(v) < 0]
    if not ups or not lows:
        return [_prune([c for c in cons if not c.term.coef(v)], lits, sorts, nvars)]
    if is_int:
        exact = all(
            abs(a.term.coef(v)) == 1 or abs(b.term.coef(v)) == 1 for a in ups for b in lows
        ) and all(_is_int(n, sorts) for c in involved for n, _ in c.term.coeffs)
        if not exact:
            return _enumerate(q, v, budget)
    return [_prune(_eliminate_real(cons, v, sorts), lits, sorts, nvars)]


def _enumerate(q: Polyhedron, v: str, budget: int) -> list[Polyhedron]:
    lo, hi = _const_range(list(q.constraints), v, q.sorts)
    if lo is None or hi is None:
        raise ProjectionBudgetExceeded(f"unbounded integer variable {v} with non-unit coefficients")
    a, b = ceil(lo), floor(hi)
    if b - a + 1 > budget:
        raise ProjectionBudgetExceeded(f"{v} ranges over {b - a + 1} values")
    out = []
    for k in range(a, b + 1):
        fixed = Constraint(LinearTerm.var(v) - LinearTerm.constant(k), "=")
        r = canonicalize_parts(list(q.constraints) + [fixed], list(q.literals), q.sorts)
        if not r.bottom and not rational_empty(r.constraints):
            out.append(r)
    return out


# ---------------------------------------------------------------------------
# hulls

_fresh = count()


def convex_hull(p: Polyhedron, q: Polyhedron) -> Polyhedron:
    """Closed convex hull of p and q by lift-and-project."""
    if p.literals != q.literals:
        raise LiteralMismatch("hull between different Boolean cells")
    if p.bottom:
        return q
    if q.bottom:
        return p
    sorts = dict(p.sorts)
    sorts.update(q.sorts)
    names = sorted(p.numeric_variables | q.numeric_variables)
    tag = next(_fresh)
    lam = f"$lam{tag}"
    ys = {n: f"$y{tag}_{n}" for n in names}
    lifted: list[Constraint] = []
    for c in p.constraints:
        t = LinearTerm.make([(ys[n], k) for n, k in c.term.coeffs] + [(lam, c.term.const)])
        lifted.append(Constraint(t, "=" if c.rel == "=" else "<="))
    for c in q.constraints:
        t = LinearTerm.make(
            list(c.term.coeffs)
            + [(ys[n], -k) for n, k in c.term.coeffs]
            + [(lam, -c.term.const)],
            c.term.const,
        )
        lifted.append(Constraint(t, "=" if c.rel == "=" else "<="))
    lifted.append(Constraint(LinearTerm.var(lam, -1), "<="))
    lifted.append(Constraint(LinearTerm.make([(lam, 1)], -1), "<="))
    real_sorts = {n: Sort.REAL for n in names}
    real_sorts.update({y: Sort.REAL for y in ys.values()})
    real_sorts[lam] = Sort.REAL
    start = Polyhedron(tuple(c for c in lifted if c.term.coeffs), (), False, real_sorts)
    start = canonicalize_parts(list(start.constraints), [], real_sorts)
    shadows = project(start, set(ys.values()) | {lam}, budget=1)
    if not shadows:
        return Polyhedron.empty(sorts)
    hull = canonicalize_parts(list(shadows[0].constraints), list(p.literals), sorts)
    return remove_redundant(hull)


@dataclass(frozen=True)
class HullResult:
    hull: Polyhedron
    exact: bool


def _inherited_strict(h: Polyhedron, p: Polyhedron, q: Polyhedron) -> list[Constraint]:
    strict_dirs = {c.term.coeffs for c in p.constraints + q.constraints if c.rel == "<"}
    return [c for c in h.constraints if c.rel == "<=" and c.term.coeffs in strict_dirs]


def exact_hull(p: Polyhedron, q: Polyhedron, oracle) -> HullResult | None:
    """Convex hull of p and q if it equals their union over the sorts, else None."""
    h = convex_hull(p, q)
    if _covered(h, p, q, oracle):
        return HullResult(h, True)
    for facet in _inherited_strict(h, p, q):
        variant = h.with_constraints(
            [c if c != facet else Constraint(c.term, "<") for c in h.constraints]
        )
        if _covered(variant, p, q, oracle):
            return HullResult(variant, True)
    return None


def _covered(h: Polyhedron, p: Polyhedron, q: Polyhedron, oracle) -> bool:
    f = mk_and(h.to_formula(), mk_not(p.to_formula()), mk_not(q.to_formula()))
    return oracle.check_sat(f, _all_sorts(h, p, q)).unsat


def _all_sorts(*ps) -> dict:
    out: dict = {}
    for p in ps:
        out.update(p.sorts)
    return out


def is_empty(p: Polyhedron, oracle) -> bool:
    if p.bottom:
        return True
    if rational_empty(p.constraints):
        return True
    if not any(p.sorts.get(n) is Sort.INT for n in p.numeric_variables):
        return False
    res = oracle.check_sat(p.to_formula(), p.sorts)
    return res.unsat


def includes(p: Polyhedron, q: Polyhedron, oracle) -> bool:
    """Does q imply p?"""
    if q.bottom:
        return True
    if p.bottom:
        return is_empty(q, oracle)
    if set(p.atoms()) <= set(q.atoms()):
        return True
    sorts = _all_sorts(p, q)
    res = oracle.check_sat(mk_and(q.to_formula(), mk_not(p.to_formula())), sorts)
    return res.unsat


def intersects(p: Polyhedron, q: Polyhedron, oracle) -> bool:
    if p.bottom or q.bottom:
        return False
    sorts = _all_sorts(p, q)
    res = oracle.check_sat(mk_and(p.to_formula(), q.to_formula()), sorts)
    return res.sat


def meet(p: Polyhedron, q: Polyhedron) -> Polyhedron:
    sorts = _all_sorts(p, q)
    if p.bottom or q.bottom:
        return Polyhedron.empty(sorts)
    return canonicalize_parts(list(p.constraints + q.constraints), list(p.literals + q.literals), sorts)


def union_formula(ps: Iterable[Polyhedron]) -> Formula:
    return mk_or(*[p.to_formula() for p in ps])
