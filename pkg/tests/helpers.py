"""Shared generators and independent reference checks for the test suite."""

from __future__ import annotations

import itertools
import random
from fractions import Fraction

import z3

from hullinv.logic.formula import (
    Add, And, BoolConst, BoolVar, Compare, Constraint, ConstRef, Div, Iff, Implies, Ite, LinearTerm, Mul, Neg,
    Not, Num, Or, Sort, Sub, TermIte, Var, atom_of_compare, canonical_constraint, evaluate,
)
from hullinv.polyhedra import Polyhedron

BOX = range(-5, 6)


# ---------------------------------------------------------------------------
# z3 translation, used as an oracle independent of the package's solvers


def to_z3(f, sorts, cache=None):
    cache = {} if cache is None else cache

    def var(n):
        if n not in cache:
            s = sorts[n]
            cache[n] = z3.Bool(n) if s is Sort.BOOL else z3.Int(n) if s is Sort.INT else z3.Real(n)
        return cache[n]

    def num(v):
        v = Fraction(v)
        return z3.RealVal(f"{v.numerator}/{v.denominator}")

    def term(t):
        if isinstance(t, Var):
            return z3.ToReal(var(t.name)) if sorts[t.name] is Sort.INT else var(t.name)
        if isinstance(t, (Num, ConstRef)):
            return num(t.value)
        if isinstance(t, Add):
            return z3.Sum([term(a) for a in t.args])
        if isinstance(t, Sub):
            return term(t.left) - term(t.right)
        if isinstance(t, Neg):
            return -term(t.arg)
        if isinstance(t, Mul):
            return term(t.coef) * term(t.arg)
        if isinstance(t, Div):
            return term(t.arg) / term(t.divisor)
        if isinstance(t, TermIte):
            return z3.If(form(t.cond), term(t.then), term(t.else_))
        if isinstance(t, LinearTerm):
            parts = [num(c) * term(Var(n)) for n, c in t.coeffs]
            return z3.Sum(parts + [num(t.const)]) if parts else num(t.const)
        raise TypeError(t)

    def rel(a, r, b):
        return {"<": a < b, "<=": a <= b, "=": a == b}[r]

    def form(g):
        if isinstance(g, BoolConst):
            return z3.BoolVal(g.value)
        if isinstance(g, BoolVar):
            return var(g.name)
        if isinstance(g, Not):
            return z3.Not(form(g.arg))
        if isinstance(g, And):
            return z3.And([form(a) for a in g.args])
        if isinstance(g, Or):
            return z3.Or([form(a) for a in g.args])
        if isinstance(g, Implies):
            return z3.Implies(form(g.left), form(g.right))
        if isinstance(g, Iff):
            return form(g.left) == form(g.right)
        if isinstance(g, Ite):
            return z3.If(form(g.cond), form(g.then), form(g.else_))
        if isinstance(g, Compare):
            return rel(term(g.left), g.rel, term(g.right))
        if isinstance(g, Constraint):
            return rel(term(g.term), g.rel, z3.RealVal(0))
        raise TypeError(g)

    return form(f)


def z3_status(f, sorts) -> str:
    s = z3.Solver()
    s.add(to_z3(f, sorts))
    return str(s.check())


# ---------------------------------------------------------------------------
# random polyhedra


def rand_constraint(rng: random.Random, names, sorts, coef=3, const=6):
    k = rng.randint(1, len(names))
    vs = rng.sample(list(names), k)
    coeffs = [(v, rng.choice([c for c in range(-coef, coef + 1) if c])) for v in vs]
    rel = rng.choice(["<=", "<=", "<=", "<", "="])
    return canonical_constraint(LinearTerm.make(coeffs, rng.randint(-const, const)), rel, sorts)


def box_atoms(names, sorts, lo=-5, hi=5):
    out = []
    for n in names:
        out.append(canonical_constraint(LinearTerm.make([(n, -1)], lo), "<=", sorts))
        out.append(canonical_constraint(LinearTerm.make([(n, 1)], -hi), "<=", sorts))
    return out


def rand_poly(rng: random.Random, names, sorts, n_cons=None, boxed=True, lo=-5, hi=5) -> Polyhedron:
    n_cons = rng.randint(1, 3) if n_cons is None else n_cons
    atoms = [rand_constraint(rng, names, sorts) for _ in range(n_cons)]
    if boxed:
        atoms += box_atoms(names, sorts, lo, hi)
    return Polyhedron.make(atoms, sorts)


def rand_rect(rng: random.Random, names, sorts, lo=0, hi=4) -> Polyhedron:
    """Small axis-aligned box, sometimes cut by a diagonal."""
    atoms = []
    for n in names:
        a = rng.randint(lo, hi)
        b = rng.randint(a, min(hi, a + 2))
        atoms += box_atoms([n], sorts, a, b)
    if len(names) > 1 and rng.random() < 0.3:
        x, y = names[:2]
        atoms.append(atom_of_compare(Var(x), "<=", Var(y), sorts) if rng.random() < 0.5
                     else atom_of_compare(Var(y), "<=", Var(x), sorts))
    return Polyhedron.make(atoms, sorts)


def int_points(p: Polyhedron, names, lo=-5, hi=5) -> frozenset:
    rng = range(lo, hi + 1)
    out = set()
    for pt in itertools.product(rng, repeat=len(names)):
        m = dict(zip(names, pt))
        if p.contains_point(m):
            out.add(pt)
    return frozenset(out)


def formula_points(f, names, lo=-5, hi=5) -> frozenset:
    out = set()
    for pt in itertools.product(range(lo, hi + 1), repeat=len(names)):
        if evaluate(f, dict(zip(names, pt))):
            out.add(pt)
    return frozenset(out)


def rand_formula(rng: random.Random, names, sorts, depth=2):
    if depth == 0 or rng.random() < 0.3:
        return rand_constraint(rng, names, sorts)
    op = rng.choice([And, Or, Or, Not])
    if op is Not:
        return Not(rand_formula(rng, names, sorts, depth - 1))
    return op(tuple(rand_formula(rng, names, sorts, depth - 1) for _ in range(rng.randint(2, 3))))


# ---------------------------------------------------------------------------
# reference checks shared by the property tests and the acceptance suite


def qe_instance(rng: random.Random):
    """A random formula over at most three boxed integer variables and a split into keep / eliminate."""
    from hullinv.logic.formula import mk_and
    from hullinv.qe import QETask

    nv = rng.randint(1, 3)
    names = ["x", "y", "z"][:nv]
    sorts = {n: Sort.INT for n in names}
    elim = frozenset(rng.sample(names, rng.randint(1, nv)))
    keep = frozenset(names) - elim
    body = mk_and(rand_formula(rng, names, sorts, depth=2), *box_atoms(names, sorts))
    return QETask(body, elim, keep, sorts), names


def qe_mismatch(task, names, oracle):
    """None if eliminate() agrees with enumeration on the box, else a description."""
    from hullinv.qe import eliminate

    polys = eliminate(task, oracle)
    keep = sorted(task.keep)
    elim = sorted(task.eliminate)
    truth = set()
    for pt in itertools.product(BOX, repeat=len(names)):
        m = dict(zip(names, pt))
        if evaluate(task.body, m):
            truth.add(tuple(m[n] for n in keep))
    # one unit past the box: the projection must be empty there
    for pt in itertools.product(range(-6, 7), repeat=len(keep)):
        m = dict(zip(keep, pt))
        got = any(p.contains_point(m) for p in polys)
        if got != (pt in truth):
            return f"{task.body} elim {elim}: point {m} expected {pt in truth}"
    return None


def ech_mismatch(p, q, names, oracle):
    """Check exact_hull against a z3 certificate or an enumerated witness."""
    from hullinv.logic.formula import mk_and, mk_not
    from hullinv.polyhedra import convex_hull, exact_hull

    res = exact_hull(p, q, oracle)
    sorts = dict(p.sorts)
    if res is not None:
        h = res.hull
        f = mk_and(h.to_formula(), mk_not(p.to_formula()), mk_not(q.to_formula()))
        if z3_status(f, sorts) != "unsat":
            return f"claimed exact but z3 finds a point of {h} outside {p} | {q}"
        return None
    h = convex_hull(p, q)
    union = int_points(p, names) | int_points(q, names)
    if not (int_points(h, names) - union):
        return f"no witness in {h} outside {p} | {q} though exactness was refused"
    return None


def brute_force_hulls(polys, oracle):
    """Every (source, hull) reachable by exact pairwise merges in any order."""
    from hullinv.polyhedra import exact_hull

    found = {frozenset([i + 1]): p for i, p in enumerate(polys)}
    tried = set()
    grew = True
    while grew:
        grew = False
        for a, b in itertools.combinations(sorted(found, key=sorted), 2):
            key = frozenset([a, b])
            if key in tried or a <= b or b <= a:
                continue
            tried.add(key)
            src = a | b
            if src in found:
                continue
            res = exact_hull(found[a], found[b], oracle)
            if res is not None:
                found[src] = res.hull
                grew = True
    return found


# ---------------------------------------------------------------------------
# the five-polyhedra examples


def _poly(rows, sort):
    sorts = {"x": sort, "y": sort}
    atoms = []
    for a, r, b in rows:
        a = Num(a) if isinstance(a, int) else a
        b = Num(b) if isinstance(b, int) else b
        atoms.append(atom_of_compare(a, r, b, sorts))
    return Polyhedron.make(atoms, sorts)


def hat_polyhedra():
    """Five real polyhedra shaped like a hat; 1, 2, 3 form the crown, 4 and 5 the brim."""
    x, y = Var("x"), Var("y")
    s = Sort.REAL
    return [
        _poly([(0, "<=", x), (1, "<=", y), (y, "<=", 2), (x, "<=", y)], s),
        _poly([(x, "<=", 4), (1, "<=", y), (y, "<=", 2), (4, "<=", Add((x, y)))], s),
        _poly([(1, "<=", y), (y, "<=", x), (Add((x, y)), "<=", 4)], s),
        _poly([(0, "<=", y), (y, "<=", 1), (y, "<=", x), (x, "<=", 2)], s),
        _poly([(0, "<=", y), (y, "<=", 1), (Add((x, y)), "<=", 4), (2, "<=", x)], s),
    ]


def scattered_polyhedra():
    """Five integer polyhedra; the hull of the second and fifth has facet x + y <= 4."""
    x, y = Var("x"), Var("y")
    s = Sort.INT
    return [
        _poly([(0, "<=", y), (y, "<=", x), (x, "<=", 1)], s),
        _poly([(2, "<=", x), (x, "<=", 3), (0, "<=", y), (y, "<=", 1)], s),
        _poly([(x, "=", 2), (y, "=", 2)], s),
        _poly([(x, "=", 3), (2, "<=", y), (y, "<=", 3)], s),
        _poly([(x, "=", 4), (y, "=", 0)], s),
    ]


def ordered_merge(polys, order, oracle):
    """Baseline: fold polyhedra in a fixed order, keeping only the first exact merge found each time."""
    from hullinv.polyhedra import exact_hull

    work = [(frozenset([i + 1]), polys[i]) for i in order]
    seen = list(work)
    merged = True
    while merged:
        merged = False
        for i, j in itertools.combinations(range(len(work)), 2):
            res = exact_hull(work[i][1], work[j][1], oracle)
            if res is not None:
                item = (work[i][0] | work[j][0], res.hull)
                work = [w for k, w in enumerate(work) if k not in (i, j)]
                work.insert(i, item)
                seen.append(item)
                merged = True
                break
    return seen
