"""Interval bounds for numeric state variables.

Boxes are propagated through the NNF of the transition relation: linear
atoms are revised variable by variable, conjunctions are iterated a few
rounds, disjunctions (including ite branches with their guards) are joined.
Widening jumps to thresholds taken from the model's constants; two
narrowing steps follow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

from .kind import Candidate
from .logic.formula import (
    And, BoolConst, Constraint, Formula, LinearTerm, Or, Sort, canonical_constraint, nnf,
)
from .system import TransitionSystem, primed

Bound = tuple  # (lo, hi); None stands for an infinite end

WIDEN_LIMIT = 64
ROUNDS = 3


@dataclass(frozen=True)
class IntervalEnv:
    bounds: Mapping[str, Bound]

    def __getitem__(self, name: str) -> Bound:
        return self.bounds.get(name, (None, None))

    def __contains__(self, name: str) -> bool:
        return name in self.bounds

    def items(self):
        return self.bounds.items()

    def is_top(self) -> bool:
        return all(b == (None, None) for b in self.bounds.values())

    def __str__(self) -> str:
        def end(v, inf):
            return inf if v is None else str(v)

        return ", ".join(
            f"{n} in [{end(lo, '-inf')}, {end(hi, '+inf')}]" for n, (lo, hi) in sorted(self.bounds.items())
        )


# ---------------------------------------------------------------------------
# interval arithmetic


def _add(a: Bound, b: Bound) -> Bound:
    lo = None if a[0] is None or b[0] is None else a[0] + b[0]
    hi = None if a[1] is None or b[1] is None else a[1] + b[1]
    return lo, hi


def _scale(a: Bound, k: Fraction) -> Bound:
    lo = None if a[0] is None else a[0] * k
    hi = None if a[1] is None else a[1] * k
    return (lo, hi) if k >= 0 else (hi, lo)


def _meet(a: Bound, b: Bound) -> Bound:
    lo = a[0] if b[0] is None else b[0] if a[0] is None else max(a[0], b[0])
    hi = a[1] if b[1] is None else b[1] if a[1] is None else min(a[1], b[1])
    return lo, hi


def _join(a: Bound, b: Bound) -> Bound:
    lo = None if a[0] is None or b[0] is None else min(a[0], b[0])
    hi = None if a[1] is None or b[1] is None else max(a[1], b[1])
    return lo, hi


def _empty(b: Bound) -> bool:
    return b[0] is not None and b[1] is not None and b[0] > b[1]


def _integral(b: Bound) -> Bound:
    lo = None if b[0] is None else Fraction(math.ceil(b[0]))
    hi = None if b[1] is None else Fraction(math.floor(b[1]))
    return lo, hi


def join_boxes(a: dict | None, b: dict | None) -> dict | None:
    if a is None:
        return b
    if b is None:
        return a
    out = {}
    for n in a.keys() & b.keys():
        j = _join(a[n], b[n])
        if j != (None, None):
            out[n] = j
    return out


# ---------------------------------------------------------------------------
# propagation


def _revise(c: Constraint, box: dict, sorts) -> dict | None:
    out = dict(box)
    changed = True
    rounds = 0
    while changed and rounds < ROUNDS:
        changed = False
        rounds += 1
        for v, k in c.term.coeffs:
            rest: Bound = (-c.term.const, -c.term.const)
            for w, kw in c.term.coeffs:
                if w != v:
                    rest = _add(rest, _scale(out.get(w, (None, None)), -kw))
            # k*v rel rest
            if c.rel == "=":
                cand = _scale(rest, 1 / k)
            elif k > 0:
                cand = (None, None if rest[1] is None else rest[1] / k)
            else:
                cand = (None if rest[1] is None else rest[1] / k, None)
            if sorts.get(v) is Sort.INT:
                cand = _integral(cand)
            cur = out.get(v, (None, None))
            new = _meet(cur, cand)
            if _empty(new):
                return None
            if new != cur:
                out[v] = new
                changed = True
    return out


def propagate(f: Formula, box: dict, sorts) -> dict | None:
    """Smallest box found by propagation that contains box restricted by f (None if empty)."""
    if isinstance(f, BoolConst):
        return box if f.value else None
    if isinstance(f, Constraint):
        return _revise(f, box, sorts)
    if isinstance(f, And):
        cur = box
        for _ in range(ROUNDS):
            prev = cur
            for a in f.args:
                cur = propagate(a, cur, sorts)
                if cur is None:
                    return None
            if cur == prev:
                break
        return cur
    if isinstance(f, Or):
        out = None
        for a in f.args:
            out = join_boxes(out, propagate(a, box, sorts))
        return out
    return box


# ---------------------------------------------------------------------------
# fixpoint


def _thresholds(sys: TransitionSystem, g: list[Formula]) -> list[Fraction]:
    vals: set[Fraction] = set()
    for v in sys.numeric_constants():
        vals.update((v, -v))
    stack = list(g)
    while stack:
        f = stack.pop()
        if isinstance(f, (And, Or)):
            stack.extend(f.args)
        elif isinstance(f, Constraint) and len(f.term.coeffs) == 1:
            (_, k), = f.term.coeffs
            b = -f.term.const / k
            vals.update((b, b - 1, b + 1))
    return sorted(vals)


def _widen(old: Bound, new: Bound, th: list[Fraction]) -> Bound:
    lo, hi = old
    if new[0] is None or (lo is not None and new[0] < lo):
        below = [t for t in th if new[0] is not None and t <= new[0]]
        lo = below[-1] if below else None
    if new[1] is None or (hi is not None and new[1] > hi):
        above = [t for t in th if new[1] is not None and t >= new[1]]
        hi = above[0] if above else None
    return lo, hi


def post(sys: TransitionSystem, env: IntervalEnv) -> IntervalEnv | None:
    """Abstract image of ``env`` under one transition (None if no successor)."""
    sorts = sys.sorts
    g = _trans_nnf(sys)
    box = {n: b for n, b in env.items() if n in sys.states}
    for n, b in list(box.items()):
        if _empty(b):
            return None
    for a in sys.assumes:
        box = propagate(nnf(a, sorts), box, sorts) if box is not None else None
    if box is None:
        return None
    out = propagate(g, box, sorts)
    if out is None:
        return None
    return IntervalEnv({n: out.get(primed(n), (None, None)) for n in _numeric(sys)})


_NNF_CACHE: dict = {}


def _trans_nnf(sys: TransitionSystem) -> Formula:
    key = (sys.trans, sys.assumes)
    g = _NNF_CACHE.get(key)
    if g is None:
        extra = [sys.prime(a) for a in sys.assumes]
        from .logic.formula import mk_and

        g = nnf(mk_and(sys.trans, *extra), sys.sorts)
        if len(_NNF_CACHE) > 64:
            _NNF_CACHE.clear()
        _NNF_CACHE[key] = g
    return g


def _numeric(sys: TransitionSystem) -> list[str]:
    return [n for n, s in sys.states.items() if s is not Sort.BOOL]


def _env_join(a: IntervalEnv | None, b: IntervalEnv | None, names) -> IntervalEnv | None:
    if a is None:
        return b
    if b is None:
        return a
    return IntervalEnv({n: _join(a[n], b[n]) for n in names})


def infer_bounds(sys: TransitionSystem) -> IntervalEnv:
    names = _numeric(sys)
    top = IntervalEnv({n: (None, None) for n in names})
    sorts = sys.sorts
    init = propagate(nnf(sys.init, sorts), {}, sorts)
    if init is None:
        return top
    x = IntervalEnv({n: init.get(n, (None, None)) for n in names})
    th = _thresholds(sys, [_trans_nnf(sys), nnf(sys.init, sorts)])
    for _ in range(WIDEN_LIMIT):
        y = _env_join(x, post(sys, x), names)
        if y == x:
            break
        x = IntervalEnv({n: _widen(x[n], y[n], th) for n in names})
    else:
        return top
    for _ in range(2):
        y = _env_join(IntervalEnv({n: init.get(n, (None, None)) for n in names}), post(sys, x), names)
        if y is None:
            break
        x = IntervalEnv({n: _meet(x[n], y[n]) for n in names})
    return x


def bounds_to_candidates(env: IntervalEnv, sorts=None, first_id: int = 0) -> list[Candidate]:
    out = []
    i = first_id
    for n, (lo, hi) in sorted(env.items()):
        if lo is not None:
            out.append(Candidate(i, canonical_constraint(LinearTerm.make([(n, -1)], lo), "<=", sorts), "interval-bound"))
            i += 1
        if hi is not None:
            out.append(Candidate(i, canonical_constraint(LinearTerm.make([(n, 1)], -hi), "<=", sorts), "interval-bound"))
            i += 1
    return out
