"""Built-in CDCL(T) solver for QF linear arithmetic with Booleans.

The formula is put in negation normal form, term-level ites are purified
into fresh variables, and the result is Tseitin-encoded one-directionally
(the NNF is monotone, so only ``node -> children`` clauses are needed).
Arithmetic atoms are therefore only ever asserted positively to the
simplex.  Integer feasibility is decided by branch and bound at full
assignments.
"""

from __future__ import annotations

import heapq
import time
from fractions import Fraction
from typing import Mapping

from ..logic.formula import (
    FALSE, TRUE, Add, And, BoolConst, BoolVar, Compare, Constraint, Div, Formula, Iff,
    Implies, Ite, Mul, Neg, Not, Or, Sort, Sub, TermIte, Var, mk_and,
    mk_ite, nnf, sort_of_term,
)
from .base import SAT, UNKNOWN, UNSAT, Oracle, SatResult
from .simplex import ZERO, BranchLimit, Simplex


class Timeout(Exception):
    pass


def purify(f: Formula, sorts: Mapping[str, Sort]):
    """Replace term-level ites by fresh variables with guarded definitions."""
    defs: list[Formula] = []
    new_sorts: dict[str, Sort] = {}
    memo: dict = {}

    def term(t):
        if isinstance(t, TermIte):
            hit = memo.get(t)
            if hit is not None:
                return hit
            name = f"$ite{len(memo)}"
            v = Var(name)
            memo[t] = v
            new_sorts[name] = sort_of_term(t, sorts)
            c = form(t.cond)
            a = term(t.then)
            b = term(t.else_)
            defs.append(mk_ite(c, Compare(v, "=", a), Compare(v, "=", b)))
            return v
        if isinstance(t, Add):
            return Add(tuple(term(a) for a in t.args))
        if isinstance(t, Sub):
            return Sub(term(t.left), term(t.right))
        if isinstance(t, Neg):
            return Neg(term(t.arg))
        if isinstance(t, Mul):
            return Mul(term(t.coef), term(t.arg))
        if isinstance(t, Div):
            return Div(term(t.arg), term(t.divisor))
        return t

    def form(g):
        if isinstance(g, Compare):
            return Compare(term(g.left), g.rel, term(g.right))
        if isinstance(g, Not):
            return Not(form(g.arg))
        if isinstance(g, And):
            return And(tuple(form(a) for a in g.args))
        if isinstance(g, Or):
            return Or(tuple(form(a) for a in g.args))
        if isinstance(g, Implies):
            return Implies(form(g.left), form(g.right))
        if isinstance(g, Iff):
            return Iff(form(g.left), form(g.right))
        if isinstance(g, Ite):
            return Ite(form(g.cond), form(g.then), form(g.else_))
        return g

    body = form(f)
    if not defs:
        return f, {}
    return mk_and(body, *defs), new_sorts


class _Theory:
    """Maps arithmetic atoms onto simplex bounds."""

    def __init__(self, sorts):
        self.spx = Simplex()
        self.sorts = sorts
        self.bounds: dict[int, list] = {}

    def register(self, atom_id: int, c: Constraint) -> None:
        spx = self.spx
        for name, _ in c.term.coeffs:
            spx.var(name, self.sorts.get(name) is Sort.INT)
        coeffs = c.term.coeffs
        lead = coeffs[0][1]
        bound = -c.term.const / lead
        if len(coeffs) == 1:
            x = spx.index[coeffs[0][0]]
        else:
            key = tuple((n, k / lead) for n, k in coeffs)
            x = spx.slack(key)
        rel = c.rel
        flip = lead < 0
        out = []
        if rel == "=":
            out.append((x, True, (bound, ZERO)))
            out.append((x, False, (bound, ZERO)))
        elif rel == "<=":
            out.append((x, flip is False, (bound, ZERO)))
        else:
            d = Fraction(1) if flip else Fraction(-1)
            out.append((x, flip is False, (bound, d)))
        self.bounds[atom_id] = out

    def assert_atom(self, atom_id: int):
        spx = self.spx
        for x, upper, b in self.bounds[atom_id]:
            conflict = spx.assert_upper(x, b, atom_id) if upper else spx.assert_lower(x, b, atom_id)
            if conflict is not None:
                return conflict
        return None

    def bound_lemmas(self) -> list[list[int]]:
        """Binary clauses relating atoms that bound the same simplex variable."""
        by_var: dict[int, list] = {}
        for a, bs in self.bounds.items():
            for x, upper, b in bs:
                by_var.setdefault(x, []).append((a, upper, b))
        out = []
        for group in by_var.values():
            if len(group) < 2:
                continue
            for a, ua, ba in group:
                for b, ub, bb in group:
                    if a == b:
                        continue
                    single = len(self.bounds[b]) == 1
                    if ua == ub and single and (ba <= bb if ua else ba >= bb):
                        out.append([-a, b])
                    elif ua and not ub and bb > ba:
                        out.append([-a, -b])
        return out


class CDCL:
    """Conflict-driven clause learning with two watched literals."""

    def __init__(self, nvars: int, theory: _Theory | None, atoms: dict[int, Constraint], deadline):
        self.n = nvars
        self.value = [None] * (nvars + 1)
        self.level = [0] * (nvars + 1)
        self.reason: list = [None] * (nvars + 1)
        self.activity = [0.0] * (nvars + 1)
        self.phase = [False] * (nvars + 1)
        self.heap = [(0.0, v) for v in range(1, nvars + 1)]
        self.clauses: list[list[int]] = []
        self.watches: dict[int, list[int]] = {}
        self.trail: list[int] = []
        self.trail_lim: list[int] = []
        self.qhead = 0
        self.bump = 1.0
        self.theory = theory
        self.atoms = atoms
        self.theory_head = 0
        self.theory_marks: list[tuple[int, int]] = []
        self.deadline = deadline
        self.unsat = False

    # -- clause db -----------------------------------------------------------

    def add_clause(self, lits: list[int]) -> None:
        lits = list(dict.fromkeys(lits))
        if any(-l in lits for l in lits):
            return
        if not lits:
            self.unsat = True
            return
        if len(lits) == 1:
            v = self.lit_value(lits[0])
            if v is False:
                self.unsat = True
            elif v is None:
                self.assign(lits[0], None)
            return
        idx = len(self.clauses)
        self.clauses.append(lits)
        self.watches.setdefault(lits[0], []).append(idx)
        self.watches.setdefault(lits[1], []).append(idx)

    def lit_value(self, lit: int):
        v = self.value[abs(lit)]
        if v is None:
            return None
        return v if lit > 0 else not v

    def assign(self, lit: int, reason) -> None:
        var = abs(lit)
        self.value[var] = lit > 0
        self.level[var] = len(self.trail_lim)
        self.reason[var] = reason
        self.trail.append(lit)

    # -- propagation -----------------------------------------------------------

    def propagate(self):
        """Unit propagation; returns a conflicting clause index or None."""
        value = self.value
        clauses = self.clauses
        watches = self.watches
        while self.qhead < len(self.trail):
            lit = self.trail[self.qhead]
            self.qhead += 1
            false_lit = -lit
            wl = watches.get(false_lit)
            if not wl:
                continue
            keep = []
            i = 0
            n = len(wl)
            while i < n:
                ci = wl[i]
                i += 1
                c = clauses[ci]
                if c[0] == false_lit:
                    c[0], c[1] = c[1], c[0]
                first = c[0]
                fv = value[abs(first)]
                if fv is not None and (fv if first > 0 else not fv):
                    keep.append(ci)
                    continue
                found = False
                for k in range(2, len(c)):
                    l = c[k]
                    lv = value[abs(l)]
                    if lv is None or (lv if l > 0 else not lv):
                        c[1], c[k] = c[k], c[1]
                        watches.setdefault(c[1], []).append(ci)
                        found = True
                        break
                if found:
                    continue
                keep.append(ci)
                if fv is None:
                    self.assign(first, ci)
                else:
                    keep.extend(wl[i:])
                    watches[false_lit] = keep
                    return ci
            watches[false_lit] = keep
        return None

    def theory_propagate(self):
        """Push newly true atoms to the simplex and check; conflict literal list or None."""
        th = self.theory
        if th is None:
            return None
        atoms = self.atoms
        trail = self.trail
        while self.theory_head < len(trail):
            lit = trail[self.theory_head]
            pos = self.theory_head
            self.theory_head += 1
            if lit > 0 and lit in atoms:
                self.theory_marks.append((pos, th.spx.mark()))
                conflict = th.assert_atom(lit)
                if conflict is not None:
                    return [-a for a in conflict]
        conflict = th.spx.check()
        if conflict is not None:
            return [-a for a in conflict]
        return None

    # -- search ----------------------------------------------------------------

    def backtrack(self, lvl: int) -> None:
        if len(self.trail_lim) <= lvl:
            return
        pos = self.trail_lim[lvl]
        for lit in self.trail[pos:]:
            v = abs(lit)
            self.phase[v] = lit > 0
            self.value[v] = None
            self.reason[v] = None
            heapq.heappush(self.heap, (-self.activity[v], v))
        del self.trail[pos:]
        del self.trail_lim[lvl:]
        self.qhead = min(self.qhead, pos)
        if self.theory is not None:
            marks = self.theory_marks
            while marks and marks[-1][0] >= pos:
                _, m = marks.pop()
                self.theory.spx.backtrack(m)
            self.theory_head = min(self.theory_head, pos)

    def analyze(self, confl: list[int]):
        """First-UIP learning.  Returns (learnt clause, backjump level)."""
        seen = set()
        learnt: list[int] = []
        counter = 0
        cur = len(self.trail_lim)
        lits = confl
        idx = len(self.trail) - 1
        p = None
        while True:
            for q in lits:
                if p is not None and q == p:
                    continue
                v = abs(q)
                if v in seen:
                    continue
                seen.add(v)
                self.activity[v] += self.bump
                if self.value[v] is None:
                    heapq.heappush(self.heap, (-self.activity[v], v))
                if self.level[v] == cur:
                    counter += 1
                elif self.level[v] > 0:
                    learnt.append(q)
            while abs(self.trail[idx]) not in seen:
                idx -= 1
            p = self.trail[idx]
            idx -= 1
            counter -= 1
            if counter == 0:
                break
            r = self.reason[abs(p)]
            lits = self.clauses[r]
        learnt.insert(0, -p)
        self.bump *= 1.05
        if self.bump > 1e100:
            self.activity = [a * 1e-100 for a in self.activity]
            self.bump *= 1e-100
            self.heap = [(-self.activity[v], v) for v in range(1, self.n + 1) if self.value[v] is None]
            heapq.heapify(self.heap)
        if len(learnt) == 1:
            return learnt, 0
        best = max(range(1, len(learnt)), key=lambda i: self.level[abs(learnt[i])])
        learnt[1], learnt[best] = learnt[best], learnt[1]
        return learnt, self.level[abs(learnt[1])]

    def handle_conflict(self, lits: list[int]) -> bool:
        """Learn from a falsified clause; False when the problem is unsat."""
        levels = [self.level[abs(l)] for l in lits]
        top = max(levels) if levels else 0
        if top == 0:
            return False
        if top < len(self.trail_lim):
            self.backtrack(top)
        if sum(1 for lv in levels if lv == top) == 1:
            # already asserting: jump to the second highest level
            rest = [lv for lv in levels if lv != top]
            back = max(rest) if rest else 0
            lit = lits[levels.index(top)]
            self.backtrack(back)
            self._learn_and_assert([lit] + [l for l in lits if l != lit])
            return True
        learnt, back = self.analyze(lits)
        self.backtrack(back)
        self._learn_and_assert(learnt)
        return True

    def _learn_and_assert(self, learnt: list[int]) -> None:
        if len(learnt) == 1:
            self.assign(learnt[0], None)
            return
        idx = len(self.clauses)
        self.clauses.append(learnt)
        self.watches.setdefault(learnt[0], []).append(idx)
        self.watches.setdefault(learnt[1], []).append(idx)
        self.assign(learnt[0], idx)

    def decide(self) -> bool:
        value = self.value
        heap = self.heap
        best = -1
        while heap:
            _, v = heapq.heappop(heap)
            if value[v] is None:
                best = v
                break
        if best < 0:
            return False
        if len(heap) > 8 * self.n + 64:
            self.heap = [(-self.activity[v], v) for v in range(1, self.n + 1) if value[v] is None]
            heapq.heapify(self.heap)
        self.trail_lim.append(len(self.trail))
        self.assign(best if self.phase[best] else -best, None)
        return True

    def solve(self):
        """True (sat), False (unsat).  Raises Timeout or BranchLimit."""
        if self.unsat:
            return False
        steps = 0
        while True:
            confl = self.propagate()
            if confl is not None:
                if not self.handle_conflict(list(self.clauses[confl])):
                    return False
                continue
            tconf = self.theory_propagate()
            if tconf is not None:
                if not self.handle_conflict(tconf):
                    return False
                continue
            steps += 1
            if self.deadline is not None and steps % 64 == 0 and time.monotonic() > self.deadline:
                raise Timeout()
            if not self.decide():
                if self.theory is None:
                    return True
                spx = self.theory.spx
                mark = spx.mark()
                conflict = spx.integer_check()
                if conflict is None:
                    self.final_mark = mark
                    return True
                spx.backtrack(mark)
                if not self.handle_conflict([-a for a in conflict]):
                    return False


class BuiltinOracle(Oracle):
    name = "builtin"

    def _solve(self, f: Formula, sorts: Mapping[str, Sort]) -> SatResult:
        deadline = time.monotonic() + self.timeout if self.timeout else None
        g, extra = purify(f, sorts)
        all_sorts = dict(sorts)
        all_sorts.update(extra)
        g = nnf(g, all_sorts)
        if g == TRUE:
            return SatResult(SAT, {})
        if g == FALSE:
            return SatResult(UNSAT)
        try:
            return self._search(g, all_sorts, deadline)
        except Timeout:
            return SatResult(UNKNOWN, reason="timeout")
        except BranchLimit as e:
            return SatResult(UNKNOWN, reason=str(e))

    def _search(self, g: Formula, sorts, deadline) -> SatResult:
        ids: dict = {}
        atoms: dict[int, Constraint] = {}
        bools: dict[str, int] = {}
        clauses: list[list[int]] = []

        def lit_of(n) -> int:
            if isinstance(n, BoolVar):
                v = bools.get(n.name)
                if v is None:
                    v = bools[n.name] = len(ids) + 1
                    ids[("b", n.name)] = v
                return v
            if isinstance(n, Not):
                return -lit_of(n.arg)
            v = ids.get(n)
            if v is not None:
                return v
            if isinstance(n, BoolConst):
                v = ids[n] = len(ids) + 1
                clauses.append([v] if n.value else [-v])
                return v
            if isinstance(n, Constraint):
                v = ids[n] = len(ids) + 1
                atoms[v] = n
                return v
            kids = [lit_of(a) for a in n.args]
            v = ids[n] = len(ids) + 1
            if isinstance(n, And):
                for k in kids:
                    clauses.append([-v, k])
            elif isinstance(n, Or):
                clauses.append([-v] + kids)
            else:
                raise TypeError(f"unexpected node in NNF: {n!r}")
            return v

        root = lit_of(g)
        theory = None
        if atoms:
            theory = _Theory(sorts)
            for a, c in atoms.items():
                theory.register(a, c)
        solver = CDCL(len(ids), theory, atoms, deadline)
        solver.add_clause([root])
        for c in clauses:
            solver.add_clause(c)
        if theory is not None:
            for c in theory.bound_lemmas():
                solver.add_clause(c)
        if not solver.solve():
            return SatResult(UNSAT)
        model: dict = {}
        for name, v in bools.items():
            model[name] = bool(solver.value[v])
        if theory is not None:
            for name, val in theory.spx.model().items():
                if not name.startswith("$"):
                    model[name] = val
        return SatResult(SAT, model)
