"""Bounded general simplex over delta-rationals with branch and bound.

Values and bounds are pairs ``(c, d)`` standing for ``c + d*delta`` for an
infinitesimal positive delta; Python tuple ordering is exactly the
delta-rational ordering.  Bounds carry the id of the atom that set them so
that conflicts can be explained as a set of atom ids.
"""

from __future__ import annotations

from fractions import Fraction
from math import floor

ZERO = Fraction(0)
ONE = Fraction(1)


class BranchLimit(Exception):
    """Branch and bound gave up (no proof of integer (in)feasibility)."""


class Simplex:
    def __init__(self):
        self.names: list[str] = []
        self.index: dict[str, int] = {}
        self.is_int: list[bool] = []
        self.lo: list = []
        self.hi: list = []
        self.lo_why: list = []
        self.hi_why: list = []
        self.val: list = []
        self.rows: dict[int, dict[int, Fraction]] = {}
        self.cols: list[set[int]] = []
        self.trail: list = []
        self.slacks: dict[tuple, int] = {}
        self.pivots = 0
        # basic variables that may violate a bound; all others are known to be in range
        self.dirty: set[int] = set()

    # -- construction -------------------------------------------------------

    def var(self, name: str, is_int: bool = False) -> int:
        j = self.index.get(name)
        if j is not None:
            return j
        j = len(self.names)
        self.names.append(name)
        self.index[name] = j
        self.is_int.append(is_int)
        self.lo.append(None)
        self.hi.append(None)
        self.lo_why.append(None)
        self.hi_why.append(None)
        self.val.append((ZERO, ZERO))
        self.cols.append(set())
        return j

    def slack(self, coeffs: tuple) -> int:
        """Basic variable equal to sum(coef * var) for a normalized coefficient tuple."""
        j = self.slacks.get(coeffs)
        if j is not None:
            return j
        row: dict[int, Fraction] = {}
        for name, c in coeffs:
            x = self.index[name]
            if x in self.rows:
                for y, d in self.rows[x].items():
                    v = row.get(y, ZERO) + c * d
                    if v:
                        row[y] = v
                    else:
                        row.pop(y, None)
            else:
                v = row.get(x, ZERO) + c
                if v:
                    row[x] = v
                else:
                    row.pop(x, None)
        j = self.var("$s%d" % len(self.slacks))
        self.slacks[coeffs] = j
        self.rows[j] = row
        for y in row:
            self.cols[y].add(j)
        self.val[j] = self._row_value(row)
        self.dirty.add(j)
        return j

    def _row_value(self, row):
        a = ZERO
        b = ZERO
        val = self.val
        for y, c in row.items():
            va, vb = val[y]
            a += c * va
            b += c * vb
        return (a, b)

    # -- bounds -------------------------------------------------------------

    def mark(self) -> int:
        return len(self.trail)

    def backtrack(self, mark: int) -> None:
        trail = self.trail
        while len(trail) > mark:
            x, upper, old, why = trail.pop()
            if upper:
                self.hi[x] = old
                self.hi_why[x] = why
            else:
                self.lo[x] = old
                self.lo_why[x] = why

    def assert_upper(self, x: int, bound, why):
        """Returns a conflict (set of reasons) or None."""
        hi = self.hi[x]
        if hi is not None and hi <= bound:
            return None
        lo = self.lo[x]
        if lo is not None and bound < lo:
            return {why, self.lo_why[x]}
        self.trail.append((x, True, hi, self.hi_why[x]))
        self.hi[x] = bound
        self.hi_why[x] = why
        if x in self.rows:
            self.dirty.add(x)
        elif bound < self.val[x]:
            self._update(x, bound)
        return None

    def assert_lower(self, x: int, bound, why):
        lo = self.lo[x]
        if lo is not None and lo >= bound:
            return None
        hi = self.hi[x]
        if hi is not None and bound > hi:
            return {why, self.hi_why[x]}
        self.trail.append((x, False, lo, self.lo_why[x]))
        self.lo[x] = bound
        self.lo_why[x] = why
        if x in self.rows:
            self.dirty.add(x)
        elif bound > self.val[x]:
            self._update(x, bound)
        return None

    def _update(self, x: int, v) -> None:
        val = self.val
        oa, ob = val[x]
        da = v[0] - oa
        db = v[1] - ob
        for b in self.cols[x]:
            c = self.rows[b][x]
            ba, bb = val[b]
            val[b] = (ba + c * da, bb + c * db)
        self.dirty.update(self.cols[x])
        val[x] = v

    # -- feasibility --------------------------------------------------------

    def _pivot(self, b: int, n: int) -> None:
        """Make basic ``b`` nonbasic and nonbasic ``n`` basic."""
        self.pivots += 1
        rows = self.rows
        cols = self.cols
        row = rows.pop(b)
        a = row.pop(n)
        inv = -ONE / a
        new = {y: c * inv for y, c in row.items()}
        new[b] = -inv
        for y in row:
            cols[y].discard(b)
        cols[n].discard(b)
        for y in new:
            cols[y].add(n)
        rows[n] = new
        for r in list(cols[n]):
            if r == n:
                continue
            rr = rows[r]
            k = rr.pop(n)
            cols[n].discard(r)
            for y, c in new.items():
                v = rr.get(y)
                if v is None:
                    rr[y] = k * c
                    cols[y].add(r)
                else:
                    v += k * c
                    if v:
                        rr[y] = v
                    else:
                        del rr[y]
                        cols[y].discard(r)
        cols[n].discard(n)

    def _pivot_and_update(self, b: int, n: int, v) -> None:
        val = self.val
        a = self.rows[b][n]
        ba, bb = val[b]
        theta_a = (v[0] - ba) / a
        theta_b = (v[1] - bb) / a
        val[b] = v
        na, nb = val[n]
        val[n] = (na + theta_a, nb + theta_b)
        for r in self.cols[n]:
            if r == b:
                continue
            c = self.rows[r][n]
            ra, rb = val[r]
            val[r] = (ra + c * theta_a, rb + c * theta_b)
        self.dirty.update(self.cols[n])
        self._pivot(b, n)
        self.dirty.discard(b)
        self.dirty.add(n)

    def check(self):
        """Restore feasibility of the basic variables; conflict set or None."""
        rows = self.rows
        lo, hi, val = self.lo, self.hi, self.val
        dirty = self.dirty
        while True:
            bad = -1
            below = False
            for b in list(dirty):
                if b not in rows:
                    dirty.discard(b)
                    continue
                v = val[b]
                l = lo[b]
                if l is not None and v < l:
                    if bad < 0 or b < bad:
                        bad, below = b, True
                    continue
                h = hi[b]
                if h is not None and v > h:
                    if bad < 0 or b < bad:
                        bad, below = b, False
                    continue
                dirty.discard(b)
            if bad < 0:
                return None
            row = rows[bad]
            pick = -1
            for n, a in row.items():
                if pick >= 0 and n > pick:
                    continue
                if below:
                    ok = (hi[n] is None or val[n] < hi[n]) if a > 0 else (lo[n] is None or val[n] > lo[n])
                else:
                    ok = (lo[n] is None or val[n] > lo[n]) if a > 0 else (hi[n] is None or val[n] < hi[n])
                if ok:
                    pick = n
            if pick < 0:
                why = {self.lo_why[bad] if below else self.hi_why[bad]}
                for n, a in row.items():
                    if (a > 0) == below:
                        why.add(self.hi_why[n])
                    else:
                        why.add(self.lo_why[n])
                return why
            self._pivot_and_update(bad, pick, lo[bad] if below else hi[bad])

    def integer_check(self, budget: int = 2000):
        """Branch and bound on integer variables.  Conflict set, or None when an integral point exists.

        On success the branch bounds stay asserted so the model can be read;
        callers backtrack to a mark taken beforehand.
        """
        counter = [budget]
        return self._bb(0, counter)

    def _bb(self, depth: int, counter):
        conflict = self.check()
        if conflict is not None:
            return conflict
        x = -1
        for j, is_int in enumerate(self.is_int):
            if is_int:
                a, b = self.val[j]
                if b or a.denominator != 1:
                    x = j
                    break
        if x < 0:
            return None
        counter[0] -= 1
        if counter[0] < 0:
            raise BranchLimit("branch and bound budget exhausted")
        a, b = self.val[x]
        f = Fraction(floor(a))
        if a.denominator == 1 and b < 0:
            f -= 1
        tag = ("branch", depth)
        mark = self.mark()
        c1 = self.assert_upper(x, (f, ZERO), tag)
        if c1 is None:
            c1 = self._bb(depth + 1, counter)
            if c1 is None:
                return None
        self.backtrack(mark)
        c2 = self.assert_lower(x, (f + 1, ZERO), tag)
        if c2 is None:
            c2 = self._bb(depth + 1, counter)
            if c2 is None:
                return None
        self.backtrack(mark)
        out = (c1 | c2)
        out.discard(tag)
        return out

    def model(self) -> dict[str, Fraction]:
        """Concrete rational values for the current (feasible) assignment."""
        delta = ONE
        for x, (va, vb) in enumerate(self.val):
            l = self.lo[x]
            if l is not None and va > l[0] and vb < l[1]:
                delta = min(delta, (va - l[0]) / (l[1] - vb))
            h = self.hi[x]
            if h is not None and va < h[0] and vb > h[1]:
                delta = min(delta, (h[0] - va) / (vb - h[1]))
        return {
            name: self.val[j][0] + self.val[j][1] * delta
            for j, name in enumerate(self.names)
            if not name.startswith("$")
        }
