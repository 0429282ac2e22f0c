"""Quantifier-free formulas over linear integer/real arithmetic with Booleans.

Terms and formulas are immutable trees.  Surface nodes (``Add``, ``Compare``,
``TermIte`` ...) keep the shape written by the user so that models can be
printed back faithfully; ``LinearTerm`` and ``Constraint`` are the normalized
forms used by the polyhedral and solver layers.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Union


class SortError(TypeError):
    """Raised when a term or formula is used at the wrong sort."""


class NonLinearError(ValueError):
    pass


class Sort(enum.Enum):
    BOOL = "bool"
    INT = "int"
    REAL = "real"

    def __str__(self) -> str:
        return self.value


def _cache_hash(cls):
    # trees are hashed repeatedly as memo keys; compute each hash once
    base = cls.__hash__

    def __hash__(self):
        try:
            return self.__dict__["_hash"]
        except KeyError:
            value = base(self)
            object.__setattr__(self, "_hash", value)
            return value

    cls.__hash__ = __hash__
    return cls


def _frac(value) -> Fraction:
    return value if isinstance(value, Fraction) else Fraction(value)


# ---------------------------------------------------------------------------
# Terms


@_cache_hash
@dataclass(frozen=True)
class Var:
    name: str

    def __str__(self) -> str:
        return self.name


@_cache_hash
@dataclass(frozen=True)
class Num:
    value: Fraction

    def __post_init__(self):
        object.__setattr__(self, "value", _frac(self.value))


@_cache_hash
@dataclass(frozen=True)
class ConstRef:
    """A named model constant; behaves as its value, prints as its name."""

    name: str
    value: Fraction

    def __post_init__(self):
        object.__setattr__(self, "value", _frac(self.value))


@_cache_hash
@dataclass(frozen=True)
class Add:
    args: tuple


@_cache_hash
@dataclass(frozen=True)
class Sub:
    left: "Term"
    right: "Term"


@_cache_hash
@dataclass(frozen=True)
class Neg:
    arg: "Term"


@_cache_hash
@dataclass(frozen=True)
class Mul:
    """``coef * arg``; ``coef`` is a constant term (Num or ConstRef)."""

    coef: "Term"
    arg: "Term"


@_cache_hash
@dataclass(frozen=True)
class Div:
    """``arg / divisor`` with a constant divisor."""

    arg: "Term"
    divisor: "Term"


@_cache_hash
@dataclass(frozen=True)
class TermIte:
    cond: "Formula"
    then: "Term"
    else_: "Term"


@_cache_hash
@dataclass(frozen=True)
class LinearTerm:
    """sum(coef * var) + const, with no zero coefficients stored."""

    coeffs: tuple = ()
    const: Fraction = Fraction(0)

    @staticmethod
    def make(coeffs: Mapping[str, Fraction] | Iterable = (), const=0) -> "LinearTerm":
        items = coeffs.items() if isinstance(coeffs, Mapping) else coeffs
        acc: dict[str, Fraction] = {}
        for name, c in items:
            acc[name] = acc.get(name, Fraction(0)) + _frac(c)
        return LinearTerm(tuple(sorted((n, c) for n, c in acc.items() if c)), _frac(const))

    @staticmethod
    def var(name: str, coef=1) -> "LinearTerm":
        return LinearTerm(((name, _frac(coef)),), Fraction(0))

    @staticmethod
    def constant(value) -> "LinearTerm":
        return LinearTerm((), _frac(value))

    def as_dict(self) -> dict[str, Fraction]:
        return dict(self.coeffs)

    @property
    def variables(self) -> frozenset[str]:
        return frozenset(n for n, _ in self.coeffs)

    def coef(self, name: str) -> Fraction:
        for n, c in self.coeffs:
            if n == name:
                return c
        return Fraction(0)

    def is_constant(self) -> bool:
        return not self.coeffs

    def __add__(self, other: "LinearTerm") -> "LinearTerm":
        return LinearTerm.make(list(self.coeffs) + list(other.coeffs), self.const + other.const)

    def __sub__(self, other: "LinearTerm") -> "LinearTerm":
        return self + other.scale(-1)

    def __neg__(self) -> "LinearTerm":
        return self.scale(-1)

    def scale(self, k) -> "LinearTerm":
        k = _frac(k)
        if not k:
            return LinearTerm()
        return LinearTerm(tuple((n, c * k) for n, c in self.coeffs), self.const * k)

    def substitute(self, binding: Mapping[str, "LinearTerm"]) -> "LinearTerm":
        out = LinearTerm.constant(self.const)
        for n, c in self.coeffs:
            repl = binding.get(n)
            out = out + (repl.scale(c) if repl is not None else LinearTerm.var(n, c))
        return out

    def rename(self, mapping: Mapping[str, str]) -> "LinearTerm":
        return LinearTerm.make([(mapping.get(n, n), c) for n, c in self.coeffs], self.const)

    def evaluate(self, model: Mapping[str, object]) -> Fraction:
        total = self.const
        for n, c in self.coeffs:
            total += c * _frac(model[n])
        return total


Term = Union[Var, Num, ConstRef, Add, Sub, Neg, Mul, Div, TermIte, LinearTerm]
TERM_TYPES = (Var, Num, ConstRef, Add, Sub, Neg, Mul, Div, TermIte, LinearTerm)


# ---------------------------------------------------------------------------
# Formulas


@_cache_hash
@dataclass(frozen=True)
class BoolConst:
    value: bool


TRUE = BoolConst(True)
FALSE = BoolConst(False)


@_cache_hash
@dataclass(frozen=True)
class BoolVar:
    name: str


@_cache_hash
@dataclass(frozen=True)
class Not:
    arg: "Formula"


@_cache_hash
@dataclass(frozen=True)
class And:
    args: tuple


@_cache_hash
@dataclass(frozen=True)
class Or:
    args: tuple


@_cache_hash
@dataclass(frozen=True)
class Implies:
    left: "Formula"
    right: "Formula"


@_cache_hash
@dataclass(frozen=True)
class Iff:
    left: "Formula"
    right: "Formula"


@_cache_hash
@dataclass(frozen=True)
class Ite:
    cond: "Formula"
    then: "Formula"
    else_: "Formula"


RELATIONS = ("<", "<=", "=")


@_cache_hash
@dataclass(frozen=True)
class Compare:
    """``left rel right`` over general terms; rel is one of <, <=, =."""

    left: Term
    rel: str
    right: Term


@_cache_hash
@dataclass(frozen=True)
class Constraint:
    """Linear atom ``term rel 0``."""

    term: LinearTerm
    rel: str

    @property
    def variables(self) -> frozenset[str]:
        return self.term.variables


Formula = Union[BoolConst, BoolVar, Not, And, Or, Implies, Iff, Ite, Compare, Constraint]
FORMULA_TYPES = (BoolConst, BoolVar, Not, And, Or, Implies, Iff, Ite, Compare, Constraint)


def is_formula(x) -> bool:
    return isinstance(x, FORMULA_TYPES)


def is_term(x) -> bool:
    return isinstance(x, TERM_TYPES)


# ---------------------------------------------------------------------------
# Smart constructors (constant folding, flattening)


def mk_not(f: Formula) -> Formula:
    if isinstance(f, BoolConst):
        return FALSE if f.value else TRUE
    if isinstance(f, Not):
        return f.arg
    return Not(f)


def _flatten(kind, args):
    out = []
    seen = set()
    for a in args:
        parts = a.args if isinstance(a, kind) else (a,)
        for p in parts:
            if p not in seen:
                seen.add(p)
                out.append(p)
    return out


def mk_and(*args: Formula) -> Formula:
    if len(args) == 1 and not is_formula(args[0]):
        args = tuple(args[0])
    items = []
    for a in _flatten(And, args):
        if a == FALSE:
            return FALSE
        if a != TRUE:
            items.append(a)
    if not items:
        return TRUE
    if len(items) == 1:
        return items[0]
    return And(tuple(items))


def mk_or(*args: Formula) -> Formula:
    if len(args) == 1 and not is_formula(args[0]):
        args = tuple(args[0])
    items = []
    for a in _flatten(Or, args):
        if a == TRUE:
            return TRUE
        if a != FALSE:
            items.append(a)
    if not items:
        return FALSE
    if len(items) == 1:
        return items[0]
    return Or(tuple(items))


def mk_implies(a: Formula, b: Formula) -> Formula:
    if a == TRUE:
        return b
    if a == FALSE or b == TRUE:
        return TRUE
    if b == FALSE:
        return mk_not(a)
    return Implies(a, b)


def mk_iff(a: Formula, b: Formula) -> Formula:
    if a == TRUE:
        return b
    if b == TRUE:
        return a
    if a == FALSE:
        return mk_not(b)
    if b == FALSE:
        return mk_not(a)
    if a == b:
        return TRUE
    return Iff(a, b)


def mk_ite(c: Formula, t, e):
    """Formula- or term-level if-then-else, chosen by the branch kind."""
    if is_term(t) or is_term(e):
        if not (is_term(t) and is_term(e)):
            raise SortError("ite branches must both be terms or both be formulas")
        if c == TRUE:
            return t
        if c == FALSE:
            return e
        if t == e:
            return t
        return TermIte(c, t, e)
    if c == TRUE:
        return t
    if c == FALSE:
        return e
    if t == e:
        return t
    return Ite(c, t, e)


def term_constant(t: Term) -> Fraction | None:
    """Value of ``t`` if it contains no variables and no ites."""
    if isinstance(t, Num | ConstRef):
        return t.value
    try:
        lin = linearize(t)
    except NonLinearError:
        return None
    return lin.const if lin.is_constant() else None


def compare(left: Term, op: str, right: Term) -> Formula:
    """Build a comparison; >, >= and <> are normalized away."""
    if op == ">":
        return Compare(right, "<", left)
    if op == ">=":
        return Compare(right, "<=", left)
    if op in ("<>", "!="):
        return Or((Compare(left, "<", right), Compare(right, "<", left)))
    if op not in RELATIONS:
        raise ValueError(f"unknown relation {op!r}")
    return Compare(left, op, right)


def constraint(term: LinearTerm, rel: str) -> Formula:
    """Linear atom with constant folding (no sort-dependent tightening)."""
    if term.is_constant():
        c = term.const
        holds = c < 0 if rel == "<" else c <= 0 if rel == "<=" else c == 0
        return TRUE if holds else FALSE
    return Constraint(term, rel)


# ---------------------------------------------------------------------------
# Term utilities


def linearize(t: Term) -> LinearTerm:
    """Flatten an ite-free term; raises NonLinearError otherwise."""
    if isinstance(t, LinearTerm):
        return t
    if isinstance(t, Var):
        return LinearTerm.var(t.name)
    if isinstance(t, Num | ConstRef):
        return LinearTerm.constant(t.value)
    if isinstance(t, Add):
        out = LinearTerm()
        for a in t.args:
            out = out + linearize(a)
        return out
    if isinstance(t, Sub):
        return linearize(t.left) - linearize(t.right)
    if isinstance(t, Neg):
        return -linearize(t.arg)
    if isinstance(t, Mul):
        k = linearize(t.coef)
        v = linearize(t.arg)
        if k.is_constant():
            return v.scale(k.const)
        if v.is_constant():
            return k.scale(v.const)
        raise NonLinearError("product of two non-constant terms")
    if isinstance(t, Div):
        d = linearize(t.divisor)
        if not d.is_constant() or not d.const:
            raise NonLinearError("division by a non-constant or zero")
        return linearize(t.arg).scale(1 / d.const)
    if isinstance(t, TermIte):
        raise NonLinearError("term contains ite")
    raise SortError(f"not a term: {t!r}")


def lift_ites(t: Term) -> list[tuple[tuple, LinearTerm]]:
    """Case split a term into (guards, linear term) pairs.

    The guard conjunctions are mutually exclusive and exhaustive.
    """
    if isinstance(t, TermIte):
        out = []
        for guards, lin in lift_ites(t.then):
            out.append(((t.cond,) + guards, lin))
        neg = mk_not(t.cond)
        for guards, lin in lift_ites(t.else_):
            out.append(((neg,) + guards, lin))
        return out
    if isinstance(t, Add):
        cases = [((), LinearTerm())]
        for a in t.args:
            sub = lift_ites(a)
            cases = [(g1 + g2, l1 + l2) for g1, l1 in cases for g2, l2 in sub]
        return cases
    if isinstance(t, Sub):
        return [
            (g1 + g2, l1 - l2) for g1, l1 in lift_ites(t.left) for g2, l2 in lift_ites(t.right)
        ]
    if isinstance(t, Neg):
        return [(g, -l) for g, l in lift_ites(t.arg)]
    if isinstance(t, Mul):
        k = term_constant(t.coef)
        if k is not None:
            return [(g, l.scale(k)) for g, l in lift_ites(t.arg)]
        k = term_constant(t.arg)
        if k is None:
            raise NonLinearError("product of two non-constant terms")
        return [(g, l.scale(k)) for g, l in lift_ites(t.coef)]
    if isinstance(t, Div):
        d = term_constant(t.divisor)
        if not d:
            raise NonLinearError("division by a non-constant or zero")
        return [(g, l.scale(1 / d)) for g, l in lift_ites(t.arg)]
    return [((), linearize(t))]


def has_ite(t: Term) -> bool:
    if isinstance(t, TermIte):
        return True
    if isinstance(t, Add):
        return any(has_ite(a) for a in t.args)
    if isinstance(t, Sub):
        return has_ite(t.left) or has_ite(t.right)
    if isinstance(t, Neg):
        return has_ite(t.arg)
    if isinstance(t, Mul):
        return has_ite(t.coef) or has_ite(t.arg)
    if isinstance(t, Div):
        return has_ite(t.arg)
    return False


# ---------------------------------------------------------------------------
# Traversals


def free_vars(x) -> frozenset[str]:
    """All variable names (Boolean and numeric) occurring in a term or formula."""
    out: set[str] = set()
    seen: set = set()
    stack = [x]
    while stack:
        n = stack.pop()
        if isinstance(n, BoolConst | Num | ConstRef):
            continue
        if n in seen:
            continue
        seen.add(n)
        if isinstance(n, Var | BoolVar):
            out.add(n.name)
        elif isinstance(n, LinearTerm):
            out.update(v for v, _ in n.coeffs)
        elif isinstance(n, Constraint):
            out.update(v for v, _ in n.term.coeffs)
        elif isinstance(n, And | Or | Add):
            stack.extend(n.args)
        elif isinstance(n, Not | Neg):
            stack.append(n.arg)
        elif isinstance(n, Implies | Iff | Compare | Sub):
            stack.append(n.left)
            stack.append(n.right)
        elif isinstance(n, Ite | TermIte):
            stack.extend((n.cond, n.then, n.else_))
        elif isinstance(n, Mul):
            stack.extend((n.coef, n.arg))
        elif isinstance(n, Div):
            stack.extend((n.arg, n.divisor))
        else:
            raise SortError(f"unexpected node {n!r}")
    return frozenset(out)


def constants_of(x) -> set[Fraction]:
    """Numeric constants occurring in a term or formula."""
    out: set[Fraction] = set()

    def walk(n):
        if isinstance(n, Num | ConstRef):
            out.add(n.value)
        elif isinstance(n, LinearTerm):
            out.add(n.const)
            out.update(c for _, c in n.coeffs if abs(c) != 1)
        elif isinstance(n, Constraint):
            out.add(-n.term.const)
        elif isinstance(n, And | Or | Add):
            for a in n.args:
                walk(a)
        elif isinstance(n, Not | Neg):
            walk(n.arg)
        elif isinstance(n, Implies | Iff | Compare | Sub):
            walk(n.left)
            walk(n.right)
        elif isinstance(n, Ite | TermIte):
            walk(n.cond)
            walk(n.then)
            walk(n.else_)
        elif isinstance(n, Mul):
            walk(n.coef)
            walk(n.arg)
        elif isinstance(n, Div):
            walk(n.arg)
            walk(n.divisor)

    walk(x)
    return out


def substitute(x, binding: Mapping[str, object]):
    """Simultaneous substitution of variables by terms (numeric) or formulas (Boolean)."""
    if not binding:
        return x
    memo: dict = {}
    lin_binding: dict[str, LinearTerm] | None = None
    all_linear = True
    for v in binding.values():
        if is_term(v):
            try:
                linearize(v)
            except NonLinearError:
                all_linear = False

    def lin_bind():
        nonlocal lin_binding
        if lin_binding is None:
            lin_binding = {k: linearize(v) for k, v in binding.items() if is_term(v)}
        return lin_binding

    def sub_lin(lin: LinearTerm):
        hit = [n for n, _ in lin.coeffs if n in binding]
        if not hit:
            return lin
        for n in hit:
            if not is_term(binding[n]):
                raise SortError(f"numeric variable {n} bound to a formula")
        if all_linear:
            return lin.substitute(lin_bind())
        parts = [LinearTerm.constant(lin.const)]
        for n, c in lin.coeffs:
            if n in binding:
                parts.append(binding[n] if c == 1 else Mul(Num(c), binding[n]))
            else:
                parts.append(LinearTerm.var(n, c))
        return Add(tuple(parts))

    def go(n):
        if isinstance(n, BoolConst | Num | ConstRef):
            return n
        try:
            return memo[n]
        except KeyError:
            pass
        if isinstance(n, Var):
            r = binding.get(n.name, n)
            if not is_term(r):
                raise SortError(f"numeric variable {n.name} bound to a formula")
        elif isinstance(n, BoolVar):
            r = binding.get(n.name, n)
            if not is_formula(r):
                raise SortError(f"Boolean variable {n.name} bound to a term")
        elif isinstance(n, LinearTerm):
            r = sub_lin(n)
        elif isinstance(n, Constraint):
            t = sub_lin(n.term)
            if isinstance(t, LinearTerm):
                r = constraint(t, n.rel) if t is not n.term else n
            else:
                r = Compare(t, n.rel, Num(0))
        elif isinstance(n, Add):
            r = Add(tuple(go(a) for a in n.args))
        elif isinstance(n, Sub):
            r = Sub(go(n.left), go(n.right))
        elif isinstance(n, Neg):
            r = Neg(go(n.arg))
        elif isinstance(n, Mul):
            r = Mul(go(n.coef), go(n.arg))
        elif isinstance(n, Div):
            r = Div(go(n.arg), go(n.divisor))
        elif isinstance(n, TermIte):
            r = mk_ite(go(n.cond), go(n.then), go(n.else_))
        elif isinstance(n, Not):
            r = mk_not(go(n.arg))
        elif isinstance(n, And):
            r = mk_and(*[go(a) for a in n.args])
        elif isinstance(n, Or):
            r = mk_or(*[go(a) for a in n.args])
        elif isinstance(n, Implies):
            r = mk_implies(go(n.left), go(n.right))
        elif isinstance(n, Iff):
            r = mk_iff(go(n.left), go(n.right))
        elif isinstance(n, Ite):
            r = mk_ite(go(n.cond), go(n.then), go(n.else_))
        elif isinstance(n, Compare):
            r = Compare(go(n.left), n.rel, go(n.right))
            r = _fold_compare(r)
        else:
            raise SortError(f"unexpected node {n!r}")
        memo[n] = r
        return r

    return go(x)


def _fold_compare(c: Compare) -> Formula:
    a = term_constant(c.left)
    b = term_constant(c.right)
    if a is not None and b is not None:
        d = a - b
        holds = d < 0 if c.rel == "<" else d <= 0 if c.rel == "<=" else d == 0
        return TRUE if holds else FALSE
    return c


def rename(x, mapping: Mapping[str, str], sorts: Mapping[str, Sort] | None = None):
    """Rename variables.  Boolean-ness is read from the node kind."""
    if not mapping:
        return x
    memo: dict = {}

    def go(n):
        if isinstance(n, BoolConst | Num | ConstRef):
            return n
        try:
            return memo[n]
        except KeyError:
            pass
        if isinstance(n, Var):
            r = Var(mapping.get(n.name, n.name))
        elif isinstance(n, BoolVar):
            r = BoolVar(mapping.get(n.name, n.name))
        elif isinstance(n, LinearTerm):
            r = n.rename(mapping)
        elif isinstance(n, Constraint):
            r = Constraint(n.term.rename(mapping), n.rel)
        elif isinstance(n, Add):
            r = Add(tuple(go(a) for a in n.args))
        elif isinstance(n, Sub):
            r = Sub(go(n.left), go(n.right))
        elif isinstance(n, Neg):
            r = Neg(go(n.arg))
        elif isinstance(n, Mul):
            r = Mul(go(n.coef), go(n.arg))
        elif isinstance(n, Div):
            r = Div(go(n.arg), go(n.divisor))
        elif isinstance(n, TermIte):
            r = TermIte(go(n.cond), go(n.then), go(n.else_))
        elif isinstance(n, Not):
            r = Not(go(n.arg))
        elif isinstance(n, And):
            r = And(tuple(go(a) for a in n.args))
        elif isinstance(n, Or):
            r = Or(tuple(go(a) for a in n.args))
        elif isinstance(n, Implies):
            r = Implies(go(n.left), go(n.right))
        elif isinstance(n, Iff):
            r = Iff(go(n.left), go(n.right))
        elif isinstance(n, Ite):
            r = Ite(go(n.cond), go(n.then), go(n.else_))
        elif isinstance(n, Compare):
            r = Compare(go(n.left), n.rel, go(n.right))
        else:
            raise SortError(f"unexpected node {n!r}")
        memo[n] = r
        return r

    return go(x)


# ---------------------------------------------------------------------------
# Evaluation


def eval_term(t: Term, model: Mapping[str, object]) -> Fraction:
    if isinstance(t, Var):
        v = model[t.name]
        if isinstance(v, bool):
            raise SortError(f"{t.name} is Boolean in the model")
        return _frac(v)
    if isinstance(t, Num | ConstRef):
        return t.value
    if isinstance(t, LinearTerm):
        return t.evaluate(model)
    if isinstance(t, Add):
        return sum((eval_term(a, model) for a in t.args), Fraction(0))
    if isinstance(t, Sub):
        return eval_term(t.left, model) - eval_term(t.right, model)
    if isinstance(t, Neg):
        return -eval_term(t.arg, model)
    if isinstance(t, Mul):
        return eval_term(t.coef, model) * eval_term(t.arg, model)
    if isinstance(t, Div):
        return eval_term(t.arg, model) / eval_term(t.divisor, model)
    if isinstance(t, TermIte):
        return eval_term(t.then if evaluate(t.cond, model) else t.else_, model)
    raise SortError(f"not a term: {t!r}")


def _holds(d: Fraction, rel: str) -> bool:
    if rel == "<":
        return d < 0
    if rel == "<=":
        return d <= 0
    return d == 0


def evaluate(f: Formula, model: Mapping[str, object]) -> bool:
    """Exact evaluation of a formula under a total assignment."""
    if isinstance(f, BoolConst):
        return f.value
    if isinstance(f, BoolVar):
        v = model[f.name]
        if not isinstance(v, bool):
            raise SortError(f"{f.name} is not Boolean in the model")
        return v
    if isinstance(f, Not):
        return not evaluate(f.arg, model)
    if isinstance(f, And):
        return all(evaluate(a, model) for a in f.args)
    if isinstance(f, Or):
        return any(evaluate(a, model) for a in f.args)
    if isinstance(f, Implies):
        return (not evaluate(f.left, model)) or evaluate(f.right, model)
    if isinstance(f, Iff):
        return evaluate(f.left, model) == evaluate(f.right, model)
    if isinstance(f, Ite):
        return evaluate(f.then if evaluate(f.cond, model) else f.else_, model)
    if isinstance(f, Compare):
        return _holds(eval_term(f.left, model) - eval_term(f.right, model), f.rel)
    if isinstance(f, Constraint):
        return _holds(f.term.evaluate(model), f.rel)
    raise SortError(f"not a formula: {f!r}")


# ---------------------------------------------------------------------------
# Atoms and negation normal form


def is_integral_atom(lin: LinearTerm, sorts: Mapping[str, Sort] | None) -> bool:
    return bool(sorts) and bool(lin.coeffs) and all(sorts.get(n) is Sort.INT for n, _ in lin.coeffs)


def canonical_constraint(lin: LinearTerm, rel: str, sorts: Mapping[str, Sort] | None = None) -> Formula:
    """Scale to coprime integer coefficients; tighten atoms over integers.

    Equalities get a positive leading coefficient.  Returns TRUE/FALSE for
    atoms decided by their constant part.
    """
    from math import gcd, lcm

    if lin.is_constant():
        return constraint(lin, rel)
    den = 1
    for _, c in lin.coeffs:
        den = lcm(den, c.denominator)
    nums = [int(c * den) for _, c in lin.coeffs]
    g = 0
    for k in nums:
        g = gcd(g, k)
    scale = Fraction(den, g)
    if rel == "=" and lin.coeffs[0][1] < 0:
        scale = -scale
    coeffs = tuple((n, c * scale) for n, c in lin.coeffs)
    const = lin.const * scale
    if is_integral_atom(lin, sorts):
        if rel == "=":
            if const.denominator != 1:
                return FALSE
        elif rel == "<=":
            # sum <= -const  ->  sum <= floor(-const)
            const = -Fraction((-const).__floor__())
        else:
            # sum < -const  ->  sum <= ceil(-const) - 1
            const = -Fraction((-const).__ceil__() - 1)
            rel = "<="
    return Constraint(LinearTerm(coeffs, const), rel)


def negate_constraint(c: Constraint, sorts: Mapping[str, Sort] | None = None) -> Formula:
    t = c.term
    if c.rel == "<=":
        return canonical_constraint(-t, "<", sorts)
    if c.rel == "<":
        return canonical_constraint(-t, "<=", sorts)
    return mk_or(canonical_constraint(t, "<", sorts), canonical_constraint(-t, "<", sorts))


def atom_of_compare(left: Term, rel: str, right: Term, sorts=None) -> Formula:
    return canonical_constraint(linearize(left) - linearize(right), rel, sorts)


def nnf(f: Formula, sorts: Mapping[str, Sort] | None = None, positive: bool = True) -> Formula:
    """Negation normal form over Boolean literals and linear Constraints.

    Term-level ites are lifted into guarded disjunctions; formula-level
    ite/iff/implies are expanded.
    """
    memo: dict = {}

    def go(n, pos):
        key = (n, pos)
        try:
            return memo[key]
        except KeyError:
            pass
        if isinstance(n, BoolConst):
            r = n if pos else mk_not(n)
        elif isinstance(n, BoolVar):
            r = n if pos else Not(n)
        elif isinstance(n, Not):
            r = go(n.arg, not pos)
        elif isinstance(n, And):
            parts = [go(a, pos) for a in n.args]
            r = mk_and(*parts) if pos else mk_or(*parts)
        elif isinstance(n, Or):
            parts = [go(a, pos) for a in n.args]
            r = mk_or(*parts) if pos else mk_and(*parts)
        elif isinstance(n, Implies):
            if pos:
                r = mk_or(go(n.left, False), go(n.right, True))
            else:
                r = mk_and(go(n.left, True), go(n.right, False))
        elif isinstance(n, Iff):
            a1, a0 = go(n.left, True), go(n.left, False)
            b1, b0 = go(n.right, True), go(n.right, False)
            if pos:
                r = mk_or(mk_and(a1, b1), mk_and(a0, b0))
            else:
                r = mk_or(mk_and(a1, b0), mk_and(a0, b1))
        elif isinstance(n, Ite):
            c1, c0 = go(n.cond, True), go(n.cond, False)
            r = mk_or(mk_and(c1, go(n.then, pos)), mk_and(c0, go(n.else_, pos)))
        elif isinstance(n, Constraint):
            r = canonical_constraint(n.term, n.rel, sorts)
            if not pos:
                r = negate_constraint(r, sorts) if isinstance(r, Constraint) else mk_not(r)
        elif isinstance(n, Compare):
            diff = Sub(n.left, n.right)
            cases = lift_ites(diff)
            branches = []
            for guards, lin in cases:
                atom = canonical_constraint(lin, n.rel, sorts)
                if not pos:
                    atom = negate_constraint(atom, sorts) if isinstance(atom, Constraint) else mk_not(atom)
                branches.append(mk_and(*[go(g, True) for g in guards], atom))
            r = mk_or(*branches)
        else:
            raise SortError(f"not a formula: {n!r}")
        memo[key] = r
        return r

    return go(f, positive)


def conjuncts(f: Formula) -> list[Formula]:
    if isinstance(f, And):
        out = []
        for a in f.args:
            out.extend(conjuncts(a))
        return out
    if f == TRUE:
        return []
    return [f]


def sort_of_term(t: Term, sorts: Mapping[str, Sort]) -> Sort:
    """INT if every variable leaf is integer-sorted and every constant integral."""
    names = free_vars(t)
    if any(sorts.get(n) is Sort.REAL for n in names if sorts.get(n) is not Sort.BOOL):
        return Sort.REAL
    try:
        for _, lin in lift_ites(t):
            if lin.const.denominator != 1 or any(c.denominator != 1 for _, c in lin.coeffs):
                return Sort.REAL
    except NonLinearError:
        return Sort.REAL
    return Sort.INT
