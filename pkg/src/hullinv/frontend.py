"""Model language: lexer, parser, validation and printing of transition systems.

    system counter {
      const n: int = 10;
      state x: int;
      input a: bool;
      init: x = 0;
      trans: x' = ite(a and x < n, x + 1, x);
      property: x <= n;
    }
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from importlib import resources
from typing import Mapping

from .logic.formula import (
    FALSE, TRUE, Add, And, BoolVar, ConstRef, Div, Formula, Iff, Implies, Ite,
    Mul, Neg, Not, Num, Or, Sort, Sub, TermIte, Var, compare, free_vars, term_constant,
)
from .logic.printer import formula_str, format_number
from .system import TransitionSystem


@dataclass(frozen=True)
class Diagnostic:
    severity: str
    line: int
    col: int
    message: str

    def render(self, filename: str = "<input>") -> str:
        return f"{filename}:{self.line}:{self.col}: {self.severity}: {self.message}"


class ParseError(Exception):
    def __init__(self, diagnostics: list[Diagnostic]):
        super().__init__("; ".join(d.message for d in diagnostics))
        self.diagnostics = diagnostics


KEYWORDS = {
    "system", "state", "input", "const", "init", "trans", "assume", "property",
    "and", "or", "not", "ite", "true", "false", "int", "real", "bool",
}
SORTS = {"int": Sort.INT, "real": Sort.REAL, "bool": Sort.BOOL}

_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>//[^\n]*)
  | (?P<num>\d+(?:\.\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>=>|<=|>=|<>|[-+*/=<>(){}:;,'])
    """,
    re.VERBOSE,
)


@dataclass
class Token:
    kind: str
    text: str
    line: int
    col: int


def tokenize(text: str) -> list[Token]:
    toks: list[Token] = []
    line, start = 1, 0
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError([Diagnostic("error", line, pos - start + 1, f"unexpected character {text[pos]!r}")])
        kind = m.lastgroup
        if kind == "nl":
            line += 1
            start = m.end()
        elif kind not in ("ws", "comment"):
            t = m.group()
            if kind == "ident" and t in KEYWORDS:
                kind = "kw"
            toks.append(Token(kind, t, line, pos - start + 1))
        pos = m.end()
    toks.append(Token("eof", "", line, pos - start + 1))
    return toks


# numeric "sort" of a term: INT, REAL, or None for an integer literal usable anywhere
_LIT = None


class Parser:
    def __init__(self, text: str, consts: Mapping[str, object] | None = None):
        self.toks = tokenize(text)
        self.i = 0
        self.overrides = dict(consts or {})
        self.consts: dict[str, tuple[Sort, Fraction]] = {}
        self.states: dict[str, Sort] = {}
        self.inputs: dict[str, Sort] = {}
        self.section = ""
        self.spans: dict[str, tuple[int, int]] = {}
        self.warnings: list[Diagnostic] = []

    # -- token helpers ---------------------------------------------------------

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def error(self, msg: str, tok: Token | None = None):
        t = tok or self.tok
        raise ParseError([Diagnostic("error", t.line, t.col, msg)])

    def accept(self, text: str) -> Token | None:
        if self.tok.text == text and self.tok.kind in ("op", "kw"):
            t = self.tok
            self.i += 1
            return t
        return None

    def expect(self, text: str) -> Token:
        t = self.accept(text)
        if t is None:
            found = self.tok.text or "end of input"
            self.error(f"expected '{text}', found '{found}'")
        return t

    def ident(self) -> Token:
        if self.tok.kind != "ident":
            self.error(f"expected identifier, found '{self.tok.text or 'end of input'}'")
        t = self.tok
        self.i += 1
        return t

    # -- declarations ------------------------------------------------------------

    def system(self) -> TransitionSystem:
        self.expect("system")
        name = self.ident().text
        self.expect("{")
        init = trans = prop = None
        assumes = []
        while not self.accept("}"):
            t = self.tok
            if self.accept("const"):
                self.const_decl()
            elif self.accept("state"):
                self.var_decl(self.states)
            elif self.accept("input"):
                self.var_decl(self.inputs)
            elif t.text in ("init", "trans", "property", "assume") and t.kind == "kw":
                self.i += 1
                self.expect(":")
                self.section = t.text
                f = self.formula_expr()
                self.expect(";")
                if t.text == "assume":
                    self.spans[f"assume{len(assumes)}"] = (t.line, t.col)
                    assumes.append(f)
                    continue
                if {"init": init, "trans": trans, "property": prop}[t.text] is not None:
                    self.error(f"duplicate {t.text} clause", t)
                self.spans[t.text] = (t.line, t.col)
                if t.text == "init":
                    init = f
                elif t.text == "trans":
                    trans = f
                else:
                    prop = f
            else:
                self.error(f"unexpected '{t.text or 'end of input'}' in system body")
        if self.tok.kind != "eof":
            self.error("trailing input after system")
        unknown = set(self.overrides) - set(self.consts)
        if unknown:
            raise ParseError([Diagnostic("error", 1, 1, f"unknown constant {n}") for n in sorted(unknown)])
        return TransitionSystem(
            name=name,
            states=dict(self.states),
            inputs=dict(self.inputs),
            init=init if init is not None else TRUE,
            trans=trans if trans is not None else TRUE,
            prop=prop if prop is not None else TRUE,
            assumes=tuple(assumes),
            consts=dict(self.consts),
        )

    def _sort(self) -> Sort:
        t = self.tok
        if t.kind == "kw" and t.text in SORTS:
            self.i += 1
            return SORTS[t.text]
        self.error(f"expected a sort (int, real, bool), found '{t.text}'")

    def _declare(self, tok: Token):
        n = tok.text
        if n in self.states or n in self.inputs or n in self.consts:
            self.error(f"{n} declared twice", tok)

    def var_decl(self, table: dict) -> None:
        names = [self.ident()]
        while self.accept(","):
            names.append(self.ident())
        self.expect(":")
        s = self._sort()
        self.expect(";")
        for t in names:
            self._declare(t)
            table[t.text] = s

    def const_decl(self) -> None:
        tok = self.ident()
        self._declare(tok)
        self.expect(":")
        s = self._sort()
        if s is Sort.BOOL:
            self.error("constants must be numeric", tok)
        self.expect("=")
        neg = self.accept("-") is not None
        t = self.tok
        if t.kind != "num":
            self.error("expected a number")
        self.i += 1
        v = Fraction(t.text) * (-1 if neg else 1)
        if tok.text in self.overrides:
            v = Fraction(self.overrides[tok.text])
        if s is Sort.INT and v.denominator != 1:
            self.error(f"integer constant {tok.text} has a non-integral value", t)
        self.expect(";")
        self.consts[tok.text] = (s, v)

    # -- expressions -----------------------------------------------------------------
    # every expression function returns (node, numeric sort or _LIT or Sort.BOOL)

    def formula_expr(self):
        tok = self.tok
        node, s = self.impl()
        if s is not Sort.BOOL:
            self.error("expected a formula, found a numeric term", tok)
        return node

    def _want_bool(self, item, tok):
        node, s = item
        if s is not Sort.BOOL:
            self.error("expected a formula, found a numeric term", tok)
        return node

    def _want_num(self, item, tok):
        node, s = item
        if s is Sort.BOOL:
            self.error("expected a numeric term, found a formula", tok)
        return node, s

    def impl(self):
        tok = self.tok
        left = self.or_()
        if self.accept("=>"):
            rtok = self.tok
            right = self.impl()
            return Implies(self._want_bool(left, tok), self._want_bool(right, rtok)), Sort.BOOL
        return left

    def or_(self):
        tok = self.tok
        first = self.and_()
        if self.tok.text != "or" or self.tok.kind != "kw":
            return first
        args = [self._want_bool(first, tok)]
        while self.accept("or"):
            t = self.tok
            args.append(self._want_bool(self.and_(), t))
        return Or(tuple(args)), Sort.BOOL

    def and_(self):
        tok = self.tok
        first = self.not_()
        if self.tok.text != "and" or self.tok.kind != "kw":
            return first
        args = [self._want_bool(first, tok)]
        while self.accept("and"):
            t = self.tok
            args.append(self._want_bool(self.not_(), t))
        return And(tuple(args)), Sort.BOOL

    def not_(self):
        if self.accept("not"):
            t = self.tok
            return Not(self._want_bool(self.not_(), t)), Sort.BOOL
        return self.rel()

    def rel(self):
        tok = self.tok
        left = self.add()
        op = self.tok.text if self.tok.kind == "op" else None
        if op not in ("=", "<>", "<", "<=", ">", ">="):
            return left
        self.i += 1
        rtok = self.tok
        right = self.add()
        if left[1] is Sort.BOOL or right[1] is Sort.BOOL:
            if op not in ("=", "<>"):
                self.error(f"relation '{op}' applied to formulas", tok)
            a = self._want_bool(left, tok)
            b = self._want_bool(right, rtok)
            return (Iff(a, b) if op == "=" else Not(Iff(a, b))), Sort.BOOL
        self._join(left[1], right[1], tok)
        return compare(left[0], op, right[0]), Sort.BOOL

    def _join(self, a, b, tok):
        if a is _LIT:
            return b
        if b is _LIT:
            return a
        if a is not b:
            self.error("cannot mix int and real terms", tok)
        return a

    def add(self):
        tok = self.tok
        node, s = self.mul()
        while self.tok.kind == "op" and self.tok.text in ("+", "-"):
            op = self.tok.text
            self.i += 1
            rtok = self.tok
            rnode, rs = self._want_num(self.mul(), rtok)
            self._want_num((node, s), tok)
            s = self._join(s, rs, tok)
            node = Add((node, rnode)) if op == "+" else Sub(node, rnode)
        return node, s

    def mul(self):
        tok = self.tok
        node, s = self.unary()
        while self.tok.kind == "op" and self.tok.text in ("*", "/"):
            op = self.tok.text
            self.i += 1
            rtok = self.tok
            rnode, rs = self._want_num(self.unary(), rtok)
            self._want_num((node, s), tok)
            s = self._join(s, rs, tok)
            if op == "*":
                if term_constant(node) is None and term_constant(rnode) is None:
                    self.error("nonlinear product", tok)
                node = Mul(node, rnode)
            else:
                d = term_constant(rnode)
                if d is None:
                    self.error("division by a non-constant", rtok)
                if d == 0:
                    self.error("division by zero", rtok)
                node = Div(node, rnode)
        return node, s

    def unary(self):
        if self.accept("-"):
            tok = self.tok
            if tok.kind == "num":
                node, s = self.primary()
                return Num(-node.value), s
            node, s = self._want_num(self.unary(), tok)
            return Neg(node), s
        return self.primary()

    def primary(self):
        t = self.tok
        if t.kind == "num":
            self.i += 1
            v = Fraction(t.text)
            return Num(v), (Sort.REAL if "." in t.text else _LIT)
        if self.accept("true"):
            return TRUE, Sort.BOOL
        if self.accept("false"):
            return FALSE, Sort.BOOL
        if self.accept("("):
            inner = self.impl()
            self.expect(")")
            return inner
        if self.accept("ite"):
            self.expect("(")
            ctok = self.tok
            c = self._want_bool(self.impl(), ctok)
            self.expect(",")
            a_tok = self.tok
            a = self.impl()
            self.expect(",")
            b = self.impl()
            self.expect(")")
            if (a[1] is Sort.BOOL) != (b[1] is Sort.BOOL):
                self.error("ite branches must both be formulas or both be terms", a_tok)
            if a[1] is Sort.BOOL:
                return Ite(c, a[0], b[0]), Sort.BOOL
            return TermIte(c, a[0], b[0]), self._join(a[1], b[1], a_tok)
        if t.kind == "ident":
            self.i += 1
            name = t.text
            if self.tok.text == "'" and self.tok.kind == "op":
                self.i += 1
                if name not in self.states:
                    if name in self.inputs:
                        self.error(f"input {name} cannot be primed", t)
                    self.error(f"unknown state variable {name}'", t)
                if self.section != "trans":
                    self.error(f"primed variable {name}' outside trans", t)
                return self._var(name + "'", self.states[name])
            if name in self.consts:
                s, v = self.consts[name]
                return ConstRef(name, v), s
            if name in self.states:
                return self._var(name, self.states[name])
            if name in self.inputs:
                if self.section in ("init", "property", "assume"):
                    what = "property" if self.section == "property" else self.section
                    self.error(f"inputs not allowed in {what}", t)
                return self._var(name, self.inputs[name])
            self.error(f"unknown identifier {name}", t)
        self.error(f"unexpected '{t.text or 'end of input'}'")

    @staticmethod
    def _var(name: str, s: Sort):
        if s is Sort.BOOL:
            return BoolVar(name), Sort.BOOL
        return Var(name), s


def parse(text: str, consts: Mapping[str, object] | None = None) -> TransitionSystem:
    """Parse a model; raises ParseError carrying diagnostics."""
    p = Parser(text, consts)
    sys = p.system()
    diags = validate(sys, p.spans)
    errors = [d for d in diags if d.severity == "error"]
    if errors:
        raise ParseError(errors)
    return sys


def parse_formula(text: str, sys: TransitionSystem) -> Formula:
    """Parse a state formula over the variables and constants of ``sys``."""
    p = Parser(text)
    p.states = dict(sys.states)
    p.consts = dict(sys.consts)
    p.section = "property"
    f = p.formula_expr()
    if p.tok.kind != "eof":
        p.error(f"unexpected '{p.tok.text}' after formula")
    return f


def parse_with_diagnostics(text: str, consts=None):
    """(system or None, diagnostics) without raising."""
    try:
        p = Parser(text, consts)
        sys = p.system()
    except ParseError as e:
        return None, e.diagnostics
    diags = validate(sys, p.spans)
    if any(d.severity == "error" for d in diags):
        return None, diags
    return sys, diags


def validate(sys: TransitionSystem, spans: Mapping[str, tuple[int, int]] | None = None) -> list[Diagnostic]:
    spans = spans or {}
    out: list[Diagnostic] = []
    states = set(sys.states)
    inputs = set(sys.inputs)

    def diag(sev, where, msg):
        line, col = spans.get(where, (0, 0))
        out.append(Diagnostic(sev, line, col, msg))

    clauses = [("init", sys.init), ("property", sys.prop)]
    clauses += [(f"assume{i}", a) for i, a in enumerate(sys.assumes)]
    for where, f in clauses:
        names = free_vars(f)
        label = "assume" if where.startswith("assume") else where
        if names & inputs:
            diag("error", where, f"inputs not allowed in {label}")
        for n in sorted(names):
            if n.endswith("'"):
                diag("error", where, f"primed variable {n} outside trans")
            elif n not in states and n not in inputs:
                diag("error", where, f"unknown identifier {n}")
    tnames = free_vars(sys.trans)
    for n in sorted(tnames):
        base = n[:-1] if n.endswith("'") else n
        if n.endswith("'") and base not in states:
            diag("error", "trans", f"unknown state variable {n}")
        elif not n.endswith("'") and n not in states and n not in inputs:
            diag("error", "trans", f"unknown identifier {n}")
    for v in sys.states:
        if v + "'" not in tnames:
            diag("warning", "trans", f"{v}' unconstrained")
    return out


# ---------------------------------------------------------------------------
# printing

_SORT_NAME = {Sort.INT: "int", Sort.REAL: "real", Sort.BOOL: "bool"}


def print_system(sys: TransitionSystem) -> str:
    lines = [f"system {sys.name} {{"]
    for n, (s, v) in sys.consts.items():
        lines.append(f"  const {n}: {_SORT_NAME[s]} = {format_number(v)};")
    for n, s in sys.states.items():
        lines.append(f"  state {n}: {_SORT_NAME[s]};")
    for n, s in sys.inputs.items():
        lines.append(f"  input {n}: {_SORT_NAME[s]};")
    lines.append(f"  init: {formula_str(sys.init)};")
    lines.append(f"  trans: {formula_str(sys.trans)};")
    for a in sys.assumes:
        lines.append(f"  assume: {formula_str(a)};")
    lines.append(f"  property: {formula_str(sys.prop)};")
    lines.append("}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# bundled models

BUNDLED = ("double_counter", "triplex_voter", "duplex_voter", "three_timer", "stutter")


def bundled_text(name: str) -> str:
    return resources.files("hullinv.models").joinpath(f"{name}.ts").read_text(encoding="utf-8")


def load_bundled(name: str, consts: Mapping[str, object] | None = None) -> TransitionSystem:
    return parse(bundled_text(name), consts)
