"""SMT-LIB v2 client talking to an external solver over pipes."""

from __future__ import annotations

import os
import re
import select
import shlex
import subprocess
import time
from fractions import Fraction
from typing import Mapping

from ..logic.formula import (
    Add, And, BoolConst, BoolVar, Compare, ConstRef, Constraint, Div, Formula, Iff, Implies,
    Ite, LinearTerm, Mul, Neg, Not, Num, Or, Sort, Sub, TermIte, Var, free_vars,
    sort_of_term,
)
from .base import SAT, UNKNOWN, UNSAT, Oracle, OracleError, SatResult


def symbol(name: str) -> str:
    return f"|{name}|"


def numeral(v: Fraction, sort: Sort) -> str:
    v = Fraction(v)
    mag = abs(v)
    if sort is Sort.INT:
        if v.denominator != 1:
            raise ValueError(f"non-integral constant {v} in integer context")
        text = str(mag.numerator)
    elif mag.denominator == 1:
        text = f"{mag.numerator}.0"
    else:
        text = f"(/ {mag.numerator}.0 {mag.denominator}.0)"
    return f"(- {text})" if v < 0 else text


class Printer:
    def __init__(self, sorts: Mapping[str, Sort]):
        self.sorts = sorts

    def _ctx(self, *terms) -> Sort:
        for t in terms:
            if sort_of_term(t, self.sorts) is Sort.REAL:
                return Sort.REAL
        return Sort.INT

    def term(self, t, ctx: Sort) -> str:
        if isinstance(t, Var):
            return symbol(t.name)
        if isinstance(t, Num | ConstRef):
            return numeral(t.value, ctx)
        if isinstance(t, LinearTerm):
            parts = []
            for n, c in t.coeffs:
                parts.append(symbol(n) if c == 1 else f"(* {numeral(c, ctx)} {symbol(n)})")
            if t.const or not parts:
                parts.append(numeral(t.const, ctx))
            return parts[0] if len(parts) == 1 else f"(+ {' '.join(parts)})"
        if isinstance(t, Add):
            return f"(+ {' '.join(self.term(a, ctx) for a in t.args)})"
        if isinstance(t, Sub):
            return f"(- {self.term(t.left, ctx)} {self.term(t.right, ctx)})"
        if isinstance(t, Neg):
            return f"(- {self.term(t.arg, ctx)})"
        if isinstance(t, Mul):
            return f"(* {self.term(t.coef, ctx)} {self.term(t.arg, ctx)})"
        if isinstance(t, Div):
            from ..logic.formula import term_constant

            d = term_constant(t.divisor)
            return f"(* {numeral(1 / d, ctx)} {self.term(t.arg, ctx)})"
        if isinstance(t, TermIte):
            return f"(ite {self.formula(t.cond)} {self.term(t.then, ctx)} {self.term(t.else_, ctx)})"
        raise TypeError(f"not a term: {t!r}")

    def formula(self, f) -> str:
        if isinstance(f, BoolConst):
            return "true" if f.value else "false"
        if isinstance(f, BoolVar):
            return symbol(f.name)
        if isinstance(f, Not):
            return f"(not {self.formula(f.arg)})"
        if isinstance(f, And):
            return f"(and {' '.join(self.formula(a) for a in f.args)})"
        if isinstance(f, Or):
            return f"(or {' '.join(self.formula(a) for a in f.args)})"
        if isinstance(f, Implies):
            return f"(=> {self.formula(f.left)} {self.formula(f.right)})"
        if isinstance(f, Iff):
            return f"(= {self.formula(f.left)} {self.formula(f.right)})"
        if isinstance(f, Ite):
            return f"(ite {self.formula(f.cond)} {self.formula(f.then)} {self.formula(f.else_)})"
        if isinstance(f, Compare):
            ctx = self._ctx(f.left, f.right)
            return f"({f.rel} {self.term(f.left, ctx)} {self.term(f.right, ctx)})"
        if isinstance(f, Constraint):
            ctx = self._ctx(f.term)
            if ctx is Sort.INT and any(c.denominator != 1 for _, c in f.term.coeffs):
                ctx = Sort.REAL
            return f"({f.rel} {self.term(f.term, ctx)} {numeral(Fraction(0), ctx)})"
        raise TypeError(f"not a formula: {f!r}")


_TOKEN = re.compile(r"\s*(\(|\)|\|[^|]*\||\"(?:[^\"]|\"\")*\"|[^\s()|\"]+)")


def parse_sexprs(text: str):
    out = []
    stack: list[list] = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            break
        pos = m.end()
        tok = m.group(1)
        if tok == "(":
            stack.append([])
        elif tok == ")":
            done = stack.pop()
            (stack[-1] if stack else out).append(done)
        else:
            (stack[-1] if stack else out).append(tok)
    return out, bool(stack)


def _sexpr_end(text: str) -> int | None:
    """Index just past the first complete s-expression in ``text``, if any."""
    depth = 0
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            return None
        pos = m.end()
        tok = m.group(1)
        if tok == "(":
            depth += 1
        elif tok == ")":
            depth -= 1
            if depth == 0:
                return pos
    return None


def value_of(expr):
    if isinstance(expr, str):
        if expr == "true":
            return True
        if expr == "false":
            return False
        return Fraction(expr)
    op = expr[0]
    if op == "-" and len(expr) == 2:
        return -value_of(expr[1])
    if op == "/" and len(expr) == 3:
        return value_of(expr[1]) / value_of(expr[2])
    if op == "to_real" or op == "to_int":
        return value_of(expr[1])
    raise OracleError(f"cannot read value {expr!r}")


class SmtLibOracle(Oracle):
    name = "smtlib"

    def __init__(self, command: str, timeout: float | None = 10.0):
        super().__init__(timeout)
        self.command = shlex.split(command) if isinstance(command, str) else list(command)
        self.name = os.path.basename(self.command[0])
        self.proc: subprocess.Popen | None = None
        self._buf = ""

    def _start(self):
        try:
            self.proc = subprocess.Popen(
                self.command,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                stderr=subprocess.DEVNULL,
                text=True,
            )
        except OSError as e:
            raise OracleError(f"cannot start {self.command[0]}: {e.strerror or e}") from e
        self._buf = ""
        self._send("(set-option :print-success false)")
        self._send("(set-option :produce-models true)")
        self._send("(set-logic ALL)")

    def _send(self, line: str) -> None:
        assert self.proc is not None and self.proc.stdin is not None
        self.proc.stdin.write(line + "\n")
        self.proc.stdin.flush()

    def _read(self, deadline: float | None) -> str:
        assert self.proc is not None and self.proc.stdout is not None
        fd = self.proc.stdout.fileno()
        while True:
            stripped = self._buf.strip()
            if stripped:
                if not stripped.startswith("("):
                    if "\n" in self._buf.lstrip():
                        line, _, rest = self._buf.lstrip().partition("\n")
                        self._buf = rest
                        return line.strip()
                else:
                    end = _sexpr_end(stripped)
                    if end is not None:
                        self._buf = stripped[end:]
                        return stripped[:end]
            wait = None if deadline is None else max(0.0, deadline - time.monotonic())
            ready, _, _ = select.select([fd], [], [], wait)
            if not ready:
                raise TimeoutError
            chunk = os.read(fd, 65536)
            if not chunk:
                raise OracleError(f"{self.name}: solver exited")
            self._buf += chunk.decode()

    def _restart(self):
        self.close()
        self._start()

    def _solve(self, f: Formula, sorts: Mapping[str, Sort]) -> SatResult:
        if self.proc is None or self.proc.poll() is not None:
            self._start()
        names = sorted(free_vars(f))
        pr = Printer(sorts)
        lines = ["(push 1)"]
        smt_sort = {Sort.BOOL: "Bool", Sort.INT: "Int", Sort.REAL: "Real"}
        for n in names:
            lines.append(f"(declare-const {symbol(n)} {smt_sort[sorts[n]]})")
        lines.append(f"(assert {pr.formula(f)})")
        if self.timeout:
            lines.insert(0, f"(set-option :timeout {int(self.timeout * 1000)})")
        lines.append("(check-sat)")
        deadline = time.monotonic() + self.timeout + 2.0 if self.timeout else None
        try:
            self._send("\n".join(lines))
            answer = self._read(deadline)
            if answer == "sat":
                model = {}
                if names:
                    self._send(f"(get-value ({' '.join(symbol(n) for n in names)}))")
                    reply, _ = parse_sexprs(self._read(deadline))
                    for pair in reply[0]:
                        key = pair[0]
                        if key.startswith("|"):
                            key = key[1:-1]
                        model[key] = value_of(pair[1])
                self._send("(pop 1)")
                return SatResult(SAT, model)
            self._send("(pop 1)")
            if answer == "unsat":
                return SatResult(UNSAT)
            if answer.startswith("(error"):
                raise OracleError(f"{self.name}: {answer}")
            return SatResult(UNKNOWN, reason=answer)
        except TimeoutError:
            self._restart()
            return SatResult(UNKNOWN, reason="timeout")
        except OracleError as e:
            self._restart()
            return SatResult(UNKNOWN, reason=str(e))

    def close(self) -> None:
        if self.proc is not None:
            try:
                self.proc.kill()
                self.proc.wait(timeout=5)
            except Exception:
                pass
            for stream in (self.proc.stdin, self.proc.stdout):
                try:
                    stream.close()
                except Exception:
                    pass
            self.proc = None
