"""Pretty printing of terms and formulas in model-language syntax."""

from __future__ import annotations

from fractions import Fraction

from .formula import (
    Add, And, BoolConst, BoolVar, Compare, ConstRef, Constraint, Div, Iff, Implies, Ite,
    LinearTerm, Mul, Neg, Not, Num, Or, Sub, TermIte, Var,
)

# precedence levels, low to high
P_IMPL, P_OR, P_AND, P_NOT, P_REL, P_ADD, P_MUL, P_NEG, P_ATOM = range(1, 10)


def format_number(v: Fraction) -> str:
    """Integers plainly, terminating fractions as decimals, others as p/q."""
    v = Fraction(v)
    if v.denominator == 1:
        return str(v.numerator)
    d = v.denominator
    twos = fives = 0
    while d % 2 == 0:
        d //= 2
        twos += 1
    while d % 5 == 0:
        d //= 5
        fives += 1
    if d != 1:
        return f"{v.numerator}/{v.denominator}"
    places = max(twos, fives)
    scaled = abs(v) * 10**places
    digits = str(scaled.numerator).rjust(places + 1, "0")
    text = digits[:-places] + "." + digits[-places:]
    return ("-" if v < 0 else "") + text


def _wrap(text: str, inner: int, outer: int) -> str:
    return f"({text})" if inner < outer else text


def _linear(t: LinearTerm) -> str:
    parts: list[str] = []
    for name, c in t.coeffs:
        mag = abs(c)
        body = name if mag == 1 else f"{format_number(mag)}*{name}"
        if not parts:
            parts.append(body if c > 0 else f"-{body}")
        else:
            parts.append(("+ " if c > 0 else "- ") + body)
    if t.const or not parts:
        if not parts:
            parts.append(format_number(t.const))
        else:
            parts.append(("+ " if t.const > 0 else "- ") + format_number(abs(t.const)))
    return " ".join(parts)


def term_str(t, outer: int = 0) -> str:
    if isinstance(t, Var):
        return t.name
    if isinstance(t, ConstRef):
        return t.name
    if isinstance(t, Num):
        text = format_number(t.value)
        prec = P_ATOM if t.value >= 0 and "/" not in text else P_NEG
        return _wrap(text, prec, outer)
    if isinstance(t, LinearTerm):
        prec = P_ADD if len(t.coeffs) + (1 if t.const else 0) > 1 else P_MUL
        return _wrap(_linear(t), prec, outer)
    if isinstance(t, Add):
        text = term_str(t.args[0], P_ADD)
        for a in t.args[1:]:
            text += " + " + term_str(a, P_MUL)
        return _wrap(text, P_ADD, outer)
    if isinstance(t, Sub):
        return _wrap(f"{term_str(t.left, P_ADD)} - {term_str(t.right, P_MUL)}", P_ADD, outer)
    if isinstance(t, Neg):
        return _wrap("-" + term_str(t.arg, P_NEG + 1), P_NEG, outer)
    if isinstance(t, Mul):
        return _wrap(f"{term_str(t.coef, P_MUL)} * {term_str(t.arg, P_NEG)}", P_MUL, outer)
    if isinstance(t, Div):
        return _wrap(f"{term_str(t.arg, P_MUL)} / {term_str(t.divisor, P_NEG)}", P_MUL, outer)
    if isinstance(t, TermIte):
        return f"ite({formula_str(t.cond)}, {term_str(t.then)}, {term_str(t.else_)})"
    raise TypeError(f"not a term: {t!r}")


def constraint_str(c: Constraint) -> str:
    """Render ``t rel 0`` as ``vars rel constant``, flipping to >= when all coefficients are negative."""
    t = c.term
    rhs = -t.const
    lhs = LinearTerm(t.coeffs, Fraction(0))
    rel = c.rel
    if t.coeffs and all(k < 0 for _, k in t.coeffs):
        lhs = -lhs
        rhs = -rhs
        rel = {"<": ">", "<=": ">=", "=": "="}[rel]
    return f"{_linear(lhs)} {rel} {format_number(rhs)}"


def formula_str(f, outer: int = 0) -> str:
    if isinstance(f, BoolConst):
        return "true" if f.value else "false"
    if isinstance(f, BoolVar):
        return f.name
    if isinstance(f, Not):
        return _wrap("not " + formula_str(f.arg, P_NOT), P_NOT, outer)
    if isinstance(f, And):
        return _wrap(" and ".join(formula_str(a, P_AND + 1) for a in f.args), P_AND, outer)
    if isinstance(f, Or):
        return _wrap(" or ".join(formula_str(a, P_OR + 1) for a in f.args), P_OR, outer)
    if isinstance(f, Implies):
        text = f"{formula_str(f.left, P_IMPL + 1)} => {formula_str(f.right, P_IMPL)}"
        return _wrap(text, P_IMPL, outer)
    if isinstance(f, Iff):
        text = f"{formula_str(f.left, P_ADD)} = {formula_str(f.right, P_ADD)}"
        return _wrap(text, P_REL, outer)
    if isinstance(f, Ite):
        return f"ite({formula_str(f.cond)}, {formula_str(f.then)}, {formula_str(f.else_)})"
    if isinstance(f, Compare):
        text = f"{term_str(f.left, P_ADD)} {f.rel} {term_str(f.right, P_ADD)}"
        return _wrap(text, P_REL, outer)
    if isinstance(f, Constraint):
        return _wrap(constraint_str(f), P_REL, outer)
    raise TypeError(f"not a formula: {f!r}")


def to_str(x) -> str:
    from .formula import is_term

    return term_str(x) if is_term(x) else formula_str(x)
