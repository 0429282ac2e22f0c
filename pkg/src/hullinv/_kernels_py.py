"""Pure-Python versions of the arithmetic kernels."""

from fractions import Fraction

from .logic.formula import LinearTerm


def fm_combine(a: LinearTerm, a_strict: bool, b: LinearTerm, b_strict: bool, v: str):
    """Eliminate ``v`` from ``a rel 0`` (positive coefficient) and ``b rel 0`` (negative)."""
    ka = a.coef(v)
    kb = -b.coef(v)
    acc: dict[str, Fraction] = {}
    for n, c in a.coeffs:
        if n != v:
            acc[n] = c * kb
    for n, c in b.coeffs:
        if n != v:
            s = acc.get(n, 0) + c * ka
            if s:
                acc[n] = s
            else:
                acc.pop(n, None)
    coeffs = tuple(sorted(acc.items()))
    return LinearTerm(coeffs, a.const * kb + b.const * ka), a_strict or b_strict
