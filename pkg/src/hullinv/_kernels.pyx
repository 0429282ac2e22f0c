# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled versions of the arithmetic kernels (same results as _kernels_py)."""

from fractions import Fraction

from .logic.formula import LinearTerm


cdef object _mul_add(object acc_n, object acc_d, object p1, object q1, object p2, object q2):
    # acc + (p1/q1)*(p2/q2), unreduced
    cdef object n = p1 * p2
    cdef object d = q1 * q2
    if acc_d == 1 and d == 1:
        return acc_n + n, 1
    return acc_n * d + n * acc_d, acc_d * d


cdef object _frac(object n, object d):
    if d == 1:
        return Fraction(n)
    return Fraction(n, d)


def fm_combine(a, bint a_strict, b, bint b_strict, str v):
    """Eliminate ``v`` from ``a rel 0`` (positive coefficient) and ``b rel 0`` (negative)."""
    ka = a.coef(v)
    kb = -b.coef(v)
    cdef object kan = ka.numerator, kad = ka.denominator
    cdef object kbn = kb.numerator, kbd = kb.denominator
    cdef dict acc = {}
    cdef str n
    cdef tuple pair
    for n, c in a.coeffs:
        if n != v:
            acc[n] = (c.numerator * kbn, c.denominator * kbd)
    for n, c in b.coeffs:
        if n != v:
            if n in acc:
                pair = acc[n]
                acc[n] = _mul_add(pair[0], pair[1], c.numerator, c.denominator, kan, kad)
            else:
                acc[n] = (c.numerator * kan, c.denominator * kad)
    cdef list coeffs = []
    for n in sorted(acc):
        pair = acc[n]
        if pair[0] != 0:
            coeffs.append((n, _frac(pair[0], pair[1])))
    cn, cd = _mul_add(0, 1, a.const.numerator, a.const.denominator, kbn, kbd)
    cn, cd = _mul_add(cn, cd, b.const.numerator, b.const.denominator, kan, kad)
    return LinearTerm(tuple(coeffs), _frac(cn, cd)), a_strict or b_strict
