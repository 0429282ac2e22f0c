import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from helpers import formula_points, rand_constraint, rand_formula
from hullinv.frontend import load_bundled, parse_formula
from hullinv.logic.cone import cone_of_influence
from hullinv.logic.formula import (
    FALSE, TRUE, And, Compare, Constraint, LinearTerm, Mul, NonLinearError, Not, Num, Sort, Var,
    canonical_constraint, conjuncts, evaluate, free_vars, linearize, mk_and, mk_not, mk_or, negate_constraint,
    nnf, rename, substitute,
)
from hullinv.logic.printer import format_number, to_str

INT2 = {"x": Sort.INT, "y": Sort.INT}
NAMES = ["x", "y"]


def test_smart_constructors_simplify():
    x = Constraint(LinearTerm.make([("x", 1)]), "<=")
    assert mk_and(TRUE, x) == x
    assert mk_and(x, FALSE) == FALSE
    assert mk_or(x, TRUE) == TRUE
    assert mk_not(mk_not(x)) == x
    assert mk_and() == TRUE and mk_or() == FALSE


def test_integer_tightening():
    assert to_str(canonical_constraint(LinearTerm.make([("x", 2)], -3), "<=", INT2)) == "x <= 1"
    assert to_str(canonical_constraint(LinearTerm.make([("x", 2)], -3), "<", INT2)) == "x <= 1"
    # 2x + 4y = 3 has no integer solution
    assert canonical_constraint(LinearTerm.make([("x", 2), ("y", 4)], -3), "=", INT2) == FALSE


def test_negation_is_strict_only_over_reals():
    le = Constraint(LinearTerm.make([("x", 1)], -3), "<=")
    assert to_str(negate_constraint(le, INT2)) == "x >= 4"
    assert to_str(negate_constraint(le, {"x": Sort.REAL})) == "x > 3"


def test_linearize_rejects_products():
    with pytest.raises(NonLinearError):
        linearize(Mul(Var("x"), Var("y")))
    lt = linearize(Mul(Num(3), Var("x")))
    assert lt.as_dict() == {"x": Fraction(3)}


def test_substitute_and_rename():
    f = Compare(Var("x"), "<=", Var("y"))
    g = rename(f, {"x": "z"})
    assert free_vars(g) == {"z", "y"}
    h = substitute(f, {"x": Num(2)})
    assert evaluate(h, {"y": 3}) and not evaluate(h, {"y": 1})


def test_format_number():
    assert format_number(Fraction(1, 2)) == "0.5"
    assert format_number(Fraction(-3)) == "-3"


def test_cone_of_influence_double_counter():
    s = load_bundled("double_counter")
    assert cone_of_influence(s, s.prop) == {"x", "y"}


def test_conjuncts_flatten():
    a, b, c = (Constraint(LinearTerm.make([(n, 1)]), "<=") for n in "abc")
    assert conjuncts(And((a, And((b, c))))) == [a, b, c]


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_nnf_preserves_models(seed):
    rng = random.Random(seed)
    f = rand_formula(rng, NAMES, INT2, depth=3)
    g = nnf(f, INT2)
    assert formula_points(f, NAMES, -4, 4) == formula_points(g, NAMES, -4, 4)
    neg = nnf(f, INT2, positive=False)
    assert formula_points(Not(f), NAMES, -4, 4) == formula_points(neg, NAMES, -4, 4)


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_negated_constraint_complements_integer_points(seed):
    rng = random.Random(seed)
    c = rand_constraint(rng, NAMES, INT2)
    if not isinstance(c, Constraint) or c.rel == "=":
        return
    every = formula_points(TRUE, NAMES, -4, 4)
    inside = formula_points(c, NAMES, -4, 4)
    assert formula_points(negate_constraint(c, INT2), NAMES, -4, 4) == every - inside


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_printed_formulas_parse_back(seed):
    s = load_bundled("double_counter")
    rng = random.Random(seed)
    f = rand_formula(rng, NAMES, s.sorts, depth=2)
    g = parse_formula(to_str(f), s)
    assert formula_points(f, NAMES, -4, 4) == formula_points(g, NAMES, -4, 4)
