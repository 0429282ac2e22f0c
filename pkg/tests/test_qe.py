import random

import pytest
from hypothesis import given, settings, strategies as st

from helpers import box_atoms, qe_instance, qe_mismatch
from hullinv.logic.formula import BoolVar, Compare, Iff, Mul, Num, Sort, Var, mk_and, mk_or
from hullinv.polyhedra import Polyhedron
from hullinv.qe import QEResourceLimit, QETask, eliminate, functional_substitute
from hullinv.smt import BuiltinOracle

X, Y, Z = Var("x"), Var("y"), Var("z")
ORACLE = BuiltinOracle(timeout=30)


@settings(max_examples=120, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_projection_matches_enumeration(seed):
    task, names = qe_instance(random.Random(seed))
    assert qe_mismatch(task, names, ORACLE) is None


def test_task_rejects_overlap_and_stray_variables():
    sorts = {"x": Sort.INT, "y": Sort.INT}
    body = Compare(X, "<=", Y)
    with pytest.raises(ValueError):
        QETask(body, frozenset("x"), frozenset("xy"), sorts)
    with pytest.raises(ValueError):
        QETask(body, frozenset("x"), frozenset(), sorts)


def test_integer_projection_keeps_parity_gaps(builtin):
    # exists y. x = 2y and 0 <= y <= 2  ->  x in {0, 2, 4}
    sorts = {"x": Sort.INT, "y": Sort.INT}
    body = mk_and(
        Compare(X, "=", Mul(Num(2), Y)),
        Compare(Num(0), "<=", Y),
        Compare(Y, "<=", Num(2)),
    )
    polys = eliminate(QETask(body, frozenset("y"), frozenset("x"), sorts), builtin)
    inside = {x for x in range(-3, 8) if any(p.contains_point({"x": x}) for p in polys)}
    assert inside == {0, 2, 4}


def test_functional_definitions_are_substituted():
    body = mk_and(Compare(Y, "=", X), Compare(Y, "<=", Num(3)))
    g, rest = functional_substitute(body, {"y"})
    assert "y" not in rest
    assert "y" not in str(g)


def test_boolean_definitions_are_substituted(builtin):
    sorts = {"x": Sort.INT, "b": Sort.BOOL}
    body = mk_and(Iff(BoolVar("b"), Compare(X, "<=", Num(0))), BoolVar("b"), *box_atoms(["x"], sorts))
    polys = eliminate(QETask(body, frozenset("b"), frozenset("x"), sorts), builtin)
    inside = {x for x in range(-6, 7) if any(p.contains_point({"x": x}) for p in polys)}
    assert inside == set(range(-5, 1))


def test_disjunct_budget(builtin):
    sorts = {n: Sort.INT for n in "xyz"}
    parts = [mk_or(Compare(v, "<=", Num(i)), Compare(Num(i + 2), "<=", v)) for v in (X, Y, Z) for i in range(4)]
    with pytest.raises(QEResourceLimit):
        eliminate(QETask(mk_and(*parts), frozenset("z"), frozenset("xy"), sorts), builtin, budget=4)


def test_care_set_expansion_keeps_the_union(builtin):
    sorts = {"x": Sort.INT}
    body = mk_or(Compare(X, "=", Num(1)), Compare(X, "=", Num(2)), Compare(X, "=", Num(3)))
    care = Polyhedron.make(box_atoms(["x"], sorts, 0, 5), sorts)
    plain = eliminate(QETask(body, frozenset(), frozenset("x"), sorts), builtin)
    grown = eliminate(QETask(body, frozenset(), frozenset("x"), sorts), builtin, care=care)
    for x in range(-2, 8):
        a = any(p.contains_point({"x": x}) for p in plain)
        b = any(p.contains_point({"x": x}) for p in grown)
        assert a == b
    assert len(grown) <= len(plain)
