import random

import pytest
from hypothesis import given, settings, strategies as st

from helpers import box_atoms, ech_mismatch, int_points, rand_poly, rand_rect
from hullinv.logic.formula import BoolVar, Constraint, LinearTerm, Not, Num, Sort, Var, atom_of_compare
from hullinv.polyhedra import (
    LiteralMismatch, Polyhedron, convex_hull, exact_hull, includes, intersects, is_empty, meet, project, remove_redundant,
)
from hullinv.smt import BuiltinOracle

INT2 = {"x": Sort.INT, "y": Sort.INT}
REAL2 = {"x": Sort.REAL, "y": Sort.REAL}
NAMES = ["x", "y"]
ORACLE = BuiltinOracle(timeout=30)
X, Y = Var("x"), Var("y")


def _t(v):
    return Num(v) if isinstance(v, (int, float)) else v


def P(pairs, sorts=INT2):
    atoms = []
    for a, r, b in pairs:
        a, b = _t(a), _t(b)
        if r in (">", ">="):
            a, r, b = b, r.replace(">", "<"), a
        atoms.append(atom_of_compare(a, r, b, sorts))
    return Polyhedron.make(atoms, sorts)


def test_canonical_form_ignores_order_and_duplicates():
    a = P([(X, "<=", 3), (Y, ">=", 0), (X, "<=", 3)])
    b = P([(Y, ">=", 0), (X, "<=", 3)])
    assert a == b and str(a) == str(b)


def test_contradiction_is_bottom():
    assert P([(X, "<=", 0), (X, ">=", 1)]).bottom
    assert is_empty(P([(X, "<=", 0), (X, ">=", 1)]), ORACLE)


def test_integer_gap_is_empty_only_over_integers():
    two_x = LinearTerm.make([("x", 2)], -1)
    p = Polyhedron.make([Constraint(two_x, "=")], INT2)
    q = Polyhedron.make([Constraint(two_x, "=")], REAL2)
    assert is_empty(p, ORACLE) and not is_empty(q, ORACLE)


def test_literals_are_part_of_identity():
    p = Polyhedron.make([BoolVar("b")] + box_atoms(["x"], INT2, 0, 1), {**INT2, "b": Sort.BOOL})
    q = Polyhedron.make([Not(BoolVar("b"))] + box_atoms(["x"], INT2, 0, 1), {**INT2, "b": Sort.BOOL})
    assert p != q
    with pytest.raises(LiteralMismatch):
        exact_hull(p, q, ORACLE)


def test_exact_hull_of_adjacent_segments():
    p = P([(X, "=", 0), (Y, ">=", 0), (Y, "<=", 2)])
    q = P([(X, "=", 1), (Y, ">=", 0), (Y, "<=", 2)])
    res = exact_hull(p, q, ORACLE)
    assert res is not None and res.exact
    assert int_points(res.hull, NAMES) == int_points(p, NAMES) | int_points(q, NAMES)


def test_exact_hull_refused_for_gap():
    p = P([(X, "=", 0), (Y, "=", 0)])
    q = P([(X, "=", 2), (Y, "=", 0)])
    assert exact_hull(p, q, ORACLE) is None
    # over the reals the same points do not merge either
    assert exact_hull(P([(X, "=", 0), (Y, "=", 0)], REAL2), P([(X, "=", 1), (Y, "=", 0)], REAL2), ORACLE) is None


def test_half_open_reals_merge_with_strict_facet():
    p = P([(X, ">=", 0), (X, "<", 1), (Y, ">=", 0), (Y, "<=", 1)], REAL2)
    q = P([(X, ">=", 1), (X, "<", 2), (Y, ">=", 0), (Y, "<=", 1)], REAL2)
    res = exact_hull(p, q, ORACLE)
    assert res is not None
    assert "x < 2" in str(res.hull)


def test_meet_and_inclusion():
    a = P([(X, ">=", 0), (X, "<=", 4)])
    b = P([(X, ">=", 2), (X, "<=", 6)])
    m = meet(a, b)
    assert includes(a, m, ORACLE) and includes(b, m, ORACLE)
    assert intersects(a, b, ORACLE)
    assert not intersects(a, P([(X, ">=", 5)]), ORACLE)


def test_project_unbounded_direction():
    p = P([(X, "<=", Y), (Y, "<=", 3)])
    out = project(p, ["y"])
    assert len(out) == 1 and str(out[0]) == "{x <= 3}"


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_exact_hull_certificates(seed):
    rng = random.Random(seed)
    p, q = rand_rect(rng, NAMES, INT2), rand_rect(rng, NAMES, INT2)
    assert ech_mismatch(p, q, NAMES, ORACLE) is None


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_convex_hull_covers_both(seed):
    rng = random.Random(seed)
    p, q = rand_poly(rng, NAMES, INT2), rand_poly(rng, NAMES, INT2)
    h = convex_hull(p, q)
    pts = int_points(h, NAMES)
    assert int_points(p, NAMES) <= pts and int_points(q, NAMES) <= pts


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_redundancy_removal_keeps_points(seed):
    rng = random.Random(seed)
    p = rand_poly(rng, NAMES, REAL2, n_cons=4)
    r = remove_redundant(p)
    assert len(r.constraints) <= len(p.constraints)
    for x in range(-6, 7):
        for y in range(-6, 7):
            m = {"x": x / 2, "y": y / 2}
            assert p.contains_point(m) == r.contains_point(m)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_inclusion_matches_enumeration(seed):
    rng = random.Random(seed)
    p, q = rand_poly(rng, NAMES, INT2), rand_poly(rng, NAMES, INT2)
    assert includes(p, q, ORACLE) == (int_points(q, NAMES) <= int_points(p, NAMES))
    assert intersects(p, q, ORACLE) == bool(int_points(q, NAMES) & int_points(p, NAMES))
