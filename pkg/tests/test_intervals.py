import itertools
from fractions import Fraction

from hypothesis import given, settings, strategies as st

from hullinv.frontend import load_bundled, parse
from hullinv.intervals import IntervalEnv, bounds_to_candidates, infer_bounds, post, propagate
from hullinv.logic.formula import evaluate, nnf
from hullinv.logic.printer import to_str


def reachable(sys, limit):
    """Explicit-state closure of the double counter (inputs enumerated)."""
    start = {"x": 0, "y": 0}
    seen = {(0, 0)}
    todo = [start]
    while todo:
        s = todo.pop()
        for a, b, c in itertools.product([False, True], repeat=3):
            for x2 in range(0, limit):
                for y2 in range(0, limit):
                    if (x2, y2) in seen:
                        continue
                    if evaluate(sys.trans, {**s, "a": a, "b": b, "c": c, "x'": x2, "y'": y2}):
                        seen.add((x2, y2))
                        todo.append({"x": x2, "y": y2})
    return seen


def test_double_counter_bounds():
    env = infer_bounds(load_bundled("double_counter"))
    assert str(env) == "x in [0, 10], y in [0, 6]"


def test_stutter_bounds():
    env = infer_bounds(load_bundled("stutter"))
    assert env["x"] == (0, 0)


def test_unbounded_counter_is_top():
    s = parse("system c { state x: int; init: x = 0; trans: x' = x + 1; property: x >= 0; }")
    env = infer_bounds(s)
    assert env["x"] == (0, None)


def test_voters_have_no_finite_bounds():
    for name in ("duplex_voter", "triplex_voter"):
        assert infer_bounds(load_bundled(name)).is_top()


def test_post_of_a_box():
    s = load_bundled("double_counter")
    out = post(s, IntervalEnv({"x": (Fraction(2), Fraction(3)), "y": (Fraction(0), Fraction(0))}))
    assert out["x"] == (0, 4) and out["y"] == (0, 1)


def test_propagate_detects_emptiness():
    s = parse("system c { state x: int; init: x = 0; trans: x' = x; property: x >= 0; }")
    f = nnf(s.prop, s.sorts)
    assert propagate(f, {"x": (Fraction(-3), Fraction(-1))}, s.sorts) is None


def test_candidates_from_bounds():
    s = load_bundled("double_counter")
    cands = bounds_to_candidates(infer_bounds(s), s.sorts, first_id=7)
    assert [c.id for c in cands] == [7, 8, 9, 10]
    assert [to_str(c.formula) for c in cands] == ["x >= 0", "x <= 10", "y >= 0", "y <= 6"]
    assert {c.origin for c in cands} == {"interval-bound"}


@settings(max_examples=15, deadline=None)
@given(st.integers(1, 6), st.integers(1, 6))
def test_bounds_contain_reachable_states(nx, ny):
    s = load_bundled("double_counter", {"nx": nx, "ny": ny})
    env = infer_bounds(s)
    for x, y in reachable(s, 8):
        for n, v in (("x", x), ("y", y)):
            lo, hi = env[n]
            assert (lo is None or lo <= v) and (hi is None or v <= hi)
