import itertools

import pytest

from hullinv.backward import GrayRegion, accumulate, care_set, first_preimage, is_fixpoint, next_preimage
from hullinv.frontend import load_bundled, parse_formula
from hullinv.logic.formula import evaluate


@pytest.fixture
def dc():
    return load_bundled("double_counter")


@pytest.fixture
def bounds(dc):
    return parse_formula("0 <= x and x <= 10 and 0 <= y and y <= 6", dc)


def successors(sys, s):
    for a, b, c in itertools.product([False, True], repeat=3):
        for x2 in range(0, 11):
            for y2 in range(0, 7):
                m = {**s, "a": a, "b": b, "c": c, "x'": x2, "y'": y2}
                if evaluate(sys.trans, m):
                    yield {"x": x2, "y": y2}


def states():
    for x in range(0, 11):
        for y in range(0, 7):
            yield {"x": x, "y": y}


def covered(polys, s):
    return any(p.contains_point(s) for p in polys)


def test_first_preimage(dc, bounds, oracle):
    pre = first_preimage(dc, bounds, oracle)
    assert [str(p) for p in pre] == ["{x = 9, y >= 0, y <= 4}"]


def test_first_preimage_matches_enumeration(dc, bounds, builtin):
    pre = first_preimage(dc, bounds, builtin)
    for s in states():
        expect = evaluate(dc.prop, s) and any(not evaluate(dc.prop, t) for t in successors(dc, s))
        assert covered(pre, s) == expect, s


def test_second_preimage_adds_one_polyhedron(dc, bounds, oracle):
    p1 = first_preimage(dc, bounds, oracle)
    p2 = next_preimage(dc, bounds, p1, oracle)
    region = accumulate(accumulate(GrayRegion(), p1, oracle), p2, oracle)
    assert [(i, str(p)) for i, p in region.union] == [
        (1, "{x = 9, y >= 0, y <= 4}"),
        (2, "{x = 8, y >= 0, y <= 3}"),
    ]
    assert region.next_index == 3 and len(region.preimages) == 2
    for s in states():
        expect = evaluate(dc.prop, s) and any(covered(p1, t) for t in successors(dc, s))
        assert covered(p2, s) == expect, s


def test_fixpoint_detection(dc, bounds, builtin):
    p1 = first_preimage(dc, bounds, builtin)
    region = accumulate(GrayRegion(), p1, builtin)
    assert is_fixpoint(region, p1, builtin)
    p2 = next_preimage(dc, bounds, p1, builtin)
    assert not is_fixpoint(region, p2, builtin)


def test_empty_preimage_for_stutter(builtin):
    s = load_bundled("stutter")
    assert first_preimage(s, s.prop, builtin) == []
    assert next_preimage(s, s.prop, [], builtin) == []


def test_care_set_uses_cone_variables(dc, bounds):
    care = care_set(dc, bounds)
    assert str(care) == "{x >= 0, x <= 10, y >= 0, y <= 6}"
