import json

import pytest

from hullinv.frontend import load_bundled, parse, parse_formula
from hullinv.kind import (
    Candidate, Trace, base_check, bmc, minimize, partition, step_check,
)
from hullinv.logic.formula import TRUE, mk_and, mk_not

COUNTER = "system c { state x: int; init: x = 0; trans: x' = x + 1; property: x >= 0; }"


@pytest.fixture
def counter():
    return parse(COUNTER)


@pytest.fixture
def dc():
    s = load_bundled("double_counter")
    bounds = parse_formula("0 <= x and x <= 10 and 0 <= y and y <= 6", s)
    return s.with_(assumes=(bounds,))


def f(sys, text):
    return parse_formula(text, sys)


def test_base_holds(counter, oracle):
    assert base_check(counter, f(counter, "x >= 0"), 3, oracle) is None


def test_base_trace_ends_at_first_violation(counter, oracle):
    tr = base_check(counter, f(counter, "x <= 3"), 5, oracle)
    assert len(tr) == 5 and tr.states[-1]["x"] == 4
    assert tr.is_valid(counter) and tr.violates(f(counter, "x <= 3"))


@pytest.mark.parametrize("k", [1, 4, 10])
def test_double_counter_base_with_bounds(dc, oracle, k):
    assert base_check(dc, dc.prop, k, oracle) is None


def test_step(counter, dc, oracle):
    assert step_check(counter, f(counter, "x >= 0"), 1, oracle) is None
    assert step_check(dc, dc.prop, 1, oracle) is not None
    lemma = mk_and(dc.prop, mk_not(f(dc, "y < x - 4")))
    assert step_check(dc, lemma, 1, oracle) is None


def test_bmc(counter, oracle):
    tr = bmc(counter, f(counter, "x <= 2"), 10, oracle)
    assert len(tr) == 4 and tr.is_valid(counter)
    assert bmc(counter, TRUE, 10, oracle) is None


def test_bmc_double_counter_is_safe(oracle):
    s = load_bundled("double_counter", {"nx": 4, "ny": 2})
    assert bmc(s, s.prop, 12, oracle) is None


def test_bmc_finds_shortest_double_counter_violation(builtin):
    s = load_bundled("double_counter", {"nx": 3, "ny": 2})
    bad = f(s, "x = 3 => y = 3")
    tr = bmc(s, bad, 8, builtin)
    assert len(tr) == 4 and tr.is_valid(s) and tr.violates(bad)


def test_trace_json_round_trip(counter, builtin):
    tr = base_check(counter, f(counter, "x <= 1"), 4, builtin)
    data = json.loads(json.dumps(tr.to_json()))
    assert data[0] == {"state": {"x": 0}, "input": {}}
    back = Trace.from_json(data, counter)
    assert back.states == tr.states and back.is_valid(counter)


def test_partition_simple(counter, oracle):
    good = Candidate(1, f(counter, "x >= 0"))
    bad = Candidate(2, f(counter, "x <= 3"))
    v = partition(counter, [good, bad], 5, oracle)
    assert v.ids("valid") == [1]
    assert list(v.falsified) == [bad]
    assert len(v.falsified[bad]) == 5


def test_partition_double_counter_hull_atoms(dc, oracle):
    po = Candidate(0, dc.prop, "main-PO")
    texts = ["not (8 <= x)", "not (x <= 9)", "not (0 <= y)", "not (y < x - 4)"]
    cands = [Candidate(i + 1, f(dc, t)) for i, t in enumerate(texts)] + [po]
    v = partition(dc, cands, 2, oracle)
    assert v.k == 1
    assert {0, 4} <= set(v.ids("valid"))
    assert {1, 2, 3} <= {c.id for c in v.falsified}


def test_partition_unknown_goes_to_undefined(dc):
    from hullinv.smt.base import Oracle, SatResult

    class Mute(Oracle):
        def _solve(self, f, sorts):
            return SatResult("unknown", reason="muted")

    v = partition(dc, [Candidate(0, dc.prop, "main-PO")], 3, Mute())
    assert v.ids("undefined") == [0] and not v.valid and not v.falsified


def test_minimize_drops_redundant_bound(dc, oracle):
    po = Candidate(0, dc.prop, "main-PO")
    lem = Candidate(1, mk_not(f(dc, "y < x - 4")))
    extra = Candidate(2, mk_not(f(dc, "x >= 11")))
    assert [c.id for c in minimize(dc, [po, lem, extra], po, 1, oracle)] == [0, 1]
    assert minimize(dc, [po], po, 1, oracle) == [po]


def test_minimize_keeps_one_of_two_equivalent(dc, oracle):
    po = Candidate(0, dc.prop, "main-PO")
    a = Candidate(1, f(dc, "x - y <= 4"))
    b = Candidate(2, f(dc, "not (y < x - 4)"))
    kept = minimize(dc, [po, a, b], po, 1, oracle)
    assert len(kept) == 2 and po in kept


def test_candidate_origin_checked():
    with pytest.raises(ValueError):
        Candidate(1, TRUE, "guess")


def test_deep_hull_atom_falls_at_depth_nine(dc, builtin):
    cand = Candidate(1, f(dc, "not (8 <= x)"))
    v = partition(dc, [cand], 9, builtin)
    assert list(v.falsified) == [cand]
    assert len(v.falsified[cand]) == 9
