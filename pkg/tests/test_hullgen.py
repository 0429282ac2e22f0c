import random

from hypothesis import given, settings, strategies as st

from helpers import brute_force_hulls, hat_polyhedra, int_points, ordered_merge, rand_rect, scattered_polyhedra
from hullinv.hullgen import GeneratorState, extract_candidates, hullification, ich_fixpoint, label
from hullinv.logic.formula import Sort
from hullinv.logic.printer import to_str
from hullinv.smt import BuiltinOracle

ORACLE = BuiltinOracle(timeout=30)
INT2 = {"x": Sort.INT, "y": Sort.INT}
REAL2 = {"x": Sort.REAL, "y": Sort.REAL}
NAMES = ["x", "y"]

HAT_ITERATION_1 = [
    "1,[] 2,[] 3,[] 4,[] 5,[]",
    "1,[] 2,[13] 3,[] 4,[13] 5,[13] 13,[]",
    "1,[] 2,[13] 3,[] 4,[13,23] 5,[13,23] 13,[] 23,[]",
    "1,[45] 2,[13,45] 3,[45] 4,[13,23] 5,[13,23] 13,[45] 23,[45] 45,[]",
]


def render(line):
    return " ".join(f"{p},[{','.join(s)}]" for p, s in line)


def test_label():
    assert label(frozenset({3, 1})) == "13"
    assert label(frozenset({2, 11})) == "2-11"


def test_hat_trace():
    hulls, st_ = hullification(hat_polyhedra(), None, ORACLE)
    assert [render(l) for l in st_.snapshots[0]] == HAT_ITERATION_1
    assert st_.iterations == 3
    assert sorted(map(label, hulls), key=lambda s: (len(s), s)) == [
        "1", "2", "3", "4", "5", "13", "23", "45", "123", "345",
    ]
    assert [label(s) for s, _ in st_.batches[1]] == ["123", "345"]
    assert st_.batches[2] == []
    assert str(hulls[frozenset({1, 2, 3})]) == "{x >= 0, x <= 4, y >= 1, y <= 2}"


def test_scattered_example_finds_diagonal_facet():
    hulls, _ = hullification(scattered_polyhedra(), None, ORACLE)
    h = hulls[frozenset({2, 5})]
    assert "x + y <= 4" in str(h)


def test_fixed_order_merging_misses_the_diagonal():
    seen = ordered_merge(scattered_polyhedra(), range(5), ORACLE)
    assert frozenset({2, 5}) not in {s for s, _ in seen}
    assert not any("x + y <= 4" in str(h) and len(s) == 2 for s, h in seen)


def test_merge_memory_is_reused_across_calls():
    polys = hat_polyhedra()
    state = GeneratorState()
    hullification(polys, state, ORACLE)
    attempts = state.attempts
    hullification({i + 1: p for i, p in enumerate(polys)}, state, ORACLE)
    assert state.attempts == attempts
    assert state.memory_hits > 0


def test_batches_are_streamed():
    got = []
    hullification(hat_polyhedra(), None, ORACLE, on_batch=lambda b: got.append([label(s) for s, _ in b]))
    assert got == [["13", "23", "45"], ["123", "345"]]


def test_candidates_are_negated_and_deduplicated():
    hulls, _ = hullification(scattered_polyhedra(), None, ORACLE)
    cands = extract_candidates(hulls)
    negs = [to_str(c.negation) for c in cands]
    assert len(negs) == len(set(negs))
    assert "x + y >= 5" in negs
    # equalities give two candidates
    single = extract_candidates([scattered_polyhedra()[4]])
    assert sorted(to_str(c.negation) for c in single) == ["x <= 3", "x >= 5", "y <= -1", "y >= 1"]


def test_ich_merges_only_intersecting():
    a, b, c, d, e = hat_polyhedra()
    out = ich_fixpoint([a, b, c], ORACLE)
    assert len(out) == 1
    assert len(ich_fixpoint([a, e], ORACLE)) == 2


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_hullification_is_exhaustive(seed):
    rng = random.Random(seed)
    polys = [rand_rect(rng, NAMES, INT2) for _ in range(rng.randint(2, 5))]
    polys = [p for p in polys if not p.bottom]
    hulls, _ = hullification(polys, None, ORACLE)
    got = {int_points(h, NAMES) for h in hulls.values()}
    for src, h in brute_force_hulls(polys, ORACLE).items():
        assert int_points(h, NAMES) in got, label(src)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_ich_is_order_invariant(seed):
    rng = random.Random(seed)
    polys = [rand_rect(rng, NAMES, REAL2, 0, 8) for _ in range(rng.randint(2, 6))]
    ref = {str(p) for p in ich_fixpoint(polys, ORACLE)}
    for _ in range(5):
        rng.shuffle(polys)
        assert {str(p) for p in ich_fixpoint(polys, ORACLE)} == ref
