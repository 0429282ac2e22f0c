"""Candidate lemmas from the gray region.

Hullification enumerates every exact convex hull reachable by pairwise
merges; hulls are identified by their source set (indices of the input
polyhedra they were built from).  The inexact pass merges intersecting
polyhedra until no two results intersect.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping

from .logic.formula import Constraint, Formula, negate_constraint
from .polyhedra import Polyhedron, convex_hull, exact_hull, intersects
from .smt.base import OracleError

log = logging.getLogger(__name__)

SourceSet = frozenset


def label(s: SourceSet) -> str:
    """Compact name of a source set: ``{1, 3}`` -> ``"13"``."""
    return "".join(str(i) for i in sorted(s)) if all(i < 10 for i in s) else "-".join(map(str, sorted(s)))


@dataclass
class GeneratorState:
    """Bookkeeping that survives between hullification calls."""

    merge_memory: dict = field(default_factory=dict)  # frozenset{S1, S2} -> Polyhedron | None
    attempts: int = 0
    successes: int = 0
    memory_hits: int = 0
    attempt_log: list = field(default_factory=list)  # union sources of merges actually attempted
    snapshots: list = field(default_factory=list)  # per iteration: list of generator-set lines
    batches: list = field(default_factory=list)  # per iteration: hulls found in it
    iterations: int = 0
    record: bool = True  # keep per-iteration generator-set lines (memory grows quadratically)
    truncated: bool = False

    def counters(self) -> dict:
        return {
            "merge_attempts": self.attempts,
            "merge_successes": self.successes,
            "memory_hits": self.memory_hits,
            "iterations": self.iterations,
            "hull_limit_hit": self.truncated,
        }


def _line(gen: dict) -> list[tuple[str, list[str]]]:
    return [(label(p), [label(s) for s in seeds]) for p, seeds in gen.items()]


def _merge(a: Polyhedron, b: Polyhedron, oracle) -> Polyhedron | None:
    if a.literals != b.literals:
        return None
    try:
        res = exact_hull(a, b, oracle)
    except OracleError as e:
        log.warning("exact hull check failed: %s", e)
        return None
    return None if res is None else res.hull


def hullification(
    polys: Mapping[int, Polyhedron] | Iterable[Polyhedron],
    state: GeneratorState | None,
    oracle,
    on_batch: Callable[[list[tuple[SourceSet, Polyhedron]]], None] | None = None,
    limit: int | None = None,
) -> tuple[dict[SourceSet, Polyhedron], GeneratorState]:
    """All exact hulls reachable by pairwise merges, keyed by source set.

    With ``limit``, enumeration stops once that many hulls exist and
    ``state.truncated`` is set.
    """
    if state is None:
        state = GeneratorState()
    if not isinstance(polys, Mapping):
        polys = {i + 1: p for i, p in enumerate(polys)}
    order = sorted(polys)
    shape: dict[SourceSet, Polyhedron] = {frozenset([i]): polys[i] for i in order}
    memory: set[SourceSet] = set(shape)
    gen: dict[SourceSet, list[SourceSet]] = {}
    for n, i in enumerate(order):
        gen[frozenset([i])] = [frozenset([j]) for j in order[n + 1:]]
        memory.update(frozenset([i, j]) for j in order[n + 1:])
    state.snapshots = []
    state.batches = []
    state.truncated = False
    fixed = False
    while not fixed:
        fixed = True
        state.iterations += 1
        new: dict[SourceSet, list[SourceSet]] = {p: [] for p in gen}
        lines = [_line(new)] if state.record else []
        found = []
        for pivot, seeds in gen.items():
            if limit is not None and len(new) >= limit:
                state.truncated = True
                log.warning("hullification stopped at %d hulls", len(new))
                break
            for seed in seeds:
                source = pivot | seed
                key = frozenset([pivot, seed])
                if key in state.merge_memory:
                    state.memory_hits += 1
                    hull = state.merge_memory[key]
                else:
                    state.attempts += 1
                    state.attempt_log.append(source)
                    hull = _merge(shape[pivot], shape[seed], oracle)
                    state.merge_memory[key] = hull
                    state.successes += hull is not None
                if seed in new[pivot]:
                    new[pivot].remove(seed)
                if hull is None:
                    continue
                fixed = False
                shape[source] = hull
                found.append((source, hull))
                _update(new, source, memory)
                if state.record:
                    lines.append(_line(new))
        gen = new
        state.snapshots.append(lines)
        state.batches.append(found)
        if on_batch is not None and found:
            on_batch(found)
        if state.truncated:
            break
    return {s: shape[s] for s in gen}, state


def _update(new: dict, source: SourceSet, memory: set) -> None:
    """Offer the hull of ``source`` as a seed to every pivot, then add it as a pivot."""
    for aux, seeds in new.items():
        merged = aux | source
        if merged not in memory and not aux <= source:
            seeds.append(source)
            memory.add(merged)
    new.setdefault(source, [])


# ---------------------------------------------------------------------------
# inexact hulls


def _meets(a: Polyhedron, b: Polyhedron, oracle) -> bool:
    if a.literals != b.literals:
        return False
    try:
        return intersects(a, b, oracle)
    except OracleError as e:
        log.warning("intersection check failed: %s", e)
        return False


def ich_fixpoint(polys: Iterable[Polyhedron], oracle) -> list[Polyhedron]:
    """Merge intersecting polyhedra into their hull until none intersect."""
    todo = list(polys)
    while True:
        done: list[Polyhedron] = []
        progress = False
        while todo:
            pivot = todo.pop(0)
            grown = True
            while grown:
                grown = False
                for i, other in enumerate(todo):
                    if _meets(pivot, other, oracle):
                        pivot = convex_hull(pivot, other)
                        del todo[i]
                        grown = progress = True
                        break
            done.append(pivot)
        if not progress:
            return sorted(set(done), key=str)
        todo = done


# ---------------------------------------------------------------------------
# candidates


@dataclass(frozen=True)
class CandidateAtom:
    atom: Constraint
    negation: Formula
    origin: SourceSet


def extract_candidates(
    hulls: Mapping[SourceSet, Polyhedron] | Iterable[Polyhedron],
) -> list[CandidateAtom]:
    """Negations of every linear atom of every hull, deduplicated."""
    items = hulls.items() if isinstance(hulls, Mapping) else ((frozenset(), h) for h in hulls)
    seen: set = set()
    out: list[CandidateAtom] = []
    for src, h in sorted(items, key=lambda kv: (len(kv[0]), sorted(kv[0]), str(kv[1]))):
        if h.bottom:
            continue
        for c in h.constraints:
            for part in _halves(c):
                neg = negate_constraint(part, h.sorts)
                if neg in seen:
                    continue
                seen.add(neg)
                out.append(CandidateAtom(part, neg, src))
    return out


def _halves(c: Constraint) -> list[Constraint]:
    if c.rel != "=":
        return [c]
    return [Constraint(c.term, "<="), Constraint(-c.term, "<=")]
