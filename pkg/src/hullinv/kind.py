"""k-induction: base and step checks, candidate partitioning, BMC, minimization.

Assumptions of the system (confirmed or trusted invariants) are conjoined
at every unrolled state in both the base and the step query.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .logic.formula import TRUE, Formula, Sort, evaluate, free_vars, mk_and, mk_not, mk_or
from .smt.base import OracleError
from .system import TransitionSystem, primed, split_model

log = logging.getLogger(__name__)

ORIGINS = ("main-PO", "hull-atom", "assume", "interval-bound")


class EngineUnknown(Exception):
    """The oracle could not decide a query the engine depends on."""


@dataclass(frozen=True)
class Candidate:
    id: int
    formula: Formula
    origin: str = "hull-atom"

    def __post_init__(self):
        if self.origin not in ORIGINS:
            raise ValueError(f"unknown origin {self.origin!r}")


# ---------------------------------------------------------------------------
# traces


def _encode(v):
    if isinstance(v, bool):
        return v
    v = Fraction(v)
    if v.denominator == 1:
        return int(v)
    return f"{v.numerator}/{v.denominator}"


def _decode(v, sort: Sort):
    if sort is Sort.BOOL:
        return bool(v)
    return Fraction(v)


@dataclass
class Trace:
    """A finite run: ``states[i]`` steps to ``states[i+1]`` under ``inputs[i]``."""

    states: list[dict]
    inputs: list[dict]

    def __len__(self) -> int:
        return len(self.states)

    def step_model(self, sys: TransitionSystem, i: int) -> dict:
        m = dict(self.states[i])
        m.update(self.inputs[i])
        m.update({primed(n): v for n, v in self.states[i + 1].items()})
        return m

    def is_valid(self, sys: TransitionSystem) -> bool:
        """Initial state, assumptions and every transition re-evaluate to true."""
        if not self.states or len(self.inputs) != len(self.states) - 1:
            return False
        if not evaluate(sys.init, self.states[0]):
            return False
        for s in self.states:
            if not all(evaluate(a, s) for a in sys.assumes):
                return False
        return all(evaluate(sys.trans, self.step_model(sys, i)) for i in range(len(self.inputs)))

    def violates(self, prop: Formula) -> bool:
        return not evaluate(prop, self.states[-1])

    def truncate(self, n: int) -> "Trace":
        return Trace(self.states[:n], self.inputs[: n - 1])

    def to_json(self) -> list[dict]:
        out = []
        for i, s in enumerate(self.states):
            step = {"state": {n: _encode(v) for n, v in s.items()}}
            step["input"] = {n: _encode(v) for n, v in self.inputs[i].items()} if i < len(self.inputs) else {}
            out.append(step)
        return out

    @staticmethod
    def from_json(data: Sequence[Mapping], sys: TransitionSystem) -> "Trace":
        states = [{n: _decode(v, sys.states[n]) for n, v in step["state"].items()} for step in data]
        inputs = [
            {n: _decode(v, sys.inputs[n]) for n, v in step.get("input", {}).items()} for step in data[:-1]
        ]
        return Trace(states, inputs)


def _trace(model: Mapping, sys: TransitionSystem, n: int) -> Trace:
    states, inputs = split_model(model, sys, n - 1)
    return Trace(states, inputs)


# ---------------------------------------------------------------------------
# unrolling


def _path(sys: TransitionSystem, n: int) -> list[Formula]:
    """Transitions and assumptions over states s_0..s_{n-1}."""
    parts = [sys.trans_at(i) for i in range(n - 1)]
    for i in range(n):
        parts.extend(sys.state_at(a, i) for a in sys.assumes)
    return parts


def _sorts(sys: TransitionSystem, n: int) -> dict:
    return sys.unrolled_sorts(n - 1)


def _require(res):
    if res.unknown:
        raise EngineUnknown(res.reason or "oracle returned unknown")
    return res


def base_check(sys: TransitionSystem, prop: Formula, k: int, oracle) -> Trace | None:
    """None if ``prop`` holds in the first k states of every run, else a witness."""
    if k < 1:
        raise ValueError("k must be at least 1")
    bad = mk_or(*[mk_not(sys.state_at(prop, i)) for i in range(k)])
    q = mk_and(sys.state_at(sys.init, 0), *_path(sys, k), bad)
    res = _require(oracle.check_sat(q, _sorts(sys, k)))
    if res.unsat:
        return None
    tr = _trace(res.model, sys, k)
    for i, s in enumerate(tr.states):
        if not evaluate(prop, s):
            return tr.truncate(i + 1)
    raise OracleError("base model does not violate the property")


def step_check(sys: TransitionSystem, prop: Formula, k: int, oracle) -> dict | None:
    """None if ``prop`` is k-inductive relative to the assumptions, else a model."""
    if k < 1:
        raise ValueError("k must be at least 1")
    hyp = [sys.state_at(prop, i) for i in range(k)]
    q = mk_and(*_path(sys, k + 1), *hyp, mk_not(sys.state_at(prop, k)))
    res = _require(oracle.check_sat(q, _sorts(sys, k + 1)))
    return None if res.unsat else res.model


def bmc(sys: TransitionSystem, prop: Formula, depth: int, oracle) -> Trace | None:
    """Shortest run of at most ``depth`` states ending in a violation."""
    if depth < 1:
        raise ValueError("depth must be at least 1")
    if prop == TRUE:
        return None
    for n in range(1, depth + 1):
        q = mk_and(
            sys.state_at(sys.init, 0),
            *_path(sys, n),
            *[sys.state_at(prop, i) for i in range(n - 1)],
            mk_not(sys.state_at(prop, n - 1)),
        )
        res = _require(oracle.check_sat(q, _sorts(sys, n)))
        if res.sat:
            return _trace(res.model, sys, n)
    return None


# ---------------------------------------------------------------------------
# partitioning


@dataclass
class Verdict:
    falsified: dict = field(default_factory=dict)  # Candidate -> Trace
    undefined: set = field(default_factory=set)
    valid: set = field(default_factory=set)
    k: int = 0

    def ids(self, part: str) -> list[int]:
        return sorted(c.id for c in getattr(self, part))


def _base_filter(sys, cands: list[Candidate], k: int, oracle, falsified: dict) -> tuple[list, list]:
    """Split ``cands`` into survivors and unknowns; falsified ones get traces."""
    alive = list(cands)
    init = sys.state_at(sys.init, 0)
    path = mk_and(init, *_path(sys, k))
    sorts = _sorts(sys, k)
    while alive:
        named = [(c.id, mk_and(*[sys.state_at(c.formula, i) for i in range(k)])) for c in alive]
        try:
            res = oracle.check_sat_assuming(path, named, sorts)
        except OracleError as e:
            log.warning("base check failed: %s", e)
            return [], alive
        if res.unknown:
            return [], alive
        if res.unsat:
            return alive, []
        tr = _trace(res.model, sys, k)
        hit = [c for c in alive if c.id in res.violated]
        for c in hit:
            first = next(i for i, s in enumerate(tr.states) if not evaluate(c.formula, s))
            falsified[c] = tr.truncate(first + 1)
        alive = [c for c in alive if c.id not in res.violated]
    return alive, []


def _step_filter(sys, cands: list[Candidate], k: int, oracle) -> tuple[list, list]:
    """Largest subset found by filtering that is mutually k-inductive, and the rest."""
    alive = list(cands)
    dropped: list[Candidate] = []
    sorts = _sorts(sys, k + 1)
    while alive:
        hyp = [sys.state_at(c.formula, i) for c in alive for i in range(k)]
        base = mk_and(*_path(sys, k + 1), *hyp)
        named = [(c.id, sys.state_at(c.formula, k)) for c in alive]
        try:
            res = oracle.check_sat_assuming(base, named, sorts)
        except OracleError as e:
            log.warning("step check failed: %s", e)
            return [], dropped + alive
        if res.unknown:
            return [], dropped + alive
        if res.unsat:
            return alive, dropped
        dropped.extend(c for c in alive if c.id in res.violated)
        alive = [c for c in alive if c.id not in res.violated]
    return [], dropped


def partition(
    sys: TransitionSystem,
    candidates: Iterable[Candidate],
    k_max: int,
    oracle,
    po_id: int | None = None,
) -> Verdict:
    """Falsified / undefined / valid split of ``candidates``.

    Depths 1..k_max are tried in turn; the search stops at the first depth
    where the main proof objective is valid (or where nothing is undefined).
    """
    cands = sorted(set(candidates), key=lambda c: c.id)
    if not cands:
        raise ValueError("no candidates")
    if po_id is None:
        po_id = next((c.id for c in cands if c.origin == "main-PO"), None)
    falsified: dict = {}
    pending = cands
    valid: list = []
    undefined: list = list(cands)
    k = 0
    for k in range(1, k_max + 1):
        alive, unknown = _base_filter(sys, pending, k, oracle, falsified)
        valid, rest = _step_filter(sys, alive, k, oracle)
        undefined = rest + unknown
        pending = sorted(valid + undefined, key=lambda c: c.id)
        done = any(c.id == po_id for c in valid) if po_id is not None else not undefined
        if done or not pending:
            break
    return Verdict(falsified, set(undefined), set(valid), k)


def minimize(
    sys: TransitionSystem,
    valid: Iterable[Candidate],
    po: Candidate,
    k: int,
    oracle,
) -> list[Candidate]:
    """Greedy removal, in id order, of lemmas not needed for k-induction."""
    keep = sorted(set(valid) | {po}, key=lambda c: c.id)
    for lemma in list(keep):
        if lemma.id == po.id:
            continue
        trial = [c for c in keep if c.id != lemma.id]
        try:
            ok = step_check(sys, mk_and(*[c.formula for c in trial]), k, oracle) is None
        except (EngineUnknown, OracleError):
            ok = False
        if ok:
            keep = trial
    return keep


def conjunction(cands: Iterable[Candidate]) -> Formula:
    return mk_and(*[c.formula for c in sorted(cands, key=lambda c: c.id)])


def only_states(sys: TransitionSystem, f: Formula) -> bool:
    return free_vars(f) <= set(sys.states)
