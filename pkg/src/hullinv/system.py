"""Symbolic transition systems and unrolling helpers."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Mapping

from .logic.formula import TRUE, Formula, Sort, free_vars, mk_and, rename


def primed(name: str) -> str:
    return name + "'"


def at(name: str, i: int) -> str:
    return f"{name}@{i}"


@dataclass(frozen=True)
class TransitionSystem:
    name: str
    states: dict[str, Sort]
    inputs: dict[str, Sort]
    init: Formula = TRUE
    trans: Formula = TRUE
    prop: Formula = TRUE
    assumes: tuple = ()
    consts: dict[str, tuple[Sort, Fraction]] = field(default_factory=dict)

    @property
    def sorts(self) -> dict[str, Sort]:
        """Sorts of current-state, primed and input variables."""
        out = dict(self.states)
        out.update(self.inputs)
        out.update({primed(n): s for n, s in self.states.items()})
        return out

    def state_names(self) -> list[str]:
        return list(self.states)

    def prime(self, f: Formula) -> Formula:
        return rename(f, {n: primed(n) for n in self.states})

    def with_(self, **kw) -> "TransitionSystem":
        return replace(self, **kw)

    def step_map(self, i: int) -> dict[str, str]:
        """Renaming of T's variables for the transition s_i -> s_{i+1}."""
        m = {n: at(n, i) for n in self.states}
        m.update({primed(n): at(n, i + 1) for n in self.states})
        m.update({n: at(n, i) for n in self.inputs})
        return m

    def state_at(self, f: Formula, i: int) -> Formula:
        return rename(f, {n: at(n, i) for n in self.states})

    def trans_at(self, i: int) -> Formula:
        return rename(self.trans, self.step_map(i))

    def unrolled_sorts(self, k: int) -> dict[str, Sort]:
        """Sorts for states s_0..s_k and inputs i_0..i_{k-1}."""
        out: dict[str, Sort] = {}
        for i in range(k + 1):
            for n, s in self.states.items():
                out[at(n, i)] = s
        for i in range(max(k, 0)):
            for n, s in self.inputs.items():
                out[at(n, i)] = s
        return out

    def numeric_constants(self) -> set[Fraction]:
        from .logic.formula import constants_of

        out: set[Fraction] = set()
        for f in (self.init, self.trans, self.prop, *self.assumes):
            out |= constants_of(f)
        out.update(v for _, v in self.consts.values())
        return out

    def check_scopes(self) -> list[str]:
        """Names used out of scope (used by validation)."""
        bad = []
        allowed_state = set(self.states)
        for f in (self.init, self.prop, *self.assumes):
            bad.extend(sorted(free_vars(f) - allowed_state))
        return bad


def conj(fs) -> Formula:
    return mk_and(*list(fs))


def split_model(model: Mapping[str, object], sys: TransitionSystem, k: int):
    """Decode an unrolled model into per-step state and input valuations."""
    states = []
    inputs = []
    for i in range(k + 1):
        states.append({n: model.get(at(n, i), _default(s)) for n, s in sys.states.items()})
    for i in range(k):
        inputs.append({n: model.get(at(n, i), _default(s)) for n, s in sys.inputs.items()})
    return states, inputs


def _default(s: Sort):
    return False if s is Sort.BOOL else Fraction(0)
