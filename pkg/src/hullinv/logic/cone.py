"""Cone of influence of a formula through a transition relation."""

from __future__ import annotations

from .formula import Formula, conjuncts, free_vars


def dependencies(sys) -> dict[str, set[str]]:
    """State variables each primed variable's constraints mention (unprimed names)."""
    states = set(sys.states)
    deps: dict[str, set[str]] = {v: set() for v in states}
    for c in conjuncts(sys.trans):
        names = free_vars(c)
        primed = {n[:-1] for n in names if n.endswith("'") and n[:-1] in states}
        if not primed:
            continue
        mentioned = {n for n in names if n in states} | primed
        for v in primed:
            deps[v] |= mentioned
    return deps


def cone_of_influence(sys, f: Formula) -> set[str]:
    states = set(sys.states)
    deps = dependencies(sys)
    cone = free_vars(f) & states
    todo = list(cone)
    cone = set(cone)
    while todo:
        v = todo.pop()
        for w in deps.get(v, ()):
            if w not in cone:
                cone.add(w)
                todo.append(w)
    return cone
