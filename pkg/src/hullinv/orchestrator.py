"""The proof loop: bounds, preimages, hulls, candidate checking, minimization."""

from __future__ import annotations

import json
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import TextIO

from . import __version__
from .backward import GrayRegion, accumulate, first_preimage, is_fixpoint, next_preimage
from .frontend import parse_formula
from .hullgen import GeneratorState, extract_candidates, hullification, ich_fixpoint, label
from .intervals import bounds_to_candidates, infer_bounds
from .kind import Candidate, EngineUnknown, Trace, base_check, bmc, minimize, partition, step_check
from .logic.formula import Formula, mk_and
from .logic.printer import to_str
from .qe import QEResourceLimit
from .smt import make_oracle
from .smt.base import OracleError
from .system import TransitionSystem

log = logging.getLogger(__name__)

SCHEMA = "hullinv-proof-log/1"
CERT_SCHEMA = "hullinv-certificate/1"

VALID, FALSIFIED, UNKNOWN = "valid", "falsified", "unknown"


@dataclass
class RunConfig:
    max_k: int = 10
    max_preimages: int = 10
    ech: bool = True
    ich: bool = True
    intervals: bool = True
    trust_assumes: bool = False
    solver: str | None = None
    timeout: float | None = 10.0
    budget: int = 256
    max_hulls: int = 256
    parallel: bool = False
    preimage_fixpoint: bool = False
    dump_preimages: TextIO | None = None
    dump_hulls: TextIO | None = None

    def __post_init__(self):
        if self.max_k < 1:
            raise ValueError("max_k must be at least 1")
        if self.max_preimages < 1:
            raise ValueError("max_preimages must be at least 1")


@dataclass
class ProofResult:
    status: str
    k: int = 0
    lemmas: list = field(default_factory=list)
    invariants: list = field(default_factory=list)  # confirmed bounds and assumptions
    trusted: list = field(default_factory=list)
    trace: Trace | None = None
    reason: str = ""
    stats: dict = field(default_factory=dict)
    cert_k: int = 0

    def certificate(self, sys: TransitionSystem) -> dict:
        return {
            "schema": CERT_SCHEMA,
            "system": sys.name,
            "k": max(self.k, self.cert_k),
            "property": to_str(sys.prop),
            "lemmas": [to_str(f) for f in self.lemmas],
            "invariants": [to_str(f) for f in self.invariants],
            "trusted": [to_str(f) for f in self.trusted],
        }


class _Stats:
    def __init__(self):
        self.t0 = time.perf_counter()
        self.data = {
            "preimages": 0,
            "gray_polyhedra": 0,
            "ech_hulls": 0,
            "ich_hulls": 0,
            "candidates_checked": 0,
            "oracle_queries": 0,
            "oracle_unknowns": 0,
            "qe_fallback": False,
        }

    def finish(self, oracles, gen: GeneratorState | None) -> dict:
        d = dict(self.data)
        d["oracle_queries"] = sum(o.queries for o in oracles)
        d["oracle_unknowns"] = sum(o.unknowns for o in oracles)
        if gen is not None:
            d.update(gen.counters())
        d["wall_time"] = round(time.perf_counter() - self.t0, 4)
        return d


class _Ids:
    def __init__(self, start: int = 1):
        self.next = start

    def __call__(self) -> int:
        self.next += 1
        return self.next - 1


def run(sys: TransitionSystem, config: RunConfig | None = None, oracle=None) -> ProofResult:
    config = config or RunConfig()
    own = oracle is None
    oracle = oracle or make_oracle(config.solver, config.timeout)
    try:
        return _Run(sys, config, oracle).go()
    finally:
        if own:
            oracle.close()


class _Run:
    def __init__(self, sys: TransitionSystem, config: RunConfig, oracle):
        self.sys = sys
        self.cfg = config
        self.oracle = oracle
        self.oracles = [oracle]
        self.stats = _Stats()
        self.gen: GeneratorState | None = None
        self.ids = _Ids(1)

    def _aux_oracle(self):
        o = make_oracle(self.cfg.solver, self.cfg.timeout)
        self.oracles.append(o)
        return o

    def _done(self, res: ProofResult) -> ProofResult:
        res.stats = self.stats.finish(self.oracles, self.gen)
        for o in self.oracles[1:]:
            o.close()
        return res

    # -- phase 1: bounds and assumptions ---------------------------------------

    def _confirm_invariants(self) -> tuple[TransitionSystem, list, int]:
        sys, cfg = self.sys, self.cfg
        trusted = list(sys.assumes) if cfg.trust_assumes else []
        base = sys.with_(assumes=tuple(trusted))
        cands: list[Candidate] = []
        if not cfg.trust_assumes:
            cands += [Candidate(self.ids(), a, "assume") for a in sys.assumes]
        if cfg.intervals:
            env = infer_bounds(base)
            log.info("interval bounds: %s", env)
            bc = bounds_to_candidates(env, sys.sorts, first_id=self.ids.next)
            self.ids.next += len(bc)
            cands += bc
        if not cands:
            return base, [], 0
        try:
            v = partition(base, cands, cfg.max_k, self.oracle)
        except (EngineUnknown, OracleError) as e:
            log.warning("invariant confirmation failed: %s", e)
            return base, [], 0
        confirmed = [c.formula for c in sorted(v.valid, key=lambda c: c.id)]
        self.stats.data["candidates_checked"] += len(cands)
        return base.with_(assumes=tuple(trusted + confirmed)), confirmed, v.k if confirmed else 0

    # -- main loop ----------------------------------------------------------------

    def go(self) -> ProofResult:
        cfg = self.cfg
        trusted = list(self.sys.assumes) if cfg.trust_assumes else []
        base_sys = self.sys.with_(assumes=tuple(trusted))
        try:
            tr = bmc(base_sys, self.sys.prop, cfg.max_k + 1, self.oracle)
        except EngineUnknown as e:
            tr = None
            log.warning("bmc inconclusive: %s", e)
        if tr is not None:
            return self._done(ProofResult(FALSIFIED, k=len(tr), trace=tr, trusted=trusted))

        sys, invs, inv_k = self._confirm_invariants()
        inv_formula = mk_and(*invs)
        po = Candidate(0, sys.prop, "main-PO")
        carried: dict[Formula, Candidate] = {}
        discarded: set = set()
        region = GrayRegion()
        prev: list | None = None
        pool = ThreadPoolExecutor(max_workers=3) if cfg.parallel else None
        pending = None
        try:
            for i in range(1, cfg.max_preimages + 1):
                try:
                    if pending is not None:
                        pre = pending.result()
                    else:
                        pre = self._preimage(sys, inv_formula, prev, self.oracle)
                except QEResourceLimit as e:
                    log.warning("preimage %d: %s; continuing with k-induction only", i, e)
                    self.stats.data["qe_fallback"] = True
                    res = self._check(sys, po, carried, discarded, invs, inv_k, trusted)
                    if res is not None:
                        return self._done(res)
                    return self._done(ProofResult(UNKNOWN, reason=f"quantifier elimination: {e}", trusted=trusted))
                pending = None
                self.stats.data["preimages"] = i
                self._dump_preimage(i, pre)
                if i == 1 and not pre:
                    res = self._check(sys, po, carried, discarded, invs, inv_k, trusted)
                    if res is not None:
                        return self._done(res)
                stop = cfg.preimage_fixpoint and i > 1 and is_fixpoint(region, pre, self.oracle)
                region = accumulate(region, pre, self.oracle)
                self.stats.data["gray_polyhedra"] = len(region.union)
                if pool is not None and i < cfg.max_preimages and pre:
                    aux = self._aux_oracle()
                    pending = pool.submit(self._preimage, sys, inv_formula, pre, aux)
                for atom in self._hull_candidates(region, pool):
                    if atom.negation in carried or atom.negation in discarded:
                        continue
                    carried[atom.negation] = Candidate(self.ids(), atom.negation, "hull-atom")
                res = self._check(sys, po, carried, discarded, invs, inv_k, trusted)
                if res is not None:
                    return self._done(res)
                if not pre or stop:
                    break
                prev = pre
        finally:
            if pool is not None:
                pool.shutdown(wait=True, cancel_futures=True)
        return self._done(ProofResult(UNKNOWN, reason="preimage budget exhausted", invariants=invs, trusted=trusted))

    def _preimage(self, sys, invs, prev, oracle):
        if prev is None:
            return first_preimage(sys, invs, oracle, self.cfg.budget)
        return next_preimage(sys, invs, prev, oracle, self.cfg.budget)

    def _hull_candidates(self, region: GrayRegion, pool):
        cfg = self.cfg
        polys = region.indexed()
        hulls: dict = {}
        ich: list = []

        def ech_job(oracle):
            self.gen = self.gen or GeneratorState(record=False)
            out, _ = hullification(polys, self.gen, oracle, limit=cfg.max_hulls)
            return out

        if pool is not None and cfg.ech and cfg.ich:
            f1 = pool.submit(ech_job, self._aux_oracle())
            f2 = pool.submit(ich_fixpoint, list(polys.values()), self._aux_oracle())
            hulls, ich = f1.result(), f2.result()
        else:
            if cfg.ech:
                hulls = ech_job(self.oracle)
            if cfg.ich:
                ich = ich_fixpoint(list(polys.values()), self.oracle)
        self.stats.data["ech_hulls"] = len(hulls)
        self.stats.data["ich_hulls"] = len(ich)
        if not cfg.ech and not cfg.ich:
            hulls = {frozenset([i]): p for i, p in polys.items()}
        self._dump_hulls(hulls, ich)
        return extract_candidates(hulls) + extract_candidates(ich)

    def _check(self, sys, po, carried, discarded, invs, inv_k, trusted) -> ProofResult | None:
        cands = [po] + list(carried.values())
        self.stats.data["candidates_checked"] += len(cands)
        try:
            v = partition(sys, cands, self.cfg.max_k, self.oracle, po_id=po.id)
        except (EngineUnknown, OracleError) as e:
            log.warning("partition failed: %s", e)
            return None
        for c in v.falsified:
            discarded.add(c.formula)
            carried.pop(c.formula, None)
        if po in v.falsified:
            tr = v.falsified[po]
            return ProofResult(FALSIFIED, k=len(tr), trace=tr, invariants=invs, trusted=trusted)
        if po not in v.valid:
            return None
        kept = minimize(sys, v.valid, po, v.k, self.oracle)
        lemmas = [c.formula for c in kept if c.id != po.id]
        return ProofResult(VALID, k=v.k, lemmas=lemmas, invariants=invs, trusted=trusted, cert_k=inv_k)

    # -- dumps ------------------------------------------------------------------------

    def _dump_preimage(self, i: int, pre) -> None:
        out = self.cfg.dump_preimages
        if out is None:
            return
        out.write(f"# preimage {i}\n")
        for p in pre:
            out.write(f"{p}\n")
        out.flush()

    def _dump_hulls(self, hulls, ich) -> None:
        out = self.cfg.dump_hulls
        if out is None:
            return
        out.write(f"# after preimage {self.stats.data['preimages']}\n")
        for s, h in sorted(hulls.items(), key=lambda kv: (len(kv[0]), sorted(kv[0]))):
            out.write(f"ech {label(s)}: {h}\n")
        for h in ich:
            out.write(f"ich: {h}\n")
        out.flush()


# ---------------------------------------------------------------------------
# logs and certificates


def to_json(result: ProofResult, sys: TransitionSystem) -> dict:
    d = {
        "schema": SCHEMA,
        "version": __version__,
        "system": sys.name,
        "status": result.status,
        "property": to_str(sys.prop),
        "statistics": result.stats,
    }
    if result.status == VALID:
        d["k"] = result.k
        d["lemmas"] = [to_str(f) for f in result.lemmas]
        d["invariants"] = [to_str(f) for f in result.invariants]
        d["certificate"] = result.certificate(sys)
    elif result.status == FALSIFIED:
        d["k"] = result.k
        d["trace"] = result.trace.to_json()
    else:
        d["reason"] = result.reason
    return d


def emit_log(result: ProofResult, sys: TransitionSystem, fmt: str = "text") -> str:
    if fmt == "json":
        return json.dumps(to_json(result, sys), indent=2)
    lines = [f"system {sys.name}: {result.status.upper()}"]
    if result.status == VALID:
        lines.append(f"k = {result.k}")
        lines.append(f"lemmas ({len(result.lemmas)}):")
        lines += [f"  {to_str(f)}" for f in result.lemmas]
        if result.invariants:
            lines.append(f"confirmed invariants ({len(result.invariants)}):")
            lines += [f"  {to_str(f)}" for f in result.invariants]
    elif result.status == FALSIFIED:
        lines.append(f"counterexample of {len(result.trace)} states:")
        for i, step in enumerate(result.trace.to_json()):
            state = ", ".join(f"{n} = {v}" for n, v in step["state"].items())
            inp = ", ".join(f"{n} = {v}" for n, v in step["input"].items())
            lines.append(f"  {i}: {state}" + (f"  | {inp}" if inp else ""))
    else:
        lines.append(f"reason: {result.reason}")
    stats = ", ".join(f"{k} = {v}" for k, v in result.stats.items())
    lines.append(f"statistics: {stats}")
    return "\n".join(lines)


@dataclass
class ReplayReport:
    base_ok: bool | None
    step_ok: bool | None
    k: int
    detail: str = ""

    @property
    def confirmed(self) -> bool:
        return bool(self.base_ok and self.step_ok)


def replay(sys: TransitionSystem, cert: dict, solver: str | None = None, timeout: float | None = 10.0) -> ReplayReport:
    """Re-check a certificate with a fresh oracle session."""
    if cert.get("schema") != CERT_SCHEMA:
        raise ValueError(f"unsupported certificate schema {cert.get('schema')!r}")
    k = int(cert["k"])
    trusted = [parse_formula(t, sys) for t in cert.get("trusted", [])]
    parts = [sys.prop] + [parse_formula(t, sys) for t in cert.get("lemmas", []) + cert.get("invariants", [])]
    target = mk_and(*parts)
    base = sys.with_(assumes=tuple(trusted))
    with make_oracle(solver, timeout) as o:
        try:
            tr = base_check(base, target, k, o)
            base_ok = tr is None
        except EngineUnknown as e:
            return ReplayReport(None, None, k, f"base check: {e}")
        try:
            step_ok = step_check(base, target, k, o) is None
        except EngineUnknown as e:
            return ReplayReport(base_ok, None, k, f"step check: {e}")
    return ReplayReport(base_ok, step_ok, k)

