"""Fail/repair lifecycle of a storage cluster running the cooperative code.

Each round knocks out exactly r nodes, regenerates them through
:func:`mbcr.codec.execute_repair`, checks the regenerated shares against
the pre-failure state and records the per-newcomer traffic next to the
theoretical lower bound.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from . import bounds
from .codec import CodeParams, NodeShare, all_collectors, encode, plan_repair, execute_repair, reconstruct
from .errors import CorruptionError, MBCRError, UnsupportedFailurePatternError

log = logging.getLogger(__name__)

REPORT_SCHEMA_VERSION = 1


@dataclass
class ClusterState:
    params: CodeParams
    shares: dict[int, NodeShare]
    reference: np.ndarray  # (S, B) stripes the cluster must serve
    round: int = 0
    seed: int | None = None

    @classmethod
    def fresh(cls, params: CodeParams, stripes: int = 1, seed: int | None = 0, data=None) -> ClusterState:
        rng = np.random.default_rng(seed)
        if data is None:
            data = rng.integers(0, params.field.order, size=(stripes, params.B))
        data = np.asarray(data).astype(params.field.dtype)
        return cls(params, encode(data, params), data, 0, seed)

    def snapshot(self) -> dict[int, NodeShare]:
        return {i: s.copy() for i, s in self.shares.items()}


@dataclass
class AuditResult:
    results: dict[tuple[int, ...], bool]
    errors: dict[tuple[int, ...], str] = dc_field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(self.results.values())

    @property
    def failures(self) -> list[tuple[int, ...]]:
        return [c for c, ok in self.results.items() if not ok]


def audit_collectors(state: ClusterState) -> AuditResult:
    """Reconstruct through every k-subset and compare with the reference data."""
    results, errors = {}, {}
    for c in all_collectors(state.params):
        try:
            ok = bool(np.array_equal(reconstruct(c, state.shares, state.params), state.reference))
        except MBCRError as exc:
            ok = False
            errors[c] = str(exc)
        results[c] = ok
    return AuditResult(results, errors)


@dataclass
class RoundRecord:
    round: int
    failed: tuple[int, ...]
    phase1: int
    phase2: int
    received: dict[int, int]  # per newcomer, per stripe
    audit_passed: bool

    def to_dict(self, stripes: int) -> dict:
        return {
            "round": self.round,
            "failed": list(self.failed),
            "phase1_packets": self.phase1,
            "phase2_packets": self.phase2,
            "total_packets": self.phase1 + self.phase2,
            "gamma_measured": {str(j): v for j, v in self.received.items()},
            "aggregate": {
                "phase1_packets": self.phase1 * stripes,
                "phase2_packets": self.phase2 * stripes,
                "total_packets": (self.phase1 + self.phase2) * stripes,
            },
            "audit_passed": self.audit_passed,
        }


@dataclass
class BandwidthReport:
    params: CodeParams
    stripes: int
    seed: int | None
    rounds: list[RoundRecord] = dc_field(default_factory=list)

    @property
    def gamma_bound(self) -> Fraction:
        p = self.params
        return bounds.mbcr_lower_bound(bounds.SystemParams(p.B, p.k, p.d, p.r, p.n))

    def ratios(self) -> list[Fraction]:
        return [Fraction(max(r.received.values()), 1) / self.gamma_bound for r in self.rounds]

    @property
    def all_optimal(self) -> bool:
        return all(q == 1 for q in self.ratios()) and all(
            len(set(r.received.values())) == 1 for r in self.rounds
        )

    @property
    def all_audits_passed(self) -> bool:
        return all(r.audit_passed for r in self.rounds)

    @property
    def ok(self) -> bool:
        return self.all_optimal and self.all_audits_passed

    def to_dict(self) -> dict:
        p = self.params
        bound = self.gamma_bound
        total1 = sum(r.phase1 for r in self.rounds)
        total2 = sum(r.phase2 for r in self.rounds)
        ratios = self.ratios()
        worst = max(ratios) if ratios else None
        return {
            "schema": REPORT_SCHEMA_VERSION,
            "params": {
                "n": p.n, "k": p.k, "d": p.d, "r": p.r,
                "B": p.B, "alpha": p.alpha, "beta1": p.beta1, "beta2": p.beta2, "gamma": p.gamma,
                "field_degree": p.field.degree, "field_poly": p.field.poly,
                "generator": p.generator_spec.kind, "eval_points": list(p.generator_spec.eval_points),
                "stripes": self.stripes,
            },
            "seed": self.seed,
            "rounds": [r.to_dict(self.stripes) for r in self.rounds],
            "totals": {
                "rounds": len(self.rounds),
                "phase1_packets": total1,
                "phase2_packets": total2,
                "total_packets": total1 + total2,
                "aggregate_packets": (total1 + total2) * self.stripes,
                "audits_passed": self.all_audits_passed,
            },
            "bound": {"exact": str(bound), "decimal": float(bound)},
            "ratio": None if worst is None else {"exact": str(worst), "decimal": float(worst)},
            "all_optimal": self.all_optimal,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def uniform_failures(params: CodeParams, rng: np.random.Generator):
    while True:
        yield tuple(sorted(int(x) for x in rng.choice(np.arange(1, params.n + 1), size=params.r, replace=False)))


def run_round(state: ClusterState, failed: Sequence[int], audit: bool = True) -> RoundRecord:
    params = state.params
    failed = tuple(sorted(failed))
    if len(failed) != params.r or len(set(failed)) != params.r:
        raise UnsupportedFailurePatternError(
            f"round {state.round + 1}: expected exactly r={params.r} distinct failures, got {list(failed)}"
        )
    before = state.snapshot()
    plan = plan_repair(failed, params)
    survivors = {i: state.shares[i] for i in plan.survivors}
    rebuilt, transcript = execute_repair(plan, survivors)

    mapped = [t.entry for t in transcript.transfers]
    if sorted(map(repr, mapped)) != sorted(map(repr, plan.entries)):
        raise CorruptionError(f"round {state.round + 1}: transcript does not match the repair plan")
    for j in failed:
        if rebuilt[j] != before[j]:
            raise CorruptionError(f"round {state.round + 1}: node {j} was not restored exactly")
        state.shares[j] = rebuilt[j]
    state.round += 1
    passed = audit_collectors(state).passed if audit else True
    rec = RoundRecord(state.round, failed, transcript.count(1), transcript.count(2), transcript.per_newcomer(), passed)
    log.debug("round %d: failed=%s received=%s", rec.round, failed, rec.received)
    return rec


def run_simulation(
    params: CodeParams,
    rounds: int | None = None,
    schedule: Iterable[Iterable[int]] | None = None,
    seed: int | None = 0,
    stripes: int = 1,
    audit: bool = True,
) -> BandwidthReport:
    """Run fail-and-repair rounds; uniform random r-sets unless a schedule is given.

    With a schedule and no round count, every scheduled set is used once.
    """
    state = ClusterState.fresh(params, stripes=stripes, seed=seed)
    rng = np.random.default_rng(np.random.SeedSequence(seed).spawn(1)[0])
    if schedule is not None:
        sets = [tuple(s) for s in schedule]
        if rounds is None:
            rounds = len(sets)
        source = (sets[i % len(sets)] for i in range(rounds)) if sets else iter(())
    else:
        source = uniform_failures(params, rng)
    report = BandwidthReport(params, stripes, seed)
    for _, failed in zip(range(rounds or 0), source):
        report.rounds.append(run_round(state, failed, audit))
    return report
