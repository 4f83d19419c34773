"""Exact minimum-bandwidth cooperative regenerating codes with d = k, n = d + r.

A stripe of B = k*n packets is cut into n groups x_1..x_n of k packets.
Node i keeps group x_i verbatim plus, for every offset t in 1..n-1, the
single parity packet x_{i (+) t} . v_t, where (+) is cyclic addition on
1..n and v_t is column t of a k x (n-1) MDS generator.  Node m therefore
holds exactly one dot product of each foreign group g, taken against
column ``offset_of(g, m)``.

All payloads are numpy arrays whose last axis runs over stripes, so a
single call encodes, decodes or repairs a whole file.  A one-stripe
payload is just an array of length 1.

Repair of r simultaneous failures runs in two phases:

* phase 1, from each survivor i to each newcomer j: the parity of group i
  that j must keep (computed from x_i) and the stored parity of group j
  (``1a`` and ``1b`` below).  Two packets per link.
* phase 2, between newcomers: after solving the k x k system for x_j,
  newcomer j hands every other newcomer j' the parity of group j that j'
  must keep.  One packet per link.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from functools import cached_property
from itertools import combinations
from typing import Iterable, Mapping

import numpy as np

from .errors import (
    CorruptionError,
    InsufficientSharesError,
    ParameterError,
    SingularMatrixError,
    UnsupportedFailurePatternError,
)
from .gf import GF2, Field, get_field
from .matrix import FieldMatrix, apply_to_arrays, inverse
from .mds import BUILTIN, GeneratorSpec, build_generator


@dataclass(frozen=True)
class CodeParams:
    n: int
    k: int
    d: int
    r: int
    field: Field
    generator_spec: GeneratorSpec

    def __post_init__(self):
        if self.k < 1 or self.r < 1:
            raise ParameterError(f"need k >= 1 and r >= 1, got k={self.k}, r={self.r}")
        if self.d != self.k:
            raise ParameterError(f"this code family requires d = k (got d={self.d}, k={self.k})")
        if self.n != self.d + self.r:
            raise ParameterError(f"this code family requires n = d + r (got n={self.n}, d+r={self.d + self.r})")
        g = self.generator_spec
        if (g.k, g.length) != (self.k, self.n - 1):
            raise ParameterError(
                f"generator is {g.k}x{g.length}, code needs {self.k}x{self.n - 1}"
            )
        if g.field != self.field:
            raise ParameterError("generator and code use different fields")

    @classmethod
    def family(
        cls,
        k: int,
        r: int,
        field: Field | None = None,
        generator: str = "vandermonde",
        eval_points: Iterable[int] = (),
    ) -> CodeParams:
        """Parameters for the member with d = k, n = k + r."""
        if generator == BUILTIN:
            field = field or GF2
            spec = GeneratorSpec(BUILTIN, k, k + r - 1, field)
        else:
            field = field or get_field(8)
            spec = GeneratorSpec.vandermonde(k, k + r - 1, field, tuple(eval_points))
        return cls(k + r, k, k, r, field, spec)

    @property
    def B(self) -> int:
        return self.k * self.n

    @property
    def alpha(self) -> int:
        return self.k + self.n - 1

    beta1 = 2
    beta2 = 1

    @property
    def gamma(self) -> int:
        return self.d * self.beta1 + (self.r - 1) * self.beta2

    @cached_property
    def generator(self) -> FieldMatrix:
        return build_generator(self.generator_spec)

    def column(self, t: int) -> tuple[int, ...]:
        """Generator column v_t, 1-based."""
        if not 1 <= t <= self.n - 1:
            raise ParameterError(f"generator column {t} out of range 1..{self.n - 1}")
        return self.generator.column(t - 1).elements

    def nodes(self) -> range:
        return range(1, self.n + 1)


def mod_n_add(x: int, y: int, n: int) -> int:
    """Cyclic addition on labels 1..n: x + y, wrapped once past n."""
    if not 1 <= x <= n or not 1 <= y <= n - 1:
        raise ParameterError(f"mod_n_add needs 1 <= x <= {n}, 1 <= y <= {n - 1}; got x={x}, y={y}")
    s = x + y
    return s if s <= n else s - n


def offset_of(group: int, holder: int, n: int) -> int:
    """The offset t with holder (+) t == group."""
    if not (1 <= group <= n and 1 <= holder <= n):
        raise ParameterError(f"node labels must lie in 1..{n}")
    if group == holder:
        raise ParameterError(f"node {holder} stores group {group} systematically, not as parity")
    return (group - holder) % n


@dataclass(eq=False)
class NodeShare:
    """Content of one node: its own group plus n-1 parities.

    ``systematic`` has shape (k, S) and ``parity`` shape (n-1, S) where row
    t-1 holds the parity at offset t and S is the stripe count.
    """

    node_id: int
    systematic: np.ndarray
    parity: np.ndarray

    def parity_at(self, t: int) -> np.ndarray:
        return self.parity[t - 1]

    @property
    def stripes(self) -> int:
        return self.systematic.shape[1]

    def packets(self) -> np.ndarray:
        """All alpha stored packets in storage order, shape (alpha, S)."""
        return np.concatenate([self.systematic, self.parity], axis=0)

    def copy(self) -> NodeShare:
        return NodeShare(self.node_id, self.systematic.copy(), self.parity.copy())

    def __eq__(self, other) -> bool:
        if not isinstance(other, NodeShare):
            return NotImplemented
        return (
            self.node_id == other.node_id
            and np.array_equal(self.systematic, other.systematic)
            and np.array_equal(self.parity, other.parity)
        )

    def __repr__(self) -> str:
        return f"NodeShare(node={self.node_id}, alpha={self.parity.shape[0] + self.systematic.shape[0]}, stripes={self.stripes})"


def as_stripes(data, params: CodeParams) -> np.ndarray:
    """Coerce one stripe (length B) or a batch (S, B) into a (S, B) array."""
    arr = np.asarray(data)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.ndim != 2 or arr.shape[1] != params.B:
        raise ParameterError(f"stripe length must be B = {params.B}, got shape {np.shape(data)}")
    if arr.size and (arr.min() < 0 or arr.max() >= params.field.order):
        raise ParameterError(f"stripe holds values outside GF(2^{params.field.degree})")
    return arr.astype(params.field.dtype)


def split_stripe(stripe, params: CodeParams) -> np.ndarray:
    """Groups x_1..x_n as an (n, k, S) array; index 0 is group 1."""
    s = as_stripes(stripe, params)
    return np.ascontiguousarray(s.reshape(s.shape[0], params.n, params.k).transpose(1, 2, 0))


def join_groups(groups: np.ndarray) -> np.ndarray:
    """Inverse of :func:`split_stripe`: (n, k, S) -> (S, n*k)."""
    n, k, s = groups.shape
    return np.ascontiguousarray(groups.transpose(2, 0, 1).reshape(s, n * k))


def group_dot(params: CodeParams, group: np.ndarray, t: int) -> np.ndarray:
    """x . v_t for a (k, S) group payload."""
    return params.field.combine(params.column(t), list(group))


def encode_node(i: int, groups: np.ndarray, params: CodeParams) -> NodeShare:
    n = params.n
    if groups.shape[:2] != (n, params.k):
        raise ParameterError(f"expected {n} groups of {params.k} packets, got shape {groups.shape}")
    if not 1 <= i <= n:
        raise ParameterError(f"node id {i} out of range 1..{n}")
    parity = np.stack([group_dot(params, groups[mod_n_add(i, t, n) - 1], t) for t in range(1, n)])
    return NodeShare(i, groups[i - 1].copy(), parity)


def encode(data, params: CodeParams) -> dict[int, NodeShare]:
    """Encode one stripe or a batch of stripes into all n node shares."""
    groups = split_stripe(data, params)
    return {i: encode_node(i, groups, params) for i in params.nodes()}


def _solve_group(params: CodeParams, columns: list[int], values: list[np.ndarray]) -> np.ndarray:
    """Recover a group x from the dot products x . v_t for the given columns."""
    a = FieldMatrix(params.field, tuple(params.column(t) for t in columns))
    try:
        a_inv = inverse(a)
    except SingularMatrixError as exc:
        raise CorruptionError(f"recovery system for columns {columns} is singular") from exc
    return np.stack(apply_to_arrays(a_inv, values))


def reconstruct(collector: Iterable[int], shares: Mapping[int, NodeShare], params: CodeParams) -> np.ndarray:
    """Rebuild the (S, B) stripe batch from the shares of any k nodes."""
    collector = sorted(set(collector))
    if len(collector) < params.k:
        raise InsufficientSharesError(f"need {params.k} distinct nodes, got {len(collector)}")
    if len(collector) != params.k:
        raise ParameterError(f"collector must contain exactly k={params.k} nodes, got {len(collector)}")
    for m in collector:
        if m not in shares:
            raise InsufficientSharesError(f"no share supplied for node {m}")
        if not 1 <= m <= params.n:
            raise ParameterError(f"node id {m} out of range 1..{params.n}")
        sh = shares[m]
        if sh.node_id != m or sh.systematic.shape[0] != params.k or sh.parity.shape[0] != params.n - 1:
            raise CorruptionError(f"share for node {m} does not fit the code layout")
    stripes = shares[collector[0]].stripes
    if any(shares[m].stripes != stripes for m in collector):
        raise CorruptionError("shares disagree on stripe count")

    groups = np.empty((params.n, params.k, stripes), dtype=params.field.dtype)
    for g in params.nodes():
        if g in collector:
            groups[g - 1] = shares[g].systematic
            continue
        cols = [offset_of(g, m, params.n) for m in collector]
        vals = [shares[m].parity_at(t) for m, t in zip(collector, cols)]
        groups[g - 1] = _solve_group(params, cols, vals)
    return join_groups(groups)


@dataclass(frozen=True)
class PlanEntry:
    """One scheduled packet: ``sender`` ships x_group . v_column to ``receiver``.

    ``step`` is ``"1a"`` (parity of the sender's group for the receiver to
    keep), ``"1b"`` (stored parity of the receiver's group) or ``"2"``
    (newcomer exchange).
    """

    phase: int
    step: str
    sender: int
    receiver: int
    group: int
    column: int


@dataclass(frozen=True)
class RepairPlan:
    params: CodeParams
    failed: tuple[int, ...]
    survivors: tuple[int, ...]
    entries: tuple[PlanEntry, ...]

    def phase(self, p: int) -> list[PlanEntry]:
        return [e for e in self.entries if e.phase == p]

    def received_by(self, node: int) -> list[PlanEntry]:
        return [e for e in self.entries if e.receiver == node]


def plan_repair(failed: Iterable[int], params: CodeParams) -> RepairPlan:
    failed = tuple(sorted(set(failed)))
    n = params.n
    if any(not 1 <= j <= n for j in failed):
        raise ParameterError(f"failed node ids must lie in 1..{n}: {failed}")
    if len(failed) != params.r:
        raise UnsupportedFailurePatternError(
            f"this code repairs exactly r={params.r} simultaneous failures, got {len(failed)}"
        )
    survivors = tuple(i for i in params.nodes() if i not in failed)
    entries = []
    for j in failed:
        for i in survivors:
            entries.append(PlanEntry(1, "1a", i, j, i, offset_of(i, j, n)))
            entries.append(PlanEntry(1, "1b", i, j, j, offset_of(j, i, n)))
    for j in failed:
        for j2 in failed:
            if j2 != j:
                entries.append(PlanEntry(2, "2", j, j2, j, offset_of(j, j2, n)))
    return RepairPlan(params, failed, survivors, tuple(entries))


@dataclass(frozen=True)
class Transfer:
    entry: PlanEntry
    payload: np.ndarray

    @property
    def sender(self) -> int:
        return self.entry.sender

    @property
    def receiver(self) -> int:
        return self.entry.receiver

    @property
    def phase(self) -> int:
        return self.entry.phase


@dataclass
class RepairTranscript:
    """Every packet moved during one repair, in execution order.

    Each transfer carries a vector payload covering all stripes at once,
    so counts here are per stripe.
    """

    failed: tuple[int, ...]
    transfers: list[Transfer] = dc_field(default_factory=list)

    def count(self, phase: int | None = None) -> int:
        return sum(1 for t in self.transfers if phase is None or t.phase == phase)

    def received(self, node: int) -> int:
        return sum(1 for t in self.transfers if t.receiver == node)

    def per_newcomer(self) -> dict[int, int]:
        return {j: self.received(j) for j in self.failed}


def execute_repair(
    plan: RepairPlan, shares: Mapping[int, NodeShare]
) -> tuple[dict[int, NodeShare], RepairTranscript]:
    """Run the plan against the survivors' shares.

    Newcomers only use packets that arrive through the transcript.
    """
    params = plan.params
    n = params.n
    missing = [i for i in plan.survivors if i not in shares]
    if missing:
        raise UnsupportedFailurePatternError(f"repair needs every survivor; missing shares for nodes {missing}")
    transcript = RepairTranscript(plan.failed)
    inbox: dict[int, list[Transfer]] = {j: [] for j in plan.failed}

    def send(entry: PlanEntry, payload: np.ndarray) -> None:
        t = Transfer(entry, payload)
        transcript.transfers.append(t)
        inbox[entry.receiver].append(t)

    for e in plan.phase(1):
        src = shares[e.sender]
        if e.step == "1a":
            payload = group_dot(params, src.systematic, e.column)
        else:
            payload = src.parity_at(offset_of(e.group, e.sender, n)).copy()
        send(e, payload)

    recovered = {}
    for j in plan.failed:
        got = [t for t in inbox[j] if t.entry.step == "1b"]
        recovered[j] = _solve_group(params, [t.entry.column for t in got], [t.payload for t in got])

    for e in plan.phase(2):
        send(e, group_dot(params, recovered[e.sender], e.column))

    rebuilt = {}
    for j in plan.failed:
        parity = [None] * (n - 1)
        for t in inbox[j]:
            if t.entry.step in ("1a", "2"):
                parity[offset_of(t.entry.group, j, n) - 1] = t.payload
        if any(p is None for p in parity):
            raise CorruptionError(f"newcomer {j} is missing parities after repair")
        rebuilt[j] = NodeShare(j, recovered[j], np.stack(parity))
    return rebuilt, transcript


def repair(failed: Iterable[int], shares: Mapping[int, NodeShare], params: CodeParams):
    """Plan and execute a cooperative repair in one call."""
    return execute_repair(plan_repair(failed, params), shares)


def all_collectors(params: CodeParams):
    return combinations(params.nodes(), params.k)


def all_failure_sets(params: CodeParams):
    return combinations(params.nodes(), params.r)
