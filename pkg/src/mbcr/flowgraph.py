"""Information flow graphs for cooperative repair, with exact max-flow and staged cuts.

Vertices are named ``stage:kind:index``:

* ``-1:S:0``           the source
* ``0:out:i``          initial storage node i
* ``t:in:i``, ``t:mid:i``, ``t:out:i``   newcomer i repaired in stage t
* ``s:DC:0``           the data collector, s = number of repair stages

Infinite capacities are represented by ``None`` on edges.  Max-flow
replaces them by (sum of finite capacities + 1), scales all capacities to
integers by the LCM of denominators and runs BFS augmenting paths.
"""

from __future__ import annotations

import math
from collections import defaultdict, deque
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

from .bounds import staged_cut_terms, validate_cut_type
from .errors import ParameterError

INF = math.inf
SOURCE = "-1:S:0"


@dataclass(frozen=True)
class FlowParams:
    n: int
    k: int
    d: int
    r: int
    alpha: Fraction
    beta1: Fraction
    beta2: Fraction

    def __post_init__(self):
        for name in ("alpha", "beta1", "beta2"):
            v = Fraction(getattr(self, name))
            if v < 0:
                raise ParameterError(f"{name} must be non-negative")
            object.__setattr__(self, name, v)
        if not (1 <= self.k <= self.n and self.r >= 1 and self.d >= 1):
            raise ParameterError(f"invalid (n, k, d, r) = {(self.n, self.k, self.d, self.r)}")
        if self.d > self.n - self.r:
            raise ParameterError(f"d={self.d} helpers unavailable when only n-r={self.n - self.r} nodes survive")

    @classmethod
    def mbcr(cls, k: int, r: int, d: int | None = None, n: int | None = None) -> FlowParams:
        """The operating point of the explicit code: alpha = 2d+r-1, beta = (2, 1)."""
        d = k if d is None else d
        n = d + r if n is None else n
        return cls(n, k, d, r, Fraction(2 * d + r - 1), Fraction(2), Fraction(1))


@dataclass(frozen=True)
class RepairStage:
    """Failed set of one stage and, per newcomer, the d helper node ids.

    Helpers are node ids; each refers to that node's most recent ``out``
    vertex before this stage.
    """

    failed: tuple[int, ...]
    helpers: dict[int, tuple[int, ...]] = dc_field(default_factory=dict, hash=False, compare=True)


@dataclass
class RepairHistory:
    stages: list[RepairStage] = dc_field(default_factory=list)

    def __len__(self) -> int:
        return len(self.stages)


HelperRule = Callable[[int, list[int], dict[int, int], int], list[int]]


def all_live_rule(newcomer: int, live: list[int], last_stage: dict[int, int], d: int) -> list[int]:
    """Lowest-numbered live nodes."""
    return sorted(live)[:d]


def most_recent_rule(newcomer: int, live: list[int], last_stage: dict[int, int], d: int) -> list[int]:
    """Prefer nodes repaired most recently (adversarial for staged cuts)."""
    return sorted(live, key=lambda i: (-last_stage[i], i))[:d]


def make_history(
    params: FlowParams, failed_sets: Iterable[Iterable[int]], rule: HelperRule = most_recent_rule
) -> RepairHistory:
    """Build a history whose helpers are picked by ``rule`` at each stage."""
    last = {i: 0 for i in range(1, params.n + 1)}
    stages = []
    for t, fs in enumerate(failed_sets, start=1):
        fs = tuple(sorted(fs))
        live = [i for i in last if i not in fs]
        helpers = {j: tuple(rule(j, live, last, params.d)) for j in fs}
        stages.append(RepairStage(fs, helpers))
        for j in fs:
            last[j] = t
    return RepairHistory(stages)


@dataclass(frozen=True)
class Edge:
    u: str
    v: str
    capacity: Fraction | None  # None means infinite
    kind: str = ""


@dataclass
class FlowGraph:
    params: FlowParams
    vertices: list[str]
    edges: list[Edge]
    dc: tuple[int, ...]
    dc_vertex: str
    latest: dict[int, int]  # node id -> stage of its live out vertex
    stages: int

    def out_vertex(self, node: int) -> str:
        return vertex(self.latest[node], "out", node)

    def without_edge(self, edge: Edge) -> FlowGraph:
        edges = list(self.edges)
        edges.remove(edge)
        return FlowGraph(self.params, self.vertices, edges, self.dc, self.dc_vertex, self.latest, self.stages)

    def edge_list(self) -> str:
        """Plain-text export: one ``from to capacity`` line per edge."""
        lines = []
        for e in self.edges:
            cap = "inf" if e.capacity is None else str(e.capacity)
            lines.append(f"{e.u} {e.v} {cap}")
        return "\n".join(lines) + "\n"


def vertex(stage: int, kind: str, index: int) -> str:
    return f"{stage}:{kind}:{index}"


def build_graph(params: FlowParams, history: RepairHistory, dc: Iterable[int]) -> FlowGraph:
    n, r, d = params.n, params.r, params.d
    dc = tuple(sorted(dc))
    if len(dc) != params.k or len(set(dc)) != params.k:
        raise ParameterError(f"data collector must name k={params.k} distinct nodes, got {dc}")
    if any(not 1 <= i <= n for i in dc):
        raise ParameterError(f"data collector nodes out of range 1..{n}: {dc}")

    vertices = [SOURCE]
    edges = []
    latest = {}
    for i in range(1, n + 1):
        v = vertex(0, "out", i)
        vertices.append(v)
        edges.append(Edge(SOURCE, v, params.alpha, "alpha"))
        latest[i] = 0

    for t, stage in enumerate(history.stages, start=1):
        failed = tuple(sorted(stage.failed))
        if len(failed) != r or len(set(failed)) != r:
            raise ParameterError(f"stage {t}: expected {r} distinct failed nodes, got {stage.failed}")
        if any(not 1 <= i <= n for i in failed):
            raise ParameterError(f"stage {t}: failed nodes out of range: {failed}")
        for i in failed:
            helpers = stage.helpers.get(i)
            if helpers is None:
                raise ParameterError(f"stage {t}: no helpers given for newcomer {i}")
            if len(helpers) != d or len(set(helpers)) != d:
                raise ParameterError(f"stage {t}: newcomer {i} needs {d} distinct helpers, got {helpers}")
            dead = [h for h in helpers if h in failed or not 1 <= h <= n]
            if dead:
                raise ParameterError(f"stage {t}: newcomer {i} uses helpers {dead} that are not alive")
        for i in failed:
            vertices += [vertex(t, "in", i), vertex(t, "mid", i), vertex(t, "out", i)]
            for h in stage.helpers[i]:
                edges.append(Edge(vertex(latest[h], "out", h), vertex(t, "in", i), params.beta1, "beta1"))
            edges.append(Edge(vertex(t, "in", i), vertex(t, "mid", i), None, "in-mid"))
            edges.append(Edge(vertex(t, "mid", i), vertex(t, "out", i), params.alpha, "alpha"))
        for i in failed:
            for j in failed:
                if i != j:
                    edges.append(Edge(vertex(t, "in", i), vertex(t, "mid", j), params.beta2, "beta2"))
        for i in failed:
            latest[i] = t

    s = len(history.stages)
    dcv = vertex(s, "DC", 0)
    vertices.append(dcv)
    for i in dc:
        edges.append(Edge(vertex(latest[i], "out", i), dcv, None, "dc"))
    return FlowGraph(params, vertices, edges, dc, dcv, latest, s)


@dataclass
class FlowResult:
    value: Fraction
    flow: dict[Edge, Fraction]


def _scaled_capacities(g: FlowGraph) -> tuple[list[int], int]:
    finite = [e.capacity for e in g.edges if e.capacity is not None]
    scale = math.lcm(*(c.denominator for c in finite)) if finite else 1
    big = sum(int(c * scale) for c in finite) + 1
    return [big if e.capacity is None else int(e.capacity * scale) for e in g.edges], scale


def max_flow_detail(g: FlowGraph) -> FlowResult:
    """Edmonds-Karp on integer-scaled capacities; returns value and edge flows."""
    caps, scale = _scaled_capacities(g)
    index = {v: i for i, v in enumerate(g.vertices)}
    # residual graph: arc list with paired reverse arcs
    head, cap, adj = [], [], defaultdict(list)
    for e, c in zip(g.edges, caps):
        u, v = index[e.u], index[e.v]
        adj[u].append(len(head)); head.append(v); cap.append(c)
        adj[v].append(len(head)); head.append(u); cap.append(0)
    s, t = index[SOURCE], index[g.dc_vertex]
    total = 0
    while True:
        parent = {s: None}
        queue = deque([s])
        while queue and t not in parent:
            u = queue.popleft()
            for a in adj[u]:
                v = head[a]
                if cap[a] > 0 and v not in parent:
                    parent[v] = a
                    queue.append(v)
        if t not in parent:
            break
        push, v = math.inf, t
        while parent[v] is not None:
            a = parent[v]
            push = min(push, cap[a])
            v = head[a ^ 1]
        v = t
        while parent[v] is not None:
            a = parent[v]
            cap[a] -= push
            cap[a ^ 1] += push
            v = head[a ^ 1]
        total += push
    flow = {e: Fraction(cap[2 * i + 1], scale) for i, e in enumerate(g.edges)}
    return FlowResult(Fraction(total, scale), flow)


def max_flow(g: FlowGraph) -> Fraction:
    return max_flow_detail(g).value


def conservation_violations(g: FlowGraph, flow: dict[Edge, Fraction]) -> list[str]:
    """Vertices (other than source and collector) whose inflow differs from outflow."""
    balance = defaultdict(Fraction)
    for e, f in flow.items():
        balance[e.u] -= f
        balance[e.v] += f
    return [v for v in g.vertices if v not in (SOURCE, g.dc_vertex) and balance[v] != 0]


@dataclass(frozen=True)
class Cut:
    near: frozenset[str]
    far: frozenset[str]
    cut_type: tuple[int, ...] = ()
    designated: tuple[tuple[int, int], ...] = ()  # (stage, node) triples placed on the far side


def dc_stage_assignment(g: FlowGraph) -> list[tuple[int, list[int]]]:
    """Collector nodes grouped by the stage of their live out vertex, in stage order."""
    by_stage = defaultdict(list)
    for i in g.dc:
        by_stage[g.latest[i]].append(i)
    return sorted(by_stage.items())


def type_cut(g: FlowGraph, cut_type: Sequence[int], assignment: Sequence[tuple[int, Sequence[int]]] | None = None) -> Cut:
    """The staged cut that puts the designated newcomers' triples and DC on the far side.

    ``assignment`` lists (stage, nodes) pairs, one per part of the type;
    by default it is derived from where the collector's nodes live.
    """
    t = validate_cut_type(cut_type, g.params.k, g.params.r)
    if assignment is None:
        assignment = dc_stage_assignment(g)
    assignment = [(int(s), tuple(nodes)) for s, nodes in assignment]
    if len(assignment) != len(t) or any(len(nodes) != part for (_, nodes), part in zip(assignment, t)):
        raise ParameterError(f"cut type {t} incompatible with stage assignment {assignment}")
    stages = [s for s, _ in assignment]
    if stages != sorted(set(stages)) or stages[0] < 1 or stages[-1] > g.stages:
        raise ParameterError(f"cut type {t} needs distinct repair stages in 1..{g.stages}, got {stages}")
    vset = set(g.vertices)
    far = {g.dc_vertex}
    designated = []
    for s, nodes in assignment:
        for i in nodes:
            triple = {vertex(s, kind, i) for kind in ("in", "mid", "out")}
            if not triple <= vset:
                raise ParameterError(f"node {i} was not repaired in stage {s}")
            far |= triple
            designated.append((s, i))
    near = frozenset(vset - far)
    return Cut(near, frozenset(far), t, tuple(designated))


def source_cut(g: FlowGraph) -> Cut:
    """Only the source on the near side."""
    return Cut(frozenset({SOURCE}), frozenset(set(g.vertices) - {SOURCE}))


def cut_capacity(g: FlowGraph, cut: Cut) -> Fraction | float:
    """Sum of capacities from the near to the far side; ``math.inf`` if an infinite edge crosses."""
    if SOURCE not in cut.near or g.dc_vertex not in cut.far:
        raise ParameterError("cut must separate the source from the data collector")
    total = Fraction(0)
    for e in g.edges:
        if e.u in cut.near and e.v in cut.far:
            if e.capacity is None:
                return INF
            total += e.capacity
    return total


def cut_capacity_by_stage(g: FlowGraph, cut: Cut) -> dict[int, Fraction]:
    """Crossing capacity grouped by the stage of the edge head."""
    out = defaultdict(Fraction)
    for e in g.edges:
        if e.u in cut.near and e.v in cut.far:
            if e.capacity is None:
                raise ParameterError(f"infinite edge {e.u} -> {e.v} crosses the cut")
            out[int(e.v.split(":")[0])] += e.capacity
    return dict(out)


def adversarial_history(params: FlowParams, cut_type: Sequence[int]) -> tuple[RepairHistory, tuple[int, ...]]:
    """A history and collector for which the type cut meets its smallest capacity.

    The collector uses nodes 1..k.  Stage v fails the next l_v collector
    nodes plus r - l_v nodes outside the collector; every newcomer draws
    first on collector nodes repaired in earlier stages.
    """
    k, r, n, d = params.k, params.r, params.n, params.d
    t = validate_cut_type(cut_type, k, r)
    if n - k < r - min(t):
        raise ParameterError("not enough non-collector nodes to fill the failed sets")
    dc = tuple(range(1, k + 1))
    outsiders = list(range(k + 1, n + 1))
    last = {i: 0 for i in range(1, n + 1)}
    stages, start = [], 0
    for v, part in enumerate(t, start=1):
        block = list(range(start + 1, start + part + 1))
        failed = tuple(sorted(block + outsiders[: r - part]))
        earlier = list(range(1, start + 1))
        live_rest = [i for i in range(1, n + 1) if i not in failed and i not in earlier]
        live_rest.sort(key=lambda i: (-last[i], i))
        pool = earlier + live_rest
        if len(pool) < d:
            raise ParameterError("too few live helpers")
        helpers = {j: tuple(pool[:d]) for j in failed}
        stages.append(RepairStage(failed, helpers))
        for j in failed:
            last[j] = v
        start += part
    return RepairHistory(stages), dc


def stage_terms(g: FlowGraph, cut: Cut) -> list[Fraction]:
    """Cut capacity per designated stage, ordered like the cut type."""
    by_stage = cut_capacity_by_stage(g, cut)
    stages = sorted({s for s, _ in cut.designated})
    return [by_stage.get(s, Fraction(0)) for s in stages]


def closed_form_terms(params: FlowParams, cut_type: Sequence[int]) -> list[Fraction]:
    return staged_cut_terms(cut_type, params.d, params.r, params.beta1, params.beta2)


def min_simple_cut(g: FlowGraph) -> Fraction:
    """Minimum over cuts that, per collector node, take either its out vertex or its whole triple."""
    best = None
    nodes = list(g.dc)
    vset = set(g.vertices)
    for mask in range(1 << len(nodes)):
        far = {g.dc_vertex}
        for bit, i in enumerate(nodes):
            s = g.latest[i]
            if s > 0 and mask >> bit & 1:
                far |= {vertex(s, kind, i) for kind in ("in", "mid", "out")}
            else:
                far.add(vertex(s, "out", i))
        cap = cut_capacity(g, Cut(frozenset(vset - far), frozenset(far)))
        best = cap if best is None else min(best, cap)
    return best
