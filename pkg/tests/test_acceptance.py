"""Acceptance criteria 1-8, each run at its stated tolerance and time limit.

Every criterion records a PASS/FAIL line; conftest prints them at the end of
the session.  ``python tests/test_acceptance.py`` runs them without pytest.
"""

import itertools
import os
import sys
import tempfile
import time
from fractions import Fraction as F
from pathlib import Path

import numpy as np
import pytest

from mbcr.bounds import (
    SystemParams,
    enumerate_cut_types,
    mbcr_lower_bound,
    mbcr_point,
    optimal_tradeoff_lp,
    single_loss_bound,
)
from mbcr.cli import main as cli_main
from mbcr.codec import CodeParams, all_collectors, all_failure_sets, encode, offset_of, reconstruct, repair
from mbcr.flowgraph import (
    FlowParams,
    adversarial_history,
    build_graph,
    closed_form_terms,
    cut_capacity,
    make_history,
    max_flow,
    stage_terms,
    type_cut,
)
from mbcr.gf import GF2, get_field

RESULTS: list[str] = []

pytestmark = pytest.mark.acceptance


class _Clock:
    def __init__(self, number, title, limit):
        self.number, self.title, self.limit = number, title, limit

    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, kind, exc, tb):
        dt = time.perf_counter() - self.t0
        ok = kind is None and dt < self.limit
        why = "" if kind is None else f" ({kind.__name__}: {exc})"
        RESULTS.append(f"{'PASS' if ok else 'FAIL'} criterion {self.number}: {self.title} "
                       f"[{dt:.2f}s, limit {self.limit}s]{why}")
        if kind is None:
            assert dt < self.limit, f"criterion {self.number} took {dt:.2f}s > {self.limit}s"
        return False


# five-node GF(2) array, cell by cell: node -> {group: v index}, 0 = systematic
LAYOUT_V = {
    1: {1: 0, 2: 1, 3: 2, 4: 3, 5: 4},
    2: {1: 4, 2: 0, 3: 1, 4: 2, 5: 3},
    3: {1: 3, 2: 4, 3: 0, 4: 1, 5: 2},
    4: {1: 2, 2: 3, 3: 4, 4: 0, 5: 1},
    5: {1: 1, 2: 2, 3: 3, 4: 4, 5: 0},
}
G_COLUMNS = {1: (1, 1, 1), 2: (1, 0, 0), 3: (0, 1, 0), 4: (0, 0, 1)}


def test_c1_five_node_gf2_layout():
    with _Clock(1, "five-node GF(2) share array", 1.0):
        p = CodeParams.family(3, 2, GF2, "builtin-paper-gf2")
        # hand-packed stripe: x_0..x_14
        bits = [1, 0, 1, 1, 0, 0, 1, 1, 1, 0, 1, 0, 0, 1, 1]
        shares = encode(np.array([bits], dtype=np.uint8), p)

        def cell(g, t):
            group = bits[3 * (g - 1): 3 * g]
            return sum(a * b for a, b in zip(group, G_COLUMNS[t])) % 2

        for i, row in LAYOUT_V.items():
            for g, t in row.items():
                if t == 0:
                    assert list(shares[i].systematic[:, 0]) == bits[3 * (g - 1): 3 * g]
                else:
                    assert offset_of(g, i, 5) == t
                    assert shares[i].parity_at(t)[0] == cell(g, t)
        # node 4 in the order systematic, then parity by group 1, 2, 3, 5
        x = bits
        node4 = list(shares[4].systematic[:, 0]) + [int(shares[4].parity_at(offset_of(g, 4, 5))[0]) for g in (1, 2, 3, 5)]
        assert node4 == [x[9], x[10], x[11], x[0], x[4], x[8], (x[12] + x[13] + x[14]) % 2]


def test_c2_repair_numbers():
    with _Clock(2, "repair {4,5}: 14 transfers, 7 each, bound 7, ratio 1", 1.0):
        p = CodeParams.family(3, 2, GF2, "builtin-paper-gf2")
        data = np.random.default_rng(2).integers(0, 2, size=(4, 15)).astype(np.uint8)
        shares = encode(data, p)
        rebuilt, tr = repair((4, 5), {i: shares[i] for i in (1, 2, 3)}, p)
        assert tr.count() == 14
        assert tr.per_newcomer() == {4: 7, 5: 7}
        bound = mbcr_lower_bound(SystemParams(15, 3, 3, 2))
        assert bound == 7
        assert F(max(tr.per_newcomer().values())) / bound == 1
        assert all(rebuilt[j] == shares[j] for j in (4, 5))


def test_c3_small_example_numbers():
    with _Clock(3, "B=8, k=d=r=2: bound 5, single-loss 16/3, measured 5 (10 transfers)", 1.0):
        assert mbcr_lower_bound(SystemParams(8, 2, 2, 2)) == 5
        assert single_loss_bound(8, 2, 2) == F(16, 3)
        p = CodeParams.family(2, 2, get_field(8))
        assert p.B == 8
        data = np.random.default_rng(3).integers(0, 256, size=(2, 8)).astype(np.uint8)
        shares = encode(data, p)
        for failed in all_failure_sets(p):
            rebuilt, tr = repair(failed, {i: s for i, s in shares.items() if i not in failed}, p)
            assert tr.count() == 10
            assert set(tr.per_newcomer().values()) == {5}
            assert all(rebuilt[j] == shares[j] for j in failed)


def test_c4_lp_grid():
    with _Clock(4, "exact LP over all cut types equals the closed form on the grid", 10.0):
        for k in range(1, 6):
            for d in range(k, 9):
                for r in range(1, 6):
                    p = SystemParams(k * (2 * d + r - k), k, d, r)
                    res = optimal_tradeoff_lp(p)
                    assert res.point == mbcr_point(p) == (2, 1)
                    assert res.gamma == mbcr_lower_bound(p) == 2 * d + r - 1
                    assert len(res.constraints) == len(enumerate_cut_types(k, r))


def test_c5_cut_bridge():
    with _Clock(5, "flow-graph cut capacity equals the algebraic bound term by term", 10.0):
        checked = 0
        for k in range(1, 5):
            for r in range(1, 5):
                p = FlowParams.mbcr(k, r)
                for t in enumerate_cut_types(k, r):
                    h, dc = adversarial_history(p, t)
                    g = build_graph(p, h, dc)
                    cut = type_cut(g, t)
                    assert stage_terms(g, cut) == closed_form_terms(p, t)
                    checked += 1
        assert checked == sum(len(enumerate_cut_types(k, r)) for k in range(1, 5) for r in range(1, 5))


def test_c6_max_flow_tightness():
    with _Clock(6, "single-stage max-flow >= B for all DCs, = B for some DC", 30.0):
        below, untight = [], []
        for k in range(1, 4):
            for r in range(1, 4):
                p = FlowParams.mbcr(k, r)
                B = k * p.n
                for failed in itertools.combinations(range(1, p.n + 1), r):
                    h = make_history(p, [failed])
                    flows = [max_flow(build_graph(p, h, dc)) for dc in itertools.combinations(range(1, p.n + 1), k)]
                    if min(flows) < B:
                        below.append((k, r, failed))
                    if B not in flows:
                        untight.append((k, r, failed, str(min(flows)), B))
        assert not below
        assert not untight, f"no DC reaches B on these single-stage graphs (k, r, failed, min flow, B): {untight}"


def test_c7_exhaustive_code():
    with _Clock(7, "all collectors decode, all failure sets repair at 2d+r-1 over GF(256)", 60.0):
        f = get_field(8)
        rng = np.random.default_rng(7)
        for k in range(1, 4):
            for r in range(1, 4):
                p = CodeParams.family(k, r, f)
                data = rng.integers(0, 256, size=(5, p.B)).astype(np.uint8)
                shares = encode(data, p)
                for c in all_collectors(p):
                    assert np.array_equal(reconstruct(c, shares, p), data)
                for failed in all_failure_sets(p):
                    rebuilt, tr = repair(failed, {i: s for i, s in shares.items() if i not in failed}, p)
                    assert set(tr.per_newcomer().values()) == {2 * p.d + r - 1}
                    assert all(rebuilt[j] == shares[j] for j in failed)


def _cli(*argv):
    code = cli_main([str(a) for a in argv])
    assert code == 0, f"mbcr {' '.join(map(str, argv))} exited {code}"


def test_c8_cli_round_trips(capsys=None):
    with _Clock(8, "CLI encode/decode and encode/repair/decode byte-exact", 60.0):
        k, r = 3, 2
        B = k * (k + r)
        with tempfile.TemporaryDirectory() as tmp:
            tmp = Path(tmp)
            rng = np.random.default_rng(8)
            for length in (0, 1, B - 1, B, B + 1, 10**6):
                data = rng.bytes(length)
                src, out = tmp / f"f{length}", tmp / f"s{length}"
                src.write_bytes(data)
                _cli("encode", src, "-o", out, "-k", k, "-r", r)
                _cli("decode", out / "node2.mbcr", out / "node4.mbcr", out / "node5.mbcr", "-o", tmp / "back")
                assert (tmp / "back").read_bytes() == data
            data = rng.bytes(5000)
            (tmp / "g").write_bytes(data)
            _cli("encode", tmp / "g", "-o", tmp / "gs", "-k", k, "-r", r)
            for failed in itertools.combinations(range(1, 6), r):
                alive = [i for i in range(1, 6) if i not in failed]
                fixed = tmp / ("fix" + "".join(map(str, failed)))
                _cli("repair", *[tmp / "gs" / f"node{i}.mbcr" for i in alive], "-o", fixed)
                for j in failed:
                    assert (fixed / f"node{j}.mbcr").read_bytes() == (tmp / "gs" / f"node{j}.mbcr").read_bytes()
                # decode through a collector that uses the regenerated shares
                use = [fixed / f"node{j}.mbcr" for j in failed] + [tmp / "gs" / f"node{alive[0]}.mbcr"]
                _cli("decode", *use, "-o", tmp / "gb")
                assert (tmp / "gb").read_bytes() == data


if __name__ == "__main__":
    import contextlib
    import io

    for name, fn in sorted(globals().items()):
        if name.startswith("test_c"):
            with contextlib.suppress(Exception), contextlib.redirect_stdout(io.StringIO()):
                fn()
    print("\n".join(RESULTS))
    sys.exit(0 if all(line.startswith("PASS") for line in RESULTS) else 1)
