"""Command line: ``mbcr encode|decode|repair|bound|flowgraph|simulate``.

Exit codes: 0 success, 1 usage or parameter error, 2 data corruption,
3 I/O error.  ``MBCR_FIELD_POLY`` overrides the default reduction
polynomial (hex or decimal) when ``--poly`` is not given.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from fractions import Fraction
from pathlib import Path

from . import bounds
from .codec import CodeParams, encode, plan_repair, execute_repair, reconstruct
from .errors import (
    CorruptionError,
    InsufficientSharesError,
    MBCRError,
    ParameterError,
    SingularMatrixError,
    SpecParseError,
    UnsupportedFailurePatternError,
)
from .flowgraph import (
    FlowParams,
    RepairHistory,
    RepairStage,
    all_live_rule,
    build_graph,
    dc_stage_assignment,
    make_history,
    max_flow,
    min_simple_cut,
    most_recent_rule,
    type_cut,
    cut_capacity,
)
from .gf import get_field
from .mds import BUILTIN, VANDERMONDE
from .sharefile import ShareHeader, check_consistent, read_share, stripes_for, symbols_to_bytes, write_share
from .simulator import run_simulation

log = logging.getLogger("mbcr")

EXIT_OK, EXIT_USAGE, EXIT_CORRUPT, EXIT_IO = 0, 1, 2, 3
POLY_ENV = "MBCR_FIELD_POLY"


class UsageError(ParameterError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.replace(",", " ").split()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma separated list of integers, got {text!r}")


def _int_auto(text: str) -> int:
    return int(text, 0)


def _add_code_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("code parameters (d = k, n = d + r)")
    g.add_argument("-k", type=int, required=True, help="nodes needed to reconstruct")
    g.add_argument("-r", type=int, required=True, help="simultaneous failures repaired together")
    g.add_argument("-d", type=int, help="helpers per newcomer (must equal k)")
    g.add_argument("-n", type=int, help="total nodes (must equal d + r)")
    g.add_argument("-m", "--field-degree", type=int, default=None, help="symbol field GF(2^m), default 8")
    g.add_argument("--poly", type=_int_auto, help=f"reduction polynomial; default from ${POLY_ENV} or the standard one")
    g.add_argument("--generator", choices=[VANDERMONDE, BUILTIN], default=VANDERMONDE)
    g.add_argument("--eval-points", type=_int_list, default=(), help="distinct Vandermonde evaluation points")


def _code_params(args) -> CodeParams:
    d = args.k if args.d is None else args.d
    if d != args.k:
        raise UsageError(f"constraint d = k violated (d={d}, k={args.k})")
    n = d + args.r if args.n is None else args.n
    if n != d + args.r:
        raise UsageError(f"constraint n = d + r violated (n={n}, d+r={d + args.r})")
    m = args.field_degree
    if m is None:
        m = 1 if args.generator == BUILTIN else 8
    poly = args.poly
    if poly is None and os.environ.get(POLY_ENV):
        env = os.environ[POLY_ENV]
        try:
            poly = int(env, 0)
        except ValueError:
            raise UsageError(f"${POLY_ENV}={env!r} is not an integer")
        if poly.bit_length() - 1 != m:
            poly = None  # override targets a different degree
    field = get_field(m, poly)
    if args.generator == VANDERMONDE and n - 1 > field.order:
        raise UsageError(f"constraint q >= n - 1 violated for vandermonde (q={field.order}, n-1={n - 1})")
    return CodeParams.family(args.k, args.r, field, args.generator, args.eval_points)


def share_name(node: int) -> str:
    return f"node{node}.mbcr"


# encode / decode / repair


def cmd_encode(args) -> int:
    params = _code_params(args)
    data = Path(args.input).read_bytes()
    stripes = stripes_for(data, params)
    shares = encode(stripes, params)
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    for i, share in shares.items():
        write_share(out / share_name(i), ShareHeader(params, i, len(data), stripes.shape[0]), share)
    print(f"encoded {len(data)} bytes into {stripes.shape[0]} stripes x {params.n} shares "
          f"(B={params.B}, alpha={params.alpha}) in {out}")
    return EXIT_OK


def _load_shares(paths):
    loaded = [read_share(p) for p in paths]
    headers = [h for h, _ in loaded]
    if headers:
        check_consistent(headers)
    return headers, {s.node_id: s for _, s in loaded}


def cmd_decode(args) -> int:
    headers, shares = _load_shares(args.shares)
    if not headers:
        raise InsufficientSharesError("no shares given")
    h = headers[0]
    params = h.params
    if len(shares) < params.k:
        raise InsufficientSharesError(f"need {params.k} shares with distinct node ids, got {len(shares)}")
    collector = sorted(shares)[: params.k]
    stripes = reconstruct(collector, shares, params)
    data = symbols_to_bytes(stripes, params.field.degree, h.length)
    if len(data) != h.length:
        raise CorruptionError(f"decoded {len(data)} bytes, header promises {h.length}")
    Path(args.output).write_bytes(data)
    print(f"decoded {h.length} bytes from nodes {collector} into {args.output}")
    return EXIT_OK


def repair_summary(params: CodeParams, transcript, stripes: int) -> dict:
    bound = bounds.mbcr_lower_bound(bounds.SystemParams(params.B, params.k, params.d, params.r, params.n))
    per = transcript.per_newcomer()
    worst = Fraction(max(per.values())) / bound
    return {
        "failed": list(transcript.failed),
        "stripes": stripes,
        "phase1_packets": transcript.count(1),
        "phase2_packets": transcript.count(2),
        "total_packets": transcript.count(),
        "aggregate_packets": transcript.count() * stripes,
        "gamma_measured": {str(j): v for j, v in per.items()},
        "gamma_bound": {"exact": str(bound), "decimal": float(bound)},
        "ratio": {"exact": str(worst), "decimal": float(worst)},
        "transfers": [
            {"phase": t.entry.phase, "step": t.entry.step, "sender": t.sender, "receiver": t.receiver,
             "group": t.entry.group, "column": t.entry.column}
            for t in transcript.transfers
        ],
    }


def cmd_repair(args) -> int:
    headers, shares = _load_shares(args.survivors)
    if not headers:
        raise UnsupportedFailurePatternError("no surviving shares given")
    h = headers[0]
    params = h.params
    failed = args.failed if args.failed else [i for i in params.nodes() if i not in shares]
    failed = sorted(set(failed))
    survivors = sorted(shares)
    if len(survivors) != params.d or set(survivors) & set(failed) or len(failed) != params.r:
        raise UnsupportedFailurePatternError(
            f"repair needs all d = n - r = {params.d} survivors and r = {params.r} failed nodes; "
            f"got survivors {survivors}, failed {failed}"
        )
    rebuilt, transcript = execute_repair(plan_repair(failed, params), shares)
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    for j, share in rebuilt.items():
        write_share(out / share_name(j), ShareHeader(params, j, h.length, h.stripes), share)
    summary = repair_summary(params, transcript, h.stripes)
    if args.transcript:
        Path(args.transcript).write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    if args.json:
        print(json.dumps({k: v for k, v in summary.items() if k != "transfers"}, indent=2, sort_keys=True))
    else:
        print(f"repaired nodes {failed} from survivors {survivors} ({h.stripes} stripes)")
        print(f"phase 1 packets: {summary['phase1_packets']}")
        print(f"phase 2 packets: {summary['phase2_packets']}")
        print(f"total packets:   {summary['total_packets']} per stripe")
        for j, v in summary["gamma_measured"].items():
            print(f"newcomer {j} received: {v}")
        print(f"lower bound:     {summary['gamma_bound']['exact']}")
        print(f"ratio:           {summary['ratio']['exact']}")
    return EXIT_OK


# bound


def _bound_report(sp: bounds.SystemParams, compare: bool, verify: bool) -> dict:
    lb = bounds.mbcr_lower_bound(sp)
    b1, b2 = bounds.mbcr_point(sp)
    rep = {
        "B": str(sp.B), "k": sp.k, "d": sp.d, "r": sp.r,
        "lower_bound": {"exact": str(lb), "decimal": float(lb)},
        "point": {"beta1": str(b1), "beta2": str(b2)},
    }
    if compare:
        sl = bounds.single_loss_bound(sp.B, sp.k, sp.d)
        rep["single_loss_bound"] = {"exact": str(sl), "decimal": float(sl)}
    if verify:
        res = bounds.optimal_tradeoff_lp(sp)
        rep["lp"] = {
            "beta1": str(res.beta1), "beta2": str(res.beta2), "gamma": str(res.gamma),
            "unique_vertex": res.unique,
            "matches_closed_form": res.point == (b1, b2) and res.gamma == lb,
        }
    return rep


def cmd_bound(args) -> int:
    if args.grid:
        kmax, dmax, rmax = args.grid
        rows, ok = [], True
        for k in range(1, kmax + 1):
            for d in range(k, dmax + 1):
                for r in range(1, rmax + 1):
                    sp = bounds.SystemParams(k * (2 * d + r - k), k, d, r)
                    match = bounds.lp_matches_closed_form(sp)
                    ok &= match
                    rows.append((k, d, r, match))
        if args.json:
            print(json.dumps([{"k": k, "d": d, "r": r, "matches": m} for k, d, r, m in rows], indent=2))
        else:
            for k, d, r, m in rows:
                verdict = "vertex matches closed form" if m else "MISMATCH"
                print(f"k={k} d={d} r={r} B={k * (2 * d + r - k)}: {verdict}")
        return EXIT_OK if ok else EXIT_CORRUPT

    if args.B is None or args.k is None or args.d is None or args.r is None:
        raise UsageError("bound needs -B, -k, -d and -r (or --grid)")
    sp = bounds.SystemParams(Fraction(args.B), args.k, args.d, args.r)
    rep = _bound_report(sp, args.compare_single_loss, args.lp_verify)
    if args.json:
        print(json.dumps(rep, indent=2, sort_keys=True))
    else:
        lb = bounds.mbcr_lower_bound(sp)
        b1, b2 = bounds.mbcr_point(sp)
        print(f"cooperative lower bound: {bounds.render(lb)}")
        print(f"optimal point (beta1, beta2): ({b1}, {b2})")
        if args.compare_single_loss:
            print(f"single-loss bound: {bounds.render(bounds.single_loss_bound(sp.B, sp.k, sp.d))}")
        if args.lp_verify:
            lp = rep["lp"]
            verdict = "vertex matches closed form" if lp["matches_closed_form"] else "MISMATCH"
            print(f"lp: ({lp['beta1']}, {lp['beta2']}) gamma={lp['gamma']}: {verdict}")
    if args.plot:
        from .plots import plot_tradeoff

        print(f"figure: {plot_tradeoff(sp, args.plot)}")
    if args.lp_verify and not rep["lp"]["matches_closed_form"]:
        return EXIT_CORRUPT
    return EXIT_OK


# flowgraph


def parse_history_spec(text: str):
    """Parse the flow-graph scenario format; see README for the grammar."""
    params = None
    failed_sets: list[tuple[int, ...]] = []
    explicit: list[dict[int, tuple[int, ...]]] = []
    dc = None
    cut = None
    rule = most_recent_rule
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        word, _, rest = line.partition(" ")
        rest = rest.strip()
        try:
            if word == "params":
                kv = dict(item.split("=", 1) for item in rest.split())
                missing = {"n", "k", "d", "r", "alpha", "beta1", "beta2"} - kv.keys()
                if missing:
                    raise SpecParseError(f"params missing {sorted(missing)}", lineno)
                params = FlowParams(int(kv["n"]), int(kv["k"]), int(kv["d"]), int(kv["r"]),
                                    Fraction(kv["alpha"]), Fraction(kv["beta1"]), Fraction(kv["beta2"]))
            elif word == "stage":
                failed_sets.append(tuple(_int_list(rest)))
                explicit.append({})
            elif word == "helpers":
                if not failed_sets:
                    raise SpecParseError("helpers before any stage", lineno)
                who, sep, hs = rest.partition(":")
                if not sep:
                    raise SpecParseError("expected 'helpers <newcomer>: <ids>'", lineno)
                explicit[-1][int(who)] = tuple(_int_list(hs))
            elif word == "dc":
                dc = tuple(_int_list(rest))
            elif word == "cut":
                cut = tuple(_int_list(rest))
            elif word == "helper-rule":
                rules = {"most-recent": most_recent_rule, "lowest": all_live_rule}
                if rest not in rules:
                    raise SpecParseError(f"unknown helper rule {rest!r}", lineno)
                rule = rules[rest]
            else:
                raise SpecParseError(f"unknown directive {word!r}", lineno)
        except SpecParseError:
            raise
        except (ValueError, argparse.ArgumentTypeError, ParameterError) as exc:
            raise SpecParseError(str(exc), lineno) from exc
    if params is None:
        raise SpecParseError("missing 'params' line")
    auto = make_history(params, failed_sets, rule)
    stages = [
        RepairStage(st.failed, {**st.helpers, **ex}) for st, ex in zip(auto.stages, explicit)
    ]
    return params, RepairHistory(stages), dc, cut


def cmd_flowgraph(args) -> int:
    params, history, dc, cut_spec = parse_history_spec(Path(args.spec).read_text())
    if args.dc:
        dc = tuple(args.dc)
    if dc is None:
        raise UsageError("no data collector given (use --dc or a 'dc' line)")
    if args.cut:
        cut_spec = tuple(args.cut)
    g = build_graph(params, history, dc)
    if args.edges:
        Path(args.edges).write_text(g.edge_list())
    flow = max_flow(g)
    induced = tuple(len(nodes) for s, nodes in dc_stage_assignment(g) if s > 0)
    rep = {
        "vertices": len(g.vertices),
        "edges": len(g.edges),
        "dc": list(g.dc),
        "max_flow": str(flow),
        "min_simple_cut": str(min_simple_cut(g)),
    }
    cut = None
    if cut_spec:
        cut = type_cut(g, cut_spec)
        rep["cut_type"] = list(cut_spec)
        rep["cut_capacity"] = str(cut_capacity(g, cut))
        rep["closed_form"] = str(bounds.file_size_bound(cut_spec, params.d, params.r, params.beta1, params.beta2))
    elif sum(induced) == params.k:
        cut = type_cut(g, induced)
        rep["cut_type"] = list(induced)
        rep["cut_capacity"] = str(cut_capacity(g, cut))
    if args.json:
        print(json.dumps(rep, indent=2, sort_keys=True))
    else:
        for key, value in rep.items():
            print(f"{key}: {value}")
    if args.plot:
        from .plots import plot_flowgraph

        print(f"figure: {plot_flowgraph(g, args.plot, cut)}")
    return EXIT_OK


# simulate


def parse_schedule(text: str) -> list[tuple[int, ...]]:
    """One failed set per line, ids separated by commas or spaces."""
    out = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip().strip("{}[]")
        if not line:
            continue
        try:
            out.append(tuple(int(x) for x in line.replace(",", " ").split()))
        except ValueError:
            raise SpecParseError(f"cannot parse failed set {raw.strip()!r}", lineno)
    return out


def cmd_simulate(args) -> int:
    params = _code_params(args)
    schedule = parse_schedule(Path(args.schedule).read_text()) if args.schedule else None
    rounds = args.rounds
    if schedule is None and rounds is None:
        rounds = 1
    report = run_simulation(params, rounds=rounds, schedule=schedule, seed=args.seed, stripes=args.stripes)
    text = report.to_json()
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    if args.plot:
        from .plots import plot_simulation

        print(f"figure: {plot_simulation(report, args.plot)}", file=sys.stderr)
    return EXIT_OK if report.ok else EXIT_CORRUPT


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="mbcr", description="Minimum-bandwidth cooperative regenerating codes")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("encode", help="split a file into n share files")
    p.add_argument("input")
    p.add_argument("-o", "--output", required=True, help="output directory")
    _add_code_flags(p)
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("decode", help="rebuild a file from k share files")
    p.add_argument("shares", nargs="+")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("repair", help="regenerate r failed shares from the d survivors")
    p.add_argument("survivors", nargs="+")
    p.add_argument("--failed", type=_int_list, help="failed node ids (default: those missing)")
    p.add_argument("-o", "--output", required=True, help="directory for regenerated shares")
    p.add_argument("--transcript", help="write the full transfer transcript as JSON")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_repair)

    p = sub.add_parser("bound", help="repair-bandwidth lower bound")
    p.add_argument("-B", type=Fraction)
    p.add_argument("-k", type=int)
    p.add_argument("-d", type=int)
    p.add_argument("-r", type=int)
    p.add_argument("--compare-single-loss", action="store_true")
    p.add_argument("--lp-verify", action="store_true")
    p.add_argument("--grid", type=int, nargs=3, metavar=("KMAX", "DMAX", "RMAX"),
                   help="verify the LP against the closed form on a grid (B = k(2d+r-k))")
    p.add_argument("--plot", help="write the (beta1, beta2) constraint figure here")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("flowgraph", help="information flow graph, max-flow and cuts")
    p.add_argument("spec", help="scenario file")
    p.add_argument("--dc", type=_int_list)
    p.add_argument("--cut", type=_int_list, help="cut type, e.g. 2,1,2")
    p.add_argument("--edges", help="write the edge list here")
    p.add_argument("--plot", help="write a drawing of the graph here")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_flowgraph)

    p = sub.add_parser("simulate", help="fail/repair rounds with bandwidth accounting")
    _add_code_flags(p)
    p.add_argument("--rounds", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--schedule", help="file with one failed set per line")
    p.add_argument("--stripes", type=int, default=1)
    p.add_argument("-o", "--output", help="report path (default stdout)")
    p.add_argument("--plot", help="write a per-round bandwidth figure here")
    p.set_defaults(func=cmd_simulate)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (CorruptionError, SingularMatrixError) as exc:
        print(f"mbcr: data corruption: {exc}", file=sys.stderr)
        return EXIT_CORRUPT
    except ParameterError as exc:
        print(f"mbcr: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"mbcr: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except MBCRError as exc:
        print(f"mbcr: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
