"""Command-line front end.

``localflow solve`` runs the solver and writes either a flow artifact or
a certificate artifact; ``verify`` re-checks any artifact against the
instance; ``gen`` writes deterministic test instances; ``bench`` sweeps
instance sizes and tabulates work units against the locality budget.

Exit codes make the solve dichotomy scriptable: 0 = flow (or: command
succeeded), 2 = certificate, 3 = verification failed, 1 = usage or
parse error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from typing import Optional

import numpy as np

from . import generators
from .formats import (FormatError, format_cut_artifact, format_demands,
                      format_flow_artifact, format_graph,
                      format_potential_artifact, parse_artifact,
                      parse_demands, parse_graph)
from .multi import solve_multi
from .single import solve_single
from .stats import report, work_bound
from .verify import (verify_cut_certificate, verify_flow_output,
                     verify_potential_certificate)

__all__ = ["main"]

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_CERTIFICATE = 2
EXIT_VERIFY_FAILED = 3


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse that raises instead of exiting, so main() owns exit codes."""

    def error(self, message):
        raise _UsageError(message)


def _read(path: str) -> str:
    with open(path, "r", encoding="utf-8") as fh:
        return fh.read()


def _write(path: Optional[str], text: str) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _load_instance(args):
    try:
        g = parse_graph(_read(args.graph))
    except FormatError as exc:
        raise _UsageError(f"{args.graph}: {exc}") from None
    try:
        bs = parse_demands(_read(args.demands))
    except FormatError as exc:
        raise _UsageError(f"{args.demands}: {exc}") from None
    return g, bs


def cmd_solve(args) -> int:
    g, bs = _load_instance(args)
    if args.k is not None and args.k != len(bs):
        raise _UsageError(f"--k {args.k} does not match the demand file's "
                          f"{len(bs)} commodities")
    try:
        if len(bs) == 1:
            res = solve_single(g, bs[0], args.eps, audit=args.audit,
                               collect_series=False)
            flows = None if res.flow is None else [res.flow]
            numerators = None if res.numerators is None else [res.numerators]
            residuals = None if res.residual is None else [res.residual]
            cert = res.certificate
            cert_text = None if cert is None else format_cut_artifact(cert)
        else:
            res = solve_multi(g, bs, args.eps, audit=args.audit,
                              collect_series=False)
            flows, numerators, residuals = res.flows, res.numerators, \
                res.residuals
            cert = res.certificate
            cert_text = None if cert is None \
                else format_potential_artifact(cert)
    except ValueError as exc:
        raise _UsageError(str(exc)) from None

    if args.stats is not None:
        doc = report(res.stats, include_series=False)
        _write(args.stats, json.dumps(doc, indent=2, sort_keys=True) + "\n")
    if cert is not None:
        _write(args.out, cert_text)
        if args.out is not None:
            print(f"certificate -> {args.out}")
        return EXIT_CERTIFICATE
    _write(args.out, format_flow_artifact(args.eps, res.iterations, flows,
                                          numerators, residuals))
    if args.out is not None:
        print(f"flow -> {args.out}")
    return EXIT_OK


def _check_flow_doc(g, bs, doc, eps: float) -> list[str]:
    msgs: list[str] = []
    rep = verify_flow_output(g, bs, doc["flows"], eps)
    msgs.extend(rep.messages)
    t = doc["iterations"]
    nums = doc["numerators"]
    if any(nums):
        load: dict[int, int] = {}
        for nj in nums:
            for e, c in nj.items():
                load[e] = load.get(e, 0) + abs(int(c))
        for e, c in load.items():
            if c > t:
                msgs.append(f"edge {e}: integer accumulator {c} exceeds "
                            f"{t} iterations (congestion above 1)")
        for j, (nj, fj) in enumerate(zip(nums, doc["flows"])):
            for e, c in nj.items():
                if fj.get(e, 0.0) != c / t:
                    msgs.append(f"commodity {j + 1}: flow at edge {e} does "
                                f"not equal numerator {c} / {t}")
    return msgs


def cmd_verify(args) -> int:
    g, bs = _load_instance(args)
    try:
        doc = parse_artifact(_read(args.artifact))
    except FormatError as exc:
        raise _UsageError(f"{args.artifact}: {exc}") from None

    if doc["kind"] == "flow":
        eps = args.eps if args.eps is not None else doc["eps"]
        if not 0.0 < eps < 1.0:
            raise _UsageError(f"eps must lie in (0, 1), got {eps}")
        msgs = _check_flow_doc(g, bs, doc, eps)
    elif doc["kind"] == "cut-certificate":
        if len(bs) != 1:
            msgs = [f"cut certificates are single-commodity; demand file "
                    f"has {len(bs)} commodities"]
        else:
            msgs = verify_cut_certificate(g, bs[0], doc["certificate"]).messages
    else:
        msgs = verify_potential_certificate(g, bs, doc["certificate"]).messages

    if msgs:
        for msg in msgs:
            print(f"FAIL: {msg}", file=sys.stderr)
        return EXIT_VERIFY_FAILED
    print(f"{doc['kind']} artifact verifies")
    return EXIT_OK


def _gen_graph(args):
    kind = args.kind
    if kind == "path":
        return generators.path_graph(_require(args, "n"))
    if kind == "grid":
        return generators.grid_graph(_require(args, "rows"),
                                     _require(args, "cols"))
    if kind == "random-regular":
        return generators.random_regular_graph(_require(args, "n"),
                                               _require(args, "d"), args.seed)
    return generators.random_gnm_graph(_require(args, "n"),
                                       _require(args, "m"), args.seed)


def _require(args, name: str):
    val = getattr(args, name)
    if val is None:
        raise _UsageError(f"--{name} is required for kind {args.kind!r}")
    return val


def _apply_demand_spec(spec: str, g, k: int, seed, bs: list) -> None:
    toks = spec.split()
    if not toks:
        raise _UsageError("empty demand spec")
    if toks[0] == "pairs":
        quads = toks[1:]
        if not quads or len(quads) % 4 != 0:
            raise _UsageError(f"'pairs' wants groups of 'j s t d', "
                              f"got {spec!r}")
        for i in range(0, len(quads), 4):
            j, s, t = (int(x) for x in quads[i:i + 3])
            d = float(quads[i + 3])
            if not 1 <= j <= k:
                raise _UsageError(f"pair commodity {j} outside 1..{k}")
            if d <= 0:
                raise _UsageError(f"pair demand must be positive, got {d}")
            b = bs[j - 1]
            b[s] = b.get(s, 0.0) + d
            b[t] = b.get(t, 0.0) - d
    elif toks[0] == "random-balanced":
        if len(toks) != 3:
            raise _UsageError(f"'random-balanced' wants 'l0 l1', got {spec!r}")
        l0, l1 = int(toks[1]), float(toks[2])
        for j in range(k):
            rng = np.random.default_rng([seed, j])
            b = generators.random_balanced_demand(g, l0, l1, rng)
            for v, x in b.items():
                bs[j][v] = bs[j].get(v, 0.0) + x
    else:
        raise _UsageError(f"unknown demand spec kind {toks[0]!r}; expected "
                          f"'pairs' or 'random-balanced'")


def cmd_gen(args) -> int:
    try:
        g = _gen_graph(args)
    except (ValueError, RuntimeError) as exc:
        raise _UsageError(str(exc)) from None
    _write(args.out_graph, format_graph(g))
    if args.out_graph is not None:
        print(f"graph -> {args.out_graph}")
    if args.demand:
        k = args.k
        bs: list[dict] = [{} for _ in range(k)]
        for spec in args.demand:
            try:
                _apply_demand_spec(spec, g, k, args.seed, bs)
            except (ValueError, RuntimeError) as exc:
                raise _UsageError(str(exc)) from None
        if args.out_demands is None:
            raise _UsageError("--out-demands is required with --demand")
        _write(args.out_demands, format_demands(bs))
        print(f"demands -> {args.out_demands}")
    return EXIT_OK


def cmd_bench(args) -> int:
    eps_list = [float(x) for x in args.eps_list.split(",")] \
        if args.eps_list else None
    ms = [int(x) for x in args.ms.split(",")]
    runs = [(m, e) for m in ms for e in (eps_list or [args.eps])]

    rows = []
    for m, eps in runs:
        n = m // 2
        g = generators.random_regular_graph(n, 4, np.random.default_rng(
            [args.seed, m]))
        if args.l1 > 0:
            # same demand at every size: draw from the low vertex ids,
            # which exist in all graphs of the sweep
            pool = np.arange(min(n, 1000))
            b = generators.random_balanced_demand(
                g, args.support, args.l1,
                np.random.default_rng([args.seed, 1]), pool=pool)
        else:
            b = {}
        res = solve_single(g, b, eps, collect_series=False)
        st = res.stats
        bound = work_bound(st.iterations_planned, st.b_l0, st.b_l1,
                           st.alpha, st.n)
        rows.append((m, n, eps, st.iterations_planned, st.work, bound,
                     st.work / bound if bound > 0 else math.nan))

    head = f"{'m':>9} {'n':>9} {'eps':>6} {'T':>8} {'work':>14} " \
           f"{'bound':>16} {'work/bound':>11}"
    lines = [head]
    for m, n, eps, t, w, bound, ratio in rows:
        lines.append(f"{m:>9} {n:>9} {eps:>6.3g} {t:>8} {w:>14} "
                     f"{bound:>16.6g} {ratio:>11.4g}")
    _write(args.out, "\n".join(lines) + "\n")
    return EXIT_OK


def _build_parser() -> _Parser:
    p = _Parser(prog="localflow",
                description="Local approximate flow solver for unit-capacity "
                            "undirected graphs.")
    sub = p.add_subparsers(dest="command", required=True)

    ps = sub.add_parser("solve", help="solve an instance; exit 0 = flow, "
                                      "2 = certificate")
    ps.add_argument("graph", help="graph file ('n m' header + 'u v' lines)")
    ps.add_argument("demands", help="demand file ('k' header + value lines)")
    ps.add_argument("--eps", type=float, required=True,
                    help="residual tolerance in (0, 1)")
    ps.add_argument("--k", type=int, default=None,
                    help="expected commodity count (checked against the file)")
    ps.add_argument("--audit", action="store_true",
                    help="check locality invariants every round")
    ps.add_argument("--out", default=None,
                    help="artifact file (default: stdout)")
    ps.add_argument("--stats", default=None, help="write run stats JSON here")
    ps.set_defaults(func=cmd_solve)

    pv = sub.add_parser("verify", help="re-check an artifact; exit 0 = ok, "
                                       "3 = violation")
    pv.add_argument("graph")
    pv.add_argument("demands")
    pv.add_argument("artifact")
    pv.add_argument("--eps", type=float, default=None,
                    help="residual tolerance (default: the artifact's)")
    pv.set_defaults(func=cmd_verify)

    pg = sub.add_parser("gen", help="write deterministic instances")
    pg.add_argument("--kind", required=True,
                    choices=["path", "grid", "random-regular", "random-gnm"])
    pg.add_argument("--n", type=int, default=None)
    pg.add_argument("--m", type=int, default=None)
    pg.add_argument("--d", type=int, default=None)
    pg.add_argument("--rows", type=int, default=None)
    pg.add_argument("--cols", type=int, default=None)
    pg.add_argument("--seed", type=int, default=0)
    pg.add_argument("--k", type=int, default=1, help="commodity count")
    pg.add_argument("--demand", action="append", default=None,
                    metavar="SPEC",
                    help="'pairs j s t d [...]' or 'random-balanced l0 l1'; "
                         "repeatable")
    pg.add_argument("--out-graph", default=None,
                    help="graph file (default: stdout)")
    pg.add_argument("--out-demands", default=None)
    pg.set_defaults(func=cmd_gen)

    pb = sub.add_parser("bench", help="work-unit sweeps against the "
                                      "locality budget")
    pb.add_argument("--ms", default="2000,20000,200000",
                    help="comma-separated edge counts (4-regular graphs)")
    pb.add_argument("--eps", type=float, default=0.2)
    pb.add_argument("--eps-list", default=None,
                    help="comma-separated eps sweep (overrides --eps)")
    pb.add_argument("--support", type=int, default=20,
                    help="demand support size")
    pb.add_argument("--l1", type=float, default=10.0,
                    help="demand l1 mass (0 = empty demand)")
    pb.add_argument("--seed", type=int, default=0)
    pb.add_argument("--out", default=None, help="table file (default: stdout)")
    pb.set_defaults(func=cmd_bench)
    return p


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
