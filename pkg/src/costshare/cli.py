"""Command line: ``costshare {gen,analyze,verify,paths}``.

Exit codes: 0 ok, 2 bad input, 3 enumeration cap exceeded, 4 verification
failure (or no equilibrium for a stable protocol), 5 tie detected, 6 I/O.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time

from . import fileformat as ff
from .costs import perturb_for_ties
from .equilibrium import DEFAULT_MAX_PROFILES, best_response_dynamics, poa_report, strategy_spaces
from .errors import BadParams, CostShareError, NoEquilibrium, TieDetected
from .graph import enumerate_paths
from .instances import GENERATORS, SHAPES, GenParams, random_instance
from .protocols import PROTOCOL_NAMES, make_protocol
from .rat import as_rat, format_rat
from .routing import profile_cost

log = logging.getLogger("costshare")

EXIT_OK = 0


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("global options")
    g.add_argument("--max-profiles", type=int, default=argparse.SUPPRESS,
                   help=f"strategy-profile cap (default {DEFAULT_MAX_PROFILES})")
    g.add_argument("--max-paths", type=int, default=argparse.SUPPRESS,
                   help="per-player path cap (default: none)")
    g.add_argument("--threads", type=int, default=argparse.SUPPRESS,
                   help="enumeration workers (default 1)")
    g.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="random seed (default 0)")
    g.add_argument("--out", default=argparse.SUPPRESS, help="output file (default: stdout)")
    g.add_argument("--timing", action="store_true", default=argparse.SUPPRESS,
                   help="include wall-clock runtime in reports")
    g.add_argument("-v", "--verbose", action="store_true", default=argparse.SUPPRESS)
    return p


DEFAULTS = {"max_profiles": DEFAULT_MAX_PROFILES, "max_paths": None, "threads": 1, "seed": 0,
            "out": None, "timing": False, "verbose": False}


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    ap = argparse.ArgumentParser(prog="costshare", parents=[common],
                                 description="Exact analysis of network cost-sharing games.")
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", parents=[common], help="write a generated instance file")
    g.add_argument("--family", required=True,
                   help="one of: " + ", ".join(list(GENERATORS) + ["random"]))
    g.add_argument("--n", type=int)
    g.add_argument("--c", help="hub cost for multicast-const-lb, e.g. 1 or 5/2")
    g.add_argument("--k", type=int)
    g.add_argument("--digits", type=int)
    g.add_argument("--players", type=int, help="number of symmetric players")
    g.add_argument("--graph", choices=("dag", "spg"), default="dag", help="random: graph family")
    g.add_argument("--shape", choices=SHAPES, default="concave", help="random: cost shape")
    g.add_argument("--n-max", type=int, help="random: player universe size")
    g.add_argument("--max-vertices", type=int, default=6)
    g.add_argument("--max-edges", type=int, default=10)
    g.add_argument("--mode", choices=("symmetric", "multicast", "general"), default="symmetric")
    g.add_argument("--protocol", choices=PROTOCOL_NAMES, help="embed a protocol block")

    a = sub.add_parser("analyze", parents=[common], help="enumerate equilibria and report PoA")
    a.add_argument("instance")
    a.add_argument("--protocol", choices=PROTOCOL_NAMES,
                   help="protocol (default: the instance file's protocol block)")
    a.add_argument("--mode", choices=("enumerate", "brd"), default="enumerate")
    a.add_argument("--perturb", type=int, default=None, metavar="R",
                   help="apply the tie-breaking perturbation with grid 10^-R "
                        "(nwa applies R=3 when the file carries no perturbation)")
    a.add_argument("--start", help="brd start profile as JSON, e.g. '[[0],[1]]'")
    a.add_argument("--max-iters", type=int, default=1000)

    v = sub.add_parser("verify", parents=[common], help="run a verification suite")
    v.add_argument("--suite", choices=("paper-facts", "properties"), required=True)

    p = sub.add_parser("paths", parents=[common], help="list source-sink paths")
    p.add_argument("instance")
    p.add_argument("--source", type=int)
    p.add_argument("--sink", type=int)
    return ap


def _emit(text: str, out) -> None:
    if out:
        ff.write_text(out, text)
    else:
        sys.stdout.write(text)


def cmd_gen(args) -> int:
    fam = args.family
    if fam == "random":
        players = args.players or 2
        params = GenParams(args.graph, args.seed, args.max_vertices, args.max_edges, players,
                           args.n_max, args.shape, args.mode,
                           max_profiles=args.max_profiles if "max_profiles" in args.explicit else None)
        inst = random_instance(params)
    elif fam in GENERATORS:
        kwargs = {}
        try:
            if fam == "multicast-const-lb":
                inst = GENERATORS[fam](_need(args.n, "--n"), as_rat(_need(args.c, "--c")))
            elif fam == "static-share-lb":
                if args.players:
                    kwargs["players"] = args.players
                inst = GENERATORS[fam](_need(args.k, "--k"), **kwargs)
            elif fam == "overcharge-lb":
                if args.players:
                    kwargs["players"] = args.players
                inst = GENERATORS[fam](args.digits or 12, **kwargs)
            elif fam == "dag-convex-lb":
                inst = GENERATORS[fam](_need(args.n, "--n"), players=args.players)
            else:
                if args.digits:
                    kwargs["digits"] = args.digits
                inst = GENERATORS[fam](_need(args.n, "--n"), **kwargs)
        except (ValueError, ZeroDivisionError) as exc:
            raise BadParams(str(exc)) from exc
    else:
        raise BadParams(f"unknown family {fam!r}")
    if args.protocol:
        import dataclasses
        inst = dataclasses.replace(inst, protocol={"name": args.protocol, "params": {}})
    _emit(ff.instance_to_json(inst), args.out)
    return EXIT_OK


def _need(value, flag):
    if value is None:
        raise BadParams(f"{flag} is required for this family")
    return value


def _parse_profile(text: str):
    try:
        raw = json.loads(text)
        return tuple(tuple(int(e) for e in path) for path in raw)
    except (ValueError, TypeError) as exc:
        raise BadParams(f"bad --start profile: {exc}") from exc


def cmd_analyze(args) -> int:
    t0 = time.perf_counter()
    inst = ff.read_instance(args.instance)
    block = inst.protocol or {}
    name = args.protocol or block.get("name")
    if name is None:
        raise BadParams("no protocol given and the instance has no protocol block")
    params = block.get("params", {}) if block.get("name") == name else {}
    r = args.perturb
    if r is None and name == "nwa" and inst.perturbation is None:
        r = 3
    if r is not None:
        inst = perturb_for_ties(inst, r)
    proto = make_protocol(name, inst, params)
    caps = {"max_profiles": args.max_profiles, "max_paths": args.max_paths}
    if args.mode == "brd":
        strategies = strategy_spaces(inst, args.max_paths)
        start = _parse_profile(args.start) if args.start else tuple(s[0] for s in strategies)
        for idx, path in enumerate(start):
            p = inst.players[idx]
            if len(start) != inst.n or not inst.graph.is_path(path, p.source, p.sink):
                raise BadParams(f"start path {list(path)} is not valid for player {p.id}")
        final, converged, trace, cycled = best_response_dynamics(inst, proto, start, args.max_iters,
                                                                 strategies)
        out = {
            "version": ff.REPORT_VERSION,
            "instance_digest": ff.digest(inst),
            "protocol": ff._json_safe(proto.describe()),
            "mode": "brd",
            "caps": caps,
            "start": [list(p) for p in start],
            "final": [list(p) for p in final],
            "converged": converged,
            "cycled": cycled,
            "steps": len(trace),
            "trace": [{"player": pl, "from": list(a), "to": list(b),
                       "old_total": format_rat(o), "new_total": format_rat(nw)}
                      for pl, a, b, o, nw in trace],
            "final_cost": format_rat(profile_cost(final, proto.cost_tables())),
        }
        if args.timing:
            out["runtime"] = {"seconds": round(time.perf_counter() - t0, 3)}
        _emit(ff.dumps(out), args.out)
        return EXIT_OK
    rep = poa_report(inst, proto, args.max_profiles, args.threads, args.max_paths)
    out = ff.report_to_dict(rep, inst, proto, caps)
    if args.timing:
        out["runtime"] = {"seconds": round(time.perf_counter() - t0, 3)}
    _emit(ff.dumps(out), args.out)
    if rep.tie_detector_hits:
        raise TieDetected(f"{rep.tie_detector_hits} exact ties between deviation totals")
    if rep.no_equilibrium and proto.stable:
        raise NoEquilibrium(f"{proto.name} is stable but no PNE was found")
    return EXIT_OK


def cmd_verify(args) -> int:
    from .verify import run_suite

    results = run_suite(args.suite, args.seed)
    summary = {
        "suite": args.suite,
        "seed": args.seed,
        "passed": all(r.passed for r in results),
        "checks": [{"name": r.name, "passed": r.passed, "detail": r.detail} for r in results],
    }
    if args.timing:
        summary["runtime"] = {r.name: round(r.seconds, 3) for r in results}
    for r in results:
        print(r.line(), file=sys.stderr)
    _emit(ff.dumps(summary), args.out)
    return EXIT_OK if summary["passed"] else 4


def cmd_paths(args) -> int:
    inst = ff.read_instance(args.instance)
    if args.source is not None or args.sink is not None:
        if args.source is None or args.sink is None:
            raise BadParams("--source and --sink go together")
        pairs = [(args.source, args.sink)]
    else:
        pairs = sorted({(p.source, p.sink) for p in inst.players})
    out = []
    for s, t in pairs:
        paths = enumerate_paths(inst.graph, s, t, cap=args.max_paths)
        out.append({"source": s, "sink": t, "count": len(paths), "paths": [list(p) for p in paths]})
    _emit(ff.dumps({"pairs": out}), args.out)
    return EXIT_OK


COMMANDS = {"gen": cmd_gen, "analyze": cmd_analyze, "verify": cmd_verify, "paths": cmd_paths}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    args.explicit = {k for k in DEFAULTS if hasattr(args, k)}
    for k, v in DEFAULTS.items():
        if not hasattr(args, k):
            setattr(args, k, v)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except CostShareError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
