"""Command-line front end: ``netmaint {generate,solve,evaluate,report}``.

Exit codes: 0 success, 1 usage or input error, 2 infeasible or failed
solve, 3 time limit reached with the gap still at or above ``--abs-gap``.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .exceptions import NetmaintError
from .generate import generate_instance, random_layered_network
from .instance import (evaluate_schedule, parse_instance, parse_schedule, serialize_instance,
                       serialize_schedule)
from .master import Mode, SolveReport, SolverConfig, format_table, solve_instance

EXIT_OK, EXIT_USAGE, EXIT_FAILED, EXIT_GAP = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on bad flags; route that to our usage code
    def error(self, message):
        raise UsageError(message)


def _mode(value):
    try:
        return Mode.parse(value)
    except NetmaintError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="netmaint", description="Maintenance scheduling for maximum network throughput.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("generate", help="write a random instance")
    g.add_argument("--set", type=int, default=1, choices=(1, 2, 3), dest="set_id",
                   help="instance set controlling window sizes")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--nodes", type=int, default=8, help="node count including source and sink")
    g.add_argument("--layers", type=int, default=3, help="number of interior layers")
    g.add_argument("--density", type=float, default=0.5)
    g.add_argument("--horizon", type=int, default=None, help="pack windows into this many periods")
    g.add_argument("--jobs-per-arc", type=int, nargs=2, default=None, metavar=("MIN", "MAX"))
    g.add_argument("--out", required=True)

    s = sub.add_parser("solve", help="solve an instance")
    s.add_argument("--instance", required=True)
    s.add_argument("--mode", type=_mode, default=Mode.MAIN, help="dbd, precuts, main or lpr")
    s.add_argument("--time-limit", type=float, default=300.0)
    s.add_argument("--abs-gap", type=float, default=0.999)
    s.add_argument("--lpr-max-iters", type=int, default=20)
    s.add_argument("--no-branch-priority", action="store_true",
                   help="branch on any fractional binary instead of arc variables first")
    s.add_argument("--backend", choices=("highs", "simplex"), default="highs")
    s.add_argument("--out", help="schedule output path")
    s.add_argument("--report", help="report output path (JSON)")

    e = sub.add_parser("evaluate", help="print the throughput of a schedule")
    e.add_argument("--instance", required=True)
    e.add_argument("--schedule", required=True)

    r = sub.add_parser("report", help="print stored reports as a table")
    r.add_argument("reports", nargs="+")
    return p


def _read(path: str, flag: str) -> bytes:
    try:
        with open(path, "rb") as fh:
            return fh.read()
    except OSError as exc:
        raise UsageError(f"{flag}: cannot read {path}: {exc.strerror}") from None


def _write(path: str, data: bytes) -> None:
    with open(path, "wb") as fh:
        fh.write(data)


def _distinct(inputs, outputs):
    seen = {os.path.abspath(p) for p in inputs if p}
    for p in outputs:
        if p and os.path.abspath(p) in seen:
            raise UsageError(f"output path {p} is also an input")


def _generate(args, out) -> int:
    net = random_layered_network(args.seed, args.nodes, args.layers, args.density)
    kw = {} if args.jobs_per_arc is None else {"jobs_per_arc": tuple(args.jobs_per_arc)}
    inst = generate_instance(args.set_id, net, args.seed, horizon=args.horizon, **kw)
    _write(args.out, serialize_instance(inst))
    print(f"wrote {args.out}: {net.n_arcs - 1} arcs, {len(inst.requests)} requests, "
          f"horizon {inst.horizon}", file=out)
    return EXIT_OK


def _solve(args, out) -> int:
    _distinct([args.instance], [args.out, args.report])
    if args.out and args.report and os.path.abspath(args.out) == os.path.abspath(args.report):
        raise UsageError("--out and --report must differ")
    inst = parse_instance(_read(args.instance, "--instance"))
    config = SolverConfig(mode=args.mode, time_limit=args.time_limit, abs_gap=args.abs_gap,
                          lpr_max_iters=args.lpr_max_iters,
                          branch_priority=not args.no_branch_priority, backend=args.backend)
    schedule, report, _ = solve_instance(inst, config)
    if args.out and schedule is not None:
        _write(args.out, serialize_schedule(schedule))
    if args.report:
        _write(args.report, (report.to_json() + "\n").encode("utf-8"))
    print(format_table([report]), file=out)
    if schedule is None or report.status in ("infeasible", "numerical_failure"):
        return EXIT_FAILED
    if report.status == "time_limit" and report.abs_gap >= config.abs_gap:
        return EXIT_GAP
    return EXIT_OK


def _evaluate(args, out) -> int:
    inst = parse_instance(_read(args.instance, "--instance"))
    schedule = parse_schedule(_read(args.schedule, "--schedule"))
    print(evaluate_schedule(inst, schedule), file=out)
    return EXIT_OK


def _report(args, out) -> int:
    reports = []
    for path in args.reports:
        try:
            doc = json.loads(_read(path, "report"))
        except json.JSONDecodeError as exc:
            raise UsageError(f"report {path}: malformed JSON: {exc}") from None
        reports.append(SolveReport.from_dict(doc))
    print(format_table(reports), file=out)
    return EXIT_OK


COMMANDS = {"generate": _generate, "solve": _solve, "evaluate": _evaluate, "report": _report}


def run(argv=None, out=None, err=None) -> int:
    out = sys.stdout if out is None else out
    err = sys.stderr if err is None else err
    try:
        args = build_parser().parse_args(argv)
        return COMMANDS[args.command](args, out)
    except UsageError as exc:
        print(f"netmaint: error: {exc}", file=err)
        return EXIT_USAGE
    except (NetmaintError, ValueError) as exc:
        print(f"netmaint: error: {exc}", file=err)
        return EXIT_USAGE


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
