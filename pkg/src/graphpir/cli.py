"""Command-line interface.

Subcommands: capacity, simulate, verify, fixtures regen, report. JSON
results go to stdout, a one-line human summary to stderr. Exit codes:
0 success, 2 precondition violation, 3 guarantee violation, 4 bad input.
"""

from __future__ import annotations

import argparse
import json
import sys
from itertools import combinations

from .capacity import capacity_report
from .errors import FormatError, GraphPirError, GuaranteeViolation, PreconditionError
from .fixtures import regenerate
from .scheme import build_instance
from .simnet import SessionConfig, run_session
from .storage import load_pattern_file, pattern_from_document
from .verify import (
    EnumerationBudget,
    verify_correctness,
    verify_privacy_exhaustive,
    verify_security_exhaustive,
)

EXIT_OK = 0
EXIT_PRECONDITION = 2
EXIT_GUARANTEE = 3
EXIT_BAD_INPUT = 4


def _emit(payload: dict, summary: str) -> None:
    json.dump(payload, sys.stdout, indent=2, sort_keys=True)
    sys.stdout.write("\n")
    print(summary, file=sys.stderr)


def _load_config(path: str) -> SessionConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise FormatError(path, f"cannot read: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise FormatError(path, f"invalid JSON: {exc}") from exc
    return SessionConfig.from_document(doc)


def _cmd_capacity(args) -> int:
    pattern, x, t, _q = load_pattern_file(args.pattern)
    report = capacity_report(pattern, x, t, elimination_cap=args.cap)
    _emit(
        report.to_json_dict(),
        f"capacity: lower={report.lower} upper={report.upper}"
        f" {'matched' if report.matched else 'open'}",
    )
    return EXIT_OK


def _cmd_simulate(args) -> int:
    config = _load_config(args.config)
    report = run_session(config, scheduler=args.scheduler)
    _emit(
        report.to_json_dict(),
        f"simulate: mode={report.mode} rate={report.rate}"
        f" downloads={report.total_download} matched={report.matched}",
    )
    return EXIT_OK if report.matched else EXIT_GUARANTEE


def _cmd_verify(args) -> int:
    config = _load_config(args.config)
    if config.mode == "composite":
        raise PreconditionError("verify operates on base-scheme configurations")
    instance = build_instance(
        config.pattern, config.x, config.t, q=config.q,
        compute_ready=config.mode == "compute",
    )
    budget = EnumerationBudget(args.budget)
    checks = {}
    failed = False

    wanted = [args.privacy, args.security, args.correctness]
    if not any(wanted):
        args.correctness = True

    if args.correctness:
        rep = verify_correctness(
            instance, trials=args.trials, seed=config.seed,
            include_compute=config.mode == "compute",
        )
        checks["correctness"] = {
            "trials": rep.trials,
            "failures": len(rep.failures),
            "ok": rep.ok,
        }
        failed |= not rep.ok

    if args.privacy:
        groups = _colluder_groups(args.colluders, instance.n_servers, config.t)
        results = {}
        for group in groups:
            ok = verify_privacy_exhaustive(instance, group, budget)
            results[",".join(str(n) for n in group)] = ok
            failed |= not ok
        checks["privacy"] = results

    if args.security:
        groups = _colluder_groups(args.colluders, instance.n_servers, config.x)
        results = {}
        for group in groups:
            res = verify_security_exhaustive(instance, group, budget)
            results[",".join(str(n) for n in group)] = {
                "ok": res.ok,
                "partial": res.partial,
                "states": res.states,
            }
            failed |= not res.ok
        checks["security"] = results

    _emit({"checks": checks, "ok": not failed},
          f"verify: {'FAIL' if failed else 'ok'}")
    return EXIT_GUARANTEE if failed else EXIT_OK


def _colluder_groups(raw: str | None, n_servers: int, size: int):
    if raw:
        group = tuple(sorted({int(p) for p in raw.split(",")}))
        for n in group:
            if not 1 <= n <= n_servers:
                raise PreconditionError(f"colluder {n} not in [1..{n_servers}]")
        return [group]
    if size < 1:
        raise PreconditionError("no colluders to check at this protection level")
    return list(combinations(range(1, n_servers + 1), size))


def _cmd_fixtures(args) -> int:
    if args.action != "regen":
        raise PreconditionError(f"unknown fixtures action {args.action!r}")
    written = regenerate(args.dir)
    _emit(
        {"written": [str(p) for p in written]},
        f"fixtures: wrote {len(written)} files to {args.dir}",
    )
    return EXIT_OK


def _cmd_report(args) -> int:
    from .report import render_report  # matplotlib import deferred to use

    pattern, x, t, _q = load_pattern_file(args.pattern)
    result = render_report(pattern, x, t, args.out_dir)
    _emit(result, f"report: wrote {len(result['files'])} files to {args.out_dir}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="graphpir",
        description="Private information retrieval over graph-replicated storage",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("capacity", help="exact capacity bounds for a pattern")
    p.add_argument("pattern", help="pattern JSON document")
    p.add_argument("--cap", type=int, default=20, help="elimination search cap on N")
    p.set_defaults(fn=_cmd_capacity)

    p = sub.add_parser("simulate", help="run one retrieval session")
    p.add_argument("config", help="session config JSON")
    p.add_argument("--scheduler", choices=("serial", "threads"), default="serial")
    p.set_defaults(fn=_cmd_simulate)

    p = sub.add_parser("verify", help="check correctness/privacy/security")
    p.add_argument("config", help="session config JSON")
    p.add_argument("--privacy", action="store_true")
    p.add_argument("--security", action="store_true")
    p.add_argument("--correctness", action="store_true")
    p.add_argument("--colluders", help="comma-separated server ids, e.g. 1,3")
    p.add_argument("--budget", type=int, default=10_000_000)
    p.add_argument("--trials", type=int, default=100)
    p.set_defaults(fn=_cmd_verify)

    p = sub.add_parser("fixtures", help="bundled reference patterns")
    p.add_argument("action", choices=("regen",))
    p.add_argument("--dir", default="fixtures")
    p.set_defaults(fn=_cmd_fixtures)

    p = sub.add_parser("report", help="capacity report with figures and CSV")
    p.add_argument("pattern", help="pattern JSON document")
    p.add_argument("--out-dir", default="report")
    p.set_defaults(fn=_cmd_report)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except FormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    except GuaranteeViolation as exc:
        print(f"guarantee violated: {exc}", file=sys.stderr)
        return EXIT_GUARANTEE
    except PreconditionError as exc:
        print(f"precondition violated: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except GraphPirError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT


if __name__ == "__main__":
    sys.exit(main())
