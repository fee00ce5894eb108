"""Command-line front end.

    gcgeom validate FILE.gg
    gcgeom classify FILE.gg --bracket derived:theta
    gcgeom theorem41 FILE.gg --json report.json
    gcgeom catalog sasakian-cone

Exit status: 0 when every requested check passes, 1 when a check fails,
2 for usage and parse errors.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import catalog, structfile
from .expr import SamplePlan
from .structures import CheckReport
from .suite import COMMANDS, RunResult, UsageError, run_command

EXIT_PASS, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


def _common(p: argparse.ArgumentParser):
    p.add_argument("--seed", type=int, default=None, help="sampling seed (default 42)")
    p.add_argument("--points", type=int, default=None, help="sample points per check (default 20)")
    p.add_argument("--tol", type=float, default=None, help="residual tolerance (default 1e-9)")
    p.add_argument("--bracket", default=None, help="courant or derived:<one-form name>")
    p.add_argument("--json", metavar="PATH", default=None,
                   help="write the JSON report to PATH ('-' for standard output)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gcgeom", description="Check generalized contact and complex structures.")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "validate": "axioms of every structure",
        "classify": "contact / strong / normal flags",
        "kahler": "commuting, integrable pair with a positive metric",
        "theorem1": "commutation of the product pair versus the factor conditions",
        "theorem41": "product Kähler verdict versus factor co-Kähler verdicts",
    }
    for cmd in COMMANDS:
        p = sub.add_parser(cmd, help=helps[cmd])
        p.add_argument("file", help="structure file (.gg)")
        _common(p)
    p = sub.add_parser("catalog", help="run a built-in entry")
    p.add_argument("name", nargs="?", help="entry name; omit with --list")
    p.add_argument("--list", action="store_true", help="list entries")
    _common(p)
    return parser


def _plan(args) -> SamplePlan:
    base = SamplePlan()
    return SamplePlan(args.seed if args.seed is not None else base.seed,
                      args.points if args.points is not None else base.count,
                      args.tol if args.tol is not None else base.tolerance)


def _emit(result: RunResult, plan: SamplePlan, source: str, json_path: str | None):
    report = json.dumps(result.to_dict(plan, source), indent=2, ensure_ascii=False) + "\n"
    if json_path == "-":
        sys.stdout.write(report)
        return
    if json_path:
        Path(json_path).write_text(report, encoding="utf-8")
    print(result.summary())


def _run_catalog(args) -> tuple[RunResult, SamplePlan]:
    plan = _plan(args)
    entry = catalog.load(args.name, plan, verify=False)
    checks, as_expected = [], {}
    for cmd, want in entry.expected.items():
        res = entry.run(cmd, args.bracket if cmd == "classify" else None)
        checks.append(CheckReport.combine(cmd, res.checks, res.checks[0].bracket if res.checks else None))
        as_expected[cmd] = res.passed == want
    extra = {"entry": entry.name, "note": entry.note,
             "expected": {k: "pass" if v else "fail" for k, v in entry.expected.items()},
             "as_expected": as_expected}
    return RunResult(f"catalog {entry.name}", checks, extra), plan


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0) and EXIT_USAGE
    try:
        if args.command == "catalog":
            if args.list or not args.name:
                for n in catalog.names():
                    print(n)
                return EXIT_PASS if args.list else EXIT_USAGE
            result, plan = _run_catalog(args)
            source = f"catalog:{args.name}"
        else:
            overrides = {"seed": args.seed, "points": args.points, "tol": args.tol}
            ws = structfile.load(args.file, overrides=overrides)
            plan = ws.plan
            source = Path(args.file).name
            result = run_command(ws, args.command, args.bracket)
    except structfile.StructureBuildError as exc:
        plan = _plan(args)
        failed = CheckReport(f"build {exc.name}", False, float(exc.residual or 1.0), plan.tolerance,
                             exc.witness, str(exc.cause))
        _emit(RunResult(args.command, [failed]), plan, Path(getattr(args, "file", "")).name, args.json)
        return EXIT_FAIL
    except (structfile.StructureFileError, UsageError, KeyError, ValueError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) else str(exc)
        print(f"gcgeom: error: {msg}", file=sys.stderr)
        return EXIT_USAGE
    _emit(result, plan, source, args.json)
    return EXIT_PASS if result.passed else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
