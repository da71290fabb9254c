"""Command line entry point: ``hamsim cost|simulate|validate|sweep``.

Exit codes: 0 when every required check passes, 1 when a validation check
fails, 2 for usage or configuration errors.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from . import __version__
from .errors import HamsimError, SpecError
from .harness import ExperimentSpec, Report, cost, cost_sweep, emit, load_spec, simulate, sweep, validate
from .suites import UnknownSuiteError

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--spec", help="experiment spec file (INI sections, see README)")
    common.add_argument("--seed", type=int, help="master seed (overrides the spec file)")
    common.add_argument("--shots", type=int, help="shot count M (overrides the spec file)")
    common.add_argument("--out", default="hamsim-out", help="output directory (default: hamsim-out)")
    common.add_argument("--format", choices=("csv", "json", "plotdata"), default="csv", dest="fmt",
                        help="report format for the main table (default: csv)")
    common.add_argument("--workers", type=int, default=1, help="worker threads for shot blocks (default: 1)")
    common.add_argument("--suites", help="validate only: comma separated suite ids, or 'all'")

    parser = _Parser(prog="hamsim", description="Error-mitigated Hamiltonian simulation laboratory")
    parser.add_argument("--version", action="version", version=f"hamsim {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("cost", parents=[common], help="resource estimates (JSON report plus CSV sweep)")
    sub.add_parser("simulate", parents=[common], help="run one experiment")
    sub.add_parser("validate", parents=[common], help="run validation suites")
    sub.add_parser("sweep", parents=[common], help="run the spec's sweep axis")
    return parser


def _apply_overrides(spec: ExperimentSpec, args) -> ExperimentSpec:
    changes = {}
    if args.seed is not None:
        if args.seed < 0:
            raise SpecError("seed must be nonnegative", field="seed")
        changes["seed"] = args.seed
    if args.shots is not None:
        if args.shots < 1:
            raise SpecError("shots must be at least 1", field="shots")
        changes["shots"] = args.shots
    if args.suites is not None:
        changes["suites"] = args.suites
    return spec.replace(**changes) if changes else spec


def _write_timing(out: Path, command: str, seconds: float, workers: int) -> None:
    (out / "timing.json").write_text(json.dumps({"command": command, "wall_seconds": seconds,
                                                 "workers": workers}, indent=2) + "\n")


def _summary(report: Report) -> str:
    required = [c for c in report.checks if c.required]
    return f"{report.name}: {sum(c.passed for c in required)}/{len(required)} required checks passed"


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.workers < 1:
        print("hamsim: error: --workers must be at least 1", file=sys.stderr)
        return EXIT_USAGE
    out = Path(args.out)
    started = time.perf_counter()
    try:
        spec = None
        if args.spec is not None:
            spec = _apply_overrides(load_spec(args.spec), args)
        elif args.command != "validate":
            print(f"hamsim {args.command}: error: --spec is required", file=sys.stderr)
            return EXIT_USAGE

        if args.command == "validate":
            report = validate(spec, args.workers, seed=args.seed, suites=args.suites)
            paths = [emit(report, args.fmt, out)]
        elif args.command == "cost":
            report = cost(spec)
            paths = [emit(report, "json", out), emit(cost_sweep(spec), "csv", out, "cost_sweep")]
            if args.fmt == "plotdata":
                paths.append(emit(cost_sweep(spec), "plotdata", out, "cost_sweep"))
        elif args.command == "simulate":
            report = simulate(spec, args.workers)
            paths = [emit(report, args.fmt, out)]
        else:
            report = sweep(spec, args.workers)
            paths = [emit(report, args.fmt, out)]
    except (SpecError, UnknownSuiteError) as exc:
        print(f"hamsim {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"hamsim {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (HamsimError, ValueError) as exc:
        print(f"hamsim {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    _write_timing(out, args.command, time.perf_counter() - started, args.workers)

    for c in report.checks:
        status = "PASS" if c.passed else ("FAIL" if c.required else "INFO")
        print(f"[{status}] {c.name}: {c.value!r} {c.relation} {c.bound!r} (margin {c.margin:.3g})")
    print(_summary(report))
    for p in paths:
        print(f"wrote {p}")
    return EXIT_OK if report.passed else EXIT_FAIL


def main(argv=None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
