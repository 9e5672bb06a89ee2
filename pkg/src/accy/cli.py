"""Command-line runner: ``accy <subcommand> [options]``.

Results are emitted as a JSON list (or CSV rows) of experiment records; the
exit status is 0 when every experiment passes and 1 otherwise.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from pathlib import Path

from .errors import InvalidOption, UnknownSubcommand
from .suite import SUBCOMMANDS, Options, experiments_for, run_experiments

OUTPUT_ENV = "ACCY_OUTPUT_DIR"
CSV_FIELDS = ("name", "claim", "measured", "expected", "provenance", "tolerance", "pass", "seed", "error")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise InvalidOption(message)


def _radii(text: str) -> tuple[float, float, int]:
    try:
        lo, hi, count = text.split(":")
        lo, hi, count = float(lo), float(hi), int(count)
    except ValueError:
        raise argparse.ArgumentTypeError("expected lo:hi:count")
    if not (0 < lo < hi) or count < 6:
        raise argparse.ArgumentTypeError("need 0 < lo < hi and count >= 6")
    return lo, hi, count


def _range(text: str) -> tuple[int, int]:
    try:
        lo, hi = (int(x) for x in text.split(".."))
    except ValueError:
        raise argparse.ArgumentTypeError("expected lo..hi")
    if not 1 <= lo <= hi:
        raise argparse.ArgumentTypeError("need 1 <= lo <= hi")
    return lo, hi


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="accy", description="Reproducible checks for asymptotically conical Calabi-Yau constructions.")
    p.add_argument("subcommand", help="one of: " + ", ".join(SUBCOMMANDS))
    p.add_argument("--n", type=int, default=None, help="complex dimension (stenzel, calabi, odp)")
    p.add_argument("--radii", type=_radii, default=(10.0, 1e4, 16), help="radius grid lo:hi:count")
    p.add_argument("--directions", type=_positive, default=4, help="link directions per rate fit")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--epsilon", type=float, default=0.01, help="rate-iteration increment")
    p.add_argument("--params", type=Path, default=None, help="JSON experiment descriptor")
    p.add_argument("--flat", type=int, default=None, help="restrict weights to flat R^m")
    p.add_argument("--range", type=_range, default=(2, 12), help="Grassmannian range lo..hi")
    p.add_argument("--output", type=Path, default=None, help="output file (default: stdout or $%s)" % OUTPUT_ENV)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--jobs", type=_positive, default=1, help="concurrent experiments")
    p.add_argument("--timing", action="store_true", help="include runtime_ms in records")
    return p


def parse_options(argv) -> tuple[str, Options, argparse.Namespace]:
    args = build_parser().parse_args(argv)
    if args.subcommand not in SUBCOMMANDS:
        raise UnknownSubcommand(f"unknown subcommand {args.subcommand!r}; choose from {', '.join(SUBCOMMANDS)}")
    if args.n is not None and args.n < 2:
        raise InvalidOption("--n must be at least 2")
    if args.flat is not None and args.flat < 3:
        raise InvalidOption("--flat must be at least 3")
    if not 0 < args.epsilon <= 0.1:
        raise InvalidOption("--epsilon must lie in (0, 0.1]")
    params = None
    if args.params is not None:
        try:
            params = json.loads(args.params.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise InvalidOption(f"cannot read --params: {exc}")
    opt = Options(n=args.n, radii=args.radii, directions=args.directions, seed=args.seed,
                  epsilon=args.epsilon, params=params, flat=args.flat, range=args.range)
    return args.subcommand, opt, args


def render(results, fmt: str = "json", timing: bool = False) -> str:
    records = [r.to_dict(timing) for r in results]
    if fmt == "json":
        return json.dumps(records, indent=2, sort_keys=True) + "\n"
    buf = io.StringIO()
    fields = CSV_FIELDS + (("runtime_ms",) if timing else ())
    wr = csv.DictWriter(buf, fieldnames=fields, extrasaction="ignore")
    wr.writeheader()
    for rec in records:
        wr.writerow({k: json.dumps(v) if isinstance(v, (list, dict)) else v for k, v in rec.items()})
    return buf.getvalue()


def run(subcommand: str, options: Options, jobs: int = 1):
    """Run one subcommand; returns ``(results, exit_status)``."""
    results = run_experiments(experiments_for(subcommand, options), jobs)
    return results, 0 if all(r.passed for r in results) else 1


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        sub, opt, args = parse_options(argv)
    except (UnknownSubcommand, InvalidOption) as exc:
        print(f"accy: error: {exc}", file=sys.stderr)
        return 2
    results, status = run(sub, opt, args.jobs)
    text = render(results, args.format, args.timing)
    out = args.output
    if out is None and os.environ.get(OUTPUT_ENV):
        out = Path(os.environ[OUTPUT_ENV]) / f"{sub}.{args.format}"
    if out is None:
        sys.stdout.write(text)
    else:
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text)
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'} {r.name}", file=sys.stderr)
    return status
