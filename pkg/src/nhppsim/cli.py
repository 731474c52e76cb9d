"""Command-line front end: ``nhppsim generate | validate | bench``.

Intensity specs
---------------
Inline: ``--values 1,2,3 --interval 0,3`` (regular step),
``--values 1,2,3 --breaks 0,1,2,4`` (irregular step),
``--family linear|loglinear --alpha A --beta B --interval a,b``.

From a file with ``--spec``:

* ``.json``: ``{"type": "step", "values": [...], "breaks": [...]}``,
  ``{"type": "step", "values": [...], "interval": [a, b]}`` or
  ``{"type": "linear" | "loglinear", "alpha": A, "beta": B}`` (the interval
  then comes from ``--interval``).
* ``.csv``: rows ``t_break,value``; each row opens a bin, the final row
  closes the last bin and leaves ``value`` empty. Header optional.

Without a spec, ``--illustration`` selects the built-in example
``exp(0.2 t)(1 + sin t)`` on (0, 6 pi] with majorizers a, b, c.

Output
------
Events CSV: ``run_id,event_index,time``. Matrix CSV: one line per run,
empty cells pad short runs. JSON: list of ``{"run_id", "times"}`` or, with
``--layout matrix``, a list of arrays. Reports: JSON list of objects or CSV
with one row per sampler.

Exit codes: 0 ok, 2 usage, 3 invalid spec or domain error, 4 numeric failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .bench import batch_timings, sampler_timings, timings_to_csv
from .batch import matrix_to_csv, matrix_to_json
from .core import SamplerOptions
from .errors import DomainError, NHPPError, NumericError
from .intensity import LinearIntensity, LogLinearIntensity, StepIntensity, load_intensity
from .suite import ALGORITHMS, illustration_configs, make_sampler, run_series, spec_configs, validate_config
from .validation import reports_to_csv

EXIT_USAGE = 2
EXIT_DOMAIN = 3
EXIT_NUMERIC = 4
SEED_ENV = "NHPPSIM_SEED"


class UsageError(Exception):
    pass


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _pair(text: str) -> tuple[float, float]:
    vals = _floats(text)
    if len(vals) != 2:
        raise argparse.ArgumentTypeError(f"expected 'a,b', got {text!r}")
    return vals[0], vals[1]


def _seed(text: str) -> int:
    try:
        seed = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"seed must be an integer, got {text!r}") from None
    if not 0 <= seed < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in 64 unsigned bits")
    return seed


def _positive(text: str) -> int:
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if n < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {n}")
    return n


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return 0
    try:
        return _seed(raw)
    except argparse.ArgumentTypeError as exc:
        raise UsageError(f"{SEED_ENV}: {exc}") from None


def _add_spec_args(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("intensity")
    g.add_argument("--illustration", action="store_true", help="built-in example intensity")
    g.add_argument("--spec", help="intensity spec file (.json or .csv)")
    g.add_argument("--values", type=_floats, help="step rates, comma-separated")
    g.add_argument("--breaks", type=_floats, help="step breakpoints (irregular bins)")
    g.add_argument("--interval", type=_pair, help="a,b")
    g.add_argument("--family", choices=["step", "linear", "loglinear"])
    g.add_argument("--alpha", type=float)
    g.add_argument("--beta", type=float)


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=_seed, default=None, help=f"u64 seed (default ${SEED_ENV} or 0)")
    p.add_argument("--jobs", type=_positive, default=1, help="worker processes")
    p.add_argument("--output", "-o", help="write here instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nhppsim", description="Simulate non-homogeneous Poisson processes.")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="draw event series")
    gen.add_argument("--algo", choices=ALGORITHMS, required=True)
    _add_spec_args(gen)
    gen.add_argument("--runs", type=_positive, default=1)
    gen.add_argument("--at-most-1", action="store_true")
    gen.add_argument("--at-least-1", action="store_true")
    gen.add_argument("--at-most", type=_positive, help="keep the earliest k events")
    gen.add_argument("--min-events", type=_positive)
    gen.add_argument("--exactly", type=_positive, help="condition on exactly m events")
    gen.add_argument("--majorizer", help="a, b, c (illustration) or a constant rate")
    gen.add_argument("--numeric-inverse", action="store_true", help="invert the cumulative intensity numerically")
    gen.add_argument("--format", choices=["csv", "json"], default="csv")
    gen.add_argument("--layout", choices=["long", "matrix"], default="long")
    _add_common(gen)

    val = sub.add_parser("validate", help="count and event-time metrics over repeated runs")
    _add_spec_args(val)
    val.add_argument("--algo", action="append", help="restrict to these samplers (repeatable)")
    val.add_argument("--runs", type=_positive, default=10_000)
    val.add_argument("--boot", type=_positive, default=1000, help="bootstrap replicates for W1 p-values")
    val.add_argument("--time-bins", type=_positive, default=70)
    val.add_argument("--numeric-inverse", action="store_true")
    val.add_argument("--format", choices=["json", "csv"], default="json")
    _add_common(val)

    ben = sub.add_parser("bench", help="timing table")
    ben.add_argument("--reps", type=_positive)
    ben.add_argument("--first-only", action="store_true", help="time drawing only the first event")
    ben.add_argument("--batch", type=_positive, metavar="R", help="vectorised vs scalar loop over R series")
    ben.add_argument("--seed", type=_seed, default=None)
    ben.add_argument("--output", "-o")
    return parser


def _load_spec(args):
    """Intensity from the flags, or None for the illustration preset."""
    inline = args.values is not None or args.alpha is not None or args.beta is not None
    if sum([args.illustration, args.spec is not None, inline]) > 1:
        raise UsageError("give only one of --illustration, --spec and inline parameters")
    if args.spec is not None:
        try:
            spec = load_intensity(args.spec)
        except OSError as exc:
            raise DomainError(f"cannot read spec: {exc}") from None
        if isinstance(spec, (LinearIntensity, LogLinearIntensity)) and args.interval is None:
            raise UsageError(f"{type(spec).__name__} spec needs --interval")
        return spec
    if not inline:
        if args.interval is not None or args.breaks is not None:
            raise UsageError("--interval/--breaks without an intensity")
        return None
    algo = getattr(args, "algo", None)
    algo = algo if isinstance(algo, str) else None
    family = args.family or ("step" if args.values is not None else algo)
    if family in ("linear", "loglinear"):
        if args.alpha is None or args.beta is None or args.interval is None:
            raise UsageError(f"{family} intensity needs --alpha, --beta and --interval")
        if args.values is not None:
            raise UsageError("--values does not apply to linear or log-linear intensities")
        cls = LinearIntensity if family == "linear" else LogLinearIntensity
        return cls(args.alpha, args.beta)
    if family != "step" or args.values is None:
        raise UsageError("--alpha/--beta need --family linear|loglinear")
    if args.breaks is not None:
        if args.interval is not None:
            raise UsageError("give --breaks or --interval for a step intensity, not both")
        return StepIntensity(args.values, args.breaks)
    if args.interval is None:
        raise UsageError("step intensity needs --interval or --breaks")
    return StepIntensity.regular(args.values, args.interval)


def _interval_for(spec, args):
    if isinstance(spec, StepIntensity):
        return None
    return args.interval


def _write(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", newline="") as fh:
            fh.write(text)


def _events_long_csv(series) -> str:
    lines = ["run_id,event_index,time"]
    for run_id, times in enumerate(series):
        lines.extend(f"{run_id},{i},{float(t)!r}" for i, t in enumerate(times))
    return "\n".join(lines) + "\n"


def _as_matrix(series) -> np.ndarray:
    width = max((s.size for s in series), default=0)
    out = np.full((len(series), width), np.nan)
    for i, s in enumerate(series):
        out[i, : s.size] = s
    return out


def cmd_generate(args) -> int:
    spec = _load_spec(args)
    if spec is None and not args.illustration:
        raise UsageError("no intensity given (use --illustration, --spec or inline parameters)")
    if args.at_most_1 and args.at_most is not None:
        raise UsageError("--at-most-1 and --at-most are mutually exclusive")
    if args.exactly is not None and (args.min_events is not None or args.at_least_1):
        raise UsageError("--exactly cannot be combined with --min-events or --at-least-1")
    if args.min_events is not None and args.at_least_1 and args.min_events != 1:
        raise UsageError("--at-least-1 conflicts with --min-events > 1")
    if args.algo == "thinning" and ((args.min_events or 1) > 1 or args.exactly is not None):
        raise UsageError("thinning supports --at-least-1 but not --min-events > 1 or --exactly")
    if args.algo != "thinning" and args.majorizer is not None:
        raise UsageError("--majorizer only applies to --algo thinning")
    at_least_1 = args.at_least_1 or args.min_events == 1
    opts = SamplerOptions(at_most_1=args.at_most_1, at_least_1=at_least_1, at_most_k=args.at_most)
    majorizer = args.majorizer
    if majorizer is not None and majorizer not in ("a", "b", "c"):
        try:
            majorizer = float(majorizer)
        except ValueError:
            raise UsageError(f"--majorizer must be a, b, c or a number, got {majorizer!r}") from None
    config = make_sampler(
        args.algo,
        spec,
        interval=_interval_for(spec, args),
        opts=opts,
        min_events=args.exactly if args.exactly is not None else args.min_events,
        exactly=args.exactly is not None,
        majorizer=majorizer,
        numeric_inverse=args.numeric_inverse,
    )
    series, _ = run_series(config, args.runs, args.seed, jobs=args.jobs)
    if args.layout == "matrix":
        matrix = _as_matrix(series)
        text = matrix_to_csv(matrix) if args.format == "csv" else matrix_to_json(matrix) + "\n"
    elif args.format == "csv":
        text = _events_long_csv(series)
    else:
        text = json.dumps([{"run_id": i, "times": s.tolist()} for i, s in enumerate(series)]) + "\n"
    _write(text, args.output)
    return 0


def cmd_validate(args) -> int:
    spec = _load_spec(args)
    if spec is None:
        configs = illustration_configs(inverse="numeric" if args.numeric_inverse else "tabulated")
    else:
        configs = spec_configs(spec, _interval_for(spec, args))
    if args.algo:
        wanted = set(args.algo)
        names = {c.name for c in configs}
        # "thinning" selects every thinning variant of the preset
        chosen = [c for c in configs if c.name in wanted or c.name.split("_")[0] in wanted]
        unknown = {w for w in wanted if w not in names and not any(n.split("_")[0] == w for n in names)}
        if unknown:
            raise UsageError(f"unknown sampler(s) {sorted(unknown)}; choose from {sorted(names)}")
        configs = chosen
    reports = []
    for index, config in enumerate(configs):
        report, _ = validate_config(config, args.runs, args.seed, index=index, jobs=args.jobs,
                                    n_boot=args.boot, time_bins=args.time_bins)
        reports.append(report)
    if args.format == "csv":
        text = reports_to_csv(reports)
    else:
        text = json.dumps([r.to_dict() for r in reports], indent=2) + "\n"
    _write(text, args.output)
    return 0


def cmd_bench(args) -> int:
    if args.batch is not None:
        timings = batch_timings(args.batch, reps=args.reps or 3, first_only=args.first_only, seed=args.seed)
    else:
        timings = sampler_timings(reps=args.reps or 20, first_only=args.first_only, seed=args.seed)
    _write(timings_to_csv(timings), args.output)
    return 0


COMMANDS = {"generate": cmd_generate, "validate": cmd_validate, "bench": cmd_bench}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.seed is None:
            args.seed = _default_seed()
        return COMMANDS[args.command](args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"nhppsim: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericError as exc:
        print(f"nhppsim: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (NHPPError, ValueError) as exc:
        print(f"nhppsim: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
