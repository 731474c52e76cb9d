"""Sampler configurations and repeated-run validation.

A configuration wraps a function ``(stream, tally) -> event times``. Run
``j`` of configuration ``k`` draws from substream ``k * 2**32 + j`` of the
seed, so results do not depend on how runs are split across workers.
"""

from __future__ import annotations

import multiprocessing as mp
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .core import SamplerOptions, resolve_options
from .errors import DomainError
from .general import ThinningTally, draw_conditional, draw_inversion, draw_orderstats, draw_thinning
from .illustration import ILLUSTRATION, Illustration
from .intensity import CumulativeIntensity, LinearIntensity, LogLinearIntensity, StepIntensity, cumulative_of
from .rng import RngStream
from .special import draw_sc_linear, draw_sc_loglinear, draw_sc_step, draw_sc_step_regular
from .validation import DEFAULT_BOOT, ValidationReport, event_time_gof, validate_counts

__all__ = [
    "ALGORITHMS",
    "SamplerConfig",
    "RunResult",
    "make_sampler",
    "illustration_configs",
    "spec_configs",
    "run_series",
    "run_config",
    "validate_config",
]

ALGORITHMS = ("thinning", "inversion", "orderstats", "step", "linear", "loglinear")
SUBSTREAM_STRIDE = 2**32


@dataclass
class SamplerConfig:
    name: str
    sample: Callable  # (stream, tally) -> times
    cum: CumulativeIntensity
    thinning: bool = False


@dataclass
class RunResult:
    name: str
    counts: np.ndarray
    times: np.ndarray
    tally: ThinningTally = field(default_factory=ThinningTally)


def _closed_form(spec, interval, opts):
    if isinstance(spec, StepIntensity):
        if spec.is_regular:
            return lambda s, t: draw_sc_step_regular(s, spec.values, spec.interval, opts)
        return lambda s, t: draw_sc_step(s, spec, None, opts)
    if isinstance(spec, LinearIntensity):
        return lambda s, t: draw_sc_linear(s, spec.alpha, spec.beta, interval, opts)
    return lambda s, t: draw_sc_loglinear(s, spec.alpha, spec.beta, interval, opts)


def make_sampler(
    algo: str,
    spec=None,
    *,
    interval=None,
    opts: SamplerOptions | None = None,
    min_events: int | None = None,
    exactly: bool = False,
    majorizer=None,
    numeric_inverse: bool = False,
    example: Illustration | None = None,
) -> SamplerConfig:
    """Build one sampler configuration.

    ``spec`` is a step, linear or log-linear intensity; without it the
    worked example is used (``majorizer`` then may be ``"a"``, ``"b"`` or
    ``"c"``). ``min_events`` above one switches to the conditional
    order-statistics draw, which thinning does not support.
    """
    opts = resolve_options(opts)
    if algo not in ALGORITHMS:
        raise DomainError(f"unknown algorithm {algo!r}")
    conditional = exactly or (min_events is not None and min_events > 1)
    if conditional and algo == "thinning":
        raise DomainError("min_events > 1 and exactly-m are not available with thinning")

    if spec is None:
        example = example or ILLUSTRATION
        if algo in ("step", "linear", "loglinear"):
            raise DomainError(f"algorithm {algo!r} needs an explicit {algo} intensity")
        cum = example.cumulative("numeric" if numeric_inverse else "tabulated")
        if algo == "thinning":
            key = "c" if majorizer is None else majorizer
            majors = example.majorizers()
            try:
                maj = majors[key] if isinstance(key, str) and key in majors else float(key)
            except ValueError:
                raise DomainError(f"majorizer must be a, b, c or a number, got {key!r}") from None
            span = None if isinstance(maj, StepIntensity) else example.interval
            return SamplerConfig(
                f"thinning_{key}",
                lambda s, t: draw_thinning(s, example.intensity, maj, span, opts, tally=t),
                cum,
                True,
            )
    else:
        if algo in ("step", "linear", "loglinear"):
            want = {"step": StepIntensity, "linear": LinearIntensity, "loglinear": LogLinearIntensity}[algo]
            if not isinstance(spec, want):
                raise DomainError(f"algorithm {algo!r} needs a {algo} intensity, got {type(spec).__name__}")
        cum = cumulative_of(spec, interval)
        if numeric_inverse:
            cum = cum.without_inverse()
        interval = cum.interval
        if algo == "thinning":
            maj = spec if majorizer is None else majorizer
            if isinstance(maj, str):
                raise DomainError("named majorizers a/b/c belong to the illustration preset")
            return SamplerConfig(
                "thinning", lambda s, t: draw_thinning(s, spec, maj, interval, opts, tally=t), cum, True
            )
        if algo in ("step", "linear", "loglinear") and not conditional:
            return SamplerConfig(algo, _closed_form(spec, interval, opts), cum)

    if conditional:
        m = int(min_events if min_events is not None else 1)
        return SamplerConfig(
            f"{algo}_conditional", lambda s, t: draw_conditional(s, cum, m, opts, exactly=exactly), cum
        )
    if algo == "inversion":
        return SamplerConfig("inversion", lambda s, t: draw_inversion(s, cum, opts), cum)
    return SamplerConfig("orderstats", lambda s, t: draw_orderstats(s, cum, opts), cum)


def illustration_configs(example: Illustration = ILLUSTRATION, inverse: str = "tabulated") -> list[SamplerConfig]:
    """Thinning with majorizers a, b, c, then inversion and order statistics."""
    numeric = inverse == "numeric"
    configs = [make_sampler("thinning", majorizer=k, example=example) for k in ("a", "b", "c")]
    configs += [make_sampler(a, numeric_inverse=numeric, example=example) for a in ("inversion", "orderstats")]
    return configs


def spec_configs(spec, interval=None, opts: SamplerOptions | None = None) -> list[SamplerConfig]:
    """Closed-form sampler, inversion, order statistics and self-majorized thinning."""
    family = {StepIntensity: "step", LinearIntensity: "linear", LogLinearIntensity: "loglinear"}[type(spec)]
    return [make_sampler(a, spec, interval=interval, opts=opts)
            for a in (family, "inversion", "orderstats", "thinning")]


def _run_range(config: SamplerConfig, seed: int, index: int, start: int, stop: int):
    tally = ThinningTally()
    series = []
    for j in range(start, stop):
        stream = RngStream(seed, index * SUBSTREAM_STRIDE + j)
        series.append(np.asarray(config.sample(stream, tally), dtype=float))
    return series, tally


# configurations hold closures, so workers are forked and find them here
_ACTIVE: dict[int, SamplerConfig] = {}


def _run_active(key, seed, index, start, stop):
    return _run_range(_ACTIVE[key], seed, index, start, stop)


def run_series(config: SamplerConfig, runs: int, seed: int = 0, index: int = 0,
               jobs: int = 1) -> tuple[list[np.ndarray], ThinningTally]:
    """Per-run event arrays in run order; identical for any ``jobs``."""
    if runs < 1:
        raise DomainError(f"runs must be >= 1, got {runs}")
    if jobs <= 1 or runs < 2 * jobs:
        return _run_range(config, seed, index, 0, runs)
    bounds = np.linspace(0, runs, jobs + 1).astype(int).tolist()
    key = id(config)
    _ACTIVE[key] = config
    try:
        with ProcessPoolExecutor(max_workers=jobs, mp_context=mp.get_context("fork")) as pool:
            parts = list(pool.map(_run_active, [key] * jobs, [seed] * jobs, [index] * jobs,
                                  bounds[:-1], bounds[1:]))
    finally:
        _ACTIVE.pop(key, None)
    series = [s for part, _ in parts for s in part]
    tally = ThinningTally(sum(t.proposals for _, t in parts), sum(t.accepted for _, t in parts))
    return series, tally


def run_config(config: SamplerConfig, runs: int, seed: int = 0, index: int = 0, jobs: int = 1) -> RunResult:
    """Counts and pooled times over ``runs`` independent series."""
    series, tally = run_series(config, runs, seed, index, jobs)
    counts = np.array([s.size for s in series], dtype=np.int64)
    return RunResult(config.name, counts, np.concatenate(series), tally)


def validate_config(config: SamplerConfig, runs: int, seed: int = 0, index: int = 0, jobs: int = 1,
                    n_boot: int = DEFAULT_BOOT, time_bins: int = 70) -> tuple[ValidationReport, RunResult]:
    """Count and event-time report for one configuration."""
    result = run_config(config, runs, seed, index, jobs)
    boot_stream = RngStream(seed, index * SUBSTREAM_STRIDE + SUBSTREAM_STRIDE - 1)
    report = validate_counts(result.counts, config.cum.mass, config.name, n_boot=n_boot, stream=boot_stream)
    if result.times.size:
        gof = event_time_gof(result.times, config.cum, bins=time_bins, n_boot=n_boot, stream=boot_stream)
        report.time_chi2, report.time_chi2_p = gof.statistic, gof.p_value
        report.time_W1, report.time_W1_p = gof.w1, gof.w1_p
    if config.thinning:
        report.efficiency = result.tally.efficiency
    return report, result
