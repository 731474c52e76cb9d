"""Closed-form samplers: piecewise-constant, linear and log-linear intensities.

All of them draw on the cumulative-intensity scale and map back through the
exact inverse; the ``ztdraw_*`` variants condition on at least one event.
"""

from __future__ import annotations

import math

import numpy as np

from .core import SamplerOptions, as_interval, clip_open_left, empty, keep_earliest, resolve_options
from .errors import ImpossibleConditionError
from .intensity import (
    CumulativeIntensity,
    LinearIntensity,
    LogLinearIntensity,
    StepIntensity,
    cumulative_of,
)
from .rng import RngStream, truncated_poisson

__all__ = [
    "draw_sc_step",
    "draw_sc_step_regular",
    "draw_sc_linear",
    "draw_sc_loglinear",
    "ztdraw_sc_step",
    "ztdraw_sc_step_regular",
    "ztdraw_sc_linear",
    "ztdraw_sc_loglinear",
    "sample_lambda_scale",
]

_ZT = SamplerOptions(at_least_1=True)


def sample_lambda_scale(stream: RngStream, mass: float, opts: SamplerOptions, min_events: int | None = None) -> np.ndarray:
    """Sorted event positions on the unit-rate scale ``(0, mass]``.

    Handles the option combinations shared by every inversion-based
    sampler. A single requested event is drawn directly as the first
    arrival (an exponential, truncated to ``mass`` when conditioning),
    without generating the rest of the series.
    """
    m = opts.min_events if min_events is None else min_events
    if mass <= 0:
        if m > 0:
            raise ImpossibleConditionError(f"cannot draw >= {m} event(s) from zero total mass")
        return empty()
    limit = opts.limit
    if limit == 1 and m <= 1:
        e = float(stream.standard_exponential())
        if m == 1:
            # first arrival conditioned to fall inside (0, mass]
            u = float(stream.uniform())
            e = -math.log1p(u * math.expm1(-mass))
            return np.array([min(e, mass)])
        return np.array([e]) if e < mass else empty()
    n = truncated_poisson(stream, mass, m) if m > 0 else int(stream.poisson(mass))
    if n == 0:
        return empty()
    z = mass * stream.uniform(n)
    return keep_earliest(z, limit)


def _draw_closed_form(stream, cum: CumulativeIntensity, opts) -> np.ndarray:
    opts = resolve_options(opts)
    a, b = cum.interval
    z = sample_lambda_scale(stream, cum.mass, opts)
    if z.size == 0:
        return z
    times = cum.inverse(cum.range_L[0] + z)
    return clip_open_left(times, a, b)


def draw_sc_step(stream: RngStream, values, breaks, opts: SamplerOptions | None = None) -> np.ndarray:
    """Piecewise-constant intensity on arbitrary breakpoints.

    Inverts the piecewise-linear cumulative intensity by binary search of
    the cumulative mass table.
    """
    spec = values if isinstance(values, StepIntensity) else StepIntensity(values, breaks)
    return _draw_closed_form(stream, cumulative_of(spec), opts)


def draw_sc_step_regular(stream: RngStream, values, interval, opts: SamplerOptions | None = None) -> np.ndarray:
    """Piecewise-constant intensity on equal-width bins.

    Each event's bin comes from a multinomial split of the total count and
    its position is ``a + (bin + U) * width``, so no search is needed.
    """
    opts = resolve_options(opts)
    a, b = as_interval(interval)
    values = np.asarray(values, dtype=float).ravel()
    spec = StepIntensity.regular(values, (a, b))
    width = (b - a) / values.size
    masses = values * width
    total = float(masses.sum())
    limit = opts.limit
    if limit == 1:
        return _draw_closed_form(stream, cumulative_of(spec), opts)
    m = opts.min_events
    if total <= 0:
        if m:
            raise ImpossibleConditionError("cannot draw >= 1 event from zero total mass")
        return empty()
    n = truncated_poisson(stream, total, m) if m else int(stream.poisson(total))
    if n == 0:
        return empty()
    counts = stream.generator.multinomial(n, masses / total)
    bins = np.repeat(np.arange(values.size), counts)
    times = a + (bins + stream.uniform(n)) * width
    times = clip_open_left(times, a, b)
    return keep_earliest(times, limit)


def draw_sc_linear(stream: RngStream, alpha: float, beta: float, interval, opts: SamplerOptions | None = None) -> np.ndarray:
    """Intensity ``max(alpha + beta t, 0)``; no events where it is clamped to 0."""
    return _draw_closed_form(stream, cumulative_of(LinearIntensity(alpha, beta), interval), opts)


def draw_sc_loglinear(stream: RngStream, alpha: float, beta: float, interval, opts: SamplerOptions | None = None) -> np.ndarray:
    """Intensity ``exp(alpha + beta t)``."""
    return _draw_closed_form(stream, cumulative_of(LogLinearIntensity(alpha, beta), interval), opts)


def _zt(opts: SamplerOptions | None) -> SamplerOptions:
    if opts is None:
        return _ZT
    return SamplerOptions(at_most_1=opts.at_most_1, at_least_1=True, at_most_k=opts.at_most_k)


def ztdraw_sc_step(stream, values, breaks, opts=None):
    return draw_sc_step(stream, values, breaks, _zt(opts))


def ztdraw_sc_step_regular(stream, values, interval, opts=None):
    return draw_sc_step_regular(stream, values, interval, _zt(opts))


def ztdraw_sc_linear(stream, alpha, beta, interval, opts=None):
    return draw_sc_linear(stream, alpha, beta, interval, _zt(opts))


def ztdraw_sc_loglinear(stream, alpha, beta, interval, opts=None):
    return draw_sc_loglinear(stream, alpha, beta, interval, _zt(opts))
