"""General NHPPP samplers: thinning, inversion, order statistics, conditional draws."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (
    SamplerOptions,
    as_interval,
    clip_open_left,
    empty,
    evaluate,
    keep_earliest,
    resolve_options,
)
from .errors import DomainError, ImpossibleConditionError, MajorizationError, NumericError
from .intensity import CumulativeIntensity, LinearIntensity, LogLinearIntensity, StepIntensity
from .ppp import ppp_sequential
from .rng import RngStream, truncated_poisson
from .special import (
    draw_sc_linear,
    draw_sc_loglinear,
    draw_sc_step,
    draw_sc_step_regular,
    sample_lambda_scale,
)

__all__ = [
    "ThinningTally",
    "draw_thinning",
    "draw_inversion",
    "draw_orderstats",
    "draw_conditional",
    "draw",
    "ztdraw_intensity",
    "ztdraw_cumulative_intensity",
    "MAJORIZATION_SLACK",
    "MAX_ZT_RETRIES",
]

MAJORIZATION_SLACK = 1e-12
MAX_ZT_RETRIES = 10**6


@dataclass
class ThinningTally:
    """Running count of thinning proposals and acceptances."""

    proposals: int = 0
    accepted: int = 0

    @property
    def efficiency(self) -> float:
        return self.accepted / self.proposals if self.proposals else math.nan


def _as_majorizer(majorizer, interval):
    if isinstance(majorizer, StepIntensity):
        span = majorizer.interval
        if interval is not None and as_interval(interval) != span:
            raise DomainError(f"step majorizer spans {span}, sampling interval is {tuple(interval)}")
        return majorizer, span
    if interval is None:
        raise DomainError("an interval is required for a non-step majorizer")
    interval = as_interval(interval)
    if isinstance(majorizer, (LinearIntensity, LogLinearIntensity)):
        return majorizer, interval
    try:
        level = float(majorizer)
    except (TypeError, ValueError):
        raise DomainError(
            f"majorizer must be a constant, StepIntensity, LinearIntensity or LogLinearIntensity, "
            f"got {type(majorizer).__name__}"
        ) from None
    return StepIntensity([level], [interval.a, interval.b]), interval


def _proposals(stream, maj, interval, opts: SamplerOptions) -> np.ndarray:
    if isinstance(maj, StepIntensity):
        if maj.is_regular:
            return draw_sc_step_regular(stream, maj.values, interval, opts)
        return draw_sc_step(stream, maj, None, opts)
    if isinstance(maj, LinearIntensity):
        return draw_sc_linear(stream, maj.alpha, maj.beta, interval, opts)
    return draw_sc_loglinear(stream, maj.alpha, maj.beta, interval, opts)


def _thin(stream, lam, maj, proposals, limit, tally) -> np.ndarray:
    """Keep each proposal with probability lambda/lambda*, in time order, stopping at ``limit``."""
    kept = []
    found = 0
    chunk = max(proposals.size, 1) if limit is None else max(16, 4 * limit)
    for start in range(0, proposals.size, chunk):
        z = proposals[start:start + chunk]
        value = evaluate(lam, z)
        bound = np.asarray(maj(z), dtype=float)
        bad = value > bound * (1.0 + MAJORIZATION_SLACK)
        if np.any(bad) or np.any(value < 0) or np.any(np.isnan(value)):
            i = int(np.flatnonzero(bad | (value < 0) | np.isnan(value))[0])
            if not bad[i]:
                raise DomainError(f"intensity must be non-negative, got {value[i]!r} at t={z[i]!r}")
            raise MajorizationError(float(z[i]), float(value[i]), float(bound[i]))
        u = stream.uniform(z.size)
        accept = u * bound < value
        if limit is not None:
            idx = np.flatnonzero(accept)
            if found + idx.size >= limit:
                last = idx[limit - found - 1]
                accept[last + 1:] = False
                if tally is not None:
                    tally.proposals += last + 1
                    tally.accepted += limit - found
                kept.append(z[accept])
                break
        if tally is not None:
            tally.proposals += z.size
            tally.accepted += int(accept.sum())
        found += int(accept.sum())
        kept.append(z[accept])
    return np.concatenate(kept) if kept else empty()


def draw_thinning(
    stream: RngStream,
    lam,
    majorizer,
    interval=None,
    opts: SamplerOptions | None = None,
    tally: ThinningTally | None = None,
) -> np.ndarray:
    """Thinning of proposals drawn from an easy-to-sample majorizer.

    ``majorizer`` may be a constant, a :class:`StepIntensity` (for instance
    from :func:`get_step_majorizer`), or a linear or log-linear intensity.
    Every proposal is checked for ``lam(t) <= majorizer(t)``; a violation
    raises :class:`MajorizationError`. With ``at_least_1`` whole series are
    redrawn from the zero-truncated proposal process until one survives.
    """
    opts = resolve_options(opts)
    maj, interval = _as_majorizer(majorizer, interval)
    proposal_opts = SamplerOptions(at_least_1=opts.at_least_1)
    attempts = MAX_ZT_RETRIES if opts.at_least_1 else 1
    for _ in range(attempts):
        proposals = _proposals(stream, maj, interval, proposal_opts)
        kept = _thin(stream, lam, maj, proposals, opts.limit, tally)
        if kept.size or not opts.at_least_1:
            return kept
    raise NumericError(f"no event accepted after {MAX_ZT_RETRIES} zero-truncated proposal series")


def ztdraw_intensity(stream, lam, majorizer, interval=None, opts=None, tally=None):
    """Thinning conditioned on at least one event."""
    opts = resolve_options(opts)
    opts = SamplerOptions(at_most_1=opts.at_most_1, at_least_1=True, at_most_k=opts.at_most_k)
    return draw_thinning(stream, lam, majorizer, interval, opts, tally)


def _map_back(cum: CumulativeIntensity, z: np.ndarray) -> np.ndarray:
    if z.size == 0:
        return z
    a, b = cum.interval
    return clip_open_left(cum.inverse(cum.range_L[0] + z), a, b)


def draw_inversion(stream: RngStream, cum: CumulativeIntensity, opts: SamplerOptions | None = None) -> np.ndarray:
    """Time-transformation sampler.

    A unit-rate process is drawn sequentially on ``(Lambda(a), Lambda(b)]``
    and mapped back through the inverse cumulative intensity. Only the first
    arrival is generated when one event is requested.
    """
    opts = resolve_options(opts)
    mass = cum.mass
    if opts.at_least_1 or opts.limit == 1:
        z = sample_lambda_scale(stream, mass, opts)
    elif mass > 0:
        z = ppp_sequential(stream, (0.0, mass), 1.0, at_most=opts.limit)
    else:
        z = empty()
    return _map_back(cum, z)


def _orderstat_draw(stream, cum, n, limit) -> np.ndarray:
    if n == 0:
        return empty()
    z = cum.mass * stream.uniform(n)
    return _map_back(cum, keep_earliest(z, limit))


def draw_orderstats(stream: RngStream, cum: CumulativeIntensity, opts: SamplerOptions | None = None) -> np.ndarray:
    """Order-statistics sampler: draw the count, then that many iid event times.

    Earliest-k truncation happens on the cumulative scale, before inversion;
    the map is monotone so the result is the same.
    """
    opts = resolve_options(opts)
    if opts.at_least_1:
        return draw_conditional(stream, cum, 1, opts)
    n = int(stream.poisson(cum.mass)) if cum.mass > 0 else 0
    return _orderstat_draw(stream, cum, n, opts.limit)


def draw_conditional(
    stream: RngStream,
    cum: CumulativeIntensity,
    min_events: int = 1,
    opts: SamplerOptions | None = None,
    exactly: bool = False,
) -> np.ndarray:
    """Order statistics conditioned on at least (or, with ``exactly``, exactly) ``min_events`` events."""
    opts = resolve_options(opts)
    min_events = int(min_events)
    if min_events < 1:
        raise DomainError(f"min_events must be >= 1, got {min_events}")
    if not cum.mass > 0:
        raise ImpossibleConditionError(
            f"cannot condition on >= {min_events} event(s): zero mass on {tuple(cum.interval)}"
        )
    n = min_events if exactly else truncated_poisson(stream, cum.mass, min_events)
    return _orderstat_draw(stream, cum, n, opts.limit)


def ztdraw_cumulative_intensity(stream, cum, opts=None):
    """Order statistics conditioned on at least one event."""
    return draw_conditional(stream, cum, 1, opts)


def draw(
    stream: RngStream,
    *,
    lam=None,
    majorizer=None,
    cum: CumulativeIntensity | None = None,
    Lambda=None,
    Lambda_inv=None,
    interval=None,
    opts: SamplerOptions | None = None,
) -> np.ndarray:
    """Dispatch to the most specific sampler the arguments allow.

    A cumulative intensity with an inverse goes to order statistics, one
    without an inverse to inversion with numeric (Brent) inversion; an
    intensity plus majorizer goes to thinning.
    """
    if cum is None and Lambda is not None:
        if interval is None:
            raise DomainError("an interval is required with Lambda")
        cum = CumulativeIntensity(Lambda, interval, Lambda_inv)
    if cum is not None:
        if cum.has_inverse:
            return draw_orderstats(stream, cum, opts)
        return draw_inversion(stream, cum, opts)
    if lam is not None and majorizer is not None:
        return draw_thinning(stream, lam, majorizer, interval, opts)
    raise DomainError("supply either a cumulative intensity or an intensity with a majorizer")
