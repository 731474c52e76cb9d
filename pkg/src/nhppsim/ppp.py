"""Homogeneous (constant-rate) Poisson point process on (a, b]."""

from __future__ import annotations

import math

import numpy as np

from .core import as_interval, clip_open_left, empty, keep_earliest
from .errors import DomainError, ImpossibleConditionError
from .rng import RngStream, truncated_poisson

__all__ = ["ppp_sequential", "ppp_orderstat", "ppp_n", "ztppp", "ppp_next_n"]


def _check_rate(rate: float) -> float:
    rate = float(rate)
    if not math.isfinite(rate) or rate < 0:
        raise DomainError(f"rate must be finite and non-negative, got {rate}")
    return rate


def _check_cap(at_most):
    if at_most is None:
        return None
    at_most = int(at_most)
    if at_most < 1:
        raise DomainError(f"at_most must be a positive integer, got {at_most}")
    return at_most


def ppp_sequential(stream: RngStream, interval, rate: float, at_most: int | None = None) -> np.ndarray:
    """Events from cumulative exponential inter-arrival times.

    Inter-arrivals are generated in blocks and accumulated until the running
    time passes ``b`` or ``at_most`` events are collected.
    """
    a, b = as_interval(interval)
    rate = _check_rate(rate)
    at_most = _check_cap(at_most)
    if rate == 0 or a == b:
        return empty()
    mean = 1.0 / rate
    expected = rate * (b - a)
    chunks = []
    t = a
    found = 0
    while True:
        block = int(expected + 4.0 * math.sqrt(expected) + 8.0)
        if at_most is not None:
            block = min(block, at_most - found)
        arrivals = t + np.cumsum(stream.standard_exponential(block) * mean)
        inside = arrivals[arrivals < b]
        chunks.append(inside)
        found += inside.size
        if inside.size < block or (at_most is not None and found >= at_most):
            break
        t = arrivals[-1]
    times = np.concatenate(chunks)
    return clip_open_left(times, a, b)


def _uniform_times(stream: RngStream, a: float, b: float, n: int) -> np.ndarray:
    times = a + (b - a) * stream.uniform(n)
    return clip_open_left(times, a, b)


def ppp_orderstat(stream: RngStream, interval, rate: float, at_most: int | None = None) -> np.ndarray:
    """Draw the count, then place that many sorted uniforms on the interval."""
    a, b = as_interval(interval)
    rate = _check_rate(rate)
    at_most = _check_cap(at_most)
    if rate == 0 or a == b:
        return empty()
    n = int(stream.poisson(rate * (b - a)))
    if n == 0:
        return empty()
    return keep_earliest(_uniform_times(stream, a, b, n), at_most)


def ppp_n(stream: RngStream, interval, n: int) -> np.ndarray:
    """Exactly ``n`` events, i.e. the process conditioned on its count."""
    a, b = as_interval(interval)
    n = int(n)
    if n < 0:
        raise DomainError(f"n must be non-negative, got {n}")
    if n == 0:
        return empty()
    if a == b:
        raise ImpossibleConditionError("cannot place events in an empty interval")
    times = _uniform_times(stream, a, b, n)
    times.sort()
    return times


def ztppp(
    stream: RngStream,
    interval,
    rate: float,
    min_events: int = 1,
    at_most: int | None = None,
) -> np.ndarray:
    """Constant-rate process conditioned on at least ``min_events`` events."""
    a, b = as_interval(interval)
    rate = float(rate)
    at_most = _check_cap(at_most)
    if not rate > 0 or not math.isfinite(rate) or a == b:
        raise ImpossibleConditionError(
            f"at least {min_events} event(s) impossible with rate {rate} on ({a}, {b}]"
        )
    min_events = int(min_events)
    if min_events < 1:
        raise DomainError(f"min_events must be >= 1, got {min_events}")
    n = truncated_poisson(stream, rate * (b - a), min_events)
    return keep_earliest(_uniform_times(stream, a, b, n), at_most)


def ppp_next_n(stream: RngStream, rate: float, n: int, t0: float = 0.0) -> np.ndarray:
    """The next ``n`` events after ``t0`` on an unbounded horizon."""
    rate = _check_rate(rate)
    if rate == 0:
        raise ImpossibleConditionError("no events ever occur at rate 0")
    n = int(n)
    if n < 0:
        raise DomainError(f"n must be non-negative, got {n}")
    return t0 + np.cumsum(stream.standard_exponential(n) / rate)
