"""Small shared types: intervals and sampler options."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DomainError


class Interval(NamedTuple):
    """Half-open time interval (a, b]."""

    a: float
    b: float

    @property
    def length(self) -> float:
        return self.b - self.a


def as_interval(interval) -> Interval:
    """Validate a 2-sequence ``(a, b)`` with ``a <= b``."""
    try:
        a, b = interval
    except (TypeError, ValueError):
        raise DomainError(f"interval must be a pair (a, b), got {interval!r}") from None
    a, b = float(a), float(b)
    if not (math.isfinite(a) and math.isfinite(b)):
        raise DomainError(f"interval bounds must be finite, got ({a}, {b})")
    if a > b:
        raise DomainError(f"interval must satisfy a <= b, got ({a}, {b})")
    return Interval(a, b)


@dataclass(frozen=True)
class SamplerOptions:
    """Output constraints shared by the samplers.

    ``at_most_1`` keeps only the first event; ``at_most_k`` keeps the earliest
    k; ``at_least_1`` conditions on the series being non-empty. Both
    ``at_most_1`` and ``at_least_1`` give exactly one event.
    """

    at_most_1: bool = False
    at_least_1: bool = False
    at_most_k: int | None = None

    def __post_init__(self):
        if self.at_most_k is not None and int(self.at_most_k) < 1:
            raise DomainError(f"at_most_k must be a positive integer, got {self.at_most_k}")

    @property
    def limit(self) -> int | None:
        """Maximum number of events to return, or None for no cap."""
        if self.at_most_1:
            return 1
        return None if self.at_most_k is None else int(self.at_most_k)

    @property
    def min_events(self) -> int:
        return 1 if self.at_least_1 else 0


DEFAULT_OPTIONS = SamplerOptions()


def resolve_options(opts: SamplerOptions | None) -> SamplerOptions:
    return DEFAULT_OPTIONS if opts is None else opts


def keep_earliest(times: np.ndarray, limit: int | None) -> np.ndarray:
    """Sort ``times`` and return at most ``limit`` of the earliest."""
    if limit is not None and times.size > limit:
        if limit == 1:
            return np.array([times.min()])
        times = np.partition(times, limit - 1)[:limit]
    times.sort()
    return times


def clip_open_left(times: np.ndarray, a: float, b: float) -> np.ndarray:
    """Guard against round-off placing a point at or before ``a`` or past ``b``."""
    if times.size:
        np.clip(times, np.nextafter(a, math.inf), b, out=times)
    return times


EMPTY = np.empty(0, dtype=float)


def empty() -> np.ndarray:
    return EMPTY.copy()


def evaluate(fun, t: np.ndarray) -> np.ndarray:
    """Evaluate ``fun`` elementwise on ``t``; falls back to a Python loop for scalar-only callables."""
    try:
        out = np.asarray(fun(t), dtype=float)
    except (TypeError, ValueError):
        out = None
    if out is None or out.shape != t.shape:
        out = np.fromiter((float(fun(x)) for x in t.ravel()), dtype=float, count=t.size).reshape(t.shape)
    return out
