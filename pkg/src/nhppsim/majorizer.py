"""Automatic piecewise-constant majorizers for monotone or Lipschitz intensities."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .intensity import StepIntensity

__all__ = ["StepMajorizer", "get_step_majorizer"]


@dataclass(frozen=True, eq=False)
class StepMajorizer(StepIntensity):
    """A step intensity built to dominate ``fun``; remembers how it was built."""

    lipschitz_K: float | None = None
    is_monotone: bool = False


def get_step_majorizer(fun, breaks, is_monotone: bool = False, K: float | None = None) -> StepMajorizer:
    """Upper bound of ``fun`` on each bin of ``breaks``.

    The bound on ``[a_m, b_m]`` is ``max(fun(a_m), fun(b_m)) + c (b_m - a_m) / 2``
    with ``c = 0`` for monotone ``fun`` and ``c = K`` for a K-Lipschitz one.
    Functions that are neither give no guarantee.
    """
    breaks = np.asarray(breaks, dtype=float).ravel()
    if breaks.size < 2 or np.any(np.diff(breaks) <= 0):
        raise DomainError("breaks must hold at least two strictly increasing values")
    if is_monotone:
        slope = 0.0
    else:
        if K is None:
            raise DomainError("a Lipschitz constant K is required when fun is not monotone")
        slope = float(K)
        if not slope >= 0:
            raise DomainError(f"K must be non-negative, got {K}")
    at_breaks = np.asarray(fun(breaks), dtype=float)
    if at_breaks.shape != breaks.shape:
        at_breaks = np.array([float(fun(t)) for t in breaks])
    values = np.maximum(at_breaks[:-1], at_breaks[1:]) + slope * np.diff(breaks) / 2.0
    return StepMajorizer(
        values, breaks, lipschitz_K=None if is_monotone else slope, is_monotone=bool(is_monotone)
    )
