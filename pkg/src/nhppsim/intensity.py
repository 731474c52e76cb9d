"""Intensity functions, cumulative intensities and their inverses.

Closed-form intensity families are small frozen dataclasses that evaluate
vectorised over numpy arrays. :func:`cumulative_of` turns one of them into a
:class:`CumulativeIntensity` with an exact inverse; arbitrary cumulative
intensities can be inverted with :func:`numeric_inverse` (Brent) or with a
tabulated, linearly interpolated inverse.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np
from scipy import optimize

from .core import Interval, as_interval
from .errors import BracketError, DomainError, NumericError

__all__ = [
    "StepIntensity",
    "LinearIntensity",
    "LogLinearIntensity",
    "CumulativeIntensity",
    "cumulative_of",
    "numeric_inverse",
    "tabulated_inverse",
    "intensity_from_dict",
    "read_step_csv",
    "DEFAULT_TOL",
]

DEFAULT_TOL = 1e-10
DEFAULT_MAXITER = 200
_LOGLINEAR_FLAT = 1e-12
_EXP_MAX = 709.0


def _frozen_array(x) -> np.ndarray:
    arr = np.array(x, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class StepIntensity:
    """Piecewise-constant intensity: ``values[m]`` on ``[breaks[m], breaks[m+1])``."""

    values: np.ndarray
    breaks: np.ndarray

    def __post_init__(self):
        values = _frozen_array(self.values).ravel()
        breaks = _frozen_array(self.breaks).ravel()
        if values.size < 1:
            raise DomainError("a step intensity needs at least one value")
        if breaks.size != values.size + 1:
            raise DomainError(
                f"need len(breaks) == len(values) + 1, got {breaks.size} and {values.size}"
            )
        if not np.all(np.isfinite(values)) or np.any(values < 0):
            raise DomainError("step values must be finite and non-negative")
        if not np.all(np.isfinite(breaks)) or np.any(np.diff(breaks) <= 0):
            raise DomainError("step breakpoints must be finite and strictly increasing")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "breaks", breaks)

    @classmethod
    def regular(cls, values, interval) -> StepIntensity:
        """Equal-width bins spanning ``interval``."""
        a, b = as_interval(interval)
        values = np.asarray(values, dtype=float).ravel()
        return cls(values, np.linspace(a, b, values.size + 1))

    @property
    def interval(self) -> Interval:
        return Interval(float(self.breaks[0]), float(self.breaks[-1]))

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.breaks)

    @property
    def is_regular(self) -> bool:
        w = self.widths
        return bool(np.allclose(w, w[0], rtol=1e-12, atol=0.0))

    @property
    def masses(self) -> np.ndarray:
        return self.values * self.widths

    def bin_of(self, t) -> np.ndarray:
        idx = np.searchsorted(self.breaks, t, side="right") - 1
        return np.clip(idx, 0, self.values.size - 1)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        out = self.values[self.bin_of(t)]
        outside = (t < self.breaks[0]) | (t > self.breaks[-1])
        return np.where(outside, 0.0, out)

    def integral(self) -> float:
        return float(self.masses.sum())


@dataclass(frozen=True)
class LinearIntensity:
    """``max(alpha + beta * t, 0)``."""

    alpha: float
    beta: float

    def __call__(self, t):
        return np.maximum(self.alpha + self.beta * np.asarray(t, dtype=float), 0.0)

    def support(self, interval) -> tuple[float, float] | None:
        """Sub-interval of ``interval`` on which the intensity is positive."""
        a, b = as_interval(interval)
        alpha, beta = self.alpha, self.beta
        if beta == 0:
            return (a, b) if alpha > 0 else None
        root = -alpha / beta
        lo, hi = (max(a, root), b) if beta > 0 else (a, min(b, root))
        return (lo, hi) if lo < hi else None


@dataclass(frozen=True)
class LogLinearIntensity:
    """``exp(alpha + beta * t)``."""

    alpha: float
    beta: float

    def __call__(self, t):
        return np.exp(self.alpha + self.beta * np.asarray(t, dtype=float))


@dataclass(frozen=True, eq=False)
class CumulativeIntensity:
    """A cumulative intensity on ``interval`` with an optional inverse.

    ``Lambda`` and ``Lambda_inv`` must accept numpy arrays. Without
    ``Lambda_inv`` inversion falls back to :func:`numeric_inverse`.
    """

    Lambda: Callable
    interval: Interval
    Lambda_inv: Callable | None = None
    range_L: tuple[float, float] | None = None
    tol: float = DEFAULT_TOL
    analytic: bool = field(default=False, compare=False)

    def __post_init__(self):
        interval = as_interval(self.interval)
        object.__setattr__(self, "interval", interval)
        if self.range_L is None:
            lo = float(np.asarray(self.Lambda(interval.a)))
            hi = float(np.asarray(self.Lambda(interval.b)))
        else:
            lo, hi = (float(v) for v in self.range_L)
        if not (math.isfinite(lo) and math.isfinite(hi)):
            raise DomainError(f"cumulative intensity must be finite on the interval, got ({lo}, {hi})")
        if hi < lo:
            raise DomainError(f"cumulative intensity decreases over the interval: ({lo}, {hi})")
        object.__setattr__(self, "range_L", (lo, hi))

    @property
    def mass(self) -> float:
        lo, hi = self.range_L
        return hi - lo

    @property
    def has_inverse(self) -> bool:
        return self.Lambda_inv is not None

    def without_inverse(self) -> CumulativeIntensity:
        """Same cumulative intensity, forcing numeric inversion."""
        return replace(self, Lambda_inv=None, analytic=False)

    def inverse(self, z) -> np.ndarray:
        """Map masses ``z`` (absolute, in ``range_L``) back to times."""
        z = np.asarray(z, dtype=float)
        if self.Lambda_inv is not None:
            return np.asarray(self.Lambda_inv(z), dtype=float)
        return self.numeric_inverse_sorted(z)

    def numeric_inverse_sorted(self, z) -> np.ndarray:
        """Brent inversion of each entry; sorted inputs reuse the previous root as bracket."""
        z = np.asarray(z, dtype=float)
        flat = z.ravel()
        out = np.empty_like(flat)
        a, b = self.interval
        lo = a
        prev_z = -math.inf
        for i, zi in enumerate(flat):
            left = lo if zi >= prev_z else a
            out[i] = numeric_inverse(self.Lambda, zi, (left, b), tol=self.tol)
            lo, prev_z = out[i], zi
        return out.reshape(z.shape)

    def normalized_cdf(self, t) -> np.ndarray:
        """Distribution function of a single event time given the count."""
        lo, hi = self.range_L
        if hi == lo:
            raise DomainError("zero total mass: event-time law undefined")
        t = np.clip(np.asarray(t, dtype=float), *self.interval)
        return (np.asarray(self.Lambda(t), dtype=float) - lo) / (hi - lo)


def numeric_inverse(
    Lambda: Callable,
    z: float,
    bracket,
    tol: float = DEFAULT_TOL,
    maxiter: int = DEFAULT_MAXITER,
) -> float:
    """Smallest ``t`` in ``bracket`` with ``Lambda(t) = z``, by Brent's method.

    The result satisfies ``|Lambda(t) - z| <= tol * max(1, |z|)``. When the
    preimage of ``z`` is an interval (zero-intensity span) its left edge is
    returned.
    """
    a, b = as_interval(bracket)
    z = float(z)
    thr = tol * max(1.0, abs(z))

    def f(t):
        return float(np.asarray(Lambda(t))) - z

    fa, fb = f(a), f(b)
    if fa > thr or fb < -thr:
        raise BracketError(
            f"target {z!r} outside [Lambda(a), Lambda(b)] = [{fa + z!r}, {fb + z!r}]"
        )
    if fa >= -thr:
        return a
    if abs(fb) <= thr and fb < 0:
        t = b
    else:
        scale = max(1.0, abs(a), abs(b))
        try:
            t, res = optimize.brentq(
                f, a, b, xtol=1e-15 * scale, rtol=4 * np.finfo(float).eps,
                maxiter=maxiter, full_output=True, disp=False,
            )
        except ValueError as exc:
            raise NumericError(f"Brent inversion failed for z={z!r}: {exc}") from exc
        if not res.converged:
            raise NumericError(f"Brent inversion did not converge for z={z!r} in {maxiter} iterations")
    if abs(f(t)) > thr:
        raise NumericError(f"inversion residual {abs(f(t))!r} exceeds tolerance {thr!r}")
    return _leftmost(f, a, t, thr)


def _leftmost(f, a: float, t: float, thr: float) -> float:
    """Slide a root left across a plateau of ``f`` to its infimum."""
    probe = t - 1e-6 * max(t - a, 1e-300)
    if probe <= a or f(probe) < -thr:
        return t
    lo, hi = a, t
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if f(mid) >= -thr:
            hi = mid
        else:
            lo = mid
    return hi


def tabulated_inverse(Lambda: Callable, interval, step: float = 1e-3) -> Callable:
    """Inverse by linear interpolation of ``Lambda`` tabulated every ``step``."""
    a, b = as_interval(interval)
    n = max(2, int(math.ceil((b - a) / step)) + 1)
    grid = np.linspace(a, b, n)
    values = np.asarray(Lambda(grid), dtype=float)
    # plateaus: keep the leftmost abscissa of each repeated value
    keep = np.concatenate(([True], np.diff(values) > 0))
    xp, fp = values[keep], grid[keep]

    def inverse(z):
        return np.interp(z, xp, fp)

    return inverse


def _step_cumulative(spec: StepIntensity) -> CumulativeIntensity:
    breaks = spec.breaks
    cum = np.concatenate(([0.0], np.cumsum(spec.masses)))
    values = spec.values

    def Lambda(t):
        return np.interp(t, breaks, cum)

    def Lambda_inv(z):
        z = np.asarray(z, dtype=float)
        m = np.searchsorted(cum[1:], z, side="left")
        m = np.clip(m, 0, values.size - 1)
        v = values[m]
        safe = np.where(v > 0, v, 1.0)
        offset = np.where(v > 0, (z - cum[m]) / safe, 0.0)
        return np.minimum(breaks[m] + offset, breaks[m + 1])

    return CumulativeIntensity(
        Lambda, spec.interval, Lambda_inv, range_L=(0.0, float(cum[-1])), analytic=True
    )


def _linear_cumulative(spec: LinearIntensity, interval) -> CumulativeIntensity:
    a, b = as_interval(interval)
    alpha, beta = float(spec.alpha), float(spec.beta)
    support = spec.support((a, b))
    if support is None:
        return CumulativeIntensity(
            lambda t: np.zeros_like(np.asarray(t, dtype=float)),
            (a, b),
            lambda z: np.full_like(np.asarray(z, dtype=float), a),
            range_L=(0.0, 0.0),
            analytic=True,
        )
    lo, hi = support
    rate_lo = max(alpha + beta * lo, 0.0)

    def Lambda(t):
        s = np.clip(np.asarray(t, dtype=float), lo, hi) - lo
        return rate_lo * s + 0.5 * beta * s * s

    total = float(Lambda(hi))

    def Lambda_inv(z):
        z = np.clip(np.asarray(z, dtype=float), 0.0, total)
        disc = np.maximum(rate_lo * rate_lo + 2.0 * beta * z, 0.0)
        denom = rate_lo + np.sqrt(disc)
        d = np.divide(2.0 * z, denom, out=np.zeros_like(z), where=denom > 0)
        return np.minimum(lo + d, hi)

    return CumulativeIntensity(Lambda, (a, b), Lambda_inv, range_L=(0.0, total), analytic=True)


def _loglinear_cumulative(spec: LogLinearIntensity, interval) -> CumulativeIntensity:
    a, b = as_interval(interval)
    alpha, beta = float(spec.alpha), float(spec.beta)
    if max(alpha + beta * a, alpha + beta * b) > _EXP_MAX:
        raise DomainError(f"exp({alpha} + {beta} t) overflows on ({a}, {b}]")
    if abs(beta) < _LOGLINEAR_FLAT:
        rate = math.exp(alpha)

        def Lambda(t):
            return rate * (np.clip(np.asarray(t, dtype=float), a, b) - a)

        def Lambda_inv(z):
            return a + np.asarray(z, dtype=float) / rate

    else:
        rate_a = math.exp(alpha + beta * a)

        def Lambda(t):
            s = np.clip(np.asarray(t, dtype=float), a, b) - a
            return rate_a * np.expm1(beta * s) / beta

        def Lambda_inv(z):
            z = np.asarray(z, dtype=float)
            return np.clip(a + np.log1p(beta * z / rate_a) / beta, a, b)

    total = float(Lambda(b))
    return CumulativeIntensity(Lambda, (a, b), Lambda_inv, range_L=(0.0, total), analytic=True)


def cumulative_of(spec, interval=None) -> CumulativeIntensity:
    """Exact cumulative intensity (measured from the left end) of a closed-form family.

    Step intensities carry their own interval; linear and log-linear ones
    need ``interval``.
    """
    if isinstance(spec, StepIntensity):
        if interval is not None:
            a, b = as_interval(interval)
            if (a, b) != spec.interval:
                raise DomainError(f"step intensity spans {spec.interval}, not ({a}, {b})")
        return _step_cumulative(spec)
    if isinstance(spec, (LinearIntensity, LogLinearIntensity)):
        if interval is None:
            raise DomainError(f"{type(spec).__name__} needs an interval")
        if isinstance(spec, LinearIntensity):
            return _linear_cumulative(spec, interval)
        return _loglinear_cumulative(spec, interval)
    raise DomainError(
        f"no closed-form cumulative intensity for {type(spec).__name__}; "
        "build a CumulativeIntensity and use numeric inversion"
    )


def intensity_from_dict(obj: dict):
    """Build an intensity from its JSON form.

    ``{"type": "step", "values": [...], "breaks": [...]}``,
    ``{"type": "step", "values": [...], "interval": [a, b]}`` (regular),
    ``{"type": "linear" | "loglinear", "alpha": x, "beta": y}``.
    """
    if not isinstance(obj, dict):
        raise DomainError("intensity spec must be a JSON object")
    kind = obj.get("type")
    try:
        if kind == "step":
            if "breaks" in obj:
                return StepIntensity(obj["values"], obj["breaks"])
            return StepIntensity.regular(obj["values"], obj["interval"])
        if kind == "linear":
            return LinearIntensity(float(obj["alpha"]), float(obj["beta"]))
        if kind == "loglinear":
            return LogLinearIntensity(float(obj["alpha"]), float(obj["beta"]))
    except KeyError as exc:
        raise DomainError(f"intensity spec of type {kind!r} is missing field {exc.args[0]!r}") from None
    except (TypeError, ValueError) as exc:
        if isinstance(exc, DomainError):
            raise
        raise DomainError(f"bad value in intensity spec: {exc}") from None
    raise DomainError(f"unknown intensity type {kind!r}")


def read_step_csv(source) -> StepIntensity:
    """Parse ``t_break,value`` rows into a step intensity.

    Each row opens a bin at ``t_break`` with rate ``value``; the final row
    gives the right end of the last bin and its value is left empty. A
    header row ``t_break,value`` is optional.
    """
    text = source.read() if hasattr(source, "read") else str(source)
    breaks, values = [], []
    rows = list(csv.reader(io.StringIO(text)))
    for lineno, row in enumerate(rows, start=1):
        cells = [c.strip() for c in row]
        if not cells or all(c == "" for c in cells):
            continue
        if lineno == 1 and cells[0] == "t_break":
            continue
        if len(cells) > 2:
            raise DomainError(f"line {lineno}: expected 't_break,value', got {len(cells)} fields")
        try:
            breaks.append(float(cells[0]))
        except ValueError:
            raise DomainError(f"line {lineno}: t_break {cells[0]!r} is not a number") from None
        value = cells[1] if len(cells) == 2 else ""
        if value == "":
            values.append(None)
        else:
            try:
                values.append(float(value))
            except ValueError:
                raise DomainError(f"line {lineno}: value {value!r} is not a number") from None
    if len(breaks) < 2:
        raise DomainError("step CSV needs at least two breakpoints")
    if any(v is None for v in values[:-1]):
        lineno = values.index(None) + 1
        raise DomainError(f"missing value for bin starting at breakpoint {lineno}")
    return StepIntensity(values[:-1], breaks)


def load_intensity(path: str):
    """Read an intensity spec from a ``.json`` or ``.csv`` file."""
    with open(path) as fh:
        if path.endswith(".csv"):
            return read_step_csv(fh)
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise DomainError(f"{path}: line {exc.lineno}: {exc.msg}") from None
    return intensity_from_dict(obj)
