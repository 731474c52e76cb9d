"""Vectorised sampling of many independent series from a matrix of step rates.

Row ``i`` of the rate matrix holds the piecewise-constant intensity of
series ``i`` on equal-width bins of a shared interval. Results come back as
an event matrix: one series per row, NaN padding at the tail of each row,
and as many columns as the longest series. The matrix is dense.
"""

from __future__ import annotations

import io
import json
import math

import numpy as np

from .core import SamplerOptions, as_interval, resolve_options
from .errors import DomainError, ImpossibleConditionError, MajorizationError, NumericError
from .general import MAJORIZATION_SLACK, MAX_ZT_RETRIES, ThinningTally
from .rng import RngStream, truncated_poisson_array

__all__ = [
    "vdraw_sc_step_regular",
    "vztdraw_sc_step_regular",
    "vdraw_intensity_step_regular",
    "vztdraw_intensity_step_regular",
    "matrix_rows",
    "matrix_to_csv",
    "matrix_to_json",
]


def _check_rates(rates) -> np.ndarray:
    rates = np.asarray(rates, dtype=float)
    if rates.ndim == 1:
        rates = rates[None, :]
    if rates.ndim != 2 or rates.shape[0] < 1 or rates.shape[1] < 1:
        raise DomainError(f"rate matrix must be R x M with R, M >= 1, got shape {rates.shape}")
    if not np.all(np.isfinite(rates)) or np.any(rates < 0):
        raise DomainError("rate matrix entries must be finite and non-negative")
    return rates


def _pack(rows: np.ndarray, times: np.ndarray, n_rows: int, limit: int | None) -> np.ndarray:
    """Scatter (row, time) pairs into a NaN-padded matrix, sorted within rows."""
    if rows.size > 1 and np.any(rows[1:] < rows[:-1]):
        order = np.argsort(rows, kind="stable")
        rows, times = rows[order], times[order]
    per_row = np.bincount(rows, minlength=n_rows)
    starts = np.concatenate(([0], np.cumsum(per_row)[:-1]))
    pos = np.arange(rows.size) - starts[rows]
    width = int(per_row.max()) if rows.size else 0
    out = np.full((n_rows, width), np.nan)
    out[rows, pos] = times
    # NaN sorts last, so padding stays at the tail
    out.sort(axis=1)
    if limit is not None and width > limit:
        out = out[:, :limit]
    return out


def _first_events(stream, rates, a, h, conditional: bool):
    """First arrival per row via the cumulative scale; NaN where a row has none."""
    masses = rates * h
    cum = np.cumsum(masses, axis=1)
    total = cum[:, -1]
    if conditional:
        u = stream.uniform(total.shape)
        e = -np.log1p(u * np.expm1(-total))
        e = np.minimum(e, total)
    else:
        e = stream.standard_exponential(total.shape)
    hit = e <= total
    m = np.minimum((cum < e[:, None]).sum(axis=1), rates.shape[1] - 1)
    r = np.arange(rates.shape[0])
    before = np.where(m > 0, cum[r, np.maximum(m - 1, 0)], 0.0)
    rate = rates[r, m]
    safe = np.where(rate > 0, rate, 1.0)
    t = a + m * h + np.where(rate > 0, (e - before) / safe, 0.0)
    t = np.clip(t, np.nextafter(a + m * h, math.inf), a + (m + 1) * h)
    return np.where(hit, t, np.nan)


def _cell_counts(stream, rates, h, conditional: bool) -> np.ndarray:
    masses = rates * h
    if not conditional:
        return stream.poisson(masses)
    total = masses.sum(axis=1)
    n = truncated_poisson_array(stream, total, 1)
    return stream.generator.multinomial(n, masses / total[:, None])


def _events_from_counts(stream, counts, a, h):
    n_rows, n_cols = counts.shape
    cells = np.repeat(np.arange(n_rows * n_cols), counts.ravel())
    rows, bins = np.divmod(cells, n_cols)
    times = a + (bins + stream.uniform(cells.size)) * h
    lo = np.nextafter(a + bins * h, math.inf)
    times = np.clip(times, lo, a + (bins + 1) * h)
    return rows, bins, times


def _vdraw(stream, rates, interval, opts, conditional):
    opts = resolve_options(opts)
    rates = _check_rates(rates)
    a, b = as_interval(interval)
    if a == b:
        raise DomainError("interval must have positive length")
    n_rows, n_cols = rates.shape
    h = (b - a) / n_cols
    if conditional:
        zero = np.flatnonzero(rates.sum(axis=1) == 0)
        if zero.size:
            raise ImpossibleConditionError(f"row {int(zero[0])} has zero total mass; cannot draw >= 1 event")
    if opts.limit == 1:
        first = _first_events(stream, rates, a, h, conditional)
        if np.all(np.isnan(first)):
            return np.empty((n_rows, 0))
        return first[:, None]
    counts = _cell_counts(stream, rates, h, conditional)
    rows, _, times = _events_from_counts(stream, counts, a, h)
    return _pack(rows, times, n_rows, opts.limit)


def vdraw_sc_step_regular(stream: RngStream, rates, interval, opts: SamplerOptions | None = None) -> np.ndarray:
    """One independent series per row of ``rates``."""
    opts = resolve_options(opts)
    return _vdraw(stream, rates, interval, opts, conditional=opts.at_least_1)


def vztdraw_sc_step_regular(stream: RngStream, rates, interval, opts: SamplerOptions | None = None) -> np.ndarray:
    """As :func:`vdraw_sc_step_regular`, every row conditioned to be non-empty."""
    return _vdraw(stream, rates, interval, opts, conditional=True)


def _evaluate_rows(lam, times, rows, row_indexed: bool) -> np.ndarray:
    if row_indexed:
        return np.asarray(lam(times, rows), dtype=float)
    return np.asarray(lam(times), dtype=float)


def _vthin(stream, lam, rates, a, h, conditional, row_indexed, tally):
    counts = _cell_counts(stream, rates, h, conditional)
    rows, bins, times = _events_from_counts(stream, counts, a, h)
    bound = rates[rows, bins]
    value = _evaluate_rows(lam, times, rows, row_indexed)
    if value.shape != times.shape:
        raise DomainError("intensity must evaluate elementwise on arrays")
    bad = value > bound * (1.0 + MAJORIZATION_SLACK)
    if np.any(bad):
        i = int(np.flatnonzero(bad)[0])
        raise MajorizationError(float(times[i]), float(value[i]), float(bound[i]), row=int(rows[i]))
    accept = stream.uniform(times.size) * bound < value
    if tally is not None:
        tally.proposals += times.size
        tally.accepted += int(accept.sum())
    return rows[accept], times[accept]


def vdraw_intensity_step_regular(
    stream: RngStream,
    lam,
    majorizer_rates,
    interval,
    opts: SamplerOptions | None = None,
    row_indexed: bool = False,
    tally: ThinningTally | None = None,
) -> np.ndarray:
    """Row-wise thinning against a matrix of step majorizers.

    ``lam(t)`` is evaluated on arrays of proposal times; with
    ``row_indexed=True`` it is called as ``lam(t, row)``. With
    ``at_least_1`` rows left empty are redrawn from zero-truncated
    proposals until every row has an event.
    """
    opts = resolve_options(opts)
    rates = _check_rates(majorizer_rates)
    a, b = as_interval(interval)
    n_rows, n_cols = rates.shape
    h = (b - a) / n_cols
    rows, times = _vthin(stream, lam, rates, a, h, opts.at_least_1, row_indexed, tally)
    if opts.at_least_1:
        zero = np.flatnonzero(rates.sum(axis=1) == 0)
        if zero.size:
            raise ImpossibleConditionError(f"row {int(zero[0])} has zero total mass; cannot draw >= 1 event")
        pending = np.setdiff1d(np.arange(n_rows), rows)
        all_rows, all_times = [rows], [times]
        for _ in range(MAX_ZT_RETRIES):
            if pending.size == 0:
                break
            sub_rows, sub_times = _vthin(
                stream,
                (lambda t, r, _p=pending: lam(t, _p[r])) if row_indexed else lam,
                rates[pending], a, h, True, row_indexed, tally,
            )
            sub_rows = pending[sub_rows]
            all_rows.append(sub_rows)
            all_times.append(sub_times)
            pending = np.setdiff1d(pending, sub_rows)
        else:
            raise NumericError(f"rows still empty after {MAX_ZT_RETRIES} retries")
        rows, times = np.concatenate(all_rows), np.concatenate(all_times)
    if rows.size == 0:
        return np.empty((n_rows, 0))
    return _pack(rows, times, n_rows, opts.limit)


def vztdraw_intensity_step_regular(stream, lam, majorizer_rates, interval, opts=None, row_indexed=False, tally=None):
    """Row-wise thinning with every row conditioned to be non-empty."""
    opts = resolve_options(opts)
    opts = SamplerOptions(at_most_1=opts.at_most_1, at_least_1=True, at_most_k=opts.at_most_k)
    return vdraw_intensity_step_regular(stream, lam, majorizer_rates, interval, opts, row_indexed, tally)


def matrix_rows(events: np.ndarray) -> list[np.ndarray]:
    """Split an event matrix into per-row arrays without padding."""
    return [row[~np.isnan(row)] for row in np.atleast_2d(events)]


def matrix_to_csv(events: np.ndarray) -> str:
    """One line per series; padding becomes empty cells."""
    buf = io.StringIO()
    for row in np.atleast_2d(events):
        buf.write(",".join("" if np.isnan(x) else repr(float(x)) for x in row))
        buf.write("\n")
    return buf.getvalue()


def matrix_to_json(events: np.ndarray) -> str:
    """Array of arrays, one per series, padding dropped."""
    return json.dumps([row.tolist() for row in matrix_rows(events)])
