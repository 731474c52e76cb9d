"""Goodness-of-fit metrics for batches of simulated series.

Counts are compared against Poisson(N), where N is the total mass of the
cumulative intensity; pooled event times are compared against the
normalised cumulative intensity.

Two χ² conventions are reported side by side:

* ``statistic`` / ``p_value`` -- the table convention: Pearson's sum computed
  on percentages, ``100 * sum((o - e)**2 / e)`` with ``o`` and ``e`` the
  observed and expected *proportions*, referred to χ² with (bins - 1)
  degrees of freedom, upper tail. A good fit gives p close to 1; gross
  misfit still gives p close to 0. The test is deliberately coarse.
* ``pearson`` / ``pearson_p`` -- the textbook Pearson statistic on counts
  and its usual upper-tail p-value (uniform under the null).
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Callable, NamedTuple

import numpy as np
from scipy import stats

from .errors import DomainError
from .intensity import CumulativeIntensity
from .rng import RngStream

__all__ = [
    "CI_LEVELS",
    "ValidationReport",
    "Chi2Result",
    "W1Result",
    "TimeGof",
    "count_metrics",
    "chi2_gof_counts",
    "wasserstein1",
    "w1_counts",
    "w1_times",
    "event_time_gof",
    "validate_counts",
    "chi2_pmf_test",
    "two_sample_count_test",
    "truncated_poisson_pmf",
]

CI_LEVELS = (95, 90, 75, 50)
PERCENT = 100.0
DEFAULT_BOOT = 1000
_BOOT_GRID = 4096


class Chi2Result(NamedTuple):
    statistic: float
    p_value: float
    df: int
    pearson: float
    pearson_p: float


class W1Result(NamedTuple):
    w1: float
    p_value: float | None


class TimeGof(NamedTuple):
    statistic: float
    p_value: float
    w1: float
    w1_p: float | None
    df: int
    pearson: float
    pearson_p: float


@dataclass
class ValidationReport:
    """Count (and optionally event-time) metrics for one sampler configuration."""

    label: str
    J: int
    N: float
    sample_mean: float
    B_mu: float
    B_mu_rel: float
    sample_variance: float
    B_V: float
    B_V_rel: float
    ci: dict = field(default_factory=dict)
    ci_theoretical: dict = field(default_factory=dict)
    chi2: float | None = None
    chi2_p: float | None = None
    chi2_df: int | None = None
    pearson_chi2: float | None = None
    pearson_p: float | None = None
    W1: float | None = None
    W1_p: float | None = None
    time_chi2: float | None = None
    time_chi2_p: float | None = None
    time_W1: float | None = None
    time_W1_p: float | None = None
    efficiency: float | None = None
    small_J: bool = False

    @property
    def B_mu_rel_pct(self) -> float:
        return PERCENT * self.B_mu_rel

    @property
    def B_V_rel_pct(self) -> float:
        return PERCENT * self.B_V_rel

    def ci_nested(self) -> bool:
        bounds = [self.ci[p] for p in sorted(self.ci)]
        return all(lo_o <= lo_i and hi_i <= hi_o for (lo_i, hi_i), (lo_o, hi_o) in zip(bounds, bounds[1:]))

    def to_dict(self) -> dict:
        out = asdict(self)
        out.pop("ci")
        out.pop("ci_theoretical")
        out["B_mu_rel_pct"] = self.B_mu_rel_pct
        out["B_V_rel_pct"] = self.B_V_rel_pct
        for p in CI_LEVELS:
            if p in self.ci:
                out[f"CI{p}_lo"], out[f"CI{p}_hi"] = self.ci[p]
            if p in self.ci_theoretical:
                out[f"CI{p}_theory_lo"], out[f"CI{p}_theory_hi"] = self.ci_theoretical[p]
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


REPORT_COLUMNS = [
    "label", "J", "N", "sample_mean", "B_mu", "B_mu_rel", "B_mu_rel_pct",
    "sample_variance", "B_V", "B_V_rel", "B_V_rel_pct",
    "chi2", "chi2_p", "chi2_df", "pearson_chi2", "pearson_p", "W1", "W1_p",
    *[f"CI{p}_{s}" for p in CI_LEVELS for s in ("lo", "hi")],
    "time_chi2", "time_chi2_p", "time_W1", "time_W1_p", "efficiency", "small_J",
]


def reports_to_csv(reports) -> str:
    """Fixed-column CSV, one row per report."""
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=REPORT_COLUMNS, extrasaction="ignore", lineterminator="\n")
    writer.writeheader()
    for r in reports:
        writer.writerow({k: ("" if v is None else v) for k, v in r.to_dict().items()})
    return buf.getvalue()


def count_metrics(counts, theoretical_mass: float, label: str = "") -> ValidationReport:
    """Bias in mean and variance plus empirical equal-tailed count intervals.

    The variance is the population form ``mean((n - mean(n))**2)``; the
    target variance equals the target mean for a Poisson count.
    """
    counts = np.asarray(counts)
    if counts.ndim != 1 or counts.size < 2:
        raise DomainError("need at least two runs")
    if np.any(counts < 0):
        raise DomainError("counts must be non-negative")
    N = float(theoretical_mass)
    if not N > 0:
        raise DomainError("relative metrics undefined for zero theoretical mass")
    mean = float(counts.mean())
    var = float(counts.var())
    ci, ci_theory = {}, {}
    for p in CI_LEVELS:
        tail = (1.0 - p / 100.0) / 2.0
        lo, hi = np.quantile(counts, [tail, 1.0 - tail], method="inverted_cdf")
        ci[p] = (int(lo), int(hi))
        ci_theory[p] = (int(stats.poisson.ppf(tail, N)), int(stats.poisson.ppf(1.0 - tail, N)))
    return ValidationReport(
        label=label,
        J=int(counts.size),
        N=N,
        sample_mean=mean,
        B_mu=mean - N,
        B_mu_rel=(mean - N) / N,
        sample_variance=var,
        B_V=var - N,
        B_V_rel=(var - N) / N,
        ci=ci,
        ci_theoretical=ci_theory,
        small_J=counts.size < 1000,
    )


def _chi2_from_bins(observed: np.ndarray, probs: np.ndarray) -> Chi2Result:
    total = observed.sum()
    expected = probs * total
    pearson = float(np.sum((observed - expected) ** 2 / expected))
    df = observed.size - 1
    scaled = PERCENT * pearson / total
    return Chi2Result(scaled, float(stats.chi2.sf(scaled, df)), df, pearson, float(stats.chi2.sf(pearson, df)))


def chi2_gof_counts(counts, theoretical_mass: float) -> Chi2Result:
    """χ² fit of counts to Poisson(N) on bins ``[0,L), [L,L+1), ..., [U,inf)``.

    ``L`` and ``U`` are the 0.001 and 0.999 quantiles of Poisson(N); the
    reference distribution has ``U - L + 1`` degrees of freedom.
    """
    counts = np.asarray(counts)
    N = float(theoretical_mass)
    lo = int(stats.poisson.ppf(0.001, N))
    hi = int(stats.poisson.ppf(0.999, N))
    edges = np.arange(lo, hi + 1)
    inner = np.bincount(np.clip(counts, lo - 1, hi) - (lo - 1), minlength=hi - lo + 2)
    observed = inner.astype(float)
    # observed[0] is [0, L), observed[-1] is [U, inf)
    observed[-1] = np.sum(counts >= hi)
    cdf = stats.poisson.cdf(edges - 1, N)
    probs = np.concatenate(([cdf[0]], np.diff(cdf), [stats.poisson.sf(hi - 1, N)]))
    return _chi2_from_bins(observed, probs)


def _w1_discrete(sample: np.ndarray, cdf_values: np.ndarray, lo: int) -> float:
    n = sample.size
    ks = np.arange(lo, lo + cdf_values.size)
    ecdf = np.searchsorted(np.sort(sample), ks, side="right") / n
    return float(np.sum(np.abs(ecdf - cdf_values)))


def w1_counts(counts, theoretical_mass: float, n_boot: int = DEFAULT_BOOT, stream: RngStream | None = None) -> W1Result:
    """W1 between the empirical count law and Poisson(N), parametric-bootstrap p-value."""
    counts = np.asarray(counts)
    N = float(theoretical_mass)
    top = int(max(counts.max(initial=0), stats.poisson.isf(1e-15, N))) + 1
    cdf = stats.poisson.cdf(np.arange(0, top + 1), N)
    w1 = _w1_discrete(counts, cdf, 0)
    if not n_boot:
        return W1Result(w1, None)
    stream = stream or RngStream(0, 0)
    probs = np.diff(np.concatenate(([0.0], cdf)))
    probs[-1] += max(0.0, 1.0 - probs.sum())
    probs /= probs.sum()
    draws = stream.generator.multinomial(counts.size, probs, size=n_boot)
    boot = np.abs(np.cumsum(draws, axis=1) / counts.size - cdf).sum(axis=1)
    return W1Result(w1, _boot_p(w1, boot))


def _boot_p(observed: float, boot: np.ndarray) -> float:
    return float((1 + np.sum(boot >= observed * (1 - 1e-12))) / (1 + boot.size))


def _w1_continuous(sample: np.ndarray, cdf: Callable, lo: float, hi: float, grid_size: int = 65536) -> float:
    """Area between the empirical CDF and ``cdf`` on [lo, hi]."""
    x = np.sort(np.asarray(sample, dtype=float))
    g = np.union1d(x, np.linspace(lo, hi, grid_size))
    g = g[(g >= lo) & (g <= hi)]
    ecdf = np.searchsorted(x, g, side="right") / x.size
    F = np.asarray(cdf(g), dtype=float)
    # ECDF is flat on [g_i, g_{i+1}); F is integrated by the trapezoid rule
    c = ecdf[:-1]
    return float(np.sum(np.diff(g) * (np.abs(c - F[:-1]) + np.abs(c - F[1:])) / 2.0))


def _grid_w1(ecdf_nodes: np.ndarray, F_nodes: np.ndarray, dg: np.ndarray) -> np.ndarray:
    d = np.abs(ecdf_nodes - F_nodes)
    return np.sum((d[..., :-1] + d[..., 1:]) / 2.0 * dg, axis=-1)


def w1_times(
    times,
    cdf: Callable,
    support: tuple[float, float],
    n_boot: int = DEFAULT_BOOT,
    stream: RngStream | None = None,
) -> W1Result:
    """W1 between pooled times and a continuous law, parametric-bootstrap p-value.

    Bootstrap replicates are drawn as multinomial counts on a fixed grid;
    the observed statistic is recomputed on the same grid for the p-value.
    """
    times = np.asarray(times, dtype=float)
    lo, hi = support
    w1 = _w1_continuous(times, cdf, lo, hi)
    if not n_boot or times.size == 0:
        return W1Result(w1, None)
    stream = stream or RngStream(0, 1)
    g = np.linspace(lo, hi, _BOOT_GRID + 1)
    F = np.asarray(cdf(g), dtype=float)
    dg = np.diff(g)
    probs = np.clip(np.diff(F), 0.0, None)
    probs /= probs.sum()
    n = times.size
    obs_nodes = np.searchsorted(np.sort(times), g, side="right") / n
    observed = float(_grid_w1(obs_nodes, F, dg))
    boot = np.empty(n_boot)
    for i in range(0, n_boot, 100):
        k = min(100, n_boot - i)
        draws = stream.generator.multinomial(n, probs, size=k)
        nodes = np.concatenate((np.zeros((k, 1)), np.cumsum(draws, axis=1) / n), axis=1)
        boot[i:i + k] = _grid_w1(nodes, F, dg)
    return W1Result(w1, _boot_p(observed, boot))


def wasserstein1(sample_a, reference, *, support=None, discrete: bool = False,
                 n_boot: int = DEFAULT_BOOT, stream: RngStream | None = None) -> W1Result:
    """W1 distance from ``sample_a`` to another sample or to a CDF.

    ``reference`` is either an array (two-sample; p-value by permutation) or
    a CDF callable, which needs ``support``. With ``discrete=True`` the CDF
    is taken on the integers of ``support`` and the distance is the sum of
    absolute CDF differences.
    """
    a = np.asarray(sample_a, dtype=float)
    if a.size == 0:
        raise DomainError("W1 needs a non-empty sample")
    if not callable(reference):
        b = np.asarray(reference, dtype=float)
        if b.size == 0:
            raise DomainError("W1 needs a non-empty sample")
        w1 = float(stats.wasserstein_distance(a, b))
        if not n_boot:
            return W1Result(w1, None)
        stream = stream or RngStream(0, 2)
        pooled = np.concatenate((a, b))
        boot = np.empty(n_boot)
        for i in range(n_boot):
            perm = stream.generator.permutation(pooled)
            boot[i] = stats.wasserstein_distance(perm[:a.size], perm[a.size:])
        return W1Result(w1, _boot_p(w1, boot))
    if support is None:
        raise DomainError("a CDF reference needs a support interval")
    lo, hi = support
    if discrete:
        lo, hi = int(math.floor(lo)), int(math.ceil(max(hi, a.max())))
        cdf = np.asarray(reference(np.arange(lo, hi + 1)), dtype=float)
        w1 = _w1_discrete(a, cdf, lo)
        if not n_boot:
            return W1Result(w1, None)
        stream = stream or RngStream(0, 3)
        probs = np.diff(np.concatenate(([0.0], cdf)))
        probs = np.clip(probs, 0, None)
        probs /= probs.sum()
        draws = stream.generator.multinomial(a.size, probs, size=n_boot)
        boot = np.abs(np.cumsum(draws, axis=1) / a.size - cdf).sum(axis=1)
        return W1Result(w1, _boot_p(w1, boot))
    return w1_times(a, reference, (lo, hi), n_boot=n_boot, stream=stream)


def event_time_gof(times, cum: CumulativeIntensity, bins: int = 70,
                   n_boot: int = DEFAULT_BOOT, stream: RngStream | None = None) -> TimeGof:
    """χ² on equal-width time bins and W1 against the normalised cumulative intensity."""
    bins = int(bins)
    if bins < 2:
        raise DomainError("need at least two bins")
    times = np.asarray(times, dtype=float)
    a, b = cum.interval
    edges = np.linspace(a, b, bins + 1)
    F = cum.normalized_cdf(edges)
    probs = np.diff(F)
    observed, _ = np.histogram(times, bins=edges)
    keep = probs > 0
    if np.any(observed[~keep]):
        chi = Chi2Result(math.inf, 0.0, bins - 1, math.inf, 0.0)
    else:
        chi = _chi2_from_bins(observed[keep].astype(float), probs[keep] / probs[keep].sum())
    w = w1_times(times, cum.normalized_cdf, (a, b), n_boot=n_boot, stream=stream)
    return TimeGof(chi.statistic, chi.p_value, w.w1, w.p_value, chi.df, chi.pearson, chi.pearson_p)


def validate_counts(counts, theoretical_mass: float, label: str = "", n_boot: int = DEFAULT_BOOT,
                    stream: RngStream | None = None) -> ValidationReport:
    """Full count report: moments, intervals, χ² and W1."""
    report = count_metrics(counts, theoretical_mass, label)
    chi = chi2_gof_counts(counts, theoretical_mass)
    w = w1_counts(counts, theoretical_mass, n_boot=n_boot, stream=stream)
    report.chi2, report.chi2_p, report.chi2_df = chi.statistic, chi.p_value, chi.df
    report.pearson_chi2, report.pearson_p = chi.pearson, chi.pearson_p
    report.W1, report.W1_p = w.w1, w.p_value
    return report


def truncated_poisson_pmf(k, mass: float, min_events: int = 1) -> np.ndarray:
    """pmf of Poisson(mass) renormalised on {min_events, min_events + 1, ...}."""
    k = np.asarray(k)
    tail = stats.poisson.sf(min_events - 1, mass)
    return np.where(k >= min_events, stats.poisson.pmf(k, mass) / tail, 0.0)


def _merge_sparse(expected: np.ndarray, observed: np.ndarray, min_expected: float):
    """Pool adjacent bins (left to right) until each expected count reaches ``min_expected``."""
    exp_out, obs_out = [], []
    e_acc = o_acc = 0.0
    for e, o in zip(expected, observed):
        e_acc += e
        o_acc += o
        if e_acc >= min_expected:
            exp_out.append(e_acc)
            obs_out.append(o_acc)
            e_acc = o_acc = 0.0
    if e_acc or o_acc:
        if exp_out:
            exp_out[-1] += e_acc
            obs_out[-1] += o_acc
        else:
            exp_out.append(e_acc)
            obs_out.append(o_acc)
    return np.array(exp_out), np.array(obs_out)


def chi2_pmf_test(counts, pmf: Callable, support_max: int | None = None, min_expected: float = 5.0):
    """Textbook Pearson test of integer ``counts`` against ``pmf``; returns (statistic, p_value).

    Bins with small expectation are pooled; the last bin absorbs the upper tail.
    """
    counts = np.asarray(counts, dtype=np.int64)
    n = counts.size
    top = int(counts.max()) if support_max is None else max(int(support_max), int(counts.max()))
    ks = np.arange(0, top + 1)
    probs = np.asarray(pmf(ks), dtype=float)
    probs[-1] += max(0.0, 1.0 - probs.sum())
    observed = np.bincount(counts, minlength=top + 1).astype(float)
    nz = probs > 0
    if np.any(observed[~nz]):
        return math.inf, 0.0
    expected, observed = _merge_sparse(probs[nz] * n, observed[nz], min_expected)
    if expected.size < 2:
        return 0.0, 1.0
    res = stats.chisquare(observed, expected * observed.sum() / expected.sum())
    return float(res.statistic), float(res.pvalue)


def two_sample_count_test(x, y, min_expected: float = 5.0):
    """χ² homogeneity test of two integer samples on pooled, merged bins; returns (statistic, p_value)."""
    x = np.asarray(x, dtype=np.int64)
    y = np.asarray(y, dtype=np.int64)
    top = int(max(x.max(initial=0), y.max(initial=0)))
    ox = np.bincount(x, minlength=top + 1).astype(float)
    oy = np.bincount(y, minlength=top + 1).astype(float)
    # merge on the pooled frequencies so both rows share bins
    pooled = ox + oy
    table_x, table_y = [], []
    ax = ay = ap = 0.0
    for cx, cy, cp in zip(ox, oy, pooled):
        ax, ay, ap = ax + cx, ay + cy, ap + cp
        if ap * min(x.size, y.size) / (x.size + y.size) >= min_expected:
            table_x.append(ax)
            table_y.append(ay)
            ax = ay = ap = 0.0
    if ap:
        if table_x:
            table_x[-1] += ax
            table_y[-1] += ay
        else:
            table_x.append(ax)
            table_y.append(ay)
    if len(table_x) < 2:
        return 0.0, 1.0
    res = stats.chi2_contingency(np.array([table_x, table_y]), correction=False)
    return float(res.statistic), float(res.pvalue)
