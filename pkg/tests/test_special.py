import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, stats

from conftest import poisson_chi2_p, pooled
from nhppsim import (
    ImpossibleConditionError,
    RngStream,
    SamplerOptions,
    StepIntensity,
    draw_sc_linear,
    draw_sc_loglinear,
    draw_sc_step,
    draw_sc_step_regular,
    ppp_orderstat,
    ztdraw_sc_linear,
    ztdraw_sc_loglinear,
    ztdraw_sc_step,
    ztdraw_sc_step_regular,
)

BREAKS = [0.5, 1, 2.4, 3.1, 4.9, 5.9]
VALUES = [1, 2, 3, 4, 5]


def test_all_zero_step_is_empty(stream):
    assert draw_sc_step(stream, [0, 0], [0, 1, 2]).size == 0
    assert draw_sc_step_regular(stream, [0, 0], (0, 2)).size == 0


def test_irregular_step_bin_counts(stream):
    runs = 10_000
    per_bin = np.zeros((runs, 5), dtype=int)
    for j in range(runs):
        t = draw_sc_step(stream, VALUES, BREAKS)
        per_bin[j] = np.histogram(t, bins=BREAKS)[0]
    for m in range(5):
        mass = VALUES[m] * (BREAKS[m + 1] - BREAKS[m])
        assert poisson_chi2_p(per_bin[:, m], mass) > 0.01


def test_single_bin_matches_constant_rate(stream):
    _, t1 = pooled(lambda: draw_sc_step(stream, [2.0], [1, 4]), 3000)
    _, t2 = pooled(lambda: ppp_orderstat(stream, (1, 4), 2.0), 3000)
    assert stats.ks_2samp(t1, t2).pvalue > 0.01


def test_regular_matches_irregular(stream):
    c1, t1 = pooled(lambda: draw_sc_step_regular(stream, [1, 4, 2], (0, 3)), 4000)
    c2, t2 = pooled(lambda: draw_sc_step(stream, [1, 4, 2], [0, 1, 2, 3]), 4000)
    assert stats.ks_2samp(t1, t2).pvalue > 0.01
    assert stats.ks_2samp(c1, c2).pvalue > 0.01


def test_regular_constant_rate(stream):
    counts, times = pooled(lambda: draw_sc_step_regular(stream, [1, 1], (0, 4)), 5000)
    assert poisson_chi2_p(counts, 4.0) > 0.01
    assert stats.kstest(times, stats.uniform(0, 4).cdf).pvalue > 0.01


def test_linear_constant_equivalence(stream):
    counts, times = pooled(lambda: draw_sc_linear(stream, 1.0, 0.0, (0, 5)), 5000)
    assert poisson_chi2_p(counts, 5.0) > 0.01
    assert stats.kstest(times, stats.uniform(0, 5).cdf).pvalue > 0.01


def test_linear_decreasing_support(stream):
    counts, times = pooled(lambda: draw_sc_linear(stream, 3.0, -0.5, (0, 10)), 10_000)
    assert abs(counts.mean() - 9.0) < 0.2
    assert times.max() <= 6.0


def test_linear_time_law(stream):
    _, times = pooled(lambda: draw_sc_linear(stream, 0.0, 2.0, (0, 1)), 10_000)
    assert stats.kstest(times, lambda t: np.clip(t, 0, 1) ** 2).pvalue > 0.01


def test_loglinear_constant(stream):
    counts, _ = pooled(lambda: draw_sc_loglinear(stream, 0.3, 0.0, (0, 2)), 5000)
    assert poisson_chi2_p(counts, 2 * math.exp(0.3)) > 0.01


def test_loglinear_mean_and_time_law(stream):
    mass, _ = integrate.quad(lambda t: math.exp(1 - 0.02 * t), 8, 10)
    counts, times = pooled(lambda: draw_sc_loglinear(stream, 1.0, -0.02, (8, 10)), 10_000)
    assert abs(counts.mean() / mass - 1) < 0.02

    def cdf(t):
        t = np.clip(t, 8, 10)
        return (np.exp(-0.02 * 8) - np.exp(-0.02 * t)) / (np.exp(-0.02 * 8) - np.exp(-0.02 * 10))

    assert stats.kstest(times, cdf).pvalue > 0.01


def test_zt_variants_nonempty(stream):
    for _ in range(300):
        assert ztdraw_sc_step(stream, [0.01, 0.0], [0, 1, 2]).size >= 1
        assert ztdraw_sc_step_regular(stream, [0.0, 0.01], (0, 2)).size >= 1
        assert ztdraw_sc_linear(stream, 0.01, 0.0, (0, 1)).size >= 1
        assert ztdraw_sc_loglinear(stream, -5.0, 0.1, (0, 1)).size >= 1


def test_zt_linear_tiny_window(stream):
    for _ in range(100):
        t = ztdraw_sc_linear(stream, 0.5, 0.2, (9.999, 10))
        assert t.size >= 1
        assert np.all((t > 9.999) & (t <= 10))
    sizes = [ztdraw_sc_linear(stream, 0.5, 0.2, (9.999, 10)).size for _ in range(2000)]
    assert np.mean(np.array(sizes) == 1) > 0.99


def test_zt_count_law(stream):
    counts, _ = pooled(lambda: ztdraw_sc_step_regular(stream, [0.5, 1.0], (0, 2)), 10_000)
    assert poisson_chi2_p(counts, 1.5, lower=1) > 0.01
    counts, _ = pooled(lambda: ztdraw_sc_loglinear(stream, 0.0, 0.5, (0, 1)), 10_000)
    assert poisson_chi2_p(counts, 2 * (math.exp(0.5) - 1), lower=1) > 0.01


def test_zt_zero_mass_impossible(stream):
    with pytest.raises(ImpossibleConditionError):
        ztdraw_sc_step(stream, [0, 0], [0, 1, 2])
    with pytest.raises(ImpossibleConditionError):
        ztdraw_sc_step_regular(stream, [0, 0], (0, 2))


def test_first_event_only(stream):
    opts = SamplerOptions(at_most_1=True)
    firsts = []
    for _ in range(5000):
        t = draw_sc_step_regular(stream, [1.0, 3.0], (0, 2), opts)
        assert t.size <= 1
        firsts.append(t[0] if t.size else np.nan)
    firsts = np.array(firsts)
    full = [draw_sc_step_regular(stream, [1.0, 3.0], (0, 2)) for _ in range(5000)]
    ref = np.array([t[0] for t in full if t.size])
    assert stats.ks_2samp(firsts[~np.isnan(firsts)], ref).pvalue > 0.01
    assert abs(np.isnan(firsts).mean() - math.exp(-4)) < 0.01


def test_step_exactly_one(stream):
    opts = SamplerOptions(at_most_1=True, at_least_1=True)
    for _ in range(200):
        assert draw_sc_step(stream, [0.1, 0.2], [0, 1, 3], opts).size == 1


@settings(max_examples=40, deadline=None)
@given(
    values=st.lists(st.floats(0, 30), min_size=1, max_size=6),
    a=st.floats(-10, 10),
    width=st.floats(0.01, 5),
    cap=st.one_of(st.none(), st.integers(1, 4)),
    seed=st.integers(0, 2**32),
)
def test_step_series_invariants(values, a, width, cap, seed):
    b = a + width
    opts = SamplerOptions(at_most_k=cap)
    for t in (
        draw_sc_step_regular(RngStream(seed), values, (a, b), opts),
        draw_sc_step(RngStream(seed), StepIntensity.regular(values, (a, b)), None, opts),
    ):
        assert np.all(np.diff(t) > 0)
        assert np.all((t > a) & (t <= b))
        if cap is not None:
            assert t.size <= cap
