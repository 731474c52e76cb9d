import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from conftest import poisson_chi2_p, pooled
from nhppsim import (
    CumulativeIntensity,
    DomainError,
    ImpossibleConditionError,
    LinearIntensity,
    LogLinearIntensity,
    MajorizationError,
    RngStream,
    SamplerOptions,
    StepIntensity,
    ThinningTally,
    cumulative_of,
    draw,
    draw_conditional,
    draw_inversion,
    draw_orderstats,
    draw_sc_loglinear,
    draw_thinning,
    ppp_orderstat,
    ztdraw_cumulative_intensity,
    ztdraw_intensity,
)
from nhppsim.illustration import ILLUSTRATION

IDENTITY = CumulativeIntensity(lambda t: np.asarray(t, dtype=float), (0, 10), lambda z: np.asarray(z, dtype=float))


def test_thinning_degenerate_accepts_everything(stream):
    tally = ThinningTally()
    counts, _ = pooled(lambda: draw_thinning(stream, lambda t: np.full_like(t, 2.0), 2.0, (0, 3), tally=tally), 10_000)
    assert tally.efficiency == 1.0
    assert poisson_chi2_p(counts, 6.0) > 0.01


def test_thinning_efficiency_constant_majorizer(stream):
    tally = ThinningTally()
    for _ in range(1000):
        draw_thinning(stream, ILLUSTRATION.intensity, 43.38, ILLUSTRATION.interval, tally=tally)
    assert abs(tally.efficiency - 0.209) < 0.01


def test_thinning_efficiency_tight_majorizer(stream):
    tally = ThinningTally()
    for _ in range(1000):
        draw_thinning(stream, ILLUSTRATION.intensity, ILLUSTRATION.majorizer_c(), tally=tally)
    assert abs(tally.efficiency - 0.718) < 0.01


def test_thinning_reports_violation(stream):
    with pytest.raises(MajorizationError) as info:
        draw_thinning(stream, lambda t: np.full_like(t, 5.0), 1.0, (0, 10))
    assert info.value.value == 5.0 and 0 < info.value.time <= 10


def test_thinning_rejects_negative_intensity(stream):
    with pytest.raises(DomainError):
        draw_thinning(stream, lambda t: -np.ones_like(t), 1.0, (0, 10))


def test_thinning_with_loglinear_majorizer(stream):
    lam = lambda t: 0.5 * np.exp(0.3 * t)  # noqa: E731
    maj = LogLinearIntensity(0.0, 0.3)
    counts, times = pooled(lambda: draw_thinning(stream, lam, maj, (0, 4)), 5000)
    mass = 0.5 * (math.exp(1.2) - 1) / 0.3
    assert poisson_chi2_p(counts, mass) > 0.01
    cdf = lambda t: np.expm1(0.3 * np.clip(t, 0, 4)) / math.expm1(1.2)  # noqa: E731
    assert stats.kstest(times, cdf).pvalue > 0.01


def test_thinning_with_linear_majorizer(stream):
    counts, _ = pooled(lambda: draw_thinning(stream, lambda t: 0.5 * t, LinearIntensity(0, 1), (0, 3)), 5000)
    assert poisson_chi2_p(counts, 2.25) > 0.01


def test_inversion_identity_is_unit_rate(stream):
    counts, times = pooled(lambda: draw_inversion(stream, IDENTITY), 5000)
    assert poisson_chi2_p(counts, 10.0) > 0.01
    assert stats.kstest(times, stats.uniform(0, 10).cdf).pvalue > 0.01


def test_inversion_illustration(stream):
    cum = ILLUSTRATION.cumulative("tabulated")
    counts, times = pooled(lambda: draw_inversion(stream, cum), 10_000)
    assert abs(counts.mean() - 171.07) < 0.5
    assert stats.kstest(times, cum.normalized_cdf).pvalue > 0.01


def test_inversion_matches_closed_form(stream):
    cum = cumulative_of(LogLinearIntensity(1.0, -0.02), (8, 10)).without_inverse()
    _, t1 = pooled(lambda: draw_inversion(stream, cum), 2000)
    _, t2 = pooled(lambda: draw_sc_loglinear(stream, 1.0, -0.02, (8, 10)), 2000)
    assert stats.ks_2samp(t1, t2).pvalue > 0.01


def test_orderstats_identity_reduces_to_constant_rate(stream):
    c1, t1 = pooled(lambda: draw_orderstats(stream, IDENTITY), 4000)
    c2, t2 = pooled(lambda: ppp_orderstat(stream, (0, 10), 1.0), 4000)
    assert stats.ks_2samp(t1, t2).pvalue > 0.01
    assert stats.ks_2samp(c1, c2).pvalue > 0.01


def test_orderstats_first_event_law(stream):
    cum = cumulative_of(StepIntensity.regular([0.5, 2.0], (0, 2)))
    first = [draw_orderstats(stream, cum, SamplerOptions(at_most_k=1)) for _ in range(5000)]
    first = np.array([t[0] for t in first if t.size])
    full = [draw_orderstats(stream, cum) for _ in range(5000)]
    ref = np.array([t[0] for t in full if t.size])
    assert stats.ks_2samp(first, ref).pvalue > 0.01


def test_conditional_tiny_mass(stream):
    cum = cumulative_of(StepIntensity.regular([0.001], (0, 1)))
    for _ in range(500):
        assert draw_conditional(stream, cum, 1).size >= 1


def test_conditional_floor_two_on_short_window(stream):
    lam = ILLUSTRATION
    cum = CumulativeIntensity(lam.Lambda, (0, math.pi))
    counts, _ = pooled(lambda: draw_conditional(stream, cum, 2), 10_000)
    assert counts.min() >= 2
    assert poisson_chi2_p(counts, cum.mass, lower=2) > 0.01


def test_conditional_exactly_m(stream):
    cum = ILLUSTRATION.cumulative("tabulated")
    series = [draw_conditional(stream, cum, 4, exactly=True) for _ in range(3000)]
    assert all(t.size == 4 for t in series)
    assert stats.kstest(np.concatenate(series), cum.normalized_cdf).pvalue > 0.01


def test_conditional_zero_mass(stream):
    cum = cumulative_of(StepIntensity.regular([0.0], (0, 1)))
    with pytest.raises(ImpossibleConditionError):
        draw_conditional(stream, cum, 1)
    with pytest.raises(ImpossibleConditionError):
        ztdraw_cumulative_intensity(stream, cum)


def test_zt_thinning_law(stream):
    lam = lambda t: np.full_like(t, 0.4)  # noqa: E731
    counts, _ = pooled(lambda: ztdraw_intensity(stream, lam, 1.0, (0, 2)), 10_000)
    assert poisson_chi2_p(counts, 0.8, lower=1) > 0.01


def test_dispatch_cum_goes_to_orderstats():
    s = RngStream(0)
    t = draw(s, cum=ILLUSTRATION.cumulative("tabulated"))
    assert s.draws["poisson"] == 1 and s.draws["uniform"] == t.size


def test_dispatch_lambda_majorizer_goes_to_thinning():
    s = RngStream(0)
    t = draw(s, lam=ILLUSTRATION.intensity, majorizer=43.38, interval=ILLUSTRATION.interval)
    # thinning spends one uniform per proposal, far more than kept events
    assert s.draws["uniform"] > 3 * t.size


def test_dispatch_cum_without_inverse_goes_to_inversion():
    s = RngStream(0)
    draw(s, Lambda=ILLUSTRATION.Lambda, interval=ILLUSTRATION.interval)
    assert s.draws["poisson"] == 0 and s.draws["uniform"] > 0


def test_dispatch_both_prefers_cum_and_agrees(stream):
    cum = ILLUSTRATION.cumulative("tabulated")
    s = RngStream(1)
    draw(s, cum=cum, lam=ILLUSTRATION.intensity, majorizer=43.38, interval=ILLUSTRATION.interval)
    assert s.draws["poisson"] == 1
    _, t1 = pooled(lambda: draw(stream, cum=cum, lam=ILLUSTRATION.intensity, majorizer=43.38), 500)
    _, t2 = pooled(lambda: draw(stream, lam=ILLUSTRATION.intensity, majorizer=43.38,
                                interval=ILLUSTRATION.interval), 500)
    assert stats.ks_2samp(t1, t2).pvalue > 0.01


def test_dispatch_needs_something(stream):
    with pytest.raises(DomainError):
        draw(stream)


OPTION_SETS = st.builds(
    SamplerOptions,
    at_most_1=st.booleans(),
    at_least_1=st.booleans(),
    at_most_k=st.one_of(st.none(), st.integers(1, 5)),
)


@settings(max_examples=40, deadline=None)
@given(opts=OPTION_SETS, seed=st.integers(0, 2**32), level=st.floats(0.05, 20))
def test_option_contract_all_samplers(opts, seed, level):
    spec = StepIntensity([level, 2 * level], [0, 1, 3])
    cum = cumulative_of(spec)
    s = RngStream(seed)
    outputs = [
        draw_thinning(s, spec, 2 * level, (0, 3), opts),
        draw_inversion(s, cum, opts),
        draw_orderstats(s, cum, opts),
        draw_inversion(s, cum.without_inverse(), opts),
    ]
    for t in outputs:
        assert np.all(np.diff(t) > 0)
        assert np.all((t > 0) & (t <= 3))
        if opts.limit is not None:
            assert t.size <= opts.limit
        if opts.at_least_1:
            assert t.size >= 1
        if opts.at_least_1 and opts.at_most_1:
            assert t.size == 1
