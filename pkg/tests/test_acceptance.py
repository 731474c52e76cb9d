"""Acceptance criteria, one test per criterion.

Every test records a single PASS/FAIL line, shown in the terminal summary.
Seeds are fixed once below.
"""

import math
import time

import numpy as np
import pytest
from scipy import stats

from conftest import record
from nhppsim import (
    LinearIntensity,
    LogLinearIntensity,
    RngStream,
    StepIntensity,
    cumulative_of,
    draw_conditional,
    draw_inversion,
    draw_orderstats,
    draw_thinning,
    get_step_majorizer,
    numeric_inverse,
    ztdraw_cumulative_intensity,
    ztdraw_intensity,
    ztdraw_sc_linear,
    ztdraw_sc_loglinear,
    ztdraw_sc_step,
    ztdraw_sc_step_regular,
    ztppp,
    vztdraw_sc_step_regular,
)
from nhppsim.bench import batch_timings, time_call
from nhppsim.illustration import ILLUSTRATION
from nhppsim.rng import truncated_poisson_array
from nhppsim.suite import illustration_configs, validate_config
from nhppsim.validation import chi2_pmf_test, truncated_poisson_pmf, two_sample_count_test

SEED = 20240611
RUNS = 10_000
QUOTED_MASS = 171.07


@pytest.fixture(scope="module")
def illustration_reports():
    start = time.perf_counter()
    reports = [
        validate_config(config, RUNS, SEED, index=i, n_boot=200)[0]
        for i, config in enumerate(illustration_configs())
    ]
    return reports, time.perf_counter() - start


def test_c1_illustration_count_law(illustration_reports):
    reports, elapsed = illustration_reports
    ok = True
    parts = []
    for r in reports:
        good = abs(r.sample_mean - QUOTED_MASS) <= 0.6 and r.chi2_p > 0.9 and r.W1 < 0.5
        ok &= good
        parts.append(f"{r.label} mean={r.sample_mean:.2f} chi2={r.chi2:.3f}[p={r.chi2_p:.3f}] W1={r.W1:.3f}")
    ok &= elapsed < 120
    record("C1 illustration count law", ok, "; ".join(parts) + f"; {elapsed:.1f}s for 5 configs")
    assert ok


def test_c2_thinning_efficiency(illustration_reports):
    reports, _ = illustration_reports
    target = {"thinning_a": 0.209, "thinning_b": 0.245, "thinning_c": 0.718}
    eff = {r.label: r.efficiency for r in reports if r.label in target}
    ok = all(abs(eff[k] - v) <= 0.01 for k, v in target.items())
    # each configuration proposes several hundred points per run
    proposals = {k: round(RUNS * ILLUSTRATION.majorizer_mass(k[-1])) for k in target}
    ok &= all(p >= 100_000 for p in proposals.values())
    detail = ", ".join(f"{k}={eff[k]:.4f} (target {v})" for k, v in target.items())
    record("C2 thinning efficiency", ok, detail)
    assert ok


def test_c3_event_time_law(illustration_reports):
    reports, _ = illustration_reports
    ok = all(r.time_chi2_p > 0.9 and r.time_W1 < 0.6 for r in reports)
    detail = "; ".join(f"{r.label} chi2={r.time_chi2:.4f}[p={r.time_chi2_p:.3f}] W1={r.time_W1:.4f}" for r in reports)
    record("C3 event-time law (70 bins)", ok, detail)
    assert ok


def test_c4_majorizer_golden():
    values = get_step_majorizer(abs, np.arange(-5, 6), is_monotone=False, K=1).values.tolist()
    expected = [5.5, 4.5, 3.5, 2.5, 1.5, 1.5, 2.5, 3.5, 4.5, 5.5]
    ok = values == expected
    record("C4 majorizer golden output", ok, str(values))
    assert ok


def _random_step_spec(stream):
    n_bins = int(3 + stream.generator.integers(0, 8))
    widths = 0.2 + 2 * stream.uniform(n_bins)
    breaks = np.concatenate(([0.0], np.cumsum(widths)))
    values = 10 * stream.uniform(n_bins)
    return StepIntensity(values, breaks)


def _pooled(fn, runs, seed, index):
    series = [fn(RngStream(seed, index * 2**32 + j)) for j in range(runs)]
    return np.array([s.size for s in series]), np.concatenate(series)


def test_c5_cross_algorithm_equivalence():
    spec_stream = RngStream(SEED, 999)
    runs = 5000
    ok = True
    worst, worst_at = 1.0, ""
    for k in range(5):
        spec = _random_step_spec(spec_stream)
        cum = cumulative_of(spec)
        top = float(spec.values.max())
        samplers = {
            "thinning": lambda s: draw_thinning(s, spec, top, spec.interval),
            "inversion": lambda s: draw_inversion(s, cum),
            "orderstats": lambda s: draw_orderstats(s, cum),
        }
        out = {name: _pooled(fn, runs, SEED, 10 * k + i) for i, (name, fn) in enumerate(samplers.items())}
        names = list(out)
        for i in range(3):
            for j in range(i + 1, 3):
                (ca, ta), (cb, tb) = out[names[i]], out[names[j]]
                p_ks = stats.ks_2samp(ta, tb).pvalue
                p_counts = two_sample_count_test(ca, cb)[1]
                for kind, p in (("KS", p_ks), ("count chi2", p_counts)):
                    if p < worst:
                        worst, worst_at = p, f"spec {k} {names[i]} vs {names[j]} {kind}"
                ok &= p_ks > 0.01 and p_counts > 0.01
    record("C5 cross-algorithm equivalence", ok,
           f"30 tests (5 specs x 3 pairs x KS/count chi2), min p = {worst:.4f} at {worst_at}")
    assert ok


def _count_law_p(counts, mass, floor):
    top = int(max(counts.max(), stats.poisson.isf(1e-12, mass))) + 1
    return chi2_pmf_test(counts, lambda k: truncated_poisson_pmf(k, mass, floor), top)[1]


def test_c6_conditional_laws():
    draws = 20_000
    ok = True
    p_values = {}
    step = StepIntensity([0.3, 1.2, 0.1], [0, 0.5, 1.5, 3])
    cases = {
        "ztdraw_sc_step": (lambda s: ztdraw_sc_step(s, step, None), step.integral()),
        "ztdraw_sc_step_regular": (lambda s: ztdraw_sc_step_regular(s, [0.4, 0.9], (0, 2)), 1.3),
        "ztdraw_sc_linear": (lambda s: ztdraw_sc_linear(s, 0.5, 0.2, (0, 2)), 1.4),
        "ztdraw_sc_loglinear": (lambda s: ztdraw_sc_loglinear(s, 0.0, 0.5, (0, 2)), 2 * math.expm1(1.0)),
        "ztdraw_cumulative_intensity": (
            lambda s: ztdraw_cumulative_intensity(s, cumulative_of(LogLinearIntensity(-1.0, 0.3), (0, 3))),
            math.exp(-1.0) * math.expm1(0.9) / 0.3,
        ),
        "ztdraw_intensity": (lambda s: ztdraw_intensity(s, ILLUSTRATION.intensity, 43.38, (0, 0.5)),
                             float(ILLUSTRATION.Lambda(0.5))),
        "ztppp": (lambda s: ztppp(s, (0, 1), 0.7), 0.7),
    }
    for i, (name, (fn, mass)) in enumerate(cases.items()):
        counts, _ = _pooled(fn, draws, SEED, 100 + i)
        p_values[name] = _count_law_p(counts, mass, 1)
        ok &= counts.min() >= 1 and p_values[name] > 0.01

    vz = vztdraw_sc_step_regular(RngStream(SEED, 200), np.tile([0.4, 0.9], (draws, 1)), (0, 2))
    vcounts = np.sum(~np.isnan(vz), axis=1)
    p_values["vztdraw_sc_step_regular"] = _count_law_p(vcounts, 1.3, 1)
    ok &= vcounts.min() >= 1 and p_values["vztdraw_sc_step_regular"] > 0.01

    cum = cumulative_of(LinearIntensity(1.0, 1.0), (0, 1))
    floor_counts, _ = _pooled(lambda s: draw_conditional(s, cum, 3), draws, SEED, 300)
    p_values["draw_conditional(m=3)"] = _count_law_p(floor_counts, 1.5, 3)
    ok &= p_values["draw_conditional(m=3)"] > 0.01

    exact_counts, _ = _pooled(lambda s: draw_conditional(s, cum, 4, exactly=True), draws, SEED, 301)
    exact_ok = bool(np.all(exact_counts == 4))

    floor_stream = RngStream(SEED, 400)
    masses = np.concatenate([np.full(50_000, 0.05), np.full(50_000, 3.0)])
    floors = truncated_poisson_array(floor_stream, masses, 2)
    single = [draw_conditional(floor_stream, cum, 2).size for _ in range(100_000)]
    floor_ok = bool(floors.min() >= 2 and min(single) >= 2)
    ok &= exact_ok and floor_ok
    detail = ", ".join(f"{k} p={v:.3f}" for k, v in p_values.items())
    detail += f"; exactly-4 held={exact_ok}; floor held over 2x1e5 draws={floor_ok}"
    record("C6 conditional laws", ok, detail)
    assert ok


def test_c7_inversion_accuracy():
    runs = 5000
    ok = True
    parts = []
    for i, spec in enumerate([LogLinearIntensity(1.0, -0.02), LinearIntensity(0.5, 2.0)]):
        interval = (8, 10) if isinstance(spec, LogLinearIntensity) else (0, 3)
        cum = cumulative_of(spec, interval)
        _, analytic = _pooled(lambda s: draw_inversion(s, cum), runs, SEED, 500 + 2 * i)
        _, brent = _pooled(lambda s: draw_inversion(s, cum.without_inverse()), runs, SEED, 501 + 2 * i)
        p = stats.ks_2samp(analytic, brent).pvalue
        ok &= p > 0.01
        parts.append(f"{type(spec).__name__} KS p={p:.3f}")

    probes = ILLUSTRATION.mass * RngStream(SEED, 600).uniform(1000)
    t = np.array([numeric_inverse(ILLUSTRATION.Lambda, z, ILLUSTRATION.interval) for z in probes])
    rel = np.abs(ILLUSTRATION.Lambda(t) - probes) / np.abs(probes)
    ok &= rel.max() <= 1e-10
    parts.append(f"round trip max rel err {rel.max():.2e} over 1000 probes")
    record("C7 inversion accuracy", ok, "; ".join(parts))
    assert ok


def test_c8_performance_direction():
    stream = RngStream(SEED, 700)
    tab = ILLUSTRATION.cumulative("tabulated")
    brent = ILLUSTRATION.cumulative("numeric")
    loglin = cumulative_of(LogLinearIntensity(3.0, 0.1), (0, 10))
    t_tab = np.median(time_call(lambda: draw_inversion(stream, tab), 30))
    t_brent = np.median(time_call(lambda: draw_inversion(stream, brent), 30))
    t_exact = np.median(time_call(lambda: draw_inversion(stream, loglin), 30))
    t_exact_brent = np.median(time_call(lambda: draw_inversion(stream, loglin.without_inverse()), 30))
    scalar, vector = batch_timings(100_000, reps=1, first_only=True, seed=SEED)
    speedup = scalar.median_ms / vector.median_ms
    ok = t_tab < t_brent and t_exact < t_exact_brent and speedup >= 10
    record(
        "C8 performance direction",
        ok,
        f"illustration inverse {1e3 * t_tab:.2f}ms vs Brent {1e3 * t_brent:.2f}ms; "
        f"log-linear exact {1e3 * t_exact:.3f}ms vs Brent {1e3 * t_exact_brent:.3f}ms; "
        f"batch first-event R=1e5 speedup {speedup:.0f}x",
    )
    assert ok
