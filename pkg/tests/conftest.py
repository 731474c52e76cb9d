import numpy as np
import pytest
from scipy import stats

from nhppsim import RngStream


@pytest.fixture
def stream():
    return RngStream(20240611)


def poisson_chi2_p(counts, mass, lower=0, min_expected=5.0):
    """Textbook Pearson p-value of counts against Poisson(mass) restricted to {lower, ...}."""
    counts = np.asarray(counts)
    hi = int(max(counts.max(), stats.poisson.ppf(1 - 1e-12, mass))) + 1
    k = np.arange(lower, hi + 1)
    pmf = stats.poisson.pmf(k, mass)
    pmf[-1] += stats.poisson.sf(hi, mass)
    pmf /= pmf.sum()
    observed = np.bincount(counts - lower, minlength=k.size)[: k.size].astype(float)
    expected = pmf * counts.size
    # pool sparse cells from both tails into their neighbours
    obs, exp = [], []
    acc_o = acc_e = 0.0
    for o, e in zip(observed, expected):
        acc_o += o
        acc_e += e
        if acc_e >= min_expected:
            obs.append(acc_o)
            exp.append(acc_e)
            acc_o = acc_e = 0.0
    if acc_e > 0:
        obs[-1] += acc_o
        exp[-1] += acc_e
    obs, exp = np.array(obs), np.array(exp)
    return stats.chisquare(obs, exp).pvalue


def pooled(sampler, runs):
    series = [sampler() for _ in range(runs)]
    counts = np.array([s.size for s in series])
    times = np.concatenate(series) if series else np.empty(0)
    return counts, times


# acceptance criteria append (label, passed, detail); printed after the run
ACCEPTANCE_LINES = []


def record(label, passed, detail):
    line = f"[{'PASS' if passed else 'FAIL'}] {label}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
