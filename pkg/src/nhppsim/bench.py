"""Wall-clock benchmarks of the samplers on the worked example."""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .batch import vdraw_sc_step_regular
from .core import SamplerOptions
from .general import draw_inversion, draw_orderstats, draw_thinning
from .illustration import ILLUSTRATION, Illustration
from .rng import RngStream
from .special import draw_sc_step_regular

__all__ = ["Timing", "time_call", "sampler_timings", "batch_timings", "timings_to_csv"]

FIRST = SamplerOptions(at_most_1=True)


@dataclass
class Timing:
    config: str
    reps: int
    median_ms: float
    q10_ms: float
    q90_ms: float

    @classmethod
    def from_seconds(cls, config: str, seconds) -> Timing:
        ms = np.asarray(seconds) * 1e3
        q10, med, q90 = np.quantile(ms, [0.1, 0.5, 0.9])
        return cls(config, int(ms.size), float(med), float(q10), float(q90))


def time_call(fn, reps: int) -> np.ndarray:
    out = np.empty(reps)
    for i in range(reps):
        start = time.perf_counter()
        fn()
        out[i] = time.perf_counter() - start
    return out


def sampler_timings(reps: int = 20, first_only: bool = False, seed: int = 0,
                    example: Illustration = ILLUSTRATION) -> list[Timing]:
    """Median time to draw one series (or its first event) with each sampler."""
    stream = RngStream(seed)
    opts = FIRST if first_only else None
    lam = example.intensity
    tab = example.cumulative("tabulated")
    brent = example.cumulative("numeric")
    configs = {
        "thinning_a": lambda: draw_thinning(stream, lam, example.majorizer_a(), example.interval, opts),
        "thinning_b": lambda: draw_thinning(stream, lam, example.majorizer_b(), None, opts),
        "thinning_c": lambda: draw_thinning(stream, lam, example.majorizer_c(), None, opts),
        "inversion_inverse": lambda: draw_inversion(stream, tab, opts),
        "inversion_brent": lambda: draw_inversion(stream, brent, opts),
        "orderstats_inverse": lambda: draw_orderstats(stream, tab, opts),
        "orderstats_brent": lambda: draw_orderstats(stream, brent, opts),
    }
    suffix = "_first" if first_only else "_all"
    return [Timing.from_seconds(name + suffix, time_call(fn, reps)) for name, fn in configs.items()]


def batch_timings(rows: int, reps: int = 3, first_only: bool = True, seed: int = 0,
                  example: Illustration = ILLUSTRATION) -> list[Timing]:
    """Vectorised vs scalar-loop sampling of ``rows`` series from majorizer (b)."""
    stream = RngStream(seed)
    opts = FIRST if first_only else None
    values = example.majorizer_b().values
    matrix = np.tile(values, (rows, 1))
    interval = example.interval

    def scalar():
        for _ in range(rows):
            draw_sc_step_regular(stream, values, interval, opts)

    def vector():
        vdraw_sc_step_regular(stream, matrix, interval, opts)

    tag = "first" if first_only else "all"
    return [
        Timing.from_seconds(f"scalar_loop_{tag}_R{rows}", time_call(scalar, reps)),
        Timing.from_seconds(f"vectorized_{tag}_R{rows}", time_call(vector, reps)),
    ]


def timings_to_csv(timings) -> str:
    lines = ["config,reps,median_ms,q10_ms,q90_ms"]
    lines += [f"{t.config},{t.reps},{t.median_ms:.4f},{t.q10_ms:.4f},{t.q90_ms:.4f}" for t in timings]
    return "\n".join(lines) + "\n"
