"""Seedable, splittable random streams and the primitive draws the samplers use.

Every sampler in the package consumes randomness only through an
:class:`RngStream`. A stream is identified by ``(seed, substream)``; the same
pair always replays the same sequence, and different substreams of one seed
are independent (numpy ``SeedSequence`` spawn keys over PCG64DXSM).
"""

from __future__ import annotations

import math
from collections import Counter

import numpy as np
from scipy import special

from .errors import DomainError, ImpossibleConditionError

__all__ = [
    "RngStream",
    "as_stream",
    "uniform01",
    "exponential",
    "poisson",
    "truncated_poisson",
    "truncated_poisson_array",
]

_TWO52 = 2.0**-52
# below this mass the truncated Poisson is drawn by inverse CDF, above by rejection
_INVERSION_MAX_MASS = 50.0


class RngStream:
    """A deterministic uniform random source.

    Parameters
    ----------
    seed:
        Non-negative integer below 2**64.
    substream:
        Index of the independent substream of ``seed``.
    """

    def __init__(self, seed: int = 0, substream: int = 0):
        seed = int(seed)
        substream = int(substream)
        if not 0 <= seed < 2**64:
            raise DomainError(f"seed must be a 64-bit unsigned integer, got {seed}")
        if substream < 0:
            raise DomainError(f"substream must be non-negative, got {substream}")
        self.seed = seed
        self.substream = substream
        ss = np.random.SeedSequence(entropy=seed, spawn_key=(substream,))
        self.generator = np.random.Generator(np.random.PCG64DXSM(ss))
        # number of variates drawn, by kind; used for dispatch accounting
        self.draws: Counter[str] = Counter()

    def __repr__(self) -> str:
        return f"RngStream(seed={self.seed}, substream={self.substream})"

    def split(self, index: int) -> RngStream:
        """Return substream ``index`` of this stream's seed."""
        return RngStream(self.seed, index)

    def uniform(self, size=None):
        """Uniform variates on the open interval (0, 1), 52-bit resolution."""
        self.draws["uniform"] += 1 if size is None else int(np.prod(size))
        k = self.generator.integers(0, 2**52, size=size, dtype=np.int64)
        return (k + 0.5) * _TWO52

    def standard_exponential(self, size=None):
        """Unit-mean exponential variates, strictly positive."""
        u = self.uniform(size)
        return -np.log(u)

    def poisson(self, mass, size=None):
        self.draws["poisson"] += int(np.size(mass)) if size is None else int(np.prod(size))
        return self.generator.poisson(mass, size=size)


def as_stream(stream: RngStream | int | None) -> RngStream:
    """Coerce an int seed (or ``None`` for seed 0) into a stream."""
    if isinstance(stream, RngStream):
        return stream
    return RngStream(0 if stream is None else stream)


def uniform01(stream: RngStream) -> float:
    """One uniform draw in [0, 1) (in fact never exactly 0)."""
    return float(stream.uniform())


def exponential(stream: RngStream, mean: float) -> float:
    """Exponential variate with the given mean, by inversion of the CDF."""
    if not mean > 0 or not math.isfinite(mean):
        raise DomainError(f"exponential mean must be positive and finite, got {mean}")
    return float(mean * stream.standard_exponential())


def _check_mass(rate_mass) -> None:
    m = np.asarray(rate_mass, dtype=float)
    if not np.all(np.isfinite(m)) or np.any(m < 0):
        raise DomainError(f"Poisson mass must be finite and non-negative, got {rate_mass}")


def poisson(stream: RngStream, rate_mass: float) -> int:
    """Poisson(rate_mass) count.

    Uses numpy's sampler: multiplication method below mass 10, PTRS
    transformed rejection above.
    """
    _check_mass(rate_mass)
    if rate_mass == 0:
        return 0
    return int(stream.poisson(rate_mass))


def truncated_poisson(stream: RngStream, rate_mass: float, min_events: int = 1) -> int:
    """Poisson(rate_mass) conditioned on being at least ``min_events``."""
    return int(truncated_poisson_array(stream, np.array([rate_mass], dtype=float), min_events)[0])


def _tail_prob(mass: np.ndarray, m: int) -> np.ndarray:
    # P(N >= m) for N ~ Poisson(mass), accurate for tiny mass
    if m <= 0:
        return np.ones_like(mass)
    if m == 1:
        return -np.expm1(-mass)
    return special.gammainc(m, mass)


def truncated_poisson_array(stream: RngStream, masses, min_events: int = 1) -> np.ndarray:
    """Vector of independent truncated Poisson draws, one per entry of ``masses``.

    Inverse CDF on the renormalised pmf when the mass is small (or the
    truncation point is far in the tail), rejection from the untruncated
    Poisson otherwise.
    """
    masses = np.asarray(masses, dtype=float)
    _check_mass(masses)
    m = int(min_events)
    if m < 0:
        raise DomainError(f"min_events must be non-negative, got {min_events}")
    out = np.zeros(masses.shape, dtype=np.int64)
    if m == 0:
        if masses.size:
            out[...] = stream.poisson(masses)
        return out
    if np.any(masses == 0):
        bad = np.flatnonzero(masses.ravel() == 0)
        raise ImpossibleConditionError(
            f"cannot condition on >= {m} events with zero mass (entries {bad.tolist()})"
        )
    flat_mass = masses.ravel()
    flat_out = out.ravel()
    tail = _tail_prob(flat_mass, m)
    use_rejection = (flat_mass > _INVERSION_MAX_MASS) & (tail >= 0.5)

    idx = np.flatnonzero(use_rejection)
    while idx.size:
        draws = stream.poisson(flat_mass[idx])
        ok = draws >= m
        flat_out[idx[ok]] = draws[ok]
        idx = idx[~ok]

    idx = np.flatnonzero(~use_rejection)
    if idx.size:
        flat_out[idx] = _truncated_poisson_inversion(stream, flat_mass[idx], m, tail[idx])
    return flat_out.reshape(masses.shape)


def _truncated_poisson_inversion(stream, mass, m, tail):
    """Sequential search of the pmf renormalised on {m, m+1, ...}."""
    target = stream.uniform(mass.shape) * tail
    n = np.full(mass.shape, m, dtype=np.int64)
    log_pmf = m * np.log(mass) - mass - special.gammaln(m + 1.0)
    pmf = np.exp(log_pmf)
    cum = pmf.copy()
    active = cum < target
    # hard stop well past the bulk guards against round-off never reaching target
    limit = m + np.ceil(mass + 40.0 * np.sqrt(mass) + 60.0).astype(np.int64)
    while np.any(active):
        i = np.flatnonzero(active)
        pmf[i] = pmf[i] * mass[i] / (n[i] + 1)
        n[i] += 1
        cum[i] += pmf[i]
        active[i] = (cum[i] < target[i]) & (n[i] < limit[i])
    return n
