"""Seeded Monte Carlo cross-validation of the exact engines.

Sampling uses SplitMix64, a published, trivially portable 64-bit
generator: output i is a fixed bit-mix of seed + i * 0x9E3779B97F4A7C15,
so the stream is a pure function of (seed, index) and any batch of a run
can be regenerated independently and concurrently with identical
results.  Reference outputs for seed 0 (first three):

    0xE220A8397B1DCDAF  0x6E789E6AA1B965F4  0x06C45D188009454F

Uniform doubles take the top 53 bits, u = (z >> 11) * 2^-53 in [0, 1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .distribution import OutcomeDistribution, outcome_distribution
from .errors import DomainError
from .model import MeanInstance

__all__ = [
    "SampleRun",
    "splitmix64",
    "uniform_doubles",
    "sample_outcomes",
    "empirical_repetition_error",
    "exact_standard_error",
]

_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_U53 = 2.0**-53


@dataclass(frozen=True)
class SampleRun:
    """Empirical L_q error with its Monte Carlo uncertainty.

    empirical_error_q is the q-th root of the sample mean of
    |a - median|^q; standard_error is the standard error of that mean
    (before the root), the scale on which exact and empirical values are
    compared.
    """

    seed: int
    draws: int
    empirical_error_q: float
    standard_error: float


def splitmix64(seed: int, count: int) -> np.ndarray:
    """First `count` outputs of SplitMix64 for the given seed, as uint64."""
    if count < 0:
        raise DomainError(f"count must be nonnegative, got {count}")
    z = np.uint64(seed & 0xFFFFFFFFFFFFFFFF) + _GAMMA * np.arange(
        1, count + 1, dtype=np.uint64
    )
    z = (z ^ (z >> np.uint64(30))) * _MIX1
    z = (z ^ (z >> np.uint64(27))) * _MIX2
    return z ^ (z >> np.uint64(31))


def uniform_doubles(seed: int, count: int) -> np.ndarray:
    """count iid uniforms in [0, 1) from the SplitMix64 stream."""
    return (splitmix64(seed, count) >> np.uint64(11)).astype(np.float64) * _U53


def sample_outcomes(d: OutcomeDistribution, count: int, seed: int) -> np.ndarray:
    """count iid outcome indices drawn by inverse CDF over p.

    Deterministic in (seed, count): the same call always returns the same
    index sequence, bit for bit.
    """
    if count < 1:
        raise DomainError(f"count must be positive, got {count}")
    cum = np.cumsum(d.p)
    cum[-1] = 1.0
    u = uniform_doubles(seed, count)
    return np.searchsorted(cum, u, side="right").astype(np.int64)


def empirical_repetition_error(
    inst: MeanInstance,
    q: float,
    n: int,
    runs: int,
    seed: int,
    integer_tol: float = 1e-9,
) -> SampleRun:
    """Simulate `runs` medians of 2n+1 outputs and average |a - median|^q.

    The n = 0 case estimates the plain local error; agreement with the
    exact engines within a few standard errors is the package's
    cross-validation contract.
    """
    if math.isnan(q) or q < 1.0 or math.isinf(q):
        raise DomainError(f"q must lie in [1, inf), got {q!r}")
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)) or n < 0:
        raise DomainError(f"n must be a nonnegative integer, got {n!r}")
    if runs < 1:
        raise DomainError(f"runs must be positive, got {runs}")
    d = outcome_distribution(inst, integer_tol)
    width = 2 * int(n) + 1
    draws = sample_outcomes(d, runs * width, seed).reshape(runs, width)

    j = np.arange(d.M)
    outputs = np.sin(np.pi * np.minimum(j, d.M - j) / d.M) ** 2
    if d.angles.sigma_is_integer:
        # The support point's output equals the mean exactly.
        outputs[int(np.argmax(d.p))] = inst.a
    medians = np.median(outputs[draws], axis=1)  # odd width: exact order statistic

    stat = np.abs(inst.a - medians) ** q
    mean = float(stat.mean())
    se = float(stat.std(ddof=1) / math.sqrt(runs)) if runs > 1 else 0.0
    return SampleRun(int(seed), int(runs), mean ** (1.0 / q), se)


def exact_standard_error(
    inst: MeanInstance, q: float, n: int, runs: int, integer_tol: float = 1e-9
) -> float:
    """Standard error of the mean of |a - median|^q over `runs` samples,
    from the exact median distribution.

    The comparison scale for cross-checks: a run whose draws never hit a
    rare atom reports a sample standard error of zero, and this exact
    value takes over there.
    """
    from .distribution import collapse_outputs
    from .repetitions import median_distribution

    if runs < 1:
        raise DomainError(f"runs must be positive, got {runs}")
    base = collapse_outputs(outcome_distribution(inst, integer_tol))
    med = median_distribution(base, n)
    devs = np.abs(inst.a - med.alphas) ** q
    mean = float(np.dot(med.rhos, devs))
    var = float(np.dot(med.rhos, devs**2)) - mean**2
    return math.sqrt(max(var, 0.0) / runs)
