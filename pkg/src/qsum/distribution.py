"""Exact outcome and output distributions of the summation estimator.

The estimator returns an index j in {0, ..., M-1}; classical
post-processing maps it to the output value sin^2(pi j / M).  For a mean
a with angles (theta, sigma, s) the outcome probabilities are

    p(j) = sin^2(pi s) / (2 M^2) * (csc^2(pi (j - sigma)/M)
                                    + csc^2(pi (j + sigma)/M)),

except that integral sigma collapses the distribution to a point mass on
an index whose output equals a exactly.  Both distributions here are
immutable after construction and may be shared across threads freely.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import ConsistencyError, DomainError
from .model import AngleSet, MeanInstance, derive_angles

__all__ = [
    "OutcomeDistribution",
    "OutputDistribution",
    "outcome_distribution",
    "output_value",
    "exact_error",
    "collapse_outputs",
    "event_probability",
]

# Below this, a csc^2 term is treated as a pole: legal only on the
# integral-sigma branch, so hitting it elsewhere means the integer
# detection tolerance is misconfigured for this M.
_POLE_TOL = 1e-12

_DRIFT_TOL = 1e-10


@dataclass(frozen=True)
class OutcomeDistribution:
    """Probabilities p(j) of the M outcome indices for one instance.

    normalization_drift records |sum p - 1| of the raw formula values
    before the vector was renormalized by its exact sum.
    """

    M: int
    p: np.ndarray
    instance: MeanInstance
    angles: AngleSet
    normalization_drift: float

    def __post_init__(self) -> None:
        self.p.flags.writeable = False

    def to_csv(self) -> str:
        lines = ["j,p,alpha"]
        for j in range(self.M):
            lines.append(
                f"{j},{self.p[j]:.17g},{output_value(j, self.M):.17g}"
            )
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        return json.dumps(
            {
                "M": self.M,
                "k": self.instance.k,
                "N": self.instance.N,
                "p": [float(v) for v in self.p],
            }
        )


@dataclass(frozen=True)
class OutputDistribution:
    """Collapsed distribution over the output values alpha.

    alphas is strictly increasing; cdf_below[i] = sum of rho over atoms
    strictly below alphas[i] (the left-closed cumulative, 0 at alpha = 0).
    """

    alphas: np.ndarray
    rhos: np.ndarray
    cdf_below: np.ndarray
    instance: MeanInstance
    angles: AngleSet

    def __post_init__(self) -> None:
        for arr in (self.alphas, self.rhos, self.cdf_below):
            arr.flags.writeable = False

    @property
    def atoms(self) -> list[tuple[float, float]]:
        return [(float(a), float(r)) for a, r in zip(self.alphas, self.rhos)]

    def cdf(self, alpha: float) -> float:
        """F(alpha) = total mass strictly below alpha."""
        i = int(np.searchsorted(self.alphas, alpha, side="left"))
        return float(self.cdf_below[i]) if i < len(self.alphas) else 1.0


def output_value(j: int, M: int) -> float:
    """Output sin^2(pi j / M) of outcome index j.

    Evaluated at min(j, M - j) so the symmetry under j <-> M - j holds
    exactly, not merely to rounding.
    """
    if M < 1:
        raise DomainError(f"M must be positive, got {M}")
    if not 0 <= j < M:
        raise DomainError(f"index j={j} out of range for M={M}")
    return math.sin(math.pi * min(j, M - j) / M) ** 2


def _folded_sines(M: int, sigma: float, j):
    """|sin(pi (j -+ sigma)/M)| via distances folded into [0, M/2].

    The distances of j - sigma and j + sigma to the nearest multiple of M
    are assembled from subtractions that are exact precisely when the
    result is small (j - sigma near 0, (j - M) + sigma near 0), so the
    near-pole factors keep full relative accuracy and vanish exactly on
    the integral-sigma branch.  A plain mod-M reduction would round tiny
    negative offsets at the ulp of M and lose them.
    """
    d1 = np.abs(j - sigma)  # j - sigma in (-M/2, M); exact when small
    d1 = np.where(d1 > 0.5 * M, M - d1, d1)
    d2 = np.abs((j - M) + sigma)  # (j+sigma) - M in [-M, M/2); exact when small
    d2 = np.where(d2 > 0.5 * M, M - d2, d2)
    return np.abs(np.sin(np.pi * d1 / M)), np.abs(np.sin(np.pi * d2 / M))


def exact_error(inst: MeanInstance, j: int, integer_tol: float = 1e-9) -> float:
    """|a - output(j)| via the product form |sin(pi(j-sigma)/M) sin(pi(j+sigma)/M)|."""
    M = inst.M
    if not 0 <= j < M:
        raise DomainError(f"index j={j} out of range for M={M}")
    ang = derive_angles(inst, integer_tol)
    f1, f2 = _folded_sines(M, ang.sigma, float(j))
    return float(f1 * f2)


def error_vector(inst: MeanInstance, angles: AngleSet) -> np.ndarray:
    """exact_error for all j at once."""
    f1, f2 = _folded_sines(inst.M, angles.sigma, np.arange(inst.M, dtype=float))
    return f1 * f2


def outcome_distribution(
    inst: MeanInstance, integer_tol: float = 1e-9
) -> OutcomeDistribution:
    """Construct the exact outcome distribution of an instance.

    Integral sigma yields a point mass on the canonical index realizing
    output = a (the smaller of sigma mod M and M - sigma mod M; both map
    to the same output).  Otherwise the closed-form p(j) is evaluated,
    checked for nonnegativity and unit mass, and renormalized by its
    computed sum so downstream expectations see an exact probability
    vector; the drift absorbed this way is recorded and must stay below
    1e-10.
    """
    ang = derive_angles(inst, integer_tol)
    M = inst.M
    if ang.sigma_is_integer:
        m = int(round(ang.sigma)) % M
        j0 = min(m, (M - m) % M)
        p = np.zeros(M)
        p[j0] = 1.0
        return OutcomeDistribution(M, p, inst, ang, 0.0)

    f1, f2 = _folded_sines(M, ang.sigma, np.arange(M, dtype=float))
    smallest = min(f1.min(), f2.min())
    if smallest < _POLE_TOL:
        raise ConsistencyError(
            f"near-pole outcome term (|sin| = {smallest:.3e}) for "
            f"k={inst.k}, N={inst.N}, M={M} with sigma={ang.sigma!r} not "
            f"flagged integral; integer_tol={integer_tol:g} is too tight "
            "for this M"
        )
    amp = math.sin(math.pi * ang.s) ** 2 / (2.0 * M * M)
    p = amp * (f1**-2.0 + f2**-2.0)
    if p.min() < -1e-12:
        raise ConsistencyError(f"negative outcome probability {p.min()!r}")
    total = float(p.sum())
    drift = abs(total - 1.0)
    if drift >= _DRIFT_TOL:
        raise ConsistencyError(
            f"outcome normalization drift {drift:.3e} for k={inst.k}, "
            f"N={inst.N}, M={M}"
        )
    return OutcomeDistribution(M, p / total, inst, ang, drift)


def output_table(d: OutcomeDistribution) -> np.ndarray:
    """Outputs sin^2(pi j / M) for all j, with the integral-sigma support
    point snapped to the exact mean (where the two coincide analytically)."""
    M = d.M
    table = np.sin(np.pi * np.arange(M) / M) ** 2
    if d.angles.sigma_is_integer:
        j0 = int(np.argmax(d.p))
        table[j0] = d.instance.a
    return table


def collapse_outputs(d: OutcomeDistribution) -> OutputDistribution:
    """Fold p(j) and p(M-j), which share the output sin^2(pi j/M), into
    atoms over distinct outputs, and tabulate the strict-below CDF.

    On the integral-sigma branch the single atom sits exactly at the mean.
    Atom outputs are strictly increasing for j = 0..floor(M/2); equal
    neighbours (possible only through rounding of sin^2) would be merged.
    """
    M = d.M
    if d.angles.sigma_is_integer:
        alphas = np.array([d.instance.a])
        rhos = np.array([1.0])
    else:
        half = M // 2
        j = np.arange(half + 1)
        alphas = np.sin(np.pi * j / M) ** 2
        rhos = np.empty(half + 1)
        rhos[0] = d.p[0]
        rhos[1:] = d.p[1 : half + 1]
        partner = M - j[1:]
        interior = partner > half
        rhos[1:][interior] += d.p[partner[interior]]
        if np.any(np.diff(alphas) <= 0.0):
            alphas, rhos = _merge_ties(alphas, rhos)
    cdf_below = np.concatenate(([0.0], np.cumsum(rhos)[:-1]))
    return OutputDistribution(alphas, rhos, cdf_below, d.instance, d.angles)


def _merge_ties(alphas: np.ndarray, rhos: np.ndarray):
    out_a: list[float] = [float(alphas[0])]
    out_r: list[float] = [float(rhos[0])]
    for a, r in zip(alphas[1:], rhos[1:]):
        if a <= out_a[-1]:
            out_r[-1] += float(r)
        else:
            out_a.append(float(a))
            out_r.append(float(r))
    return np.array(out_a), np.array(out_r)


def event_probability(d: OutcomeDistribution, indices: Iterable[int]) -> float:
    """Total outcome probability of a set of indices."""
    idx = set()
    for j in indices:
        if isinstance(j, bool) or not isinstance(j, (int, np.integer)):
            raise DomainError(f"indices must be integers, got {j!r}")
        if not 0 <= j < d.M:
            raise DomainError(f"index {j} out of range for M={d.M}")
        idx.add(int(j))
    return float(sum(d.p[j] for j in idx))
