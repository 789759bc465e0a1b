"""One-shot interval tester: known Poisson vs unknown Poisson mixture.

Given i.i.d. counts that are either Poi(mu) or some uniform Poisson mixture
at squared-Hellinger distance >= eps from it, the tester histograms the
sample, then compares the empirical mass of every integer interval [a, b]
inside [0, x_max] against the exact Poi(mu) interval mass with a Bernoulli
squared-Hellinger threshold.  Some interval must separate the two cases, so
scanning all of them loses nothing but constants.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .distances import hellinger_sq_bernoulli, poisson_log_pmf

ACCEPT = "accept"
REJECT = "reject"
BUDGET_EXCEEDED = "budget_exceeded"


@dataclass(frozen=True)
class IntervalTesterParams:
    """Derived operating point: ceiling x_max, threshold tau, sample count m."""

    mu: float
    tau: float
    x_max: int
    m: int

    def __post_init__(self):
        if not math.isfinite(self.mu) or self.mu < 0:
            raise ValueError(f"mu must be finite and nonnegative, got {self.mu}")
        if self.tau <= 0:
            raise ValueError(f"tau must be positive, got {self.tau}")
        if self.x_max < 0 or self.m < 1:
            raise ValueError("x_max must be >= 0 and m >= 1")


@dataclass(frozen=True)
class IntervalWitness:
    """The interval that triggered rejection, with both masses and the gap."""

    a: int
    b: int
    mu_mass: float
    est_mass: float
    hellinger_sq: float
    repeat: int | None = None
    subset_size: int | None = None


@dataclass(frozen=True)
class CollisionWitness:
    """Group-collision evidence: how many of the g groups collided."""

    groups: int
    collided: int


@dataclass(frozen=True)
class Verdict:
    """Tester outcome plus optional rejection evidence and a work counter."""

    outcome: str  # accept | reject | budget_exceeded
    witness: object | None = None
    intervals_evaluated: int = field(default=0, compare=False)

    def __post_init__(self):
        if self.outcome not in (ACCEPT, REJECT, BUDGET_EXCEEDED):
            raise ValueError(f"unknown outcome {self.outcome!r}")


def derive_interval_params(mu: float, eps: float, delta: float,
                           tau: float | None = None,
                           x_max: int | None = None,
                           m: int | None = None) -> IntervalTesterParams:
    """Operating point for target Hellinger gap eps and failure budget delta.

    x_max = ceil(2*mu + 6*ln(200*ln(4/eps)/eps)) + 1
    tau   = eps / (64*ln(4/eps))
    m     = ceil(8*ln(8*(x_max+1)^2/delta) / tau)

    The keyword arguments override the corresponding derived constant; they
    exist for experiments, not for routine use.
    """
    mu = float(mu)
    eps = float(eps)
    delta = float(delta)
    if not math.isfinite(mu) or mu < 0:
        raise ValueError(f"mu must be finite and nonnegative, got {mu}")
    if not 0.0 < eps <= 2.0:
        raise ValueError(f"eps must lie in (0, 2], got {eps}")
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    log_term = math.log(4.0 / eps)
    if x_max is None:
        x_max = math.ceil(2.0 * mu + 6.0 * math.log(200.0 * log_term / eps)) + 1
    if tau is None:
        tau = eps / (64.0 * log_term)
    if m is None:
        m = math.ceil(8.0 * math.log(8.0 * (x_max + 1) ** 2 / delta) / tau)
    return IntervalTesterParams(mu=mu, tau=float(tau), x_max=int(x_max), m=int(m))


def poisson_pmf_table(mu: float, x_max: int) -> np.ndarray:
    """Poi(mu) PMF on 0..x_max as a float64 vector."""
    return np.array([math.exp(poisson_log_pmf(mu, x)) for x in range(x_max + 1)])


def interval_mass_matrix(pmf: np.ndarray) -> np.ndarray:
    """M[a, b] = sum of pmf[a..b], clipped to [0, 1]; a > b entries are 0."""
    prefix = np.concatenate(([0.0], np.cumsum(pmf)))
    mat = prefix[np.newaxis, 1:] - prefix[:-1, np.newaxis]
    return np.clip(np.triu(mat), 0.0, 1.0)


def run_interval_tester(params: IntervalTesterParams, samples: np.ndarray) -> Verdict:
    """Scan every interval; reject on the first (lexicographic) violation.

    Counts above x_max are ignored (they fall in no interval).  The verdict
    is a pure function of (params, samples): O(m + x_max^2) time via a
    prefix-summed histogram, one Hellinger evaluation per interval.
    """
    samples = np.asarray(samples)
    if samples.ndim != 1:
        raise ValueError("samples must be a 1-D array")
    if samples.size != params.m:
        raise ValueError(f"expected m={params.m} samples, got {samples.size}")
    if samples.size and not np.issubdtype(samples.dtype, np.integer):
        raise ValueError("samples must be integers")
    if samples.size and samples.min() < 0:
        raise ValueError("samples must be nonnegative")

    x_max = params.x_max
    kept = samples[samples <= x_max]
    hist = np.bincount(kept, minlength=x_max + 1).astype(np.float64)
    prefix = np.concatenate(([0.0], np.cumsum(hist)))
    est = (prefix[np.newaxis, 1:] - prefix[:-1, np.newaxis]) / params.m

    mu_mass = interval_mass_matrix(poisson_pmf_table(params.mu, x_max))
    valid = np.triu(np.ones((x_max + 1, x_max + 1), dtype=bool))
    est = np.clip(np.where(valid, est, 0.0), 0.0, 1.0)

    gaps = hellinger_sq_bernoulli(mu_mass, est)
    flags = (gaps >= params.tau) & valid
    total = (x_max + 1) * (x_max + 2) // 2

    if not flags.any():
        return Verdict(outcome=ACCEPT, intervals_evaluated=total)
    flat = int(np.argmax(flags))  # C order = lexicographic (a, b)
    a, b = divmod(flat, x_max + 1)
    witness = IntervalWitness(a=int(a), b=int(b),
                              mu_mass=float(mu_mass[a, b]),
                              est_mass=float(est[a, b]),
                              hellinger_sq=float(gaps[a, b]))
    return Verdict(outcome=REJECT, witness=witness, intervals_evaluated=total)
