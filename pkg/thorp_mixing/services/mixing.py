"""
Mixing time and entropy contraction by exact evolution.

Responsibilities:
- distance_curve / mixing_time: L1 distance from uniform of the law of X_t
  started at the identity, and the first t at which it drops below a
  threshold (the shuffle is a random walk on a group, so one start suffices).
- entropy_decay: ENT(X_t) per round.
- contraction_experiment: ENT(X_d o mu) / ENT(mu) over sampled mu, with the
  fitted constant c_hat = d * (1 - max ratio).
- entropy_mixing_bound: rounds after which (1 - c/d)^k ENT(id) <= 1/8, the
  numeric form of the O(d^3) argument.
"""
import logging
from dataclasses import dataclass, field
from math import ceil, factorial, log

from thorp_mixing.constants import (
    DEFAULT_MIX_THRESHOLD,
    ENTROPY_BOUND_TARGET,
    MAX_EXACT_D,
    MAX_MIX_ROUNDS,
)
from thorp_mixing.exceptions import DomainError
from thorp_mixing.services.distributions import (
    PermDistribution,
    check_exact_capacity,
    convolve,
    distance_to_uniform,
    random_distribution,
    shuffle_law,
    step_distribution,
)
from thorp_mixing.services.entropy import relative_entropy
from thorp_mixing.utils.seeding import make_rng

logger = logging.getLogger(__name__)


@dataclass
class MixingProfile:
    """Per-round distances from the identity start and the first crossing."""

    d: int
    threshold: float
    mixing_time: int
    distances: list
    monotone: bool


def _check_threshold(threshold):
    if not 0.0 < threshold <= 2.0:
        raise DomainError(f"Threshold must lie in (0, 2], got {threshold}.")


def distance_curve(d, rounds):
    """
    Records {round, l1, tv, entropy} for t = 0..rounds from the identity.
    """
    check_exact_capacity(d)
    if rounds < 0:
        raise DomainError(f"Round count must be >= 0, got {rounds}.")
    law = PermDistribution.point(d)
    records = []
    for t in range(rounds + 1):
        l1 = distance_to_uniform(law)
        records.append({"round": t, "l1": l1, "tv": 0.5 * l1, "entropy": relative_entropy(law)})
        if t < rounds:
            law = step_distribution(law)
    return records


def mixing_profile(d, threshold=DEFAULT_MIX_THRESHOLD, max_rounds=MAX_MIX_ROUNDS):
    """
    Evolve from the identity until the L1 distance is <= threshold.

    Monotonicity of the distance is recorded, not assumed: the returned
    time is the first t that satisfies the threshold.

    Raises:
        CapacityError: If d is beyond exact mode.
        DomainError: On a bad threshold, or if max_rounds pass without crossing.
    """
    check_exact_capacity(d)
    _check_threshold(threshold)
    law = PermDistribution.point(d)
    distances = [distance_to_uniform(law)]
    monotone = True
    while distances[-1] > threshold:
        if len(distances) > max_rounds:
            raise DomainError(f"No crossing of {threshold} within {max_rounds} rounds for d={d}.")
        law = step_distribution(law)
        distances.append(distance_to_uniform(law))
        if distances[-1] > distances[-2] + 1e-12:
            monotone = False
            logger.warning("Distance increased at round %d for d=%d", len(distances) - 1, d)
    return MixingProfile(d=d, threshold=threshold, mixing_time=len(distances) - 1,
                         distances=distances, monotone=monotone)


def mixing_time(d, threshold=DEFAULT_MIX_THRESHOLD):
    """Smallest t with ||law(X_t) - U|| <= threshold, X_0 = identity."""
    return mixing_profile(d, threshold).mixing_time


def entropy_decay(d, rounds):
    """ENT(law(X_t)) for t = 0..rounds from the identity."""
    return [record["entropy"] for record in distance_curve(d, rounds)]


@dataclass
class ContractionSample:
    index: int
    kind: str
    support: int
    entropy_before: float
    entropy_after: float
    ratio: float = None

    def to_dict(self):
        return {
            "sample": self.index,
            "kind": self.kind,
            "support": self.support,
            "entropy_before": self.entropy_before,
            "entropy_after": self.entropy_after,
            "ratio": self.ratio,
        }


@dataclass
class ContractionReport:
    d: int
    samples: list = field(default_factory=list)
    max_ratio: float = None
    c_hat: float = None
    excluded: int = 0
    strict: bool = True

    def summary(self):
        return {
            "d": self.d,
            "samples": len(self.samples),
            "excluded": self.excluded,
            "max_ratio": self.max_ratio,
            "c_hat": self.c_hat,
            "strict_contraction": self.strict,
            "bound_rounds": entropy_mixing_bound(self.d, self.c_hat) if self.c_hat and self.c_hat > 0 else None,
        }


def contraction_sample(law, mu, index=0, kind="given"):
    """ENT(mu) and ENT(X o mu) for X ~ law; uniform mu is excluded (ratio None)."""
    before = relative_entropy(mu)
    if before <= 0.0:
        return ContractionSample(index, kind, int(mu.support().size), 0.0, 0.0, None)
    after = relative_entropy(convolve(law, mu))
    return ContractionSample(index, kind, int(mu.support().size), before, after, after / before)


def _sample_kinds(d):
    # full-support mu is only affordable below the largest exact deck
    return ("point", "sparse", "dirichlet") if d < MAX_EXACT_D else ("point", "sparse")


def contraction_experiment(d, samples, seed):
    """
    Measure ENT(X_d o mu) / ENT(mu) over sampled mu independent of the shuffle.

    Args:
        d (int): Deck exponent (d <= 3).
        samples (int): Number of mu to draw.
        seed (int): Master seed; sample i uses child seed (seed, 'contract/d', i).

    Returns:
        ContractionReport: per-sample ratios, max ratio and c_hat.
    """
    check_exact_capacity(d)
    if samples < 1:
        raise DomainError(f"Sample count must be >= 1, got {samples}.")
    law = shuffle_law(d, d)
    kinds = _sample_kinds(d)
    report = ContractionReport(d=d)
    for i in range(samples):
        rng = make_rng(seed, f"contract/{d}", i)
        kind = kinds[i % len(kinds)]
        mu = random_distribution(d, rng, kind=kind)
        sample = contraction_sample(law, mu, index=i, kind=kind)
        report.samples.append(sample)
    ratios = [s.ratio for s in report.samples if s.ratio is not None]
    report.excluded = len(report.samples) - len(ratios)
    if ratios:
        report.max_ratio = max(ratios)
        report.c_hat = d * (1.0 - report.max_ratio)
        report.strict = report.max_ratio < 1.0
    logger.info("Contraction d=%d: %d samples, max ratio %s", d, len(ratios), report.max_ratio)
    return report


def entropy_mixing_bound(d, c_hat, target=ENTROPY_BOUND_TARGET):
    """
    Rounds k*d after which (1 - c_hat/d)^k ENT(id) <= target.

    With target = 1/8, Pinsker gives total variation <= 1/4 afterwards, so
    this is the mixing-time bound implied by a contraction constant.

    Raises:
        DomainError: If c_hat is not positive.
    """
    if c_hat is None or c_hat <= 0:
        raise DomainError(f"Contraction constant must be positive, got {c_hat}.")
    start = log(factorial(1 << d))
    if start <= target:
        return 0
    factor = 1.0 - c_hat / d
    if factor <= 0.0:
        return d
    return d * max(1, ceil(log(target / start) / log(factor)))
