"""
Numerical checks of the entropy inequalities used in the mixing analysis.

Single-instance checks:
- pinsker_check: ||p - U|| <= sqrt(1/2 ENT(p)), reported both in the literal
  unhalved form and in the halved (classical Pinsker) form.
- projection_check: d(p, q) >= d(P, Q) for pushforwards P, Q under g.
- dent_ratio: d(mu, U) log|V| / ENT(mu), the quantity bounded below by c.
- convexity_check: convexity of q -> d(p, q).
- comparison_check: ENT(nu1) - ENT(nu2) = E(ENT(nu1 | F) - ENT(nu2 | F))
  when nu1 and nu2 agree on the preimages of a position set W.

run_lemma_suites sweeps every check over seeded random inputs and returns
one SuiteResult per property.
"""
import logging
from dataclasses import dataclass, field
from math import log, sqrt

import numpy as np
from scipy.special import xlogy

from thorp_mixing.constants import CHAIN_RULE_TOL, LEMMA_TOL
from thorp_mixing.exceptions import DomainError, UndefinedRatioError
from thorp_mixing.services.distributions import (
    PermDistribution,
    random_distribution,
    step_distribution,
)
from thorp_mixing.services.entropy import (
    chain_rule_decompose,
    conditional_entropy_given_positions,
    d_distance,
    d_scalar,
    d_terms,
    relative_entropy,
)
from thorp_mixing.utils.permutations import all_permutations, inverse_rows
from thorp_mixing.utils.seeding import make_rng

logger = logging.getLogger(__name__)

# Per-suite caps for the suites that loop in Python
LOOPED_SUITE_CAP = 1000
DENT_SUITE_CAP = 10_000
DENT_SIZES = (6, 24, 120)


@dataclass(frozen=True)
class PinskerCheck:
    lhs: float
    rhs: float
    ok: bool
    ok_halved: bool


@dataclass(frozen=True)
class ProjectionCheck:
    dpq: float
    dPQ: float
    ok: bool


@dataclass(frozen=True)
class ComparisonCheck:
    lhs: float
    rhs: float
    ok: bool


@dataclass
class SuiteResult:
    """Outcome of one randomized property sweep."""

    name: str
    trials: int
    violations: int
    worst_excess: float
    info: dict = field(default_factory=dict)

    @property
    def passed(self):
        return self.violations == 0

    def to_dict(self):
        return {
            "suite": self.name,
            "trials": self.trials,
            "violations": self.violations,
            "worst_excess": self.worst_excess,
            "passed": self.passed,
            **self.info,
        }


def _as_vector(p):
    return p.probs if isinstance(p, PermDistribution) else np.asarray(p, dtype=np.float64)


def pinsker_check(p):
    """
    Compare ||p - U|| (unhalved) with sqrt(ENT(p) / 2).

    Returns:
        PinskerCheck: ok is the literal unhalved comparison; ok_halved uses
            the halved total variation, which always satisfies the bound.
    """
    vec = _as_vector(p)
    lhs = float(np.abs(vec - 1.0 / vec.size).sum())
    rhs = sqrt(0.5 * relative_entropy(vec))
    return PinskerCheck(lhs=lhs, rhs=rhs, ok=lhs <= rhs + LEMMA_TOL, ok_halved=0.5 * lhs <= rhs + LEMMA_TOL)


def pushforward(p, g, size=None):
    """Law of g(X) for X ~ p, with g given as an integer array over V."""
    g = np.asarray(g, dtype=np.int64)
    vec = _as_vector(p)
    if g.shape != vec.shape:
        raise DomainError(f"Map has {g.size} entries but the vector has {vec.size}.")
    return np.bincount(g, weights=vec, minlength=size or int(g.max()) + 1)


def projection_check(p, q, g):
    """
    d(p, q) against d(g_* p, g_* q).

    Args:
        p, q (array-like): Probability vectors over V.
        g (array-like[int]): g[v] in W = {0, ..., |W|-1}.
    """
    size = int(np.max(g)) + 1
    dpq = d_distance(p, q)
    dPQ = d_distance(pushforward(p, g, size), pushforward(q, g, size))
    return ProjectionCheck(dpq=dpq, dPQ=dPQ, ok=dpq >= dPQ - LEMMA_TOL)


def dent_ratio(mu):
    """
    d(mu, U) * log|V| / ENT(mu).

    Raises:
        UndefinedRatioError: If mu is uniform (ENT(mu) = 0).
    """
    vec = _as_vector(mu)
    ent = relative_entropy(vec)
    if ent <= 0.0:
        raise UndefinedRatioError("Dent ratio is undefined for the uniform distribution.")
    uniform = np.full(vec.size, 1.0 / vec.size)
    return d_distance(vec, uniform) * log(vec.size) / ent


def convexity_check(p, q1, q2, lam):
    """
    d(p, lam q1 + (1 - lam) q2) <= lam d(p, q1) + (1 - lam) d(p, q2).

    Raises:
        DomainError: If lam is outside [0, 1] or a value is negative.
    """
    if not 0.0 <= lam <= 1.0:
        raise DomainError(f"lambda must lie in [0, 1], got {lam}.")
    lhs = d_scalar(p, lam * q1 + (1 - lam) * q2)
    rhs = lam * d_scalar(p, q1) + (1 - lam) * d_scalar(p, q2)
    return lhs <= rhs + LEMMA_TOL


def comparison_check(p1, p2, positions):
    """
    Check ENT(p1) - ENT(p2) = E ENT(p1 | F_W) - E ENT(p2 | F_W).

    The identity needs p1 and p2 to share the law of the cards at the
    positions W; the caller is responsible for that hypothesis.
    """
    lhs = relative_entropy(p1) - relative_entropy(p2)
    rhs = conditional_entropy_given_positions(p1, positions) - conditional_entropy_given_positions(p2, positions)
    return ComparisonCheck(lhs=lhs, rhs=rhs, ok=abs(lhs - rhs) <= CHAIN_RULE_TOL)


def laws_sharing_positions(d, positions, rng):
    """
    Two random laws on S_n with the same law of (pi^-1(x): x in W).

    The second law reuses the first one's mass on every W-configuration and
    redistributes it at random inside the configuration.
    """
    first = random_distribution(d, rng, kind="dirichlet")
    n = first.n
    inv = inverse_rows(all_permutations(n))
    keys = np.zeros(first.size, dtype=np.int64)
    for column in sorted(positions):
        keys = keys * n + inv[:, column]
    _, classes = np.unique(keys, return_inverse=True)
    classes = classes.reshape(-1)
    class_mass = np.bincount(classes, weights=first.probs)
    weights = rng.gamma(1.0, size=first.size)
    weights_per_class = np.bincount(classes, weights=weights)
    second = weights / weights_per_class[classes] * class_mass[classes]
    return first, PermDistribution.from_weights(d, second)


def _random_simplex_rows(rng, rows, size):
    """Rows of random distributions with per-row Dirichlet concentrations."""
    alpha = rng.choice([0.05, 0.3, 1.0, 5.0], size=rows)
    weights = rng.gamma(alpha[:, None], size=(rows, size))
    # a handful of exact zeros exercises the 0 log 0 convention
    weights[rng.random((rows, size)) < 0.05] = 0.0
    empty = weights.sum(axis=1) == 0
    weights[empty, 0] = 1.0
    return weights / weights.sum(axis=1, keepdims=True)


def _entropy_rows(rows):
    return np.maximum(xlogy(rows, rows.shape[1] * rows).sum(axis=1), 0.0)


def projection_suite(trials, rng, domain=24, image=5):
    p = _random_simplex_rows(rng, trials, domain)
    q = _random_simplex_rows(rng, trials, domain)
    g = rng.integers(0, image, size=(trials, domain))
    rows = np.repeat(np.arange(trials), domain)
    P = np.zeros((trials, image))
    Q = np.zeros((trials, image))
    np.add.at(P, (rows, g.reshape(-1)), p.reshape(-1))
    np.add.at(Q, (rows, g.reshape(-1)), q.reshape(-1))
    excess = d_terms(P, Q).sum(axis=1) - d_terms(p, q).sum(axis=1)
    return SuiteResult("projection", trials, int((excess > LEMMA_TOL).sum()), float(excess.max()))


def convexity_suite(trials, rng):
    values = rng.exponential(1.0, size=(3, trials))
    values[rng.random((3, trials)) < 0.05] = 0.0
    p, q1, q2 = values
    lam = rng.random(trials)
    lam[:trials // 50] = rng.integers(0, 2, size=trials // 50)
    lhs = d_terms(p, lam * q1 + (1 - lam) * q2)
    rhs = lam * d_terms(p, q1) + (1 - lam) * d_terms(p, q2)
    excess = lhs - rhs
    return SuiteResult("convexity", trials, int((excess > LEMMA_TOL).sum()), float(excess.max()))


def pinsker_suite(trials, rng, size=24):
    rows = _random_simplex_rows(rng, trials, size)
    rhs = np.sqrt(0.5 * _entropy_rows(rows))
    lhs = np.abs(rows - 1.0 / size).sum(axis=1)
    excess = 0.5 * lhs - rhs
    literal_failures = int((lhs > rhs + LEMMA_TOL).sum())
    return SuiteResult(
        "pinsker", trials, int((excess > LEMMA_TOL).sum()), float(excess.max()),
        info={"form": "halved", "unhalved_form_failures": literal_failures},
    )


def mixture_identity_suite(trials, rng, size=24):
    p = _random_simplex_rows(rng, trials, size)
    q = _random_simplex_rows(rng, trials, size)
    direct = d_terms(p, q).sum(axis=1)
    via_entropies = 0.5 * _entropy_rows(p) + 0.5 * _entropy_rows(q) - _entropy_rows(0.5 * (p + q))
    gap = np.abs(direct - via_entropies)
    return SuiteResult("mixture_identity", trials, int((gap > LEMMA_TOL).sum()), float(gap.max()))


def chain_rule_suite(trials, rng, d=2):
    trials = min(trials, LOOPED_SUITE_CAP)
    worst = 0.0
    violations = 0
    n = 1 << d
    for i in range(trials):
        mu = random_distribution(d, rng, kind="dirichlet" if i % 2 == 0 else "sparse")
        cut = int(rng.integers(0, n))
        gap = abs(chain_rule_decompose(mu, cut).total - relative_entropy(mu))
        worst = max(worst, gap)
        violations += gap > CHAIN_RULE_TOL
    return SuiteResult("chain_rule", trials, int(violations), worst)


def comparison_suite(trials, rng, d=2):
    trials = min(trials, LOOPED_SUITE_CAP)
    worst = 0.0
    violations = 0
    n = 1 << d
    for _ in range(trials):
        k = int(rng.integers(1, n))
        positions = sorted(int(x) for x in rng.choice(n, size=k, replace=False))
        p1, p2 = laws_sharing_positions(d, positions, rng)
        check = comparison_check(p1, p2, positions)
        worst = max(worst, abs(check.lhs - check.rhs))
        violations += not check.ok
    return SuiteResult("comparison", trials, int(violations), worst)


def dent_suite(trials, rng):
    """Minimum dent ratio over random and near-uniform laws; reported as the fitted c."""
    per_size = {}
    violations = 0
    for size in DENT_SIZES:
        count = min(trials, DENT_SUITE_CAP)
        rows = _random_simplex_rows(rng, count, size)
        # second half: small perturbations of the uniform law
        near = count // 2
        noise = rng.normal(size=(near, size))
        noise -= noise.mean(axis=1, keepdims=True)
        scale = rng.uniform(1e-3, 1e-1, size=(near, 1)) / size
        rows[:near] = np.clip(1.0 / size + scale * noise, 0.0, None)
        rows[:near] /= rows[:near].sum(axis=1, keepdims=True)
        ent = _entropy_rows(rows)
        keep = ent >= 1e-6
        ratio = d_terms(rows[keep], 1.0 / size).sum(axis=1) * log(size) / ent[keep]
        violations += int((ratio <= 0).sum())
        per_size[str(size)] = float(ratio.min())
    fitted = min(per_size.values())
    return SuiteResult("dent", min(trials, DENT_SUITE_CAP) * len(DENT_SIZES), violations, -fitted,
                       info={"fitted_c": fitted, "min_ratio_by_size": per_size})


def monotonicity_suite(trials, rng, d=2):
    """ENT(step(mu)) <= ENT(mu), and step fixes the uniform law."""
    trials = min(trials, LOOPED_SUITE_CAP)
    uniform = PermDistribution.uniform(d)
    fixed_gap = float(np.abs(step_distribution(uniform).probs - uniform.probs).max())
    worst = -np.inf
    violations = 0
    for i in range(trials):
        mu = random_distribution(d, rng, kind=("dirichlet", "sparse", "point")[i % 3])
        excess = relative_entropy(step_distribution(mu)) - relative_entropy(mu)
        worst = max(worst, excess)
        violations += excess > LEMMA_TOL
    violations += fixed_gap > 1e-15
    return SuiteResult("monotonicity", trials, int(violations), float(worst),
                       info={"uniform_fixed_point_gap": fixed_gap})


SUITES = (
    ("projection", projection_suite),
    ("convexity", convexity_suite),
    ("pinsker", pinsker_suite),
    ("mixture_identity", mixture_identity_suite),
    ("chain_rule", chain_rule_suite),
    ("comparison", comparison_suite),
    ("dent", dent_suite),
    ("monotonicity", monotonicity_suite),
)


def run_lemma_suites(trials, master_seed, names=None):
    """
    Run every property suite with its own child seed.

    Args:
        trials (int): Requested trials per suite (looped suites are capped).
        master_seed (int): Master seed of the run.
        names (iterable[str] | None): Subset of suites to run.

    Returns:
        list[SuiteResult]: In SUITES order.
    """
    if trials < 1:
        raise DomainError(f"Trial count must be >= 1, got {trials}.")
    wanted = set(names) if names else None
    results = []
    for index, (name, suite) in enumerate(SUITES):
        if wanted is not None and name not in wanted:
            continue
        rng = make_rng(master_seed, f"lemmas/{name}", index)
        result = suite(trials, rng)
        logger.info("Suite %s: %d trials, %d violations", name, result.trials, result.violations)
        results.append(result)
    return results
