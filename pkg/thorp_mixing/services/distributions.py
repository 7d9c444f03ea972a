"""
Exact distributions over S_n for small decks.

Responsibilities:
- PermDistribution: dense probability vector of length n!, indexed by
  Lehmer rank, for n <= 8.
- step_distribution / evolve: push a distribution through reverse rounds,
  averaging over every bit column of a round.
- convolve: the law of X o mu for independent X and mu.
- L1 distance in the unhalved convention, plus the halved total variation.
- Random distribution generators for property sweeps.

Notes:
- Rank transition tables are built once per d and cached.
- Each bit column induces a bijection on ranks, so accumulation is a plain
  fancy-index add with a fixed column order; results are deterministic.
"""
import logging
from dataclasses import dataclass
from functools import lru_cache
from math import factorial

import numpy as np

from thorp_mixing.constants import (
    CONTRACTION_MAX_SUPPORT,
    MAX_EXACT_D,
    MAX_EXACT_N_FACTORIAL,
    SIMPLEX_TOL,
)
from thorp_mixing.exceptions import CapacityError, DomainError
from thorp_mixing.services.shuffle import round_maps
from thorp_mixing.utils.permutations import (
    DeckParams,
    Permutation,
    all_permutations,
    rank,
    rank_many,
)

logger = logging.getLogger(__name__)


def check_exact_capacity(d):
    """Raise CapacityError unless S_n for n = 2^d fits exact mode."""
    if d > MAX_EXACT_D:
        raise CapacityError(
            f"Exact distribution over S_{1 << d} refused for d={d}",
            f"d <= {MAX_EXACT_D}, n! <= {MAX_EXACT_N_FACTORIAL}",
        )


@dataclass(frozen=True, eq=False)
class PermDistribution:
    """
    Probability vector over S_n, n = 2^d, indexed by Lehmer rank.

    Raises:
        CapacityError: If d exceeds the exact-mode limit.
        DomainError: If probs has the wrong length, negative entries, or
            does not sum to 1 within SIMPLEX_TOL.
    """

    d: int
    probs: np.ndarray

    def __post_init__(self):
        DeckParams(self.d)
        check_exact_capacity(self.d)
        probs = np.array(self.probs, dtype=np.float64).reshape(-1)
        expected = factorial(1 << self.d)
        if probs.size != expected:
            raise DomainError(f"Distribution for d={self.d} needs {expected} entries, got {probs.size}.")
        if np.any(probs < 0) or not np.all(np.isfinite(probs)):
            raise DomainError("Distribution entries must be finite and nonnegative.")
        total = probs.sum()
        if abs(total - 1.0) > SIMPLEX_TOL:
            raise DomainError(f"Distribution sums to {total!r}, not 1.")
        probs.setflags(write=False)
        object.__setattr__(self, "probs", probs)

    @property
    def n(self):
        return 1 << self.d

    @property
    def size(self):
        return self.probs.size

    @classmethod
    def uniform(cls, d):
        check_exact_capacity(d)
        size = factorial(1 << d)
        return cls(d, np.full(size, 1.0 / size))

    @classmethod
    def point(cls, d, perm=None):
        """Point mass at perm (identity when omitted)."""
        check_exact_capacity(d)
        n = 1 << d
        probs = np.zeros(factorial(n))
        probs[rank(perm if perm is not None else Permutation.identity(n))] = 1.0
        return cls(d, probs)

    @classmethod
    def from_weights(cls, d, weights):
        """Normalise nonnegative weights into a distribution."""
        weights = np.asarray(weights, dtype=np.float64)
        total = weights.sum()
        if total <= 0:
            raise DomainError("Weights must have a positive sum.")
        return cls(d, weights / total)

    def support(self):
        """Ranks with positive mass, ascending."""
        return np.flatnonzero(self.probs > 0)

    def __eq__(self, other):
        if not isinstance(other, PermDistribution):
            return NotImplemented
        return self.d == other.d and np.array_equal(self.probs, other.probs)

    __hash__ = None


@lru_cache(maxsize=4)
def rank_transitions(d):
    """
    targets[k, r] = rank(nu_k o pi_r) for every round map nu_k and rank r.

    Returns:
        np.ndarray: (2^(2^(d-1)), n!) read-only int64 array.
    """
    check_exact_capacity(d)
    perms = all_permutations(1 << d)
    maps = round_maps(d)
    targets = np.stack([rank_many(position_map[perms]) for position_map in maps])
    targets.setflags(write=False)
    logger.info("Built rank transition tables for d=%d (%d maps x %d ranks)", d, *targets.shape)
    return targets


def step_distribution(mu):
    """
    Law after one reverse round, averaged over all bit columns.

    Args:
        mu (PermDistribution): Current law.

    Returns:
        PermDistribution: new[rank(nu o pi)] += mu[rank(pi)] / 2^(2^(d-1)).
    """
    targets = rank_transitions(mu.d)
    weight = 1.0 / targets.shape[0]
    out = np.zeros(mu.size, dtype=np.float64)
    scaled = mu.probs * weight
    for row in targets:
        out[row] += scaled
    return PermDistribution(mu.d, out)


def evolve(mu, rounds):
    """Laws mu, step(mu), ..., step^rounds(mu) as a list."""
    if rounds < 0:
        raise DomainError(f"Round count must be >= 0, got {rounds}.")
    laws = [mu]
    for _ in range(rounds):
        laws.append(step_distribution(laws[-1]))
    return laws


def shuffle_law(d, rounds):
    """Law of X_rounds started from the identity."""
    return evolve(PermDistribution.point(d), rounds)[-1]


def convolve(law, mu, max_support=None):
    """
    Law of X o mu for independent X ~ law and mu.

    For each sigma in the support of mu, the ranks rank(tau o sigma) are
    the rows of the full permutation table with columns reordered by sigma.

    Args:
        law (PermDistribution): Law of X (e.g. shuffle_law(d, d)).
        mu (PermDistribution): Law of the independent permutation.
        max_support (int | None): Refuse mu with a larger support. Defaults
            to CONTRACTION_MAX_SUPPORT when d == MAX_EXACT_D.

    Raises:
        DomainError: If the two laws live on different decks.
        CapacityError: If mu's support exceeds max_support.
    """
    if law.d != mu.d:
        raise DomainError(f"Cannot convolve laws for d={law.d} and d={mu.d}.")
    if max_support is None and mu.d == MAX_EXACT_D:
        max_support = CONTRACTION_MAX_SUPPORT
    support = mu.support()
    if max_support is not None and support.size > max_support:
        raise CapacityError(f"Convolution with support {support.size} refused",
                            f"support <= {max_support}")
    perms = all_permutations(1 << mu.d)
    out = np.zeros(mu.size, dtype=np.float64)
    for sigma_rank in support:
        sigma = perms[sigma_rank]
        targets = rank_many(perms[:, sigma])
        out[targets] += law.probs * mu.probs[sigma_rank]
    return PermDistribution(mu.d, out)


def _as_vector(p):
    return p.probs if isinstance(p, PermDistribution) else np.asarray(p, dtype=np.float64)


def l1_distance(p, q):
    """
    Unhalved L1 distance sum |p - q|, in [0, 2].

    Raises:
        DomainError: If p and q belong to different decks or lengths differ.
    """
    if isinstance(p, PermDistribution) and isinstance(q, PermDistribution) and p.d != q.d:
        raise DomainError(f"Distributions for d={p.d} and d={q.d} are not comparable.")
    pv, qv = _as_vector(p), _as_vector(q)
    if pv.shape != qv.shape:
        raise DomainError(f"Length mismatch: {pv.size} vs {qv.size}.")
    return float(np.abs(pv - qv).sum())


def tv_distance(p, q):
    """Halved total variation, l1_distance / 2."""
    return 0.5 * l1_distance(p, q)


def distance_to_uniform(mu):
    """Unhalved L1 distance from mu to the uniform law on S_n."""
    return float(np.abs(mu.probs - 1.0 / mu.size).sum())


def random_distribution(d, rng, kind="dirichlet", support=None):
    """
    Sample a non-degenerate test distribution over S_n.

    Args:
        d (int): Deck exponent.
        rng (np.random.Generator): Randomness source.
        kind (str): 'dirichlet' (full support, random concentration),
            'sparse' (Dirichlet on a random support), or 'point'.
        support (int | None): Support size for 'sparse'.

    Returns:
        PermDistribution
    """
    check_exact_capacity(d)
    size = factorial(1 << d)
    if kind == "point":
        probs = np.zeros(size)
        probs[rng.integers(size)] = 1.0
        return PermDistribution(d, probs)
    if kind == "dirichlet":
        alpha = float(rng.choice([0.1, 0.5, 1.0, 5.0]))
        return PermDistribution.from_weights(d, rng.dirichlet(np.full(size, alpha)))
    if kind == "sparse":
        k = int(support if support is not None else rng.integers(2, min(size, 64) + 1))
        k = max(1, min(k, size))
        chosen = rng.choice(size, size=k, replace=False)
        probs = np.zeros(size)
        probs[chosen] = rng.dirichlet(np.ones(k))
        return PermDistribution.from_weights(d, probs)
    raise DomainError(f"Unknown distribution kind {kind!r}.")
