"""
Relative entropy functionals.

Responsibilities:
- relative_entropy: ENT(p) = sum_i p_i log(|V| p_i), natural log.
- d_scalar / d_distance: the symmetric "distance"
  d(p, q) = 1/2 p log p + 1/2 q log q - ((p+q)/2) log((p+q)/2), summed
  coordinatewise for vectors.
- chain_rule_decompose: ENT(pi) = E ENT(pi | F_cut) + sum_{k >= cut} E ENT(pi, k)
  with F_k = sigma(pi^-1(k), ..., pi^-1(n-1)) (cards at positions >= k).
- conditional_entropy_given_positions: E ENT(pi | sigma(pi^-1(x): x in W)).

Notes:
- 0 log 0 = 0 through scipy.special.xlogy, which returns exactly 0 when
  its first argument is 0.
- Positions and cards are 0-based; ENT(pi, k) is relative to the k+1 cards
  that can still occupy position k once positions above k are known.
"""
from dataclasses import dataclass
from functools import lru_cache
from math import factorial, log

import numpy as np
from scipy.special import xlogy

from thorp_mixing.exceptions import DomainError
from thorp_mixing.services.distributions import PermDistribution
from thorp_mixing.utils.permutations import all_permutations, inverse_rows


def _vector(p):
    if isinstance(p, PermDistribution):
        return p.probs
    vec = np.asarray(p, dtype=np.float64).reshape(-1)
    if vec.size == 0:
        raise DomainError("Probability vector must be non-empty.")
    return vec


def relative_entropy(p):
    """
    ENT(p) relative to the uniform law on the same index set.

    Args:
        p (PermDistribution | array-like): Probability vector.

    Returns:
        float: Nonnegative; 0 iff p is uniform.
    """
    vec = _vector(p)
    # clip tiny negative rounding noise at the uniform law
    return max(float(xlogy(vec, vec.size * vec).sum()), 0.0)


def d_scalar(p, q):
    """
    d(p, q) for nonnegative reals.

    Raises:
        DomainError: If p or q is negative.
    """
    if p < 0 or q < 0:
        raise DomainError(f"d(p, q) needs p, q >= 0, got p={p}, q={q}.")
    m = 0.5 * (p + q)
    return float(0.5 * xlogy(p, p) + 0.5 * xlogy(q, q) - xlogy(m, m))


def d_terms(p, q):
    """Elementwise d(p_i, q_i) for arrays (no domain checks)."""
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    m = 0.5 * (p + q)
    return 0.5 * xlogy(p, p) + 0.5 * xlogy(q, q) - xlogy(m, m)


def d_distance(p, q):
    """
    Sum of d(p_i, q_i) over a common index set.

    Raises:
        DomainError: On length mismatch or negative entries.
    """
    pv, qv = _vector(p), _vector(q)
    if pv.shape != qv.shape:
        raise DomainError(f"Length mismatch: {pv.size} vs {qv.size}.")
    if np.any(pv < 0) or np.any(qv < 0):
        raise DomainError("d(p, q) needs nonnegative vectors.")
    return max(float(d_terms(pv, qv).sum()), 0.0)


def mixture_entropy_gap(p, q):
    """1/2 ENT(p) + 1/2 ENT(q) - ENT((p + q) / 2), computed from the entropies."""
    pv, qv = _vector(p), _vector(q)
    return 0.5 * relative_entropy(pv) + 0.5 * relative_entropy(qv) - relative_entropy(0.5 * (pv + qv))


@dataclass(frozen=True)
class EntropyDecomposition:
    """
    Chain-rule split of ENT(pi).

    Attributes:
        cut (int): First location in per_location.
        residual (float): E ENT(pi | F_cut).
        per_location (tuple[float]): E ENT(pi, k) for k = cut, ..., n-1.
    """

    cut: int
    residual: float
    per_location: tuple

    @property
    def total(self):
        return self.residual + float(sum(self.per_location))


@lru_cache(maxsize=4)
def _suffix_groups(n):
    """
    groups[a][r]: id of the class of rank r under the cards at positions a..n-1.

    groups[0] separates every rank; groups[n] is a single class.
    """
    inv = inverse_rows(all_permutations(n))
    groups = []
    for a in range(n + 1):
        if a == n:
            ids = np.zeros(inv.shape[0], dtype=np.int64)
        else:
            keys = np.zeros(inv.shape[0], dtype=np.int64)
            for column in range(a, n):
                keys = keys * n + inv[:, column]
            _, ids = np.unique(keys, return_inverse=True)
        ids = ids.astype(np.int64).reshape(-1)
        ids.setflags(write=False)
        groups.append(ids)
    return tuple(groups)


def _conditional_term(probs, fine, coarse, size):
    """
    sum over fine classes h of M_h log(size * M_h / M_parent(h)).

    This is E ENT(Y | G) where Y is the fine class within its coarse class,
    read as a sequence of length `size`.
    """
    fine_mass = np.bincount(fine, weights=probs)
    coarse_mass = np.bincount(coarse, weights=probs)
    parent = np.zeros(fine_mass.size, dtype=np.int64)
    parent[fine] = coarse
    denom = coarse_mass[parent]
    ratio = np.divide(fine_mass, denom, out=np.zeros_like(fine_mass), where=denom > 0)
    return float(xlogy(fine_mass, size * ratio).sum())


def chain_rule_decompose(mu, cut=0):
    """
    Split ENT(mu) by the entropy chain rule.

    Args:
        mu (PermDistribution): Law of pi.
        cut (int): Location i of the decomposition, 0 <= cut <= n-1.

    Returns:
        EntropyDecomposition: residual = E ENT(pi | F_cut) and
            per_location[k - cut] = E ENT(pi, k).

    Raises:
        DomainError: If cut is out of range.
    """
    n = mu.n
    if not 0 <= cut <= n - 1:
        raise DomainError(f"Cut {cut} out of range for n={n} (need 0 <= cut <= {n - 1}).")
    groups = _suffix_groups(n)
    identity = np.arange(mu.size, dtype=np.int64)
    residual = 0.0 if cut == 0 else _conditional_term(mu.probs, identity, groups[cut], factorial(cut))
    per_location = tuple(
        max(_conditional_term(mu.probs, groups[k], groups[k + 1], k + 1), 0.0)
        for k in range(cut, n)
    )
    return EntropyDecomposition(cut=cut, residual=max(residual, 0.0), per_location=per_location)


def conditional_entropy_given_positions(mu, positions):
    """
    E ENT(pi | F_W) with F_W = sigma(pi^-1(x): x in W).

    The conditional law is read as a sequence of length (n - |W|)!.

    Args:
        mu (PermDistribution): Law of pi.
        positions (iterable[int]): The set W of positions.
    """
    positions = sorted(set(int(x) for x in positions))
    n = mu.n
    if any(not 0 <= x < n for x in positions):
        raise DomainError(f"Positions {positions} out of range for n={n}.")
    if not positions:
        return relative_entropy(mu)
    inv = inverse_rows(all_permutations(n))
    keys = np.zeros(mu.size, dtype=np.int64)
    for column in positions:
        keys = keys * n + inv[:, column]
    _, coarse = np.unique(keys, return_inverse=True)
    identity = np.arange(mu.size, dtype=np.int64)
    return max(_conditional_term(mu.probs, identity, coarse.reshape(-1), factorial(n - len(positions))), 0.0)


def point_mass_location_entropies(n):
    """Closed form ENT(pi, k) = log(k + 1) for a point mass, k = 0..n-1."""
    return tuple(log(k + 1) for k in range(n))
