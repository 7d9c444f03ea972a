"""
Permutation representation and Lehmer ranking.

Responsibilities:
- DeckParams: the deck exponent d and size n = 2^d.
- Permutation: immutable card -> position map (locs[i] = position of card i,
  bottom card at position 0).
- rank / unrank: lexicographic Lehmer rank of the locs sequence, the index
  used by dense distributions over S_n.
- Vectorised helpers (all_permutations, rank_many) for exact enumeration.

Notes:
- Only one array is stored; the inverse (position -> card) is computed on
  demand.
"""
import itertools
from dataclasses import dataclass
from functools import lru_cache
from math import factorial

import numpy as np

from thorp_mixing.exceptions import DomainError


@dataclass(frozen=True)
class DeckParams:
    """Deck of n = 2^d cards."""

    d: int

    def __post_init__(self):
        if not isinstance(self.d, (int, np.integer)) or self.d < 1:
            raise DomainError(f"Deck exponent d must be a positive integer, got {self.d!r}.")

    @property
    def n(self):
        return 1 << self.d

    @property
    def half(self):
        """Number of oracle rows per round, 2^(d-1)."""
        return 1 << (self.d - 1)

    @classmethod
    def from_size(cls, n):
        """Build params from a deck size that must be a power of two >= 2."""
        if n < 2 or n & (n - 1):
            raise DomainError(f"Deck size must be a power of two >= 2, got {n}.")
        return cls(n.bit_length() - 1)


@dataclass(frozen=True)
class Permutation:
    """
    Bijection on {0, ..., n-1}; locs[i] is the position of card i.

    Raises:
        DomainError: If locs is not a bijection.
    """

    locs: tuple

    def __post_init__(self):
        locs = tuple(int(v) for v in self.locs)
        if sorted(locs) != list(range(len(locs))) or not locs:
            raise DomainError(f"Not a permutation: {locs}.")
        object.__setattr__(self, "locs", locs)

    @property
    def n(self):
        return len(self.locs)

    @classmethod
    def identity(cls, n):
        return cls(tuple(range(n)))

    def inverse(self):
        """Permutation sending each position to the card sitting there."""
        inv = [0] * self.n
        for card, pos in enumerate(self.locs):
            inv[pos] = card
        return Permutation(tuple(inv))

    def card_at(self, position):
        return self.locs.index(position)

    def compose(self, other):
        """self o other: first apply other, then self."""
        if other.n != self.n:
            raise DomainError(f"Cannot compose permutations of sizes {self.n} and {other.n}.")
        return Permutation(tuple(self.locs[i] for i in other.locs))

    def push(self, position_map):
        """
        Apply a map on positions to every card: returns nu o self.

        Args:
            position_map (sequence[int]): nu[x] = new position of whatever sits at x.
        """
        return Permutation(tuple(position_map[x] for x in self.locs))

    def as_array(self):
        return np.asarray(self.locs, dtype=np.int64)


def rank(p):
    """
    Lexicographic Lehmer rank of a permutation.

    Args:
        p (Permutation | sequence[int]): Permutation or its locs.

    Returns:
        int: Rank in [0, n!).
    """
    locs = p.locs if isinstance(p, Permutation) else tuple(Permutation(tuple(p)).locs)
    n = len(locs)
    total = 0
    for i, value in enumerate(locs):
        # Lehmer digit: later entries smaller than this one
        smaller = sum(1 for later in locs[i + 1:] if later < value)
        total += smaller * factorial(n - 1 - i)
    return total


def unrank(r, n):
    """
    Permutation of size n with lexicographic rank r.

    Raises:
        DomainError: If r is not in [0, n!).
    """
    if n < 1:
        raise DomainError(f"Permutation size must be >= 1, got {n}.")
    if not 0 <= r < factorial(n):
        raise DomainError(f"Rank {r} out of range for n={n} (need 0 <= r < {factorial(n)}).")
    remaining = list(range(n))
    locs = []
    for i in range(n):
        block = factorial(n - 1 - i)
        digit, r = divmod(r, block)
        locs.append(remaining.pop(digit))
    return Permutation(tuple(locs))


@lru_cache(maxsize=8)
def all_permutations(n):
    """
    Every permutation of size n as rows of an (n!, n) array, in rank order.

    The returned array is read-only and shared between callers.
    """
    table = np.array(list(itertools.permutations(range(n))), dtype=np.int64).reshape(-1, n)
    table.setflags(write=False)
    return table


def rank_many(rows):
    """
    Vectorised Lehmer rank of each row of an (m, n) array of locs.

    Args:
        rows (np.ndarray): Integer array whose rows are permutations.

    Returns:
        np.ndarray: int64 ranks, shape (m,).
    """
    rows = np.asarray(rows, dtype=np.int64)
    m, n = rows.shape
    ranks = np.zeros(m, dtype=np.int64)
    for i in range(n - 1):
        digits = (rows[:, i + 1:] < rows[:, i:i + 1]).sum(axis=1)
        ranks += digits * factorial(n - 1 - i)
    return ranks


def inverse_rows(rows):
    """Row-wise inverse of an (m, n) array of locs (position -> card)."""
    rows = np.asarray(rows, dtype=np.int64)
    inv = np.empty_like(rows)
    m, n = rows.shape
    inv[np.arange(m)[:, None], rows] = np.arange(n)[None, :]
    return inv
