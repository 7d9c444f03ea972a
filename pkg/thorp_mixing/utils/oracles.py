"""
Bit oracles: deterministic sources of the fair bits Z(l, t).

Three variants share the BitOracle interface (`bit(l, t)` / call syntax):
- SeededOracle: counter-mode hash of (seed, l, t); random access, no state.
- TabularOracle: explicit 0/1 table of shape (rows, rounds); used for
  exhaustive enumeration and for the flipped oracle of the coupling.
- KeyedOracle: HMAC-SHA256 of (l, t) under a 16-byte key. Reproducible,
  cipher-style use only; no security claim is made.

All oracles are frozen values and safe to evaluate from many threads.
"""
import hashlib
import hmac
import itertools
import struct
from dataclasses import dataclass, field

import numpy as np

from thorp_mixing.exceptions import DomainError, OracleDomainError

_U64 = 2 ** 64


def _pack_index(l, t):
    if l < 0 or t < 0:
        raise OracleDomainError(f"Oracle index must be nonnegative, got (l={l}, t={t}).")
    return struct.pack("<QQ", l, t)


class BitOracle:
    """Interface: an evaluable map (l, t) -> {0, 1}."""

    def bit(self, l, t):
        raise NotImplementedError

    def __call__(self, l, t):
        return self.bit(l, t)

    def column(self, t, rows):
        """The bits Z(0, t), ..., Z(rows-1, t) of one round as a tuple."""
        return tuple(self.bit(l, t) for l in range(rows))


@dataclass(frozen=True)
class SeededOracle(BitOracle):
    """Pseudorandom bits from a 64-bit seed via blake2b in counter mode."""

    seed: int

    def __post_init__(self):
        if not 0 <= int(self.seed) < _U64:
            raise DomainError(f"Seed must be an unsigned 64-bit integer, got {self.seed}.")

    def bit(self, l, t):
        message = struct.pack("<Q", int(self.seed)) + _pack_index(l, t)
        digest = hashlib.blake2b(message, digest_size=8, person=b"thorp-seeded").digest()
        return digest[0] & 1


@dataclass(frozen=True)
class KeyedOracle(BitOracle):
    """PRF-style bits: HMAC-SHA256(key, l || t), low bit of the first byte."""

    key: bytes

    def __post_init__(self):
        if not isinstance(self.key, (bytes, bytearray)) or len(self.key) != 16:
            raise DomainError("Keyed oracle key must be exactly 16 bytes.")
        object.__setattr__(self, "key", bytes(self.key))

    def bit(self, l, t):
        digest = hmac.new(self.key, _pack_index(l, t), hashlib.sha256).digest()
        return digest[0] & 1


@dataclass(frozen=True)
class TabularOracle(BitOracle):
    """
    Explicit bit table; bits[l][t] = Z(l, t).

    Attributes:
        bits (tuple[tuple[int]]): rows x rounds table of 0/1 values.
        flips (frozenset): (l, t) entries inverted relative to the table this
            one was derived from (empty for a fresh table).
    """

    bits: tuple
    flips: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        table = tuple(tuple(int(b) for b in row) for row in self.bits)
        if not table or not table[0]:
            raise DomainError("Tabular oracle needs at least one row and one round.")
        if any(len(row) != len(table[0]) for row in table):
            raise DomainError("Tabular oracle rows must all have the same length.")
        if any(b not in (0, 1) for row in table for b in row):
            raise DomainError("Tabular oracle entries must be 0 or 1.")
        object.__setattr__(self, "bits", table)
        object.__setattr__(self, "flips", frozenset(self.flips))

    @property
    def rows(self):
        return len(self.bits)

    @property
    def rounds(self):
        return len(self.bits[0])

    def bit(self, l, t):
        if not (0 <= l < self.rows and 0 <= t < self.rounds):
            raise OracleDomainError(
                f"Tabular oracle has no entry (l={l}, t={t}); table covers "
                f"l < {self.rows}, t < {self.rounds}. Enumerate more rounds."
            )
        return self.bits[l][t]

    def with_flips(self, entries):
        """New table with every (l, t) in entries inverted once (set semantics)."""
        entries = frozenset(entries)
        table = [list(row) for row in self.bits]
        for l, t in entries:
            self.bit(l, t)  # range check
            table[l][t] ^= 1
        return TabularOracle(tuple(tuple(row) for row in table), flips=entries)

    def as_matrix(self):
        return np.array(self.bits, dtype=np.uint8)

    @classmethod
    def zeros(cls, rows, rounds):
        return cls(tuple((0,) * rounds for _ in range(rows)))

    @classmethod
    def from_index(cls, index, rows, rounds):
        """
        The index-th table in enumeration order.

        Bit (l, t) is bit number t * rows + l of index, so index 0 is the
        all-zero table.
        """
        size = rows * rounds
        if not 0 <= index < (1 << size):
            raise DomainError(f"Table index {index} out of range for {rows}x{rounds} tables.")
        return cls(tuple(
            tuple((index >> (t * rows + l)) & 1 for t in range(rounds))
            for l in range(rows)
        ))

    @classmethod
    def from_matrix(cls, matrix):
        return cls(tuple(tuple(int(b) for b in row) for row in np.asarray(matrix)))


def tabulate(oracle, rows, rounds):
    """Freeze any oracle into a TabularOracle over rows x rounds."""
    return TabularOracle(tuple(tuple(oracle.bit(l, t) for t in range(rounds)) for l in range(rows)))


def enumerate_tables(rows, rounds):
    """
    Yield every rows x rounds TabularOracle, in from_index order.

    There are 2^(rows * rounds) tables; callers bound the size.
    """
    for index in range(1 << (rows * rounds)):
        yield TabularOracle.from_index(index, rows, rounds)


def all_round_columns(rows):
    """Every bit pattern of one round: tuples (z_0, ..., z_{rows-1})."""
    return list(itertools.product((0, 1), repeat=rows))
