"""
Reproducible seeding.

A run has one master seed (from --seed, else THORP_SEED, else 0). Every
independent unit of work (trial, sample, suite) gets a child seed hashed
from (master, label, index), so results do not depend on how many other
units ran before it or in which order.
"""
import hashlib
import struct

import numpy as np

from thorp_mixing.constants import env_seed
from thorp_mixing.exceptions import DomainError


def resolve_master_seed(cli_seed=None):
    """
    Master seed for a run.

    Args:
        cli_seed (int | None): Explicit seed; takes precedence over the
            environment.

    Returns:
        int: Unsigned 64-bit seed.
    """
    if cli_seed is None:
        return env_seed()
    if not 0 <= cli_seed < 2 ** 64:
        raise DomainError(f"Seed must be an unsigned 64-bit integer, got {cli_seed}.")
    return int(cli_seed)


def child_seed(master, label, index=0):
    """Hash-derived 64-bit seed for unit `index` of the stream named `label`."""
    message = struct.pack("<QQ", master, index) + label.encode("utf-8")
    return int.from_bytes(hashlib.blake2b(message, digest_size=8).digest(), "little")


def make_rng(master, label, index=0):
    """numpy Generator seeded with child_seed(master, label, index)."""
    return np.random.default_rng(child_seed(master, label, index))
