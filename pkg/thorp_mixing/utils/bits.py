"""
Position bit arithmetic for decks of n = 2^d cards.

A position x in [0, 2^d) is read big-endian as x = (L(x), R(x)):
L is the leftmost d-1 bits and R the rightmost bit, so numerically
x = 2*L + R. For d = 1, L is the empty bit string and is encoded as 0.

The reverse round map sends (L, R) to (R xor z, L), i.e. the new leftmost
bit is R xor z and the remaining d-1 bits are L.
"""
from thorp_mixing.exceptions import DomainError


def _check_position(x, d):
    if d < 1:
        raise DomainError(f"Deck exponent d must be >= 1, got {d}.")
    if not 0 <= x < (1 << d):
        raise DomainError(f"Position {x} out of range for d={d} (need 0 <= x < {1 << d}).")


def _check_bit(z):
    if z not in (0, 1):
        raise DomainError(f"Oracle bit must be 0 or 1, got {z!r}.")


def split_position(x, d):
    """
    Split a position into its leftmost d-1 bits and its rightmost bit.

    Args:
        x (int): Position in [0, 2^d).
        d (int): Deck exponent.

    Returns:
        (int, int): (L, R) with L = x >> 1 and R = x & 1.

    Raises:
        DomainError: If x is out of range or d < 1.
    """
    _check_position(x, d)
    return x >> 1, x & 1


def join_position(left, right, d):
    """Inverse of split_position: 2*L + R."""
    if not 0 <= left < (1 << (d - 1)) or right not in (0, 1):
        raise DomainError(f"Cannot join L={left}, R={right} for d={d}.")
    return (left << 1) | right


def left_bits(x, d):
    """L(x), the oracle row consumed by the card at position x."""
    _check_position(x, d)
    return x >> 1


def round_image(x, z, d):
    """
    Image of position x under one reverse round driven by bit z.

    (L, R) -> (R xor z, L), numerically (R xor z) * 2^(d-1) + L.

    Args:
        x (int): Position in [0, 2^d).
        z (int): Oracle bit Z(L(x), t).
        d (int): Deck exponent.

    Returns:
        int: The new position.

    Raises:
        DomainError: If z is not a bit.
    """
    _check_bit(z)
    left, right = split_position(x, d)
    return ((right ^ int(z)) << (d - 1)) | left


def inverse_round_image(y, z, d):
    """
    Preimage of position y under round_image with the bit of its row.

    y = (b, L) with b the leftmost bit; the preimage is (L, b xor z).
    Here z must be Z(L, t) for the L recovered from y.
    """
    _check_position(y, d)
    _check_bit(z)
    top = y >> (d - 1)
    left = y & ((1 << (d - 1)) - 1)
    return (left << 1) | (top ^ int(z))
