"""
The Thorp shuffle and its time reversal.

Responsibilities:
- reverse_round: one reverse Thorp round X_{t+1} = nu o X_t, where nu sends
  position (L, R) to (R xor Z(L, t), L).
- forward_round: one forward Thorp round driven by n/2 coins.
- simulate: multi-round reverse trajectories under a bit oracle.
- Kernels: the single-card marginal chain and the exhaustively averaged
  n! x n! kernels used to pin the time-reversal contract.

Forward orientation:
    The bottom half (positions 0..n/2-1) is the left pile and the top half
    the right pile; the new deck is built from the bottom up. Pair k is the
    k-th card of each pile and lands on positions 2k and 2k+1. Coin 0 drops
    LEFT-RIGHT (left card ends lower), coin 1 drops RIGHT-LEFT. With this
    orientation a forward round with coins z is exactly the inverse of the
    reverse round with column z, so the averaged forward kernel is the
    transpose of the averaged reverse kernel.
"""
import logging
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from thorp_mixing.constants import MAX_KERNEL_D, MAX_SINGLE_CARD_D
from thorp_mixing.exceptions import CapacityError, DomainError
from thorp_mixing.utils.bits import inverse_round_image, round_image
from thorp_mixing.utils.oracles import BitOracle, all_round_columns
from thorp_mixing.utils.permutations import (
    DeckParams,
    Permutation,
    all_permutations,
    rank_many,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Trajectory:
    """
    States X_0, ..., X_T of the reverse shuffle.

    Invariant: states[t + 1] == reverse_round(states[t], t, oracle).
    """

    params: DeckParams
    states: tuple
    oracle: BitOracle

    @property
    def start(self):
        return self.states[0]

    @property
    def rounds(self):
        return len(self.states) - 1

    def position(self, card, t):
        """X_t(card)."""
        return self.states[t].locs[card]


def reverse_map(column, d):
    """
    Position map nu of one reverse round given its bit column.

    Args:
        column (sequence[int]): column[l] = Z(l, t) for l < 2^(d-1).
        d (int): Deck exponent.

    Returns:
        tuple[int]: nu[x] for every position x.
    """
    return tuple(round_image(x, column[x >> 1], d) for x in range(1 << d))


def forward_map(coins, d):
    """Position map of one forward round; the inverse of reverse_map(coins, d)."""
    mask = (1 << (d - 1)) - 1
    return tuple(inverse_round_image(y, coins[y & mask], d) for y in range(1 << d))


@lru_cache(maxsize=16)
def round_maps(d):
    """
    Every reverse round map for deck exponent d, one row per bit column.

    Returns:
        np.ndarray: (2^(2^(d-1)), 2^d) read-only array of position maps.
    """
    params = DeckParams(d)
    maps = np.array([reverse_map(column, d) for column in all_round_columns(params.half)],
                    dtype=np.int64)
    maps.setflags(write=False)
    return maps


def _params_for(pi):
    return DeckParams.from_size(pi.n)


def reverse_round(pi, t, oracle):
    """
    One reverse Thorp round at time t.

    Args:
        pi (Permutation): Current state X_t.
        t (int): Round index; selects oracle column t.
        oracle (BitOracle): Source of Z(l, t).

    Returns:
        Permutation: nu o pi.

    Raises:
        OracleDomainError: If a tabular oracle lacks column t.
    """
    params = _params_for(pi)
    column = oracle.column(t, params.half)
    return pi.push(reverse_map(column, params.d))


def forward_round(pi, coins):
    """
    One forward Thorp round.

    Args:
        pi (Permutation): Current deck.
        coins (sequence[int]): n/2 fair bits, coins[k] orders pair k.

    Returns:
        Permutation: The deck after cutting and interleaving.

    Raises:
        DomainError: If the coin count is not n/2.
    """
    params = _params_for(pi)
    coins = tuple(int(c) & 1 for c in coins)
    if len(coins) != params.half:
        raise DomainError(f"Forward round needs {params.half} coins, got {len(coins)}.")
    return pi.push(forward_map(coins, params.d))


def simulate(pi0, rounds, oracle):
    """
    Run the reverse shuffle for a number of rounds.

    Returns:
        Trajectory: rounds + 1 states starting at pi0.
    """
    if rounds < 0:
        raise DomainError(f"Round count must be >= 0, got {rounds}.")
    params = _params_for(pi0)
    states = [pi0]
    for t in range(rounds):
        states.append(reverse_round(states[-1], t, oracle))
    return Trajectory(params=params, states=tuple(states), oracle=oracle)


def single_card_kernel(d):
    """
    Transition matrix of one card's position under a reverse round.

    Row x carries 1/2 at round_image(x, 0, d) and at round_image(x, 1, d).
    """
    if d > MAX_SINGLE_CARD_D:
        raise CapacityError(f"Single-card kernel for d={d} refused", f"d <= {MAX_SINGLE_CARD_D}")
    n = DeckParams(d).n
    kernel = np.zeros((n, n), dtype=np.float64)
    for x in range(n):
        kernel[x, round_image(x, 0, d)] += 0.5
        kernel[x, round_image(x, 1, d)] += 0.5
    return kernel


def averaged_kernel(d, direction="reverse"):
    """
    Exhaustively averaged one-round kernel on S_n, indexed by Lehmer rank.

    Args:
        d (int): Deck exponent (d <= MAX_KERNEL_D).
        direction (str): 'reverse' or 'forward'.

    Returns:
        np.ndarray: (n!, n!) row-stochastic matrix.
    """
    if d > MAX_KERNEL_D:
        raise CapacityError(f"Dense kernel for d={d} refused", f"d <= {MAX_KERNEL_D}")
    if direction not in ("reverse", "forward"):
        raise DomainError(f"Unknown kernel direction {direction!r}.")
    params = DeckParams(d)
    perms = all_permutations(params.n)
    columns = all_round_columns(params.half)
    weight = 1.0 / len(columns)
    kernel = np.zeros((perms.shape[0], perms.shape[0]), dtype=np.float64)
    sources = np.arange(perms.shape[0])
    for column in columns:
        position_map = reverse_map(column, d) if direction == "reverse" else forward_map(column, d)
        targets = rank_many(np.asarray(position_map)[perms])
        kernel[sources, targets] += weight
    logger.debug("Built %s kernel for d=%d over %d columns", direction, d, len(columns))
    return kernel


def random_coins(rng, d):
    """n/2 fair coins for forward_round from a numpy Generator."""
    return tuple(int(c) for c in rng.integers(0, 2, size=DeckParams(d).half))
