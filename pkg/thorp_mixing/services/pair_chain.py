"""
The two-card marginal chain.

Two cards in distinct positions (a, b) move under one reverse round. When
L(a) == L(b) the cards are adjacent and share the bit Z(L, t), giving 2
equally likely joint images; otherwise they read independent bits and
have 4 equally likely joint images. Uniform over the n(n-1) ordered pairs
is stationary.

The kernel is a scipy.sparse CSR matrix with at most 4 entries per row.
"""
import logging
from dataclasses import dataclass

import numpy as np
from scipy import sparse

from thorp_mixing.constants import (
    DEFAULT_MIX_THRESHOLD,
    DEFAULT_PAIR_BLOCK,
    KERNEL_TOL,
    MAX_MIX_ROUNDS,
    MAX_PAIR_D,
    POWER_ITERATION_STEPS,
)
from thorp_mixing.exceptions import CapacityError, DomainError, InvariantViolation
from thorp_mixing.utils.permutations import DeckParams

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class PairChain:
    """Kernel over ordered pairs of distinct positions."""

    d: int
    kernel: sparse.csr_matrix

    @property
    def n(self):
        return 1 << self.d

    @property
    def states(self):
        return self.kernel.shape[0]


def pair_index(a, b, n):
    """Index of the ordered pair (a, b), a != b, in [0, n(n-1))."""
    a = np.asarray(a)
    b = np.asarray(b)
    return a * (n - 1) + np.where(b < a, b, b - 1)


def pair_states(n):
    """Arrays (a, b) listing every ordered pair in index order."""
    a, b = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    keep = a != b
    return a[keep], b[keep]


def _image(x, z, d):
    return (((x & 1) ^ z) << (d - 1)) | (x >> 1)


def pair_chain_build(d):
    """
    Build the pair chain for deck exponent d.

    Raises:
        CapacityError: If d > MAX_PAIR_D.
    """
    if d > MAX_PAIR_D:
        raise CapacityError(f"Pair chain for d={d} refused", f"d <= {MAX_PAIR_D} (n(n-1) <= 4032 states)")
    n = DeckParams(d).n
    a, b = pair_states(n)
    source = pair_index(a, b, n)
    adjacent = (a >> 1) == (b >> 1)
    rows, cols, vals = [], [], []
    for za in (0, 1):
        for zb in (0, 1):
            # adjacent cards read the same bit: only the diagonal (za == zb) moves
            if za == zb:
                mask = np.ones_like(adjacent)
                weight = np.where(adjacent, 0.5, 0.25)
            else:
                mask = ~adjacent
                weight = np.full(adjacent.shape, 0.25)
            target = pair_index(_image(a[mask], za, d), _image(b[mask], zb, d), n)
            rows.append(source[mask])
            cols.append(target)
            vals.append(weight[mask])
    size = n * (n - 1)
    kernel = sparse.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(size, size)
    ).tocsr()
    kernel.sum_duplicates()
    chain = PairChain(d=d, kernel=kernel)
    logger.info("Built pair chain for d=%d with %d states", d, size)
    return chain


def row_sum_error(chain):
    """max |row sum - 1|."""
    return float(np.abs(np.asarray(chain.kernel.sum(axis=1)).ravel() - 1.0).max())


def stationarity_error(chain):
    """max |(u P) - u| for u uniform over ordered pairs."""
    u = np.full(chain.states, 1.0 / chain.states)
    return float(np.abs(chain.kernel.T @ u - u).max())


def _check_chain(chain):
    if row_sum_error(chain) > KERNEL_TOL:
        raise InvariantViolation(f"Pair kernel for d={chain.d} is not stochastic.")


def pair_mixing_profile(chain, threshold=DEFAULT_MIX_THRESHOLD, block=DEFAULT_PAIR_BLOCK,
                        max_rounds=MAX_MIX_ROUNDS):
    """
    First t at which every row of P^t is within threshold (unhalved L1) of uniform.

    Rows are evolved in blocks of start states; per-row distance to a
    stationary law never increases, so the answer is the largest
    per-block crossing time.

    Returns:
        (int, list[float]): mixing time and the max-row distance per round.
    """
    if not 0.0 < threshold <= 2.0:
        raise DomainError(f"Threshold must lie in (0, 2], got {threshold}.")
    _check_chain(chain)
    size = chain.states
    uniform = 1.0 / size
    transpose = chain.kernel.T.tocsr()
    curve = []
    for start in range(0, size, block):
        stop = min(start + block, size)
        dist = np.zeros((stop - start, size))
        dist[np.arange(stop - start), np.arange(start, stop)] = 1.0
        t = 0
        while True:
            worst = float(np.abs(dist - uniform).sum(axis=1).max())
            if t == len(curve):
                curve.append(worst)
            else:
                curve[t] = max(curve[t], worst)
            if worst <= threshold:
                break
            if t >= max_rounds:
                raise DomainError(f"Pair chain d={chain.d} did not mix within {max_rounds} rounds.")
            dist = (transpose @ dist.T).T
            t += 1
    mixing = next(t for t, value in enumerate(curve) if value <= threshold)
    return mixing, curve[:mixing + 1]


def pair_mixing_time(chain, threshold=DEFAULT_MIX_THRESHOLD):
    """Mixing time of the pair chain under the unhalved L1 convention."""
    return pair_mixing_profile(chain, threshold)[0]


def pair_spectral_estimate(chain, steps=POWER_ITERATION_STEPS, seed=0):
    """
    Estimate the second-largest eigenvalue modulus by power iteration.

    The iterate is kept mean-zero, which removes the stationary direction
    because the kernel is doubly stochastic. The estimate is the geometric
    mean growth rate over the second half of the iterations.
    """
    _check_chain(chain)
    rng = np.random.default_rng(seed)
    x = rng.normal(size=chain.states)
    x -= x.mean()
    x /= np.linalg.norm(x)
    transpose = chain.kernel.T.tocsr()
    log_rates = []
    for step in range(steps):
        y = transpose @ x
        y -= y.mean()
        norm = np.linalg.norm(y)
        if norm == 0.0:
            return 0.0
        if step >= steps // 2:
            log_rates.append(np.log(norm))
        x = y / norm
    return float(np.exp(np.mean(log_rates)))


def growth_slope(ds, times):
    """Least-squares slope of log(time) against log(d)."""
    ds = np.asarray(ds, dtype=np.float64)
    times = np.asarray(times, dtype=np.float64)
    if ds.size < 2:
        raise DomainError("Need at least two points to fit a slope.")
    slope, _ = np.polyfit(np.log(ds), np.log(times), 1)
    return float(slope)
