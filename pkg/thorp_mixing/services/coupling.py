"""
Coupling gadgets for the entropy-contraction argument.

Card j gets a flip round T_j = floor(log2 j) + 1 - T. When 0 <= T_j < d,
the oracle bit read by card j at round T_j is inverted; the flipped oracle
drives a second reverse shuffle X~ from the same start. At round T_j the
cards j and m(j) (its adjacent card) swap their relative order in X~.
"""
import logging
from collections import Counter
from dataclasses import dataclass, field

from thorp_mixing.constants import MAX_SWEEP_D
from thorp_mixing.exceptions import CapacityError, DomainError, TraceHorizonError
from thorp_mixing.services.shuffle import reverse_round, simulate
from thorp_mixing.utils.bits import left_bits
from thorp_mixing.utils.oracles import TabularOracle, enumerate_tables
from thorp_mixing.utils.permutations import DeckParams, Permutation, rank
from thorp_mixing.utils.seeding import make_rng

logger = logging.getLogger(__name__)

GEOMETRIC_TAG = "geometric-half"


def t_schedule(j, T):
    """
    Flip round of card j.

    T_j = j.bit_length() - T for j >= 1, and T_0 = T_1 = 1 - T so the
    schedule stays nondecreasing in j. May be negative.
    """
    if j < 0:
        raise DomainError(f"Card index must be >= 0, got {j}.")
    if T < 1:
        raise DomainError(f"T must be >= 1, got {T}.")
    return max(int(j).bit_length(), 1) - T


def msb_diff(k, j):
    """Index of the highest bit where k and j differ."""
    if k == j:
        raise DomainError(f"msb_diff needs distinct cards, got k = j = {k}.")
    if k < 0 or j < 0:
        raise DomainError(f"Cards must be >= 0, got ({k}, {j}).")
    return (int(k) ^ int(j)).bit_length() - 1


def bucket(j, t, d):
    """Cards whose highest differing bit from j is t; empty unless 0 <= t < d."""
    n = DeckParams(d).n
    if not 0 <= j < n:
        raise DomainError(f"Card {j} out of range for n={n}.")
    if not 0 <= t < d:
        return frozenset()
    return frozenset(j ^ m for m in range(1 << t, 1 << (t + 1)))


def adjacent(i, j, state):
    """True iff cards i and j sit in positions sharing the leftmost d-1 bits."""
    if i == j:
        raise DomainError(f"adjacent needs distinct cards, got i = j = {i}.")
    d = DeckParams.from_size(state.n).d
    return left_bits(state.locs[i], d) == left_bits(state.locs[j], d)


def adjacent_card(j, state):
    """The unique card sharing a pile pair with card j."""
    return state.card_at(state.locs[j] ^ 1)


@dataclass(frozen=True)
class FlipSchedule:
    """
    T_j for every card of a deck with n = 2^d.

    Attributes:
        T (int): Offset, T >= 1.
        d (int): Deck exponent.
        tag (str): 'fixed', or GEOMETRIC_TAG when T was drawn from
            Geometric(1/2) on {1, 2, ...}.
        seed (int | None): Master seed of the geometric draw.
    """

    T: int
    d: int
    tag: str = "fixed"
    seed: int = None

    def __post_init__(self):
        if self.T < 1:
            raise DomainError(f"T must be >= 1, got {self.T}.")
        DeckParams(self.d)

    @classmethod
    def geometric(cls, d, seed):
        rng = make_rng(seed, "couple/geometric")
        return cls(T=int(rng.geometric(0.5)), d=d, tag=GEOMETRIC_TAG, seed=seed)

    def t_j(self, j):
        return t_schedule(j, self.T)

    @property
    def values(self):
        return tuple(self.t_j(j) for j in range(1 << self.d))

    def to_dict(self):
        return {"T": self.T, "tag": self.tag, "seed": self.seed, "T_j": list(self.values)}


def partner(j, trajectory, schedule):
    """
    m(j): the card adjacent to j at round T_j, or None when T_j < 0.

    Raises:
        TraceHorizonError: If T_j is past the last state of the trajectory.
    """
    tj = schedule.t_j(j)
    if tj < 0:
        return None
    if tj > trajectory.rounds:
        raise TraceHorizonError(
            f"Partner of card {j} needs round {tj}; trajectory has {trajectory.rounds} rounds."
        )
    return adjacent_card(j, trajectory.states[tj])


def flip_set(trajectory, schedule):
    """
    Oracle entries (l, t) to invert: l = L(X_{T_j}(j)), t = T_j, for every
    card with 0 <= T_j < min(d, rounds). Entries targeted by several cards
    appear once.

    Returns:
        (frozenset, tuple): the entries, and the cards whose T_j lies past
        the simulated horizon.
    """
    d = schedule.d
    horizon = min(d, trajectory.rounds)
    entries = set()
    beyond = []
    for j in range(1 << d):
        tj = schedule.t_j(j)
        if tj < 0:
            continue
        if tj >= horizon:
            beyond.append(j)
            continue
        entries.add((left_bits(trajectory.position(j, tj), d), tj))
    return frozenset(entries), tuple(beyond)


def flip_oracle(oracle, trajectory, schedule):
    """Z~: the tabular oracle with every entry of the flip set inverted."""
    entries, beyond = flip_set(trajectory, schedule)
    if beyond:
        logger.debug("Cards %s have flip rounds past the horizon; no flips for them", beyond)
    return oracle.with_flips(entries)


@dataclass(frozen=True, eq=False)
class CouplingTrace:
    """Paired reverse shuffles X (under Z) and X~ (under Z~)."""

    params: DeckParams
    schedule: FlipSchedule
    oracle: TabularOracle
    flipped: TabularOracle
    original: object
    coupled: object
    partners: dict = field(default_factory=dict)
    beyond_horizon: tuple = ()

    @property
    def flips(self):
        return self.flipped.flips

    def gamma(self, j, coupled=False):
        """Gamma_j: positions of card j at rounds 1..d."""
        trajectory = self.coupled if coupled else self.original
        return tuple(trajectory.position(j, t) for t in range(1, trajectory.rounds + 1))

    def to_dict(self):
        n = self.params.n
        return {
            "d": self.params.d,
            "schedule": self.schedule.to_dict(),
            "Z": self.oracle.as_matrix().tolist(),
            "Z_tilde": self.flipped.as_matrix().tolist(),
            "flips": [list(entry) for entry in sorted(self.flips)],
            "X": [list(state.locs) for state in self.original.states],
            "X_tilde": [list(state.locs) for state in self.coupled.states],
            "gamma": [list(self.gamma(j)) for j in range(n)],
            "gamma_tilde": [list(self.gamma(j, coupled=True)) for j in range(n)],
            "partners": [self.partners.get(j) for j in range(n)],
            "beyond_horizon": list(self.beyond_horizon),
        }


def _check_table(oracle, params):
    if oracle.rows != params.half or oracle.rounds < params.d:
        raise DomainError(
            f"Coupling needs a {params.half} x {params.d} oracle table, "
            f"got {oracle.rows} x {oracle.rounds}."
        )


def coupled_run(pi0, oracle, T):
    """
    Run X under Z and X~ under Z~ for d rounds from pi0.

    Args:
        pi0 (Permutation): Common start.
        oracle (TabularOracle): Z, with n/2 rows and at least d rounds.
        T (int | FlipSchedule): Offset of the flip schedule.

    Returns:
        CouplingTrace
    """
    params = DeckParams.from_size(pi0.n)
    _check_table(oracle, params)
    schedule = T if isinstance(T, FlipSchedule) else FlipSchedule(T=T, d=params.d)
    original = simulate(pi0, params.d, oracle)
    entries, beyond = flip_set(original, schedule)
    flipped = oracle.with_flips(entries)
    coupled = simulate(pi0, params.d, flipped)
    partners = {j: partner(j, original, schedule) for j in range(params.n)}
    return CouplingTrace(
        params=params,
        schedule=schedule,
        oracle=oracle,
        flipped=flipped,
        original=original,
        coupled=coupled,
        partners=partners,
        beyond_horizon=beyond,
    )


def definitional_flips(trace):
    """
    Entries (l, t) where Z~ must differ from Z: some card j has T_j = t
    and L(X_t(j)) = l, for 0 <= t < d.
    """
    d = trace.params.d
    expected = set()
    for t in range(d):
        cards = [j for j in range(trace.params.n) if trace.schedule.t_j(j) == t]
        for l in range(trace.params.half):
            if any(left_bits(trace.original.position(j, t), d) == l for j in cards):
                expected.add((l, t))
    return frozenset(expected)


def differing_entries(a, b):
    return frozenset(
        (l, t)
        for l in range(a.rows)
        for t in range(a.rounds)
        if a.bit(l, t) != b.bit(l, t)
    )


def replays_under(trajectory, oracle):
    """True iff every step of trajectory is a reverse round under oracle."""
    return all(
        trajectory.states[t + 1] == reverse_round(trajectory.states[t], t, oracle)
        for t in range(trajectory.rounds)
    )


@dataclass
class CouplingSweep:
    """Outcome of replaying the coupling over every oracle table."""

    d: int
    T: int
    tables: int = 0
    invalid: int = 0
    flip_mismatches: int = 0
    involution_failures: int = 0
    x_counts: Counter = field(default_factory=Counter)
    x_tilde_counts: Counter = field(default_factory=Counter)

    @property
    def same_law(self):
        return self.x_counts == self.x_tilde_counts

    @property
    def passed(self):
        return self.invalid == 0 and self.flip_mismatches == 0 and self.involution_failures == 0

    def to_dict(self):
        return {
            "d": self.d,
            "T": self.T,
            "tables": self.tables,
            "invalid": self.invalid,
            "flip_mismatches": self.flip_mismatches,
            "involution_failures": self.involution_failures,
            "same_law": self.same_law,
            "passed": self.passed,
            "outcomes": len(self.x_counts),
            "outcomes_tilde": len(self.x_tilde_counts),
        }


def _check_sweep_capacity(d):
    if d > MAX_SWEEP_D:
        raise CapacityError(f"Exhaustive oracle sweep for d={d} refused", f"d <= {MAX_SWEEP_D}")


def exhaustive_coupling_sweep(d, T):
    """
    Replay the coupling from the identity under every n/2 x d oracle table.

    Per table: X~ must replay under Z~, the flip set must match its
    definition, and flipping again must restore Z. The multisets of X_d
    and X~_d ranks are compared and the verdict recorded.
    """
    _check_sweep_capacity(d)
    params = DeckParams(d)
    pi0 = Permutation.identity(params.n)
    schedule = FlipSchedule(T=T, d=d)
    sweep = CouplingSweep(d=d, T=T)
    for oracle in enumerate_tables(params.half, d):
        trace = coupled_run(pi0, oracle, schedule)
        sweep.tables += 1
        if not replays_under(trace.coupled, trace.flipped):
            sweep.invalid += 1
        if differing_entries(trace.oracle, trace.flipped) != definitional_flips(trace):
            sweep.flip_mismatches += 1
        if flip_oracle(trace.flipped, trace.original, schedule).bits != oracle.bits:
            sweep.involution_failures += 1
        sweep.x_counts[rank(trace.original.states[-1])] += 1
        sweep.x_tilde_counts[rank(trace.coupled.states[-1])] += 1
    logger.info(
        "Coupling sweep d=%d T=%d over %d tables: passed=%s same_law=%s",
        d, T, sweep.tables, sweep.passed, sweep.same_law,
    )
    return sweep


def partner_law(j, T, d):
    """
    Law of m(j) from the identity start, by enumerating every oracle table
    over rounds 0..T_j - 1.

    Returns:
        dict: card (or None when T_j < 0) -> probability.
    """
    _check_sweep_capacity(d)
    params = DeckParams(d)
    schedule = FlipSchedule(T=T, d=d)
    tj = schedule.t_j(j)
    if tj < 0:
        return {None: 1.0}
    pi0 = Permutation.identity(params.n)
    rounds = max(tj, 1)
    counts = Counter()
    total = 0
    for oracle in enumerate_tables(params.half, rounds):
        counts[partner(j, simulate(pi0, tj, oracle), schedule)] += 1
        total += 1
    return {card: counts[card] / total for card in sorted(counts)}


def adjacency_probability(k, j, t, d):
    """P(cards k and j are adjacent at round t) from the identity start."""
    _check_sweep_capacity(d)
    if not 0 <= t <= d:
        raise DomainError(f"Round {t} outside 0..{d}.")
    params = DeckParams(d)
    pi0 = Permutation.identity(params.n)
    hits = 0
    total = 0
    for oracle in enumerate_tables(params.half, max(t, 1)):
        hits += adjacent(k, j, simulate(pi0, t, oracle).states[t])
        total += 1
    return hits / total
