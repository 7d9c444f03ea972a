"""
Unit tests for services/pair_chain.py - the two-card marginal chain.
"""
import numpy as np
import pytest


class TestPairStates:
    """Test pair indexing."""

    def test_index_enumerates_states_in_order(self):
        """Test pair_index over pair_states is 0..n(n-1)-1."""
        from thorp_mixing.services.pair_chain import pair_index, pair_states

        a, b = pair_states(8)
        assert np.array_equal(pair_index(a, b, 8), np.arange(56))
        assert not np.any(a == b)


class TestPairChainBuild:
    """Test pair_chain_build and its kernel."""

    def test_two_cards(self):
        """Test d=1: both ordered pairs go to each other or stay, 1/2 each."""
        from thorp_mixing.services.pair_chain import pair_chain_build

        chain = pair_chain_build(1)
        assert chain.states == 2
        assert np.allclose(chain.kernel.toarray(), 0.5)

    def test_adjacent_and_separated_rows(self):
        """Test adjacent cards have 2 images and separated cards 4."""
        from thorp_mixing.services.pair_chain import pair_chain_build, pair_index

        chain = pair_chain_build(2)
        adjacent_row = chain.kernel.getrow(int(pair_index(0, 1, 4))).toarray().ravel()
        separated_row = chain.kernel.getrow(int(pair_index(0, 2, 4))).toarray().ravel()
        assert sorted(adjacent_row[adjacent_row > 0]) == [0.5, 0.5]
        assert sorted(separated_row[separated_row > 0]) == [0.25] * 4

    @pytest.mark.parametrize("d", range(2, 7))
    def test_stochastic_with_uniform_stationary(self, d):
        """Test rows sum to 1 and uniform over pairs is stationary."""
        from thorp_mixing.services.pair_chain import pair_chain_build, row_sum_error, stationarity_error

        chain = pair_chain_build(d)
        assert chain.states == (1 << d) * ((1 << d) - 1)
        assert row_sum_error(chain) <= 1e-12
        assert stationarity_error(chain) <= 1e-12

    def test_matches_exact_pair_marginal(self):
        """Test rows of P^t equal the law of two cards under the full shuffle."""
        from thorp_mixing.services.distributions import shuffle_law
        from thorp_mixing.services.pair_chain import pair_chain_build, pair_index
        from thorp_mixing.utils.permutations import all_permutations

        chain = pair_chain_build(2)
        perms = all_permutations(4)
        state = np.zeros(chain.states)
        state[int(pair_index(0, 1, 4))] = 1.0
        for t in range(4):
            law = shuffle_law(2, t)
            marginal = np.bincount(pair_index(perms[:, 0], perms[:, 1], 4), weights=law.probs, minlength=12)
            assert np.allclose(marginal, state, atol=1e-14)
            state = chain.kernel.T @ state

    def test_capacity(self):
        """Test d=7 is refused."""
        from thorp_mixing.exceptions import CapacityError
        from thorp_mixing.services.pair_chain import pair_chain_build

        with pytest.raises(CapacityError, match="d <= 6"):
            pair_chain_build(7)


class TestPairMixing:
    """Test pair_mixing_time and pair_mixing_profile."""

    def test_two_cards_mix_in_one_round(self):
        """Test d=1 mixes in one round."""
        from thorp_mixing.services.pair_chain import pair_chain_build, pair_mixing_time

        assert pair_mixing_time(pair_chain_build(1)) == 1

    def test_not_slower_than_full_shuffle(self):
        """Test the pair projection mixes no later than S_4 (4 rounds)."""
        from thorp_mixing.services.pair_chain import pair_chain_build, pair_mixing_time

        assert 1 <= pair_mixing_time(pair_chain_build(2)) <= 4

    def test_block_size_does_not_change_answer(self):
        """Test blocked evolution gives the same curve for any block size."""
        from thorp_mixing.services.pair_chain import pair_chain_build, pair_mixing_profile

        chain = pair_chain_build(3)
        small = pair_mixing_profile(chain, block=7)
        large = pair_mixing_profile(chain, block=1000)
        assert small[0] == large[0]
        assert small[1] == pytest.approx(large[1], abs=1e-12)

    def test_curve_is_nonincreasing(self):
        """Test the worst-row distance never grows."""
        from thorp_mixing.services.pair_chain import pair_chain_build, pair_mixing_profile

        _, curve = pair_mixing_profile(pair_chain_build(4))
        assert all(b <= a + 1e-12 for a, b in zip(curve, curve[1:]))

    def test_bad_threshold(self):
        """Test thresholds outside (0, 2] are refused."""
        from thorp_mixing.exceptions import DomainError
        from thorp_mixing.services.pair_chain import pair_chain_build, pair_mixing_time

        with pytest.raises(DomainError):
            pair_mixing_time(pair_chain_build(1), 0.0)

    @pytest.mark.slow
    def test_growth_slope_over_d(self):
        """Test golden pair mixing times for d=2..6 and a slope under the expected ceiling."""
        from thorp_mixing.constants import PAIR_SLOPE_BOUND
        from thorp_mixing.services.pair_chain import growth_slope, pair_chain_build, pair_mixing_time

        ds = list(range(2, 7))
        times = [pair_mixing_time(pair_chain_build(d)) for d in ds]
        assert times == [4, 5, 6, 7, 8]
        slope = growth_slope(ds, times)
        assert 0 < slope <= PAIR_SLOPE_BOUND


class TestSpectralEstimate:
    """Test pair_spectral_estimate and growth_slope."""

    def test_two_cards_have_no_second_eigenvalue(self):
        """Test d=1 collapses to uniform in one step."""
        from thorp_mixing.services.pair_chain import pair_chain_build, pair_spectral_estimate

        assert pair_spectral_estimate(pair_chain_build(1)) == pytest.approx(0.0, abs=1e-6)

    def test_matches_dense_eigenvalues(self):
        """Test the estimate is close to the second-largest |eigenvalue| for d=3."""
        from thorp_mixing.services.pair_chain import pair_chain_build, pair_spectral_estimate

        chain = pair_chain_build(3)
        moduli = np.sort(np.abs(np.linalg.eigvals(chain.kernel.toarray())))
        assert pair_spectral_estimate(chain, steps=2000) == pytest.approx(moduli[-2], rel=0.05)

    def test_slope_of_power_law(self):
        """Test growth_slope recovers the exponent of d^3."""
        from thorp_mixing.services.pair_chain import growth_slope

        assert growth_slope([2, 4, 8], [8, 64, 512]) == pytest.approx(3.0)

    def test_slope_needs_two_points(self):
        """Test a single point is refused."""
        from thorp_mixing.exceptions import DomainError
        from thorp_mixing.services.pair_chain import growth_slope

        with pytest.raises(DomainError):
            growth_slope([2], [5])
