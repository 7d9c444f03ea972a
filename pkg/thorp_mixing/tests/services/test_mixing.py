"""
Unit tests for services/mixing.py - mixing times and entropy contraction.
"""
from math import log

import numpy as np
import pytest


class TestDistanceCurve:
    """Test distance_curve and entropy_decay."""

    def test_four_card_curve(self):
        """Test the exact per-round distances for d=2."""
        from thorp_mixing.services.mixing import distance_curve

        records = distance_curve(2, 4)
        assert [r["round"] for r in records] == [0, 1, 2, 3, 4]
        assert [r["l1"] for r in records] == pytest.approx([23 / 12, 5 / 3, 2 / 3, 1 / 3, 1 / 6], abs=1e-12)
        assert [r["tv"] for r in records] == pytest.approx([23 / 24, 5 / 6, 1 / 3, 1 / 6, 1 / 12], abs=1e-12)

    def test_entropy_per_round(self):
        """Test ENT(X_0) = log 24 and ENT(X_2) = log(24/16)."""
        from thorp_mixing.services.mixing import entropy_decay

        decay = entropy_decay(2, 4)
        assert decay[0] == pytest.approx(log(24))
        assert decay[2] == pytest.approx(log(1.5))
        assert all(b <= a + 1e-12 for a, b in zip(decay, decay[1:]))

    def test_negative_rounds(self):
        """Test rounds must be >= 0."""
        from thorp_mixing.exceptions import DomainError
        from thorp_mixing.services.mixing import distance_curve

        with pytest.raises(DomainError):
            distance_curve(2, -1)


class TestMixingTime:
    """Test mixing_time and mixing_profile."""

    def test_two_cards_mix_in_one_round(self):
        """Test d=1 gives exactly 1."""
        from thorp_mixing.services.mixing import mixing_time

        assert mixing_time(1, 0.25) == 1

    def test_four_cards(self):
        """Test d=2 gives 4 under the unhalved convention."""
        from thorp_mixing.services.mixing import mixing_profile

        profile = mixing_profile(2, 0.25)
        assert profile.mixing_time == 4
        assert profile.monotone
        assert len(profile.distances) == 5

    def test_threshold_changes_time(self):
        """Test a looser threshold crosses earlier."""
        from thorp_mixing.services.mixing import mixing_time

        assert mixing_time(2, 0.7) == 2

    @pytest.mark.slow
    def test_eight_cards_golden_mixing_time(self):
        """Test d=3 crosses 1/4 at round 6 with a monotone curve."""
        from thorp_mixing.services.mixing import mixing_profile

        profile = mixing_profile(3, 0.25)
        assert profile.monotone
        assert profile.mixing_time == 6
        assert profile.distances[-1] == pytest.approx(0.24933035714285712, abs=1e-12)
        expected = [1.99995, 1.99921, 1.98730, 1.79683, 1.07302, 0.40660, 0.24933]
        assert profile.distances == pytest.approx(expected, abs=1e-5)

    @pytest.mark.parametrize("threshold", [0.0, -0.1, 2.5])
    def test_bad_threshold(self, threshold):
        """Test thresholds outside (0, 2] raise DomainError."""
        from thorp_mixing.exceptions import DomainError
        from thorp_mixing.services.mixing import mixing_time

        with pytest.raises(DomainError):
            mixing_time(1, threshold)

    def test_capacity(self):
        """Test d=4 is refused."""
        from thorp_mixing.exceptions import CapacityError
        from thorp_mixing.services.mixing import mixing_time

        with pytest.raises(CapacityError):
            mixing_time(4)


class TestContraction:
    """Test contraction_sample and contraction_experiment."""

    def test_convolution_matches_direct_evolution(self, rng):
        """Test X_d o mu has the law of mu after d rounds."""
        from thorp_mixing.services.distributions import convolve, evolve, random_distribution, shuffle_law

        mu = random_distribution(2, rng, kind="sparse")
        assert np.allclose(convolve(shuffle_law(2, 2), mu).probs, evolve(mu, 2)[-1].probs, atol=1e-14)

    def test_uniform_mu_is_excluded(self):
        """Test the ratio is None at the uniform law."""
        from thorp_mixing.services.distributions import PermDistribution, shuffle_law
        from thorp_mixing.services.mixing import contraction_sample

        sample = contraction_sample(shuffle_law(2, 2), PermDistribution.uniform(2))
        assert sample.ratio is None

    def test_two_cards_contract_fully(self):
        """Test d=1 sends every mu to uniform, so c_hat = 1."""
        from thorp_mixing.services.mixing import contraction_experiment

        report = contraction_experiment(1, 50, seed=0)
        assert len(report.samples) - report.excluded >= 50
        assert report.strict
        assert report.c_hat == pytest.approx(1.0, abs=1e-12)

    def test_four_cards_strict(self):
        """Test strict contraction and a positive c_hat for d=2."""
        from thorp_mixing.services.mixing import contraction_experiment

        report = contraction_experiment(2, 60, seed=5)
        assert report.strict
        assert report.max_ratio < 1.0
        assert report.c_hat > 0
        ratios = [s.ratio for s in report.samples if s.ratio is not None]
        assert all(r <= 1 - report.c_hat / 2 + 1e-12 for r in ratios)

    @pytest.mark.slow
    def test_eight_cards_strict(self):
        """Test strict contraction for d=3 with point and sparse mu."""
        from thorp_mixing.services.mixing import contraction_experiment

        report = contraction_experiment(3, 50, seed=2)
        assert report.strict
        assert {s.kind for s in report.samples} == {"point", "sparse"}

    def test_same_seed_same_report(self):
        """Test reports are reproducible."""
        from thorp_mixing.services.mixing import contraction_experiment

        a = contraction_experiment(2, 6, seed=9).summary()
        b = contraction_experiment(2, 6, seed=9).summary()
        assert a == b

    def test_summary_has_bound(self):
        """Test the summary carries the implied round bound."""
        from thorp_mixing.services.mixing import contraction_experiment

        summary = contraction_experiment(2, 6, seed=1).summary()
        assert summary["bound_rounds"] >= 2
        assert summary["samples"] == 6


class TestEntropyMixingBound:
    """Test entropy_mixing_bound."""

    def test_known_value(self):
        """Test d=2, c_hat=1: (1/2)^k log 24 <= 1/8 first at k=5."""
        from thorp_mixing.services.mixing import entropy_mixing_bound

        assert entropy_mixing_bound(2, 1.0) == 10

    def test_full_contraction(self):
        """Test c_hat >= d needs one block of d rounds."""
        from thorp_mixing.services.mixing import entropy_mixing_bound

        assert entropy_mixing_bound(2, 2.0) == 2

    def test_non_positive_constant(self):
        """Test c_hat <= 0 raises DomainError."""
        from thorp_mixing.exceptions import DomainError
        from thorp_mixing.services.mixing import entropy_mixing_bound

        with pytest.raises(DomainError):
            entropy_mixing_bound(2, 0.0)
