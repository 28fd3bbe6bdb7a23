"""Tests for survival, strong survival and hitting estimators."""

import math

import pytest


def _within(est, exact, k=4.0):
    se = math.sqrt(exact * (1 - exact) / est.replicas)
    return abs(est.estimate - exact) <= k * se + 1e-12


class TestEstimateSurvival:
    """Single-type survival at trivial rates."""

    def test_no_births_single_site(self):
        """Should match exp(-T) when nothing can spread."""
        from contact_duality.estimators.survival import estimate_survival
        from contact_duality.topology import make_torus

        est = estimate_survival(make_torus(1, 5), 0.0, {0}, 1.0, replicas=2000, seed=1)

        assert _within(est, math.exp(-1.0))
        assert est.ci_low <= est.estimate <= est.ci_high

    def test_no_births_two_sites(self):
        """Should match 1 - (1 - exp(-T))^2 from two independent seeds."""
        from contact_duality.estimators.survival import estimate_survival
        from contact_duality.topology import make_torus

        est = estimate_survival(make_torus(1, 5), 0.0, {0, 2}, 1.0, replicas=2000, seed=2)

        assert _within(est, 1 - (1 - math.exp(-1.0)) ** 2)

    def test_rho_diagnostic(self):
        """Should report P(alive at T, dead by T_max) from the same replicas."""
        from contact_duality.estimators.survival import estimate_rho, estimate_survival
        from contact_duality.topology import make_path

        topo = make_path(3)
        est = estimate_survival(topo, 0.0, {1}, 1.0, replicas=2000, seed=3, rho_time=0.5)
        rho = estimate_rho(topo, 0.0, 1, 0.5, 1.0, replicas=2000, seed=3)
        exact = math.exp(-0.5) - math.exp(-1.0)

        assert est.rho_diagnostic == pytest.approx(rho.estimate)
        assert _within(rho, exact)

    def test_worker_count_does_not_change_result(self):
        """Should give identical counts for serial and parallel pools."""
        from contact_duality.core.pool import ReplicaPool
        from contact_duality.estimators.survival import estimate_survival
        from contact_duality.topology import make_torus

        topo = make_torus(1, 8)
        serial = estimate_survival(topo, 1.5, {0}, 3.0, 200, seed=4, pool=ReplicaPool(1))
        parallel = estimate_survival(topo, 1.5, {0}, 3.0, 200, seed=4, pool=ReplicaPool(2))

        assert serial.successes == parallel.successes

    def test_rejects_few_replicas(self):
        """Should require at least 100 replicas."""
        from contact_duality.estimators.survival import estimate_survival
        from contact_duality.topology import make_path

        with pytest.raises(ValueError):
            estimate_survival(make_path(3), 1.0, {0}, 1.0, replicas=10, seed=0)

    def test_rejects_rho_time_past_horizon(self):
        """Should require rho_time < T_max."""
        from contact_duality.estimators.survival import estimate_survival
        from contact_duality.topology import make_path

        with pytest.raises(ValueError):
            estimate_survival(make_path(3), 1.0, {0}, 1.0, 100, 0, rho_time=1.0)


class TestTypeSurvival:
    """Survival of each type from a two-type start."""

    def test_pure_twos(self):
        """Should give alpha1 = 0 from an all-2 start."""
        from contact_duality.estimators.survival import estimate_type_survival
        from contact_duality.forward import Configuration
        from contact_duality.topology import make_path

        est = estimate_type_survival(
            make_path(2), 0.0, 0.0, Configuration.from_string("22"), 1.0, 2000, seed=5
        )

        assert est.alpha1.estimate == 0.0
        assert _within(est.alpha2, 1 - (1 - math.exp(-1.0)) ** 2)
        assert est.consistent() == (True, None)

    def test_pure_ones(self):
        """Should give alpha2 = 0 from an all-1 start."""
        from contact_duality.estimators.survival import estimate_type_survival
        from contact_duality.forward import Configuration
        from contact_duality.topology import make_path

        est = estimate_type_survival(
            make_path(2), 0.0, 0.0, Configuration.from_string("11"), 1.0, 2000, seed=6
        )

        assert est.alpha2.estimate == 0.0
        assert _within(est.alpha1, 1 - (1 - math.exp(-1.0)) ** 2)

    def test_rejects_unordered_rates(self):
        """Should reject lambda1 > lambda2."""
        from contact_duality.estimators.survival import estimate_type_survival
        from contact_duality.forward import Configuration
        from contact_duality.topology import make_path

        with pytest.raises(ValueError):
            estimate_type_survival(make_path(2), 2.0, 1.0, Configuration.from_string("12"), 1.0, 100, 0)


class TestStrongSurvival:
    """Late-window returns."""

    def test_no_births(self):
        """Should equal P(still occupied at T_probe) when nothing spreads."""
        from contact_duality.estimators.survival import estimate_strong_survival
        from contact_duality.topology import make_path

        est = estimate_strong_survival(make_path(3), 0.0, 1, 0.5, 2.0, 2000, seed=7)

        assert _within(est, math.exp(-0.5))

    def test_window_must_precede_horizon(self):
        """Should reject T_probe >= T_max."""
        from contact_duality.estimators.survival import estimate_strong_survival
        from contact_duality.topology import make_path

        with pytest.raises(ValueError):
            estimate_strong_survival(make_path(3), 1.0, 1, 2.0, 2.0, 100, 0)


class TestHitting:
    """Hitting probabilities from the support dual."""

    def test_base_site_always_hit(self):
        """Should hit the starting site with probability 1."""
        from contact_duality.estimators.survival import estimate_hitting
        from contact_duality.topology import make_path

        assert estimate_hitting(make_path(3), 1.0, 0, 0, 1.0, 100, seed=8).estimate == 1.0

    def test_no_births_never_spread(self):
        """Should never reach another site at lambda = 0."""
        from contact_duality.estimators.survival import estimate_hitting
        from contact_duality.topology import make_path

        assert estimate_hitting(make_path(3), 0.0, 0, 2, 1.0, 100, seed=9).estimate == 0.0


class TestMonotonicity:
    """Ordering of survival proxies across rates, seed sets and proxies."""

    def test_larger_seed_set_survives_pathwise(self):
        """Should never lose a replica when sites are added to A0 on the same logs."""
        from contact_duality.estimators.survival import SingleTypeTask, single_type_histories
        from contact_duality.topology import make_torus

        topo = make_torus(1, 10)
        small = single_type_histories(SingleTypeTask(topo, 1.6, (0,), 4.0, 11), 200, None)
        large = single_type_histories(SingleTypeTask(topo, 1.6, (0, 5), 4.0, 11), 200, None)

        for a, b in zip(small, large):
            assert a.final <= b.final
            assert b.survived or not a.survived

    def test_nondecreasing_in_seed_set(self):
        """Should give at least as many survivors from a superset of sites."""
        from contact_duality.estimators.survival import estimate_survival
        from contact_duality.topology import make_torus

        topo = make_torus(1, 10)
        one = estimate_survival(topo, 1.6, {0}, 4.0, 400, seed=12)
        two = estimate_survival(topo, 1.6, {0, 5}, 4.0, 400, seed=12)
        three = estimate_survival(topo, 1.6, {0, 3, 5}, 4.0, 400, seed=12)

        assert one.successes <= two.successes <= three.successes

    @pytest.mark.statistical
    def test_nondecreasing_in_rate(self):
        """Should not decrease across a rate grid beyond three combined standard errors."""
        from contact_duality.core.stats import combined_se
        from contact_duality.estimators.survival import estimate_survival
        from contact_duality.topology import make_torus

        topo = make_torus(1, 10)
        estimates = [
            estimate_survival(topo, lam, {0}, 4.0, 600, seed=13) for lam in (0.0, 0.8, 1.6, 3.0)
        ]

        for lo, hi in zip(estimates, estimates[1:]):
            assert hi.estimate >= lo.estimate - 3.0 * combined_se(lo.se, hi.se)
        # the ends of the grid are well separated
        assert estimates[-1].ci_low > estimates[0].ci_high

    def test_strong_proxy_below_survival_at_probe_time(self):
        """Should count a late return only in replicas still alive at T_probe."""
        from contact_duality.estimators.survival import estimate_strong_survival, estimate_survival
        from contact_duality.topology import make_torus

        topo = make_torus(1, 8)
        strong = estimate_strong_survival(topo, 1.8, 0, 2.0, 4.0, 400, seed=14)
        weak = estimate_survival(topo, 1.8, {0}, 4.0, 400, seed=14, rho_time=2.0)
        alive_at_probe = weak.successes + round(weak.rho_diagnostic * weak.replicas)

        assert strong.successes <= alive_at_probe

    def test_strong_proxy_at_zero_rate(self):
        """Should match survival to T_probe when nothing spreads."""
        from contact_duality.estimators.survival import estimate_strong_survival, estimate_survival
        from contact_duality.topology import make_path

        topo = make_path(3)
        strong = estimate_strong_survival(topo, 0.0, 1, 0.5, 2.0, 400, seed=15)
        weak = estimate_survival(topo, 0.0, {1}, 2.0, 400, seed=15, rho_time=0.5)

        assert strong.successes == weak.successes + round(weak.rho_diagnostic * weak.replicas)


class TestReplicaDoubling:
    """Estimates from n and 2n replicas of the same seed."""

    def test_first_replicas_are_shared(self):
        """Should reuse the first n replicas when the count doubles."""
        from contact_duality.estimators.survival import SingleTypeTask, single_type_histories
        from contact_duality.topology import make_path

        task = SingleTypeTask(make_path(4), 1.0, (1,), 2.0, 16)
        half = single_type_histories(task, 100, None)
        full = single_type_histories(task, 200, None)

        assert [h.extinction_time for h in full[:100]] == [h.extinction_time for h in half]

    @pytest.mark.statistical
    def test_doubled_estimate_nests_in_enlarged_interval(self):
        """Should land the 2n estimate inside the 99% interval at n for at least 99% of seeds."""
        from contact_duality.core.stats import wilson_interval
        from contact_duality.estimators.survival import estimate_survival
        from contact_duality.topology import make_path

        topo = make_path(2)
        seeds = 100
        nested = 0
        for seed in range(seeds):
            half = estimate_survival(topo, 0.0, {0}, 0.7, 100, seed=seed)
            full = estimate_survival(topo, 0.0, {0}, 0.7, 200, seed=seed)
            low, high = wilson_interval(half.successes, half.replicas, level=0.99)
            nested += low <= full.estimate <= high
            assert full.successes >= half.successes

        assert nested / seeds >= 0.99
