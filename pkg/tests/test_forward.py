"""Tests for forward evolution and the single-type couplings."""

import pytest

from tests.conftest import A, B, C, D, E


class TestConfiguration:
    """Test the configuration type."""

    def test_string_form(self):
        """Should read and write one digit per site."""
        from contact_duality.forward import Configuration

        xi = Configuration.from_string("21012")

        assert xi.to_string() == "21012"
        assert xi.ones() == {1, 3}
        assert xi.twos() == {0, 4}
        assert xi.occupied() == {0, 1, 3, 4}

    def test_from_sites(self):
        """Should place ones and twos and leave the rest vacant."""
        from contact_duality.forward import Configuration

        assert Configuration.from_sites(4, ones=[1], twos=[3]).to_string() == "0102"
        with pytest.raises(ValueError):
            Configuration.from_sites(4, ones=[1], twos=[1])

    def test_rejects_bad_states(self):
        """Should reject digits outside 0..2."""
        from contact_duality.forward import Configuration

        with pytest.raises(ValueError):
            Configuration.from_string("013")
        with pytest.raises(ValueError):
            Configuration([0, -1])

    def test_count_types(self):
        """Should count vacant, type-1 and type-2 sites."""
        from contact_duality.forward import Configuration, count_types

        assert count_types(Configuration.from_string("2100222")) == (2, 1, 4)


class TestEvolve:
    """Test the two-type forward sweep."""

    def test_worked_log(self, path5, worked_log):
        """Should follow births, blocked 1s and deaths event by event."""
        from contact_duality.forward import Configuration, evolve

        xi0 = Configuration.from_string("21012")

        assert evolve(path5, worked_log, xi0, 0.35).to_string() == "11112"
        assert evolve(path5, worked_log, xi0, 1.0).to_string() == "10101"
        # 2-only arrows at 1.3 and 1.5 carry 1s and so change nothing
        assert evolve(path5, worked_log, xi0, 1.55).to_string() == "10101"
        assert evolve(path5, worked_log, xi0, 2.0).to_string() == "11101"

    def test_restart_from_midpoint(self, path5, worked_log):
        """Should compose over (0, s] and (s, t]."""
        from contact_duality.forward import Configuration, evolve

        xi0 = Configuration.from_string("21012")
        mid = evolve(path5, worked_log, xi0, 1.0)

        assert evolve(path5, worked_log, mid, 2.0, t0=1.0) == evolve(path5, worked_log, xi0, 2.0)

    def test_two_passes_labeled_arrows(self, path5, worked_log):
        """Should let a 2 use a 2-only arrow."""
        from contact_duality.forward import Configuration, evolve

        xi = evolve(path5, worked_log, Configuration.from_string("20000"), 2.0, t0=1.0)

        assert xi[B] == 2

    def test_rejects_wrong_size_and_horizon(self, path5, worked_log):
        """Should refuse configurations of the wrong length and times past the horizon."""
        from contact_duality.forward import Configuration, evolve

        with pytest.raises(ValueError):
            evolve(path5, worked_log, Configuration.from_string("2101"), 1.0)
        with pytest.raises(ValueError):
            evolve(path5, worked_log, Configuration.from_string("21012"), 2.5)

    def test_trajectory_matches_evolve(self, path5, worked_log):
        """Should sample the same configurations as separate evolve calls."""
        from contact_duality.forward import Configuration, evolve, trajectory

        xi0 = Configuration.from_string("21012")
        times = [0.0, 0.5, 1.0, 1.75, 2.0]
        traj = trajectory(path5, worked_log, xi0, times)

        assert traj.times == times
        for s, xi in zip(times, traj.configurations):
            assert xi == evolve(path5, worked_log, xi0, s)

    def test_trajectory_rejects_unsorted(self, path5, worked_log):
        """Should reject decreasing sample times."""
        from contact_duality.forward import Configuration, trajectory

        with pytest.raises(ValueError):
            trajectory(path5, worked_log, Configuration.from_string("21012"), [1.0, 0.5])


class TestCoupling:
    """Single-type processes on the same log."""

    @pytest.mark.parametrize("seed", range(6))
    def test_type_sets_inside_single_type_processes(self, seed):
        """Should keep 1s inside zeta^1 and occupied sites inside zeta^2."""
        from contact_duality.forward import Configuration, evolve, evolve_single
        from contact_duality.graphical import sample_events
        from contact_duality.topology import make_torus

        topo = make_torus(2, 5)
        log = sample_events(topo, 1.2, 2.4, horizon=4.0, seed=seed)
        xi0 = Configuration([(x * 5 + seed) % 3 for x in range(topo.site_count)])

        for t in (0.5, 1.0, 2.0, 4.0):
            xi = evolve(topo, log, xi0, t)
            zeta1 = evolve_single(topo, log, xi0.ones(), t, kind=1)
            zeta2 = evolve_single(topo, log, xi0.occupied(), t, kind=2)
            assert xi.ones() <= zeta1
            assert xi.occupied() <= zeta2
            assert evolve_single(topo, log, xi0.ones(), t, kind=2) >= zeta1

    @pytest.mark.parametrize("seed", range(4))
    def test_pure_types_match_single_type(self, seed):
        """Should reduce to zeta^2 for all-2 starts and zeta^1 for all-1 starts."""
        from contact_duality.forward import Configuration, evolve, evolve_single
        from contact_duality.graphical import sample_events
        from contact_duality.topology import make_tree_ball

        topo = make_tree_ball(2, 3)
        log = sample_events(topo, 0.8, 2.0, horizon=3.0, seed=seed)
        seeds = {0, 1, 5}

        twos = evolve(topo, log, Configuration.from_sites(topo.site_count, twos=seeds), 3.0)
        ones = evolve(topo, log, Configuration.from_sites(topo.site_count, ones=seeds), 3.0)

        assert twos.twos() == evolve_single(topo, log, seeds, 3.0, kind=2)
        assert ones.ones() == evolve_single(topo, log, seeds, 3.0, kind=1)


class TestSingleTypeHistory:
    """Test lifetime, radius and watch-site bookkeeping."""

    def test_extinction_time(self, path5, worked_log):
        """Should stop at the death that empties the process."""
        from contact_duality.forward import single_type_history

        history = single_type_history(path5, worked_log, [E], 2.0, kind=2)

        assert history.extinction_time == 0.4
        assert not history.survived
        assert history.alive_at(0.3)
        assert not history.alive_at(0.5)

    def test_radius_and_final_set(self, path5, worked_log):
        """Should record the farthest site reached and the set at t_max."""
        from contact_duality.forward import single_type_history

        history = single_type_history(path5, worked_log, [B], 0.35, kind=1)

        assert history.survived
        assert history.final == {A, B, C}
        assert history.max_radius == 1

    def test_watch_site(self, path5, worked_log):
        """Should flag the watch site only when occupied inside the window."""
        from contact_duality.forward import single_type_history

        hit = single_type_history(path5, worked_log, [D], 0.55, kind=2, watch_site=E, watch_from=0.45)
        miss = single_type_history(path5, worked_log, [B], 0.55, kind=2, watch_site=E)

        assert hit.watch_hit
        assert not miss.watch_hit

    def test_empty_seed(self, path5, worked_log):
        """Should report immediate extinction from an empty set."""
        from contact_duality.forward import single_type_history

        history = single_type_history(path5, worked_log, [], 1.0)

        assert history.extinction_time == 0.0
        assert history.final == frozenset()
