"""Tests for the ancestor process, the duality function and the pathwise check."""

import pytest

from tests.conftest import A, B, C, D, E


class TestWorkedExample:
    """Hand-made log on the path a - e."""

    def test_forward_reaches_expected_configuration(self, path5, worked_log):
        """Should evolve 21012 to 10101 at time 1 and occupy c with a 1 at time 2."""
        from contact_duality.forward import Configuration, evolve

        xi0 = Configuration.from_string("21012")
        xi1 = evolve(path5, worked_log, xi0, 1.0)
        xi2 = evolve(path5, worked_log, xi0, 2.0)

        assert xi1.to_string() == "10101"
        assert xi2[C] == 1

    def test_full_ancestor_list(self, path5, worked_log):
        """Should hold the six ancestors in priority order at dual time 1."""
        from contact_duality.dual import run_ancestors

        dual = run_ancestors(path5, worked_log, C, 2.0)
        state = dual.state_at(1.0)

        assert state.pairs() == ((B, 1), (A, 2), (C, 1), (D, 1), (E, 2), (D, 2))
        assert state.format(path5.site_labels) == "(b,1);(a,2);(c,1);(d,1);(e,2);(d,2)"

    def test_compact_list_drops_repeated_site(self, path5, worked_log):
        """Should skip the second d, which sits below a live d."""
        from contact_duality.dual import run_ancestors

        dual = run_ancestors(path5, worked_log, C, 2.0, compact=True)

        assert dual.state_at(1.0).pairs() == ((B, 1), (A, 2), (C, 1), (D, 1), (E, 2))

    def test_psi_matches_forward_value(self, path5, worked_log):
        """Should give psi = 1 = xi_2(c) from the configuration at time 1."""
        from contact_duality.dual import psi, run_ancestors
        from contact_duality.forward import Configuration

        dual = run_ancestors(path5, worked_log, C, 2.0)

        assert psi(C, dual.state_at(1.0), Configuration.from_string("10101")) == 1

    def test_duality_holds(self, path5, worked_log):
        """Should pass the pathwise check in both list modes."""
        from contact_duality.dual import duality_report
        from contact_duality.forward import Configuration

        xi0 = Configuration.from_string("21012")
        for compact in (False, True):
            report = duality_report(path5, worked_log, xi0, C, 2.0, compact=compact)
            assert report.passed
            assert report.value == 1
            assert all(v == 1 for _, v in report.rows)

    def test_reachable_sets(self, path5, worked_log):
        """Should split the dual support at time 1 into kind-1 and kind-2 paths."""
        from contact_duality.dual import reachable_set

        assert reachable_set(path5, worked_log, C, 2.0, 1.0, kind=1) == {B, C, D}
        assert reachable_set(path5, worked_log, C, 2.0, 1.0, kind=2) == {A, E, D}
        assert reachable_set(path5, worked_log, C, 2.0, 1.0) == {A, B, C, D, E}

    def test_identities_hold(self, path5, worked_log):
        """Should match support and both mark sets with the reachability sweep."""
        from contact_duality.dual import check_identities, run_ancestors

        dual = run_ancestors(path5, worked_log, C, 2.0)

        assert check_identities(path5, worked_log, dual) == (True, True, True)

    def test_blocked_prefix_empty_when_primary_unblocked(self, path5, worked_log):
        """Should be empty since the primary ancestor carries mark 1."""
        from contact_duality.dual import blocked_prefix, run_ancestors

        dual = run_ancestors(path5, worked_log, C, 2.0)

        assert blocked_prefix(dual.state_at(1.0)) == frozenset()

    def test_support_trajectory_agrees(self, path5, worked_log):
        """Should track the same support as the full ancestor process."""
        from contact_duality.dual import run_ancestors, support_trajectory

        dual = run_ancestors(path5, worked_log, C, 2.0)
        supports = support_trajectory(path5, worked_log, C, 2.0)

        for s in (0.0, 0.15, 0.45, 0.95, 1.0, 1.45, 1.75, 2.0):
            assert supports.support_at(s) == dual.state_at(s).support()


class TestBlockedRefill:
    """A 1 that refills a vacant site before a 2 and is then blocked."""

    def test_forward_value_is_vacant(self, blocked_refill_log):
        """Should leave the base leaf vacant."""
        from contact_duality.forward import Configuration, evolve

        xi = evolve(blocked_refill_log.topo, blocked_refill_log, Configuration.from_string("0012"), 1.0)

        assert xi[1] == 0

    def test_tree_psi_differs_from_flat_scan(self, blocked_refill_log):
        """Should read 0 through the ancestry tree where the flat scan reads 2."""
        from contact_duality.dual import AncestorList, psi, run_ancestors
        from contact_duality.forward import Configuration

        topo = blocked_refill_log.topo
        xi0 = Configuration.from_string("0012")
        dual = run_ancestors(topo, blocked_refill_log, 1, 1.0)
        final = dual.state_at(1.0)

        assert final.pairs() == ((1, 1), (0, 2), (2, 2), (3, 2))
        assert psi(1, final, xi0) == 0
        assert psi(1, AncestorList.from_pairs(final.pairs()), xi0) == 2

    def test_duality_holds(self, blocked_refill_log):
        """Should pass the pathwise check."""
        from contact_duality.dual import duality_check
        from contact_duality.forward import Configuration

        topo = blocked_refill_log.topo
        assert duality_check(topo, blocked_refill_log, Configuration.from_string("0012"), 1, 1.0)


class TestPsi:
    """Test the duality function on flat lists."""

    def test_empty_list_gives_zero(self):
        """Should return 0 for an exhausted list."""
        from contact_duality.dual import AncestorList, psi
        from contact_duality.forward import Configuration

        assert psi(0, AncestorList(), Configuration.from_string("222")) == 0

    def test_first_two_wins(self):
        """Should return the first 2 even behind a blocked 1."""
        from contact_duality.dual import AncestorList, psi
        from contact_duality.forward import Configuration

        ahat = AncestorList.from_pairs([(0, 1), (1, 2), (2, 1)])

        assert psi(0, ahat, Configuration.from_string("012")) == 2

    def test_blocked_one_skipped(self):
        """Should skip a 1 with mark 2 and take a later unblocked 1."""
        from contact_duality.dual import AncestorList, psi
        from contact_duality.forward import Configuration

        ahat = AncestorList.from_pairs([(0, 2), (1, 1)])

        assert psi(0, ahat, Configuration.from_string("11")) == 1
        assert psi(0, ahat, Configuration.from_string("10")) == 0

    def test_parse_round_trip(self):
        """Should read back what format writes."""
        from contact_duality.dual import AncestorList

        text = "(3,1);(0,2);(3,2)"

        assert AncestorList.parse(text).format() == text
        assert AncestorList.parse("").is_empty()

    def test_rejects_bad_mark(self):
        """Should reject marks other than 1 and 2."""
        from contact_duality.dual import AncestorList

        with pytest.raises(ValueError):
            AncestorList.from_pairs([(0, 3)])

    def test_blocked_prefix(self):
        """Should collect the leading run of mark-2 entries."""
        from contact_duality.dual import AncestorList, blocked_prefix

        ahat = AncestorList.from_pairs([(4, 2), (1, 2), (4, 2), (0, 1), (2, 2)])

        assert blocked_prefix(ahat) == {1, 4}


class TestRandomDuality:
    """Pathwise duality on sampled logs."""

    @pytest.mark.parametrize("seed", range(8))
    def test_torus_instances(self, seed):
        """Should pass duality and all three identities on small rings."""
        from contact_duality.dual import check_identities, duality_report
        from contact_duality.forward import Configuration
        from contact_duality.graphical import sample_events
        from contact_duality.topology import make_torus

        topo = make_torus(1, 4)
        log = sample_events(topo, 0.6, 1.5, horizon=1.5, seed=seed)
        xi0 = Configuration([(seed + x) % 3 for x in range(topo.site_count)])

        report = duality_report(topo, log, xi0, seed % topo.site_count, 1.5, compact=False)

        assert report.passed
        assert check_identities(topo, log, report.dual) == (True, True, True)

    @pytest.mark.parametrize("seed", range(8))
    def test_compact_matches_full(self, seed):
        """Should agree on support, mark-1 sites and psi at every full-mode jump."""
        from contact_duality.dual import psi, run_ancestors
        from contact_duality.forward import Configuration
        from contact_duality.graphical import sample_events
        from contact_duality.topology import make_tree_ball

        topo = make_tree_ball(2, 2)
        log = sample_events(topo, 0.5, 1.2, horizon=1.0, seed=100 + seed)
        full = run_ancestors(topo, log, 0, 1.0)
        compact = run_ancestors(topo, log, 0, 1.0, compact=True)
        xi = Configuration([(x * 7 + seed) % 3 for x in range(topo.site_count)])

        for s in [0.0] + full.jump_times:
            a, b = full.state_at(s), compact.state_at(s)
            assert a.support() == b.support()
            assert a.sites_with_mark(1) == b.sites_with_mark(1)
            assert psi(0, a, xi) == psi(0, b, xi)

    def test_overflow_raises(self):
        """Should stop once the list outgrows the limit."""
        from contact_duality.dual import AncestorOverflowError, run_ancestors
        from contact_duality.graphical import Event, EventKind, EventLog
        from contact_duality.topology import make_path

        topo = make_path(2)
        log = EventLog.from_events(
            topo, [Event(0.5, EventKind.ARROW, 1, 0)], horizon=1.0, lambda1=1.0, lambda2=1.0
        )

        with pytest.raises(AncestorOverflowError):
            run_ancestors(topo, log, 0, 1.0, max_entries=1)

    def test_base_time_beyond_horizon(self, path5, worked_log):
        """Should reject a base time past the log horizon."""
        from contact_duality.dual import run_ancestors

        with pytest.raises(ValueError):
            run_ancestors(path5, worked_log, C, 3.0)


class TestHitTimes:
    """Test first and last hits of the dual support."""

    def test_never_hits(self):
        """Should return (None, None) for a target the support never meets."""
        from contact_duality.dual import hit_times, support_trajectory
        from contact_duality.graphical import Event, EventKind, EventLog
        from contact_duality.topology import make_path

        topo = make_path(7)

        log = EventLog.from_events(
            topo, [Event(0.5, EventKind.DEATH, 0)], horizon=1.0, lambda1=1.0, lambda2=1.0
        )

        assert hit_times(support_trajectory(topo, log, 0, 1.0), [6]) == (None, None)

    def test_hits_base_site_from_start(self, path5, worked_log):
        """Should meet the base site at dual time 0."""
        from contact_duality.dual import hit_times, run_ancestors

        first, last = hit_times(run_ancestors(path5, worked_log, C, 2.0), [C])

        assert first == 0.0
        assert last is not None and last > 0.0
