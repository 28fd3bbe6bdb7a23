"""Tests for critical-value bisection."""

from unittest.mock import patch

import pytest


def _step_proxy(crossing):
    from contact_duality.estimators.base import SurvivalEstimate

    def proxy(topo, kind, lam, x, T_probe, T_max, replicas, seed, pool=None):
        successes = replicas // 2 if lam >= crossing else 0
        return SurvivalEstimate.from_counts(successes, replicas, T_max, seed)
    return proxy


class TestEstimateCritical:
    """Test the bisection loop."""

    def test_bracket_shrinks_around_crossing(self):
        """Should halve the bracket each step and keep the crossing inside."""
        from contact_duality.estimators.critical import estimate_critical
        from contact_duality.topology import make_torus

        with patch("contact_duality.estimators.critical.survival_proxy", _step_proxy(1.3)):
            est = estimate_critical(
                make_torus(1, 5), "weak", (1.0, 2.0), threshold=0.1,
                bisection_steps=4, T_max=5.0, replicas=100,
            )

        assert est.lambda_low <= 1.3 <= est.lambda_high
        assert est.width == pytest.approx(1.0 / 16)
        assert len(est.probes) == 2 + 4
        assert est.to_dict()["kind"] == "weak"

    def test_rejects_bracket_not_straddling(self):
        """Should refuse a bracket whose ends sit on one side of the threshold."""
        from contact_duality.estimators.critical import estimate_critical
        from contact_duality.topology import make_torus

        with patch("contact_duality.estimators.critical.survival_proxy", _step_proxy(5.0)):
            with pytest.raises(ValueError, match="straddle"):
                estimate_critical(make_torus(1, 5), "strong", (1.0, 2.0), threshold=0.1,
                                  T_max=5.0, replicas=100)

    def test_rejects_bad_bracket(self):
        """Should require 0 <= lo < hi."""
        from contact_duality.estimators.critical import estimate_critical
        from contact_duality.topology import make_torus

        with pytest.raises(ValueError):
            estimate_critical(make_torus(1, 5), "weak", (2.0, 1.0), T_max=5.0, replicas=100)

    def test_overlaps(self):
        """Should detect overlapping brackets."""
        from contact_duality.estimators.critical import CriticalEstimate, CriticalKind

        a = CriticalEstimate(CriticalKind.WEAK, 1.0, 1.2, 0.02)
        b = CriticalEstimate(CriticalKind.STRONG, 1.1, 1.5, 0.02)
        c = CriticalEstimate(CriticalKind.STRONG, 1.3, 1.5, 0.02)

        assert a.overlaps(b)
        assert not a.overlaps(c)

    @pytest.mark.slow
    @pytest.mark.statistical
    def test_real_proxy_on_small_ring(self):
        """Should bracket the weak crossing on a ring with the real proxy."""
        from contact_duality.estimators.critical import estimate_critical
        from contact_duality.topology import make_torus

        est = estimate_critical(
            make_torus(1, 10), "weak", (0.1, 8.0), threshold=0.2,
            bisection_steps=2, T_max=4.0, replicas=300, seed=11,
        )

        assert 0.1 <= est.lambda_low < est.lambda_high <= 8.0
