"""
Critical-value brackets by bisection on a survival proxy.

kind=weak bisects the global survival proxy (lambda_*), kind=strong the
late-return proxy (lambda^*). Every probe reuses the run seed, so probes at
different rates share their replica seeds.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Tuple, Union

from ..core.config import get_config
from ..core.pool import ReplicaPool
from ..topology import Topology
from .base import SurvivalEstimate
from .survival import estimate_strong_survival, estimate_survival

logger = logging.getLogger(__name__)


class CriticalKind(str, Enum):
    """Which survival proxy the bisection targets."""
    WEAK = "weak"
    STRONG = "strong"


@dataclass
class CriticalEstimate:
    """Final bracket and the probe at every bisection step."""
    kind: CriticalKind
    lambda_low: float
    lambda_high: float
    threshold: float
    probes: List[Tuple[float, SurvivalEstimate]] = field(default_factory=list)

    @property
    def width(self) -> float:
        return self.lambda_high - self.lambda_low

    def overlaps(self, other: "CriticalEstimate") -> bool:
        return self.lambda_low < other.lambda_high and other.lambda_low < self.lambda_high

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kind": self.kind.value,
            "lambda_low": self.lambda_low,
            "lambda_high": self.lambda_high,
            "threshold": self.threshold,
            "probes": [{"lambda": lam, **est.to_dict()} for lam, est in self.probes],
        }


def survival_proxy(
    topo: Topology,
    kind: Union[CriticalKind, str],
    lam: float,
    x: int,
    T_probe: float,
    T_max: float,
    replicas: int,
    seed: int,
    pool: Optional[ReplicaPool] = None,
) -> SurvivalEstimate:
    """The proxy that bisection compares against the threshold."""
    if CriticalKind(kind) is CriticalKind.WEAK:
        return estimate_survival(topo, lam, {x}, T_max, replicas, seed, pool=pool)
    return estimate_strong_survival(topo, lam, x, T_probe, T_max, replicas, seed, pool=pool)


def estimate_critical(
    topo: Topology,
    kind: Union[CriticalKind, str],
    bracket: Tuple[float, float],
    threshold: Optional[float] = None,
    bisection_steps: int = 6,
    x: Optional[int] = None,
    T_probe: Optional[float] = None,
    T_max: Optional[float] = None,
    replicas: Optional[int] = None,
    seed: int = 0,
    pool: Optional[ReplicaPool] = None,
) -> CriticalEstimate:
    """
    Bisect a survival proxy for the rate at which it crosses threshold.

    Args:
        topo: Topology
        kind: weak (global survival) or strong (late return to x)
        bracket: (lambda_lo, lambda_hi) with proxy(lo) < threshold < proxy(hi)
        threshold: Proxy level (default CRITICAL_THRESHOLD)
        bisection_steps: Number of halvings
        x: Seed site (default the root of a tree ball, else site 0)
        T_probe: Start of the return window (default T_max / 2)
        T_max: Truncation horizon (default T_MAX)
        replicas: Replicas per probe (default REPLICAS)
        seed: Run seed shared by every probe

    Returns:
        CriticalEstimate with bracket width (hi - lo) / 2^steps

    Raises:
        ValueError: Bracket does not straddle the threshold
    """
    config = get_config()
    kind = CriticalKind(kind)
    threshold = config.CRITICAL_THRESHOLD if threshold is None else threshold
    T_max = config.T_MAX if T_max is None else T_max
    T_probe = T_max / 2 if T_probe is None else T_probe
    replicas = config.REPLICAS if replicas is None else replicas
    if x is None:
        x = topo.root if topo.root is not None else 0

    lo, hi = bracket
    if not 0 <= lo < hi:
        raise ValueError(f"Bracket must satisfy 0 <= lo < hi, got {bracket}")
    if bisection_steps < 0:
        raise ValueError(f"bisection_steps must be >= 0, got {bisection_steps}")

    def probe(lam: float) -> SurvivalEstimate:
        est = survival_proxy(topo, kind, lam, x, T_probe, T_max, replicas, seed, pool)
        logger.debug(f"{kind.value} probe lambda={lam:.6g}: {est.estimate:.4f}")
        return est

    probes: List[Tuple[float, SurvivalEstimate]] = []
    at_lo, at_hi = probe(lo), probe(hi)
    probes += [(lo, at_lo), (hi, at_hi)]
    if not at_lo.estimate < threshold < at_hi.estimate:
        raise ValueError(
            f"Bracket {bracket} does not straddle threshold {threshold}: "
            f"proxy {at_lo.estimate:.4f} at {lo}, {at_hi.estimate:.4f} at {hi}"
        )

    for step in range(bisection_steps):
        mid = 0.5 * (lo + hi)
        at_mid = probe(mid)
        probes.append((mid, at_mid))
        if at_mid.estimate < threshold:
            lo = mid
        else:
            hi = mid
        logger.info(
            f"Bisection ({kind.value}) step {step + 1}/{bisection_steps}: [{lo:.6g}, {hi:.6g}]"
        )

    return CriticalEstimate(kind, lo, hi, threshold, probes)
