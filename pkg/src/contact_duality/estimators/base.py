"""
Shared estimator types and helpers.

Every estimator runs independent replicas, each on its own freshly sampled
log keyed by replica_seed(seed, index), and reduces results in replica order.
"""

import logging
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

from ..core.config import get_config
from ..core.pool import ReplicaPool
from ..core.stats import binomial_se, wilson_interval
from ..graphical import EventLog, sample_events
from ..topology import Topology

logger = logging.getLogger(__name__)

MIN_REPLICAS = 100


@dataclass
class SurvivalEstimate:
    """A Monte Carlo proportion with its 95% Wilson interval."""
    estimate: float
    replicas: int
    horizon: float  # truncation time the event is read at
    ci_low: float
    ci_high: float
    seed: int
    successes: int
    rho_diagnostic: Optional[float] = None  # P(alive at T, dead by horizon) when requested

    @classmethod
    def from_counts(
        cls,
        successes: int,
        replicas: int,
        horizon: float,
        seed: int,
        rho_diagnostic: Optional[float] = None,
    ) -> "SurvivalEstimate":
        low, high = wilson_interval(successes, replicas)
        estimate = successes / replicas if replicas else 0.0
        return cls(estimate, replicas, horizon, low, high, seed, successes, rho_diagnostic)

    @property
    def se(self) -> float:
        return binomial_se(self.estimate, self.replicas)

    def to_dict(self) -> Dict[str, Any]:
        out = asdict(self)
        out["se"] = self.se
        return out


@dataclass
class TypeSurvivalEstimate:
    """Survival of each type from the same two-type replicas."""
    alpha1: SurvivalEstimate  # ones survive while twos die out
    alpha2: SurvivalEstimate  # twos survive

    def consistent(self) -> Tuple[bool, Optional[str]]:
        """The two events are disjoint, so the estimates sum to at most 1."""
        total = self.alpha1.estimate + self.alpha2.estimate
        if total > 1.0 + 1e-12:
            return False, f"alpha1 + alpha2 = {total:.6f} exceeds 1"
        return True, None

    def to_dict(self) -> Dict[str, Any]:
        return {"alpha1": self.alpha1.to_dict(), "alpha2": self.alpha2.to_dict()}


@dataclass
class Verdict:
    """Outcome of one check inside an experiment."""
    name: str
    passed: bool
    message: Optional[str] = None

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass
class ExperimentResult:
    """Table, summary and verdicts produced by one experiment."""
    experiment: str
    columns: List[str]
    rows: List[Sequence[Any]]
    summary: Dict[str, Any] = field(default_factory=dict)
    verdicts: List[Verdict] = field(default_factory=list)

    @property
    def flagged(self) -> int:
        return sum(1 for v in self.verdicts if not v.passed)

    @property
    def passed(self) -> bool:
        return self.flagged == 0

    def add_verdict(self, name: str, check: Tuple[bool, Optional[str]]) -> None:
        passed, message = check
        self.verdicts.append(Verdict(name, passed, message))
        if not passed:
            logger.warning(f"{self.experiment}: check {name} flagged: {message}")


def check_replicas(replicas: int, minimum: int = MIN_REPLICAS) -> None:
    if replicas < minimum:
        raise ValueError(f"At least {minimum} replicas required, got {replicas}")


def check_horizon(t_max: float) -> None:
    if t_max <= 0:
        raise ValueError(f"Horizon must be positive, got {t_max}")


def resolve_pool(pool: Optional[ReplicaPool]) -> ReplicaPool:
    """The given pool, or one sized by the WORKERS setting."""
    return pool if pool is not None else ReplicaPool(get_config().WORKERS)


def single_type_log(topo: Topology, lam: float, horizon: float, seed: int) -> EventLog:
    """Log of the single-type process at rate lam (every arrow unlabeled)."""
    return sample_events(topo, lam, lam, horizon, seed, allow_zero_rates=True)


def fraction(flags: Sequence[bool]) -> float:
    return sum(1 for f in flags if f) / len(flags) if flags else 0.0
