"""Lifetime and radius of the cluster grown from one site."""

import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence

from ..core.pool import ReplicaPool
from ..core.stats import binomial_se
from ..topology import Topology
from .base import check_horizon, check_replicas
from .survival import SingleTypeTask, single_type_histories

logger = logging.getLogger(__name__)


@dataclass
class ClusterStats:
    """One replica of zeta^x."""
    lifetime: float  # extinction time, or T_max when censored
    radius: int  # farthest distance from x ever occupied
    censored: bool  # still alive at T_max


@dataclass
class ClusterSample:
    """Cluster statistics over independent replicas."""
    stats: List[ClusterStats]
    t_max: float
    seed: int

    @property
    def replicas(self) -> int:
        return len(self.stats)

    def epsilon(self, M: int) -> float:
        """P(died out by T_max and reached radius >= M)."""
        if not self.stats:
            return 0.0
        hits = sum(1 for s in self.stats if not s.censored and s.radius >= M)
        return hits / len(self.stats)

    def epsilon_grid(self, Ms: Sequence[int]) -> Dict[int, float]:
        return {int(M): self.epsilon(M) for M in Ms}

    def epsilon_se(self, M: int) -> float:
        return binomial_se(self.epsilon(M), self.replicas)

    def censored_fraction(self) -> float:
        return sum(1 for s in self.stats if s.censored) / len(self.stats) if self.stats else 0.0


def cluster_stats(
    topo: Topology,
    lam: float,
    x: int,
    T_max: float,
    replicas: int,
    seed: int,
    pool: Optional[ReplicaPool] = None,
) -> ClusterSample:
    """Per-replica lifetime (censored at T_max) and radius of zeta^x."""
    check_horizon(T_max)
    check_replicas(replicas, minimum=1)
    task = SingleTypeTask(topo, float(lam), (topo.check_site(x),), float(T_max), int(seed))
    stats = []
    for h in single_type_histories(task, replicas, pool):
        censored = h.survived
        lifetime = T_max if censored else float(h.extinction_time)
        stats.append(ClusterStats(lifetime, h.max_radius, censored))
    return ClusterSample(stats, float(T_max), int(seed))
