"""
Upper invariant measure snapshots.

The process started from every site occupied is run to t_relax; the joint
occupancy of a few sites at that time stands in for the marginals of the
upper invariant measure.
"""

import logging
from collections import Counter
from dataclasses import dataclass
from itertools import product
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from ..core.pool import ReplicaPool
from ..core.rng import replica_seed
from ..core.stats import binomial_se
from ..forward import evolve_single
from ..topology import Topology
from .base import check_horizon, check_replicas, resolve_pool, single_type_log

logger = logging.getLogger(__name__)


@dataclass
class OccupancyTable:
    """Empirical joint occupancy over `sites`; patterns are 0/1 strings in site order."""
    sites: Tuple[int, ...]
    counts: Dict[str, int]
    replicas: int
    t_relax: float

    def probability(self, pattern: str) -> float:
        if len(pattern) != len(self.sites):
            raise ValueError(f"Pattern {pattern!r} does not match {len(self.sites)} sites")
        return self.counts.get(pattern, 0) / self.replicas

    def se(self, pattern: str) -> float:
        return binomial_se(self.probability(pattern), self.replicas)

    def miss_probability(self, subset: Iterable[int]) -> float:
        """P(no site of subset occupied)."""
        positions = [self.sites.index(s) for s in subset]
        missed = sum(
            n for pattern, n in self.counts.items() if all(pattern[k] == "0" for k in positions)
        )
        return missed / self.replicas

    def hit_probability(self, subset: Iterable[int]) -> float:
        """P(some site of subset occupied); estimates alpha_A."""
        return 1.0 - self.miss_probability(subset)

    def site_marginal(self, site: int) -> float:
        k = self.sites.index(site)
        return sum(n for pattern, n in self.counts.items() if pattern[k] == "1") / self.replicas

    def to_rows(self) -> List[Tuple[str, str, float]]:
        label = " ".join(str(s) for s in self.sites)
        return [
            (label, "".join(bits), self.probability("".join(bits)))
            for bits in product("01", repeat=len(self.sites))
        ]


@dataclass(frozen=True)
class UpperInvariantTask:
    topo: Topology
    lam: float
    t_relax: float
    sites: Tuple[int, ...]
    seed: int


def run_upper_invariant_replica(index: int, task: UpperInvariantTask) -> str:
    log = single_type_log(task.topo, task.lam, task.t_relax, replica_seed(task.seed, index))
    occupied = evolve_single(
        task.topo, log, range(task.topo.site_count), task.t_relax, kind=2
    )
    return "".join("1" if s in occupied else "0" for s in task.sites)


def sample_upper_invariant(
    topo: Topology,
    lam: float,
    t_relax: float,
    sites: Sequence[int],
    replicas: int,
    seed: int,
    pool: Optional[ReplicaPool] = None,
) -> OccupancyTable:
    """
    Joint occupancy at `sites` of the process from full occupancy at time t_relax.

    Raises:
        ValueError: Nonpositive t_relax, repeated sites, too few replicas
    """
    check_horizon(t_relax)
    check_replicas(replicas)
    sites = tuple(topo.check_site(s) for s in sites)
    if len(set(sites)) != len(sites):
        raise ValueError(f"Repeated sites: {sites}")

    task = UpperInvariantTask(topo, float(lam), float(t_relax), sites, int(seed))
    patterns = resolve_pool(pool).map(run_upper_invariant_replica, replicas, task)
    table = OccupancyTable(sites, dict(Counter(patterns)), replicas, float(t_relax))
    logger.debug(f"Upper invariant snapshot over {len(sites)} sites at t={t_relax}")
    return table
