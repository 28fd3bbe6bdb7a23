"""Monte Carlo laws of xi_t checked against the exact oracle on tiny graphs."""

import itertools
import logging
from dataclasses import dataclass
from typing import Any, List, Optional, Sequence, Tuple

import numpy as np

from ..core.pool import ReplicaPool
from ..core.rng import replica_seed
from ..core.stats import binomial_se
from ..forward import Configuration, trajectory
from ..graphical import sample_events
from ..oracle import (
    ExactDistribution,
    build_generator,
    encode_configuration,
    marginal,
    total_variation,
    transient_distribution,
)
from ..topology import Topology
from .base import ExperimentResult, check_replicas, resolve_pool

logger = logging.getLogger(__name__)

# cells whose estimate must sit within CELL_SE standard errors of the exact value
CELL_SE = 4.0
MIN_CELL_FRACTION = 0.95
MAX_JOINT_TV = 0.01


@dataclass(frozen=True)
class OracleTask:
    topo: Topology
    lambda1: float
    lambda2: float
    xi0: Configuration
    times: Tuple[float, ...]
    seed: int


def run_oracle_replica(index: int, task: OracleTask) -> Tuple[int, ...]:
    """Encoded configuration at each time of one replica."""
    log = sample_events(
        task.topo, task.lambda1, task.lambda2, task.times[-1],
        replica_seed(task.seed, index), allow_zero_rates=True,
    )
    traj = trajectory(task.topo, log, task.xi0, task.times)
    return tuple(encode_configuration(xi) for xi in traj.configurations)


def empirical_distribution(
    codes: Sequence[int],
    site_count: int,
    time: float,
    lambda1: float,
    lambda2: float,
) -> ExactDistribution:
    """Empirical law of encoded configurations, shaped like an oracle output."""
    counts = np.bincount(np.asarray(codes, dtype=np.int64), minlength=3 ** site_count)
    return ExactDistribution(time, counts / len(codes), site_count, lambda1, lambda2)


def oracle_compare(
    topo: Topology,
    lambda1: float,
    lambda2: float,
    xi0: Configuration,
    t_grid: Sequence[float],
    replicas: int,
    seed: int,
    pool: Optional[ReplicaPool] = None,
) -> ExperimentResult:
    """
    Single-site and pair marginals of simulated xi_t against uniformization.

    A cell passes when the estimate lies within 4 standard errors of the exact
    probability (standard error taken at the exact value). Each time must
    pass on at least 95% of cells, and the total variation between the
    simulated and exact joint law of the first three sites must stay below 0.01.

    Raises:
        ValueError: lambda1 > lambda2, empty or negative t_grid
        OracleSizeError: Topology too large for the oracle
    """
    if lambda1 > lambda2:
        raise ValueError(f"lambda1={lambda1} > lambda2={lambda2}")
    check_replicas(replicas)
    times = tuple(sorted({float(t) for t in t_grid}))
    if not times or times[0] < 0:
        raise ValueError(f"t_grid must be nonempty and nonnegative, got {list(t_grid)}")

    n = topo.site_count
    gen = build_generator(topo, lambda1, lambda2)
    task = OracleTask(topo, float(lambda1), float(lambda2), xi0, times, int(seed))
    codes = resolve_pool(pool).map(run_oracle_replica, replicas, task)

    singles = [(x,) for x in range(n)]
    pairs = list(itertools.combinations(range(n), 2))
    joint_sites = tuple(range(min(3, n)))

    rows: List[List[Any]] = []
    result = ExperimentResult(
        experiment="oracle-compare",
        columns=["t", "sites", "pattern", "exact", "estimate", "se", "within"],
        rows=rows,
        summary={"xi0": xi0.to_string(), "times": list(times), "per_time": []},
    )

    exact = None
    for j, t in enumerate(times):
        # advance the exact law from the previous time
        start = xi0 if exact is None else exact
        exact = transient_distribution(gen, start, t - (0.0 if exact is None else exact.time))
        sim = empirical_distribution([c[j] for c in codes], n, t, lambda1, lambda2)

        within = total = 0
        for sites in singles + pairs:
            m_exact = marginal(exact, sites)
            m_sim = marginal(sim, sites)
            for (label, pattern, p), (_, _, q) in zip(m_exact.to_rows(), m_sim.to_rows()):
                se = binomial_se(p, replicas)
                ok = abs(q - p) <= CELL_SE * se
                within += ok
                total += 1
                rows.append([t, label, pattern, p, q, se, ok])

        cell_fraction = within / total
        tv = total_variation(marginal(exact, joint_sites).table, marginal(sim, joint_sites).table)
        result.summary["per_time"].append(
            {"t": t, "cells": total, "within_fraction": cell_fraction, "joint_tv": tv}
        )
        logger.info(f"oracle-compare t={t}: {cell_fraction:.3f} of cells within {CELL_SE} SE, "
                    f"TV={tv:.4f}")
        result.add_verdict(
            f"cells@t={t:g}",
            (cell_fraction >= MIN_CELL_FRACTION,
             None if cell_fraction >= MIN_CELL_FRACTION else f"only {cell_fraction:.3f} within"),
        )
        result.add_verdict(
            f"joint-tv@t={t:g}",
            (tv <= MAX_JOINT_TV, None if tv <= MAX_JOINT_TV else f"TV {tv:.4f} > {MAX_JOINT_TV}"),
        )
    return result
