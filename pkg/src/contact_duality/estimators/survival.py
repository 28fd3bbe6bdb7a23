"""
Survival estimators.

- estimate_survival: alpha_A at rate lambda, read at T_max
- estimate_rho: P(alive at T, dead by T_max), the truncation diagnostic
- estimate_type_survival: alpha_eta^1 and alpha_eta^2 of the two-type process
- estimate_strong_survival: return to the start site during a late window
- estimate_hitting: reach of the reverse support dual to a target site
"""

import logging
from dataclasses import dataclass
from typing import Iterable, List, Optional, Tuple

from ..core.pool import ReplicaPool
from ..core.rng import replica_seed
from ..dual import hit_times, support_trajectory
from ..forward import (
    Configuration,
    SingleTypeHistory,
    count_types,
    single_type_history,
    trajectory,
)
from ..graphical import sample_events
from ..topology import Topology
from .base import (
    SurvivalEstimate,
    TypeSurvivalEstimate,
    check_horizon,
    check_replicas,
    resolve_pool,
    single_type_log,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SingleTypeTask:
    """Shared input of single-type replicas."""
    topo: Topology
    lam: float
    seeds: Tuple[int, ...]
    t_max: float
    seed: int
    kind: int = 2
    watch_site: Optional[int] = None
    watch_from: float = 0.0


def run_single_type_replica(index: int, task: SingleTypeTask) -> SingleTypeHistory:
    log = single_type_log(task.topo, task.lam, task.t_max, replica_seed(task.seed, index))
    return single_type_history(
        task.topo,
        log,
        task.seeds,
        task.t_max,
        kind=task.kind,
        watch_site=task.watch_site,
        watch_from=task.watch_from,
    )


def single_type_histories(
    task: SingleTypeTask,
    replicas: int,
    pool: Optional[ReplicaPool] = None,
) -> List[SingleTypeHistory]:
    """Histories of `replicas` independent runs, in replica order."""
    return resolve_pool(pool).map(run_single_type_replica, replicas, task)


def estimate_survival(
    topo: Topology,
    lam: float,
    A0: Iterable[int],
    T_max: float,
    replicas: int,
    seed: int,
    rho_time: Optional[float] = None,
    pool: Optional[ReplicaPool] = None,
) -> SurvivalEstimate:
    """
    Fraction of replicas of zeta^A0 at rate lam still alive at T_max.

    Args:
        topo: Topology
        lam: Birth rate (0 allowed)
        A0: Seed set
        T_max: Truncation time standing in for "forever"
        replicas: Number of replicas (>= 100)
        seed: Run seed
        rho_time: If given, attach P(alive at rho_time, dead by T_max) from
            the same replicas
        pool: Replica pool (default sized by WORKERS)

    Raises:
        ValueError: Nonpositive T_max, too few replicas, rho_time >= T_max
    """
    check_horizon(T_max)
    check_replicas(replicas)
    if rho_time is not None and not 0 <= rho_time < T_max:
        raise ValueError(f"rho_time must lie in [0, T_max={T_max}), got {rho_time}")

    task = SingleTypeTask(topo, float(lam), tuple(sorted(set(A0))), float(T_max), int(seed))
    histories = single_type_histories(task, replicas, pool)
    alive = sum(1 for h in histories if h.survived)

    rho = None
    if rho_time is not None:
        rho = sum(1 for h in histories if h.alive_at(rho_time) and not h.survived) / replicas

    est = SurvivalEstimate.from_counts(alive, replicas, T_max, seed, rho)
    logger.debug(f"Survival at lambda={lam}, |A0|={len(task.seeds)}: {est.estimate:.4f}")
    return est


def estimate_rho(
    topo: Topology,
    lam: float,
    x: int,
    T: float,
    T_max: float,
    replicas: int,
    seed: int,
    pool: Optional[ReplicaPool] = None,
) -> SurvivalEstimate:
    """
    Fraction of replicas of zeta^x alive at T but extinct by T_max.

    Raises:
        ValueError: T >= T_max
    """
    if T >= T_max:
        raise ValueError(f"T={T} must be below T_max={T_max}")
    check_horizon(T_max)
    check_replicas(replicas)

    task = SingleTypeTask(topo, float(lam), (topo.check_site(x),), float(T_max), int(seed))
    histories = single_type_histories(task, replicas, pool)
    late = sum(1 for h in histories if h.alive_at(T) and not h.survived)
    return SurvivalEstimate.from_counts(late, replicas, T_max, seed)


@dataclass(frozen=True)
class TwoTypeTask:
    """Shared input of two-type replicas read at increasing times."""
    topo: Topology
    lambda1: float
    lambda2: float
    eta: Configuration
    times: Tuple[float, ...]
    seed: int
    sites: Tuple[int, ...] = ()  # states recorded per snapshot
    target: Tuple[int, ...] = ()  # set A for the hit flags


@dataclass(frozen=True)
class TwoTypeSnapshot:
    """What one replica looks like at one time."""
    n1: int
    n2: int
    states: Tuple[int, ...]  # at task.sites
    hit1: bool  # a 1 somewhere in task.target
    hit2: bool  # a 2 somewhere in task.target


def run_two_type_replica(index: int, task: TwoTypeTask) -> List[TwoTypeSnapshot]:
    """Snapshots at task.times for one replica."""
    log = sample_events(
        task.topo,
        task.lambda1,
        task.lambda2,
        task.times[-1],
        replica_seed(task.seed, index),
        allow_zero_rates=True,
    )
    out = []
    for xi in trajectory(task.topo, log, task.eta, task.times).configurations:
        _, n1, n2 = count_types(xi)
        in_target = [xi[y] for y in task.target]
        out.append(
            TwoTypeSnapshot(
                n1=n1,
                n2=n2,
                states=tuple(xi[y] for y in task.sites),
                hit1=1 in in_target,
                hit2=2 in in_target,
            )
        )
    return out


def two_type_snapshots(
    task: TwoTypeTask,
    replicas: int,
    pool: Optional[ReplicaPool] = None,
) -> List[List[TwoTypeSnapshot]]:
    """Per-replica snapshot lists, in replica order."""
    if list(task.times) != sorted(task.times) or not task.times:
        raise ValueError(f"Snapshot times must be nonempty and sorted, got {task.times}")
    return resolve_pool(pool).map(run_two_type_replica, replicas, task)


def estimate_type_survival(
    topo: Topology,
    lambda1: float,
    lambda2: float,
    eta: Configuration,
    T_max: float,
    replicas: int,
    seed: int,
    pool: Optional[ReplicaPool] = None,
) -> TypeSurvivalEstimate:
    """
    Survival of each type from eta, read at T_max.

    alpha2 counts replicas with a 2 present at T_max; alpha1 counts replicas
    with no 2 left and a 1 present.

    Raises:
        ValueError: lambda1 > lambda2, nonpositive T_max, too few replicas
    """
    if lambda1 > lambda2:
        raise ValueError(f"lambda1={lambda1} > lambda2={lambda2}")
    check_horizon(T_max)
    check_replicas(replicas)

    task = TwoTypeTask(topo, float(lambda1), float(lambda2), eta, (float(T_max),), int(seed))
    finals = [snaps[-1] for snaps in two_type_snapshots(task, replicas, pool)]
    n2 = sum(1 for s in finals if s.n2)
    n1 = sum(1 for s in finals if not s.n2 and s.n1)
    return TypeSurvivalEstimate(
        alpha1=SurvivalEstimate.from_counts(n1, replicas, T_max, seed),
        alpha2=SurvivalEstimate.from_counts(n2, replicas, T_max, seed),
    )


def estimate_strong_survival(
    topo: Topology,
    lam: float,
    x: int,
    T_probe: float,
    T_max: float,
    replicas: int,
    seed: int,
    pool: Optional[ReplicaPool] = None,
) -> SurvivalEstimate:
    """
    Fraction of replicas of zeta^x that occupy x at some time in [T_probe, T_max].

    This late-window return stands in for "x occupied infinitely often".

    Raises:
        ValueError: T_probe >= T_max
    """
    if T_probe >= T_max:
        raise ValueError(f"T_probe={T_probe} must be below T_max={T_max}")
    check_horizon(T_max)
    check_replicas(replicas)

    x = topo.check_site(x)
    task = SingleTypeTask(
        topo, float(lam), (x,), float(T_max), int(seed), watch_site=x, watch_from=float(T_probe)
    )
    histories = single_type_histories(task, replicas, pool)
    hits = sum(1 for h in histories if h.watch_hit)
    return SurvivalEstimate.from_counts(hits, replicas, T_max, seed)


@dataclass(frozen=True)
class HittingTask:
    topo: Topology
    lam: float
    x: int
    target: int
    t_max: float
    seed: int


def run_hitting_replica(index: int, task: HittingTask) -> bool:
    log = single_type_log(task.topo, task.lam, task.t_max, replica_seed(task.seed, index))
    first, _ = hit_times(support_trajectory(task.topo, log, task.x, task.t_max), {task.target})
    return first is not None


def estimate_hitting(
    topo: Topology,
    lam: float,
    x: int,
    target: int,
    T_max: float,
    replicas: int,
    seed: int,
    pool: Optional[ReplicaPool] = None,
) -> SurvivalEstimate:
    """
    P(target in zeta_s^x for some s <= T_max), read off the reverse support dual.

    The support dual from (x, T_max) has the law of the forward process from x,
    so the hitting event is checked on the dual directly.
    """
    check_horizon(T_max)
    check_replicas(replicas)
    task = HittingTask(
        topo, float(lam), topo.check_site(x), topo.check_site(target), float(T_max), int(seed)
    )
    hits = sum(resolve_pool(pool).map(run_hitting_replica, replicas, task))
    return SurvivalEstimate.from_counts(int(hits), replicas, T_max, seed)
