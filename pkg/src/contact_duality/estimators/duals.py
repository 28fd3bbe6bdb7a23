"""
Experiments on the reverse-time duals.

- duality_batch: exact pathwise duality and support/mark identities on random small instances
- blocked_prefix_stats: size of the 1-blocked priority prefix of the ancestor list
- dual_law: dual support sizes against forward single-type sizes (KS)
- escape_bound: escape probabilities on a tree ball against (1/sqrt d)^distance
"""

import logging
from dataclasses import dataclass
from typing import Any, List, Optional, Sequence, Tuple

import numpy as np

from ..core.config import get_config
from ..core.pool import ReplicaPool
from ..core.rng import StreamFamily, replica_seed, stream
from ..core.stats import binomial_se, ks_two_sample
from ..dual import (
    AncestorOverflowError,
    blocked_prefix,
    check_identities,
    duality_report,
    reachable_set,
    run_ancestors,
)
from ..forward import Configuration, evolve_single
from ..graphical import sample_events
from ..topology import Topology, distance, make_torus, make_tree_ball
from .base import ExperimentResult, check_horizon, check_replicas, fraction, resolve_pool
from .survival import estimate_hitting
from .theorems import SE_MULTIPLIER, escape_bound

logger = logging.getLogger(__name__)

# shapes drawn by the duality batch: (kind, d, extent); None extent = random torus side
INSTANCE_SHAPES: Tuple[Tuple[str, int, Optional[int]], ...] = (
    ("torus", 1, None),
    ("torus", 2, 3),
    ("tree-ball", 2, 1),
    ("tree-ball", 2, 2),
    ("tree-ball", 3, 1),
)

# smallest p-value the law-equality test accepts
KS_MIN_PVALUE = 1e-3


@dataclass(frozen=True)
class DualityInstance:
    """One random instance of the pathwise duality test."""
    topo: Topology
    lambda1: float
    lambda2: float
    xi0: Configuration
    x: int
    t: float
    log_seed: int


@dataclass(frozen=True)
class DualityBatchTask:
    seed: int
    lambda_max: float
    horizon: float
    compact: bool
    max_entries: Optional[int]


def random_instance(index: int, task: DualityBatchTask) -> DualityInstance:
    """Draw instance `index` from its own stream."""
    rng = stream(task.seed, StreamFamily.INSTANCE, index)
    kind, d, extent = INSTANCE_SHAPES[int(rng.integers(len(INSTANCE_SHAPES)))]
    if kind == "torus":
        topo = make_torus(d, extent if extent is not None else int(rng.integers(3, 13)))
    else:
        topo = make_tree_ball(d, int(extent))

    lambda2 = task.lambda_max * (1.0 - rng.random())
    lambda1 = lambda2 * (1.0 - rng.random())
    n = topo.site_count
    return DualityInstance(
        topo=topo,
        lambda1=float(lambda1),
        lambda2=float(lambda2),
        xi0=Configuration(rng.integers(0, 3, n)),
        x=int(rng.integers(n)),
        t=float(task.horizon * (1.0 - rng.random())),
        log_seed=int(rng.integers(2**63)),
    )


def run_duality_instance(index: int, task: DualityBatchTask) -> List[Any]:
    inst = random_instance(index, task)
    log = sample_events(inst.topo, inst.lambda1, inst.lambda2, inst.t, inst.log_seed)
    shape = f"{inst.topo.kind.value}(d={inst.topo.d},{inst.topo.extent})"
    head = [index, shape, inst.topo.site_count, inst.lambda1, inst.lambda2, inst.t, inst.x]
    try:
        report = duality_report(
            inst.topo, log, inst.xi0, inst.x, inst.t,
            compact=task.compact, max_entries=task.max_entries,
        )
    except AncestorOverflowError:
        return head + [None, None, None, None, None, True]

    support_ok, mark1_ok, mark2_ok = check_identities(inst.topo, log, report.dual)
    marks_ok = mark1_ok and (task.compact or mark2_ok)
    passed = report.passed and support_ok and marks_ok
    if not passed:
        logger.error(
            f"Instance {index} failed: duality={report.passed}, support={support_ok}, "
            f"marks={marks_ok}, log seed {inst.log_seed}"
        )
    return head + [len(report.dual.jump_times), report.value, passed, support_ok, marks_ok, False]


def duality_batch(
    instances: int,
    seed: int,
    lambda_max: float = 3.0,
    horizon: float = 2.0,
    compact: bool = True,
    max_entries: Optional[int] = None,
    pool: Optional[ReplicaPool] = None,
) -> ExperimentResult:
    """
    Pathwise duality on `instances` random small instances.

    Each instance draws a topology (torus d=1 with 3..12 sites, 3x3 torus,
    small tree balls), rates 0 < lambda1 <= lambda2 <= lambda_max, a uniform
    xi0, a base site and a base time in (0, horizon]. An instance passes when
    the duality equation holds at every dual jump and the support and mark
    identities hold against the reachability sweep. Lists that overflow
    max_entries are counted apart and do not fail the batch.
    """
    if instances < 1:
        raise ValueError(f"instances must be >= 1, got {instances}")
    if lambda_max <= 0:
        raise ValueError(f"lambda_max must be positive, got {lambda_max}")
    check_horizon(horizon)
    if max_entries is None:
        max_entries = get_config().MAX_ANCESTOR_ENTRIES

    task = DualityBatchTask(int(seed), float(lambda_max), float(horizon), compact, max_entries)
    rows = resolve_pool(pool).map(run_duality_instance, instances, task)

    overflows = sum(1 for r in rows if r[-1])
    failures = [r[0] for r in rows if not r[-1] and not r[9]]
    result = ExperimentResult(
        experiment="duality-check",
        columns=[
            "index", "topology", "sites", "lambda1", "lambda2", "t", "x",
            "jumps", "value", "passed", "support_ok", "marks_ok", "overflow",
        ],
        rows=rows,
        summary={
            "instances": instances,
            "checked": instances - overflows,
            "overflows": overflows,
            "failures": len(failures),
            "failed_indices": failures[:20],
            "compact": compact,
            "lambda_max": lambda_max,
            "horizon": horizon,
        },
    )
    result.add_verdict(
        "pathwise-duality",
        (not failures, None if not failures else f"{len(failures)} instances failed"),
    )
    logger.info(f"Duality batch: {instances - overflows} checked, {len(failures)} failed, "
                f"{overflows} overflowed")
    return result


@dataclass(frozen=True)
class BlockedPrefixTask:
    topo: Topology
    lambda1: float
    lambda2: float
    x: int
    times: Tuple[float, ...]
    seed: int
    max_entries: Optional[int]


def run_blocked_prefix_replica(
    index: int,
    task: BlockedPrefixTask,
) -> List[Optional[Tuple[int, bool]]]:
    """Per time: (|A_t^x|, list nonempty), or None on overflow."""
    log = sample_events(
        task.topo, task.lambda1, task.lambda2, task.times[-1],
        replica_seed(task.seed, index), allow_zero_rates=True,
    )
    out: List[Optional[Tuple[int, bool]]] = []
    for t in task.times:
        try:
            dual = run_ancestors(task.topo, log, task.x, t, max_entries=task.max_entries)
        except AncestorOverflowError:
            out.append(None)
            continue
        final = dual.states[-1]
        out.append((len(blocked_prefix(final)), not final.is_empty()))
    return out


def blocked_prefix_stats(
    topo: Topology,
    lambda1: float,
    lambda2: float,
    x: int,
    t_grid: Sequence[float],
    replicas: int,
    seed: int,
    max_entries: Optional[int] = None,
    pool: Optional[ReplicaPool] = None,
) -> ExperimentResult:
    """
    Distribution of |A_t^x| over independent logs, for each t in t_grid.

    Uses full ancestor lists. Rows give P(|A_t^x| = k); the summary also holds
    the fraction of nonempty lists whose primary ancestor is 1-blocked.
    """
    if lambda1 > lambda2:
        raise ValueError(f"lambda1={lambda1} > lambda2={lambda2}")
    check_replicas(replicas, minimum=1)
    times = tuple(sorted({float(t) for t in t_grid}))
    if not times or times[0] <= 0:
        raise ValueError(f"t_grid must be nonempty and positive, got {list(t_grid)}")
    if max_entries is None:
        max_entries = get_config().MAX_ANCESTOR_ENTRIES

    task = BlockedPrefixTask(
        topo, float(lambda1), float(lambda2), topo.check_site(x), times, int(seed), max_entries
    )
    runs = resolve_pool(pool).map(run_blocked_prefix_replica, replicas, task)

    rows: List[List[Any]] = []
    per_time = []
    for j, t in enumerate(times):
        ok = [r[j] for r in runs if r[j] is not None]
        sizes = np.asarray([size for size, _ in ok], dtype=np.int64)
        counts = np.bincount(sizes) if sizes.size else np.zeros(1, dtype=np.int64)
        for k, c in enumerate(counts):
            if c:
                rows.append([t, k, int(c), c / len(ok)])
        nonempty = [size for size, live in ok if live]
        per_time.append({
            "t": t,
            "overflows": replicas - len(ok),
            "mean_size": float(sizes.mean()) if sizes.size else 0.0,
            "nonempty_fraction": fraction([live for _, live in ok]),
            "primary_blocked_fraction": fraction([size > 0 for size in nonempty]),
        })

    result = ExperimentResult(
        experiment="blocked-prefix",
        columns=["t", "size", "count", "fraction"],
        rows=rows,
        summary={"x": x, "per_time": per_time},
    )
    for entry in per_time:
        if entry["overflows"]:
            logger.warning(f"blocked-prefix: {entry['overflows']} overflows at t={entry['t']}")
    return result


@dataclass(frozen=True)
class DualLawTask:
    topo: Topology
    lambda1: float
    lambda2: float
    x: int
    t: float
    seed: int


def run_dual_law_replica(index: int, task: DualLawTask) -> Tuple[int, int, int, int]:
    """(|D|, |D^1|) on one log and (|zeta^2|, |zeta^1|) on an independent one."""
    dual_log = sample_events(
        task.topo, task.lambda1, task.lambda2, task.t,
        replica_seed(task.seed, 2 * index), allow_zero_rates=True,
    )
    fwd_log = sample_events(
        task.topo, task.lambda1, task.lambda2, task.t,
        replica_seed(task.seed, 2 * index + 1), allow_zero_rates=True,
    )
    both = reachable_set(task.topo, dual_log, task.x, task.t, task.t, kind="both")
    ones = reachable_set(task.topo, dual_log, task.x, task.t, task.t, kind=1)
    fwd2 = evolve_single(task.topo, fwd_log, {task.x}, task.t, kind=2)
    fwd1 = evolve_single(task.topo, fwd_log, {task.x}, task.t, kind=1)
    return len(both), len(ones), len(fwd2), len(fwd1)


def dual_law(
    topo: Topology,
    lambda1: float,
    lambda2: float,
    x: int,
    t: float,
    replicas: int,
    seed: int,
    pool: Optional[ReplicaPool] = None,
) -> ExperimentResult:
    """
    Two-sample KS of |D_t^{(x,t)}| against |zeta_t^{2,x}| and of |D_t^{1,(x,t)}|
    against |zeta_t^{1,x}|.

    The samples are integer valued, which makes the test conservative.
    """
    if lambda1 > lambda2:
        raise ValueError(f"lambda1={lambda1} > lambda2={lambda2}")
    check_horizon(t)
    check_replicas(replicas)

    task = DualLawTask(topo, float(lambda1), float(lambda2), topo.check_site(x), float(t), int(seed))
    samples = np.asarray(resolve_pool(pool).map(run_dual_law_replica, replicas, task))

    result = ExperimentResult(
        experiment="dual-law",
        columns=["kind", "dual_mean", "forward_mean", "ks_statistic", "p_value"],
        rows=[],
        summary={"x": x, "t": t, "min_p_value": KS_MIN_PVALUE},
    )
    for kind, dual_col, fwd_col in ((2, 0, 2), (1, 1, 3)):
        stat, p = ks_two_sample(samples[:, dual_col], samples[:, fwd_col])
        result.rows.append([
            kind, float(samples[:, dual_col].mean()), float(samples[:, fwd_col].mean()), stat, p,
        ])
        result.add_verdict(
            f"type{kind}:law",
            (p >= KS_MIN_PVALUE, None if p >= KS_MIN_PVALUE else f"KS p-value {p:.2e}"),
        )
    return result


def experiment_escape_bound(
    topo: Topology,
    lam: float,
    x: int,
    targets: Sequence[int],
    T_max: float,
    replicas: int,
    seed: int,
    strong_top: Optional[float] = None,
    pool: Optional[ReplicaPool] = None,
) -> ExperimentResult:
    """
    P(target reached from x by time T_max) against (1/sqrt d)^{|x - target|}.

    The bound is asserted only when lam does not exceed strong_top (when given).
    """
    x = topo.check_site(x)
    asserted = strong_top is None or lam <= strong_top
    rows = []
    flagged = 0
    for target in targets:
        est = estimate_hitting(topo, lam, x, target, T_max, replicas, seed, pool=pool)
        bound = escape_bound(topo, x, target)
        se = binomial_se(est.estimate, replicas)
        flag = asserted and est.estimate > bound + SE_MULTIPLIER * se
        flagged += flag
        rows.append([
            target, topo.label(target), distance(topo, x, target),
            est.estimate, se, est.ci_low, est.ci_high, bound, flag,
        ])

    result = ExperimentResult(
        experiment="escape-bound",
        columns=["target", "label", "distance", "estimate", "se", "ci_low", "ci_high",
                 "bound", "flagged"],
        rows=rows,
        summary={"x": x, "lambda": lam, "T_max": T_max, "bound_asserted": asserted},
    )
    result.add_verdict(
        "escape-bound", (flagged == 0, None if not flagged else f"{flagged} targets above bound")
    )
    return result
