"""
Batch experiments for the long-time behavior of the two-type process.

Each experiment returns an ExperimentResult whose rows go to CSV and whose
verdicts decide the exit status. Auxiliary estimates (alpha, type survival,
single-type laws) use seeds derived with subrun_seed so they never share
replica streams with the main two-type run.
"""

import logging
import math
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

from ..core.config import get_config
from ..core.pool import ReplicaPool
from ..core.rng import subrun_seed
from ..core.stats import binomial_se, combined_se, product_se, wilson_interval
from ..forward import Configuration
from ..topology import Topology, TopologyKind, distance, sector
from .base import ExperimentResult, SurvivalEstimate, check_replicas, fraction
from .initial import make_sector_configuration
from .invariant import sample_upper_invariant
from .survival import (
    SingleTypeTask,
    TwoTypeTask,
    estimate_survival,
    single_type_histories,
    two_type_snapshots,
)

logger = logging.getLogger(__name__)

# multiplier on standard errors before a deviation is flagged
SE_MULTIPLIER = 3.0


def escape_bound(topo: Topology, x: int, y: int) -> float:
    """(1/sqrt(d))^{|x - y|}."""
    return (1.0 / math.sqrt(topo.d)) ** distance(topo, x, y)


def _warn_out_of_regime(
    name: str,
    lambda1: float,
    lambda2: float,
    weak_bracket: Optional[Tuple[float, float]],
) -> None:
    if weak_bracket is None:
        return
    lo, hi = weak_bracket
    for lam in (lambda1, lambda2):
        if not lo <= lam <= hi:
            logger.warning(f"{name}: rate {lam} outside the configured weak bracket [{lo}, {hi}]")


def _warn_below_strong(
    name: str,
    rates: Sequence[Tuple[str, float]],
    strong_bracket: Optional[Tuple[float, float]],
) -> None:
    if strong_bracket is None:
        return
    lo, hi = strong_bracket
    for label, lam in rates:
        if lam <= hi:
            logger.warning(f"{name}: {label}={lam} not above the strong bracket [{lo}, {hi}]")


def _sorted_times(times: Iterable[float]) -> Tuple[float, ...]:
    out = tuple(sorted({float(t) for t in times}))
    if not out or out[0] <= 0:
        raise ValueError(f"Time grid must be nonempty and positive, got {out}")
    return out


def experiment_theorem1(
    topo: Topology,
    lambda1: float,
    lambda2: float,
    y: int,
    x_list: Sequence[int],
    t_grid: Sequence[float],
    replicas: int,
    seed: int,
    elsewhere: int = 2,
    T_max: Optional[float] = None,
    weak_bracket: Optional[Tuple[float, float]] = None,
    strong_top: Optional[float] = None,
    pool: Optional[ReplicaPool] = None,
) -> ExperimentResult:
    """
    Type 1 seeded on a sector keeps a positive share of deep sites.

    Starts from 1 on S(y) and `elsewhere` outside. For each x and t, compares
    P(xi_t(x) = 1) with alpha(lambda1) - (1/sqrt d)^{|x - root|} and flags a
    row below the bound by more than 3 combined standard errors. The same
    rows check P(xi_t(x) = 2) <= (1/sqrt d)^{|x - y|} + 3 SE, asserted only
    when lambda2 does not exceed strong_top (when strong_top is given).

    Raises:
        ValueError: Non-tree topology, x outside S(y), bad grids
    """
    if topo.kind is not TopologyKind.TREE_BALL:
        raise ValueError("theorem1 requires a tree-ball topology")
    check_replicas(replicas)
    T_max = get_config().T_MAX if T_max is None else T_max
    _warn_out_of_regime("theorem1", lambda1, lambda2, weak_bracket)

    region = sector(topo, y)
    x_list = [topo.check_site(x) for x in x_list]
    outside = [x for x in x_list if x not in region]
    if outside:
        raise ValueError(f"Sites {outside} are not in the sector of {y}")
    times = _sorted_times(t_grid)

    eta = make_sector_configuration(topo, [(y, 1)], default=elsewhere)
    alpha = estimate_survival(
        topo, lambda1, {topo.root}, T_max, replicas, subrun_seed(seed, 0), pool=pool
    )
    task = TwoTypeTask(topo, lambda1, lambda2, eta, times, seed, sites=tuple(x_list))
    runs = two_type_snapshots(task, replicas, pool)

    assert_upper = strong_top is None or lambda2 <= strong_top
    if not assert_upper:
        logger.warning(f"theorem1: lambda2={lambda2} above strong_top={strong_top}; "
                       "type-2 bound reported but not asserted")

    rows: List[List[Any]] = []
    lower_flags = upper_flags = 0
    for k, x in enumerate(x_list):
        to_root = distance(topo, x, topo.root)
        to_y = distance(topo, x, y)
        bound1 = alpha.estimate - escape_bound(topo, x, topo.root)
        bound2 = escape_bound(topo, x, y)
        for j, t in enumerate(times):
            states = [run[j].states[k] for run in runs]
            p1 = fraction([s == 1 for s in states])
            p2 = fraction([s == 2 for s in states])
            se1, se2 = binomial_se(p1, replicas), binomial_se(p2, replicas)
            cse = combined_se(se1, alpha.se)
            flag1 = bound1 > 0 and p1 < bound1 - SE_MULTIPLIER * cse
            flag2 = assert_upper and p2 > bound2 + SE_MULTIPLIER * se2
            lower_flags += flag1
            upper_flags += flag2
            rows.append([
                x, topo.label(x), to_root, to_y, t,
                p1, se1, alpha.estimate, alpha.se, bound1, cse, flag1,
                p2, se2, bound2, flag2,
            ])

    result = ExperimentResult(
        experiment="theorem1",
        columns=[
            "x", "label", "dist_root", "dist_y", "t",
            "p1", "se1", "alpha_hat", "alpha_se", "bound", "combined_se", "flag_lower",
            "p2", "se2", "bound2", "flag_upper",
        ],
        rows=rows,
        summary={
            "alpha": alpha.to_dict(),
            "sector_root": y,
            "elsewhere": elsewhere,
            "type2_bound_asserted": assert_upper,
            "lower_violations": lower_flags,
            "upper_violations": upper_flags,
        },
    )
    result.add_verdict(
        "lower-bound",
        (lower_flags == 0, None if lower_flags == 0 else f"{lower_flags} rows below bound"),
    )
    result.add_verdict(
        "type2-bound",
        (upper_flags == 0, None if upper_flags == 0 else f"{upper_flags} rows above bound"),
    )
    return result


def _nonincreasing(
    values: Sequence[float],
    ses: Sequence[float],
) -> Tuple[bool, Optional[str]]:
    for k in range(1, len(values)):
        slack = SE_MULTIPLIER * combined_se(ses[k - 1], ses[k])
        if values[k] > values[k - 1] + slack:
            return False, f"increase {values[k - 1]:.4f} -> {values[k]:.4f} at step {k}"
    return True, None


def _below(value: float, epsilon: float) -> Tuple[bool, Optional[str]]:
    if value < epsilon:
        return True, None
    return False, f"terminal value {value:.4f} not below {epsilon}"


def experiment_theorem2(
    topo: Topology,
    lambda1: float,
    lambda2: float,
    eta: Configuration,
    x: int,
    t_grid: Sequence[float],
    replicas: int,
    seed: int,
    size_grid: Sequence[int] = (5,),
    epsilon: Optional[float] = None,
    strong_bracket: Optional[Tuple[float, float]] = None,
    pool: Optional[ReplicaPool] = None,
) -> ExperimentResult:
    """
    A 1 at x alongside surviving 2s becomes rare.

    Series one-at-x-with-twos: P(xi_t(x) = 1 and |twos| >= 1) over t_grid.
    Companion series twos-between-1-and-L: P(1 <= |twos| <= L) for each L.
    Each series must be nonincreasing within 3 combined SE and end below
    epsilon (default DECAY_EPSILON).
    Logs a warning when lambda2 is not above strong_bracket.

    Raises:
        ValueError: lambda2 <= lambda1
    """
    if lambda2 <= lambda1:
        raise ValueError(f"theorem2 needs lambda2 > lambda1, got ({lambda1}, {lambda2})")
    check_replicas(replicas)
    epsilon = get_config().DECAY_EPSILON if epsilon is None else epsilon
    _warn_below_strong("theorem2", [("lambda2", lambda2)], strong_bracket)
    x = topo.check_site(x)
    times = _sorted_times(t_grid)
    if not eta.twos():
        logger.info("theorem2: eta has no 2s; every series is identically 0")

    task = TwoTypeTask(topo, lambda1, lambda2, eta, times, seed, sites=(x,))
    runs = two_type_snapshots(task, replicas, pool)

    series: Dict[str, List[Tuple[Optional[int], float]]] = {}
    series["one-at-x-with-twos"] = [
        (None, fraction([r[j].states[0] == 1 and r[j].n2 >= 1 for r in runs]))
        for j in range(len(times))
    ]
    for L in size_grid:
        series[f"twos-between-1-and-{L}"] = [
            (int(L), fraction([1 <= r[j].n2 <= L for r in runs])) for j in range(len(times))
        ]

    result = ExperimentResult(
        experiment="theorem2",
        columns=["series", "L", "t", "estimate", "se", "ci_low", "ci_high"],
        rows=[],
        summary={"x": x, "epsilon": epsilon, "size_grid": list(size_grid)},
    )
    for name, points in series.items():
        values = [p for _, p in points]
        ses = [binomial_se(p, replicas) for p in values]
        for (L, p), se, t in zip(points, ses, times):
            low, high = wilson_interval(round(p * replicas), replicas)
            result.rows.append([name, L, t, p, se, low, high])
        result.add_verdict(f"{name}:nonincreasing", _nonincreasing(values, ses))
        result.add_verdict(f"{name}:terminal", _below(values[-1], epsilon))
        result.summary[name] = values
    return result


def _mixture_check(
    deviation: float,
    se: float,
    allowance: float,
) -> Tuple[bool, Optional[str]]:
    allowed = SE_MULTIPLIER * se + allowance
    if deviation <= allowed:
        return True, None
    return False, f"deviation {deviation:.4f} exceeds {allowed:.4f}"


def experiment_theorem3(
    topo: Topology,
    lambda1: float,
    lambda2: float,
    eta: Configuration,
    A: Sequence[int],
    t_eval: float,
    replicas: int,
    seed: int,
    T_max: Optional[float] = None,
    allowance: Optional[float] = None,
    late_grid: Optional[Sequence[float]] = None,
    strong_bracket: Optional[Tuple[float, float]] = None,
    pool: Optional[ReplicaPool] = None,
) -> ExperimentResult:
    """
    Each type ends up distributed as its own upper invariant measure.

    Compares P(type i meets A at t_eval) with alpha_eta^i * alpha_A(lambda_i),
    allowing 3 combined SE plus the truncation allowance. Also reports:
    the late-extinction diagnostic P(2s alive at u, gone by T_max) over
    late_grid, and alpha_A(lambda_i) read from the upper invariant snapshot.
    Logs a warning for each rate not above strong_bracket.

    Raises:
        ValueError: |A| > 4, lambda1 > lambda2
    """
    config = get_config()
    T_max = config.T_MAX if T_max is None else T_max
    allowance = config.TRUNCATION_ALLOWANCE if allowance is None else allowance
    A = tuple(sorted({topo.check_site(a) for a in A}))
    if not 1 <= len(A) <= 4:
        raise ValueError(f"A must hold 1 to 4 sites, got {len(A)}")
    if lambda1 > lambda2:
        raise ValueError(f"lambda1={lambda1} > lambda2={lambda2}")
    _warn_below_strong("theorem3", [("lambda1", lambda1), ("lambda2", lambda2)], strong_bracket)
    check_replicas(replicas)
    late = sorted({float(u) for u in (late_grid or (T_max / 4, T_max / 2))} - {float(T_max)})
    if any(u <= 0 or u > T_max for u in late):
        raise ValueError(f"late_grid must lie in (0, T_max], got {late}")

    main = two_type_snapshots(
        TwoTypeTask(topo, lambda1, lambda2, eta, (float(t_eval),), seed, target=A),
        replicas,
        pool,
    )
    long_seed = subrun_seed(seed, 0)
    long_runs = two_type_snapshots(
        TwoTypeTask(topo, lambda1, lambda2, eta, tuple(late) + (float(T_max),), long_seed),
        replicas,
        pool,
    )
    finals = [r[-1] for r in long_runs]
    alpha_eta = {
        1: SurvivalEstimate.from_counts(
            sum(1 for s in finals if not s.n2 and s.n1), replicas, T_max, long_seed
        ),
        2: SurvivalEstimate.from_counts(
            sum(1 for s in finals if s.n2), replicas, T_max, long_seed
        ),
    }

    rows = []
    result = ExperimentResult(
        experiment="theorem3",
        columns=[
            "type", "p_hit", "p_se", "alpha_eta", "alpha_eta_se", "alpha_A", "alpha_A_se",
            "product", "product_se", "deviation", "allowed", "upper_invariant_hit",
            "upper_invariant_se",
        ],
        rows=rows,
        summary={"A": list(A), "t_eval": t_eval, "T_max": T_max, "allowance": allowance},
    )
    for i, lam in ((1, lambda1), (2, lambda2)):
        p = fraction([(r[0].hit1 if i == 1 else r[0].hit2) for r in main])
        p_se = binomial_se(p, replicas)
        alpha_A = estimate_survival(topo, lam, A, T_max, replicas, subrun_seed(seed, i), pool=pool)
        a = alpha_eta[i]
        product = a.estimate * alpha_A.estimate
        prod_se = product_se(a.estimate, a.se, alpha_A.estimate, alpha_A.se)
        cse = combined_se(p_se, prod_se)
        deviation = abs(p - product)

        upper = sample_upper_invariant(
            topo, lam, t_eval, A, replicas, subrun_seed(seed, 10 + i), pool=pool
        )
        u_hit = upper.hit_probability(A)
        u_se = binomial_se(u_hit, replicas)

        rows.append([
            i, p, p_se, a.estimate, a.se, alpha_A.estimate, alpha_A.se, product, prod_se,
            deviation, SE_MULTIPLIER * cse + allowance, u_hit, u_se,
        ])
        result.add_verdict(f"type{i}:mixture", _mixture_check(deviation, cse, allowance))
        result.add_verdict(
            f"type{i}:upper-invariant",
            _mixture_check(abs(u_hit - alpha_A.estimate), combined_se(u_se, alpha_A.se), allowance),
        )

    result.summary["late_extinction"] = [
        {
            "u": u,
            "estimate": fraction([r[k].n2 > 0 and r[-1].n2 == 0 for r in long_runs]),
        }
        for k, u in enumerate(late)
    ]
    result.summary["alpha_eta"] = {str(i): est.to_dict() for i, est in alpha_eta.items()}
    return result


def experiment_theorem4(
    topo: Topology,
    lambda1: float,
    lambda2: float,
    eta: Configuration,
    A: Sequence[int],
    t_eval: float,
    replicas: int,
    seed: int,
    T_max: Optional[float] = None,
    allowance: Optional[float] = None,
    weak_bracket: Optional[Tuple[float, float]] = None,
    strong_bracket: Optional[Tuple[float, float]] = None,
    pool: Optional[ReplicaPool] = None,
) -> ExperimentResult:
    """
    With type 1 weakly surviving, the 1s left after the 2s die out follow
    the single-type law.

    Compares P(1s meet A and no 2s at t_eval) with (1 - alpha_eta^2) * mu(A),
    where mu(A) is P(zeta^{1s of eta} meets A at t_eval) at rate lambda1.
    Logs a warning when lambda1 is outside weak_bracket or lambda2 is not above
    strong_bracket.

    Raises:
        ValueError: Non-tree topology, |A| not in 1..4, lambda1 > lambda2
    """
    if topo.kind is not TopologyKind.TREE_BALL:
        raise ValueError("theorem4 requires a tree-ball topology")
    if lambda1 > lambda2:
        raise ValueError(f"lambda1={lambda1} > lambda2={lambda2}")
    config = get_config()
    T_max = config.T_MAX if T_max is None else T_max
    allowance = config.TRUNCATION_ALLOWANCE if allowance is None else allowance
    A = tuple(sorted({topo.check_site(a) for a in A}))
    if not 1 <= len(A) <= 4:
        raise ValueError(f"A must hold 1 to 4 sites, got {len(A)}")
    check_replicas(replicas)
    if weak_bracket is not None and not weak_bracket[0] <= lambda1 <= weak_bracket[1]:
        logger.warning(f"theorem4: lambda1={lambda1} outside the weak bracket {weak_bracket}")
    _warn_below_strong("theorem4", [("lambda2", lambda2)], strong_bracket)

    main = two_type_snapshots(
        TwoTypeTask(topo, lambda1, lambda2, eta, (float(t_eval),), seed, target=A),
        replicas,
        pool,
    )
    p = fraction([r[0].hit1 and r[0].n2 == 0 for r in main])
    p_se = binomial_se(p, replicas)

    alpha2_seed = subrun_seed(seed, 0)
    finals = two_type_snapshots(
        TwoTypeTask(topo, lambda1, lambda2, eta, (float(T_max),), alpha2_seed),
        replicas,
        pool,
    )
    alpha2 = SurvivalEstimate.from_counts(
        sum(1 for r in finals if r[-1].n2), replicas, T_max, alpha2_seed
    )

    ones = tuple(sorted(eta.ones()))
    single = single_type_histories(
        SingleTypeTask(topo, lambda1, ones, float(t_eval), subrun_seed(seed, 1)), replicas, pool
    )
    mu = fraction([bool(h.final & set(A)) for h in single])
    mu_se = binomial_se(mu, replicas)

    expected = (1.0 - alpha2.estimate) * mu
    exp_se = product_se(1.0 - alpha2.estimate, alpha2.se, mu, mu_se)
    cse = combined_se(p_se, exp_se)
    deviation = abs(p - expected)

    result = ExperimentResult(
        experiment="theorem4",
        columns=[
            "p_ones_hit_no_twos", "p_se", "alpha2", "alpha2_se", "mu", "mu_se",
            "expected", "expected_se", "deviation", "allowed",
        ],
        rows=[[
            p, p_se, alpha2.estimate, alpha2.se, mu, mu_se, expected, exp_se, deviation,
            SE_MULTIPLIER * cse + allowance,
        ]],
        summary={"A": list(A), "t_eval": t_eval, "T_max": T_max, "allowance": allowance,
                 "alpha2": alpha2.to_dict()},
    )
    result.add_verdict("mixture", _mixture_check(deviation, cse, allowance))
    return result

