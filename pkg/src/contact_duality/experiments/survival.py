"""Single-type survival experiments: survival, type-survival, strong-survival, critical,
upper-invariant, cluster-stats."""

import logging
from typing import Any, Dict, List

from ..core.stats import combined_se
from ..estimators import (
    CriticalKind,
    ExperimentResult,
    cluster_stats,
    estimate_critical,
    estimate_strong_survival,
    estimate_survival,
    estimate_type_survival,
    sample_upper_invariant,
)
from ..estimators.theorems import SE_MULTIPLIER
from ..topology import diameter
from .handler_utils import ExperimentContext, HandlerOutput, experiment_handler, flagged_check

logger = logging.getLogger(__name__)

ESTIMATE_COLUMNS = ["estimate", "se", "ci_low", "ci_high", "successes", "replicas"]


def _estimate_cells(est) -> List[Any]:
    return [est.estimate, est.se, est.ci_low, est.ci_high, est.successes, est.replicas]


def survival(ctx: ExperimentContext) -> ExperimentResult:
    seeds = ctx.params.sites or [ctx.site]
    est = estimate_survival(
        ctx.topo, ctx.rate, seeds, ctx.t_max, ctx.replicas, ctx.seed,
        rho_time=ctx.params.rho_time, pool=ctx.pool,
    )
    return ExperimentResult(
        experiment="survival",
        columns=["lambda", "seed_sites", "T_max"] + ESTIMATE_COLUMNS + ["rho"],
        rows=[[ctx.rate, " ".join(map(str, seeds)), ctx.t_max] + _estimate_cells(est)
              + [est.rho_diagnostic]],
        summary={"estimate": est.to_dict()},
    )


def type_survival(ctx: ExperimentContext) -> ExperimentResult:
    est = estimate_type_survival(
        ctx.topo, ctx.lambda1, ctx.lambda2, ctx.initial(), ctx.t_max, ctx.replicas, ctx.seed,
        pool=ctx.pool,
    )
    result = ExperimentResult(
        experiment="type-survival",
        columns=["type"] + ESTIMATE_COLUMNS,
        rows=[[1] + _estimate_cells(est.alpha1), [2] + _estimate_cells(est.alpha2)],
        summary=est.to_dict(),
    )
    result.add_verdict("disjoint-events", est.consistent())
    return result


def strong_survival(ctx: ExperimentContext) -> ExperimentResult:
    x = ctx.site
    t_probe = ctx.params.t_probe if ctx.params.t_probe is not None else ctx.t_max / 2
    strong = estimate_strong_survival(
        ctx.topo, ctx.rate, x, t_probe, ctx.t_max, ctx.replicas, ctx.seed, pool=ctx.pool
    )
    weak = estimate_survival(ctx.topo, ctx.rate, {x}, ctx.t_max, ctx.replicas, ctx.seed,
                             pool=ctx.pool)
    result = ExperimentResult(
        experiment="strong-survival",
        columns=["proxy", "lambda", "T_probe", "T_max"] + ESTIMATE_COLUMNS,
        rows=[
            ["global", ctx.rate, None, ctx.t_max] + _estimate_cells(weak),
            ["late-return", ctx.rate, t_probe, ctx.t_max] + _estimate_cells(strong),
        ],
        summary={"global": weak.to_dict(), "late_return": strong.to_dict(), "site": x},
    )
    slack = SE_MULTIPLIER * combined_se(strong.se, weak.se)
    result.add_verdict(
        "strong-below-global",
        flagged_check(strong.estimate <= weak.estimate + slack,
                      f"late-return {strong.estimate:.4f} above global {weak.estimate:.4f}"),
    )
    return result


def critical(ctx: ExperimentContext) -> ExperimentResult:
    p = ctx.params
    kinds = [CriticalKind.WEAK, CriticalKind.STRONG] if p.critical_kind == "both" \
        else [CriticalKind(p.critical_kind)]
    rows: List[List[Any]] = []
    estimates: Dict[str, Any] = {}
    for kind in kinds:
        est = estimate_critical(
            ctx.topo, kind, p.bracket, threshold=p.threshold,
            bisection_steps=p.bisection_steps, x=ctx.site, T_probe=p.t_probe,
            T_max=ctx.t_max, replicas=ctx.replicas, seed=ctx.seed, pool=ctx.pool,
        )
        estimates[kind.value] = est
        for step, (lam, probe) in enumerate(est.probes):
            rows.append([kind.value, step, lam] + _estimate_cells(probe))

    result = ExperimentResult(
        experiment="critical",
        columns=["kind", "step", "lambda"] + ESTIMATE_COLUMNS,
        rows=rows,
        summary={k: est.to_dict() for k, est in estimates.items()},
    )
    if len(estimates) == 2:
        weak, strong = estimates["weak"], estimates["strong"]
        result.add_verdict(
            "weak-below-strong",
            flagged_check(
                weak.lambda_high <= strong.lambda_low,
                f"weak bracket [{weak.lambda_low:.4f}, {weak.lambda_high:.4f}] not below "
                f"strong bracket [{strong.lambda_low:.4f}, {strong.lambda_high:.4f}]",
            ),
        )
    return result


def upper_invariant(ctx: ExperimentContext) -> ExperimentResult:
    sites = ctx.params.sites or [ctx.site]
    t_relax = ctx.t_eval(1.0)
    table = sample_upper_invariant(
        ctx.topo, ctx.rate, t_relax, sites, ctx.replicas, ctx.seed, pool=ctx.pool
    )
    rows = [[label, pattern, p, table.se(pattern)] for label, pattern, p in table.to_rows()]

    # misses over nested prefixes of the site list
    misses = [table.miss_probability(sites[: k + 1]) for k in range(len(sites))]
    result = ExperimentResult(
        experiment="upper-invariant",
        columns=["sites", "pattern", "probability", "se"],
        rows=rows,
        summary={
            "t_relax": t_relax,
            "lambda": ctx.rate,
            "hit_probability": table.hit_probability(sites),
            "site_marginals": {str(s): table.site_marginal(s) for s in sites},
            "nested_miss": misses,
        },
    )
    result.add_verdict(
        "miss-nonincreasing",
        flagged_check(all(b <= a for a, b in zip(misses, misses[1:])),
                      f"miss probabilities not monotone: {misses}"),
    )
    return result


def clusters(ctx: ExperimentContext) -> ExperimentResult:
    sample = cluster_stats(ctx.topo, ctx.rate, ctx.site, ctx.t_max, ctx.replicas, ctx.seed,
                           pool=ctx.pool)
    radii = ctx.params.radius_grid or list(range(diameter(ctx.topo) + 1))
    eps = [sample.epsilon(M) for M in radii]
    lifetimes = [s.lifetime for s in sample.stats]
    result = ExperimentResult(
        experiment="cluster-stats",
        columns=["M", "epsilon", "se"],
        rows=[[M, e, sample.epsilon_se(M)] for M, e in zip(radii, eps)],
        summary={
            "site": ctx.site,
            "lambda": ctx.rate,
            "censored_fraction": sample.censored_fraction(),
            "mean_lifetime": sum(lifetimes) / len(lifetimes),
            "max_radius": max(s.radius for s in sample.stats),
        },
    )
    result.add_verdict(
        "epsilon-nonincreasing",
        flagged_check(all(b <= a for a, b in zip(eps, eps[1:])), f"epsilon_M not monotone: {eps}"),
    )
    return result


_HANDLERS = {
    "survival": survival,
    "type-survival": type_survival,
    "strong-survival": strong_survival,
    "critical": critical,
    "upper-invariant": upper_invariant,
    "cluster-stats": clusters,
}


def get_experiments() -> List[str]:
    return list(_HANDLERS)


@experiment_handler
def handle_experiment(name: str, context: ExperimentContext) -> HandlerOutput:
    return _HANDLERS[name](context)
