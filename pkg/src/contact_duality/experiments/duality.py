"""Dual and oracle experiments: duality-check, blocked-prefix, dual-law, escape-bound,
oracle-compare."""

import logging
from typing import List

from ..estimators import (
    blocked_prefix_stats,
    dual_law,
    duality_batch,
    experiment_escape_bound,
    oracle_compare,
)
from ..estimators.base import ExperimentResult
from ..topology import Topology
from .handler_utils import ExperimentContext, HandlerOutput, experiment_handler

logger = logging.getLogger(__name__)

# base time of the dual experiments when experiment.t_eval is unset
DEFAULT_DUAL_TIME = 2.0


def branch_targets(topo: Topology) -> List[int]:
    """Lowest-numbered site at every depth 1..K of a tree ball."""
    first = {}
    for x, dep in enumerate(topo.depths):
        if dep > 0 and dep not in first:
            first[dep] = x
    return [first[k] for k in sorted(first)]


def duality_check(ctx: ExperimentContext) -> ExperimentResult:
    p = ctx.params
    return duality_batch(
        p.instances or ctx.replicas,
        ctx.seed,
        lambda_max=p.lambda_max,
        horizon=p.t_eval or DEFAULT_DUAL_TIME,
        compact=p.compact,
        max_entries=p.max_entries,
        pool=ctx.pool,
    )


def blocked_prefix(ctx: ExperimentContext) -> ExperimentResult:
    return blocked_prefix_stats(
        ctx.topo, ctx.lambda1, ctx.lambda2, ctx.site,
        ctx.grid((1.0, 2.0, 4.0)),
        ctx.replicas, ctx.seed,
        max_entries=ctx.params.max_entries,
        pool=ctx.pool,
    )


def law(ctx: ExperimentContext) -> ExperimentResult:
    return dual_law(
        ctx.topo, ctx.lambda1, ctx.lambda2, ctx.site,
        ctx.params.t_eval or DEFAULT_DUAL_TIME,
        ctx.replicas, ctx.seed, pool=ctx.pool,
    )


def escape(ctx: ExperimentContext) -> ExperimentResult:
    return experiment_escape_bound(
        ctx.topo, ctx.rate, ctx.site,
        ctx.params.sites or branch_targets(ctx.topo),
        ctx.t_max, ctx.replicas, ctx.seed,
        strong_top=ctx.params.strong_bracket_top,
        pool=ctx.pool,
    )


def oracle(ctx: ExperimentContext) -> ExperimentResult:
    return oracle_compare(
        ctx.topo, ctx.lambda1, ctx.lambda2, ctx.initial(),
        ctx.grid((0.5, 1.0, 2.0)),
        ctx.replicas, ctx.seed, pool=ctx.pool,
    )


_HANDLERS = {
    "duality-check": duality_check,
    "blocked-prefix": blocked_prefix,
    "dual-law": law,
    "escape-bound": escape,
    "oracle-compare": oracle,
}


def get_experiments() -> List[str]:
    return list(_HANDLERS)


@experiment_handler
def handle_experiment(name: str, context: ExperimentContext) -> HandlerOutput:
    return _HANDLERS[name](context)
