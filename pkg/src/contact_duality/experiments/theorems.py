"""Two-type long-time experiments: theorem1 through theorem4."""

import logging
from typing import List, Optional

from ..estimators import (
    experiment_theorem1,
    experiment_theorem2,
    experiment_theorem3,
    experiment_theorem4,
)
from ..core.run_config import ExperimentParams
from ..estimators.base import ExperimentResult
from ..topology import Topology, depth, sector
from .handler_utils import ExperimentContext, HandlerOutput, experiment_handler

logger = logging.getLogger(__name__)

# deepest sites of the sector used when experiment.sites is empty
DEFAULT_DEEP_SITES = 5


def deep_sites(topo: Topology, y: int, count: int = DEFAULT_DEEP_SITES) -> List[int]:
    """The first `count` sites of S(y) at the outer radius of the ball."""
    leaves = [x for x in sorted(sector(topo, y)) if depth(topo, x) == topo.extent]
    return leaves[:count]


def strong_top(params: ExperimentParams) -> Optional[float]:
    """experiment.strong_bracket_top, else the top of experiment.strong_bracket."""
    if params.strong_bracket_top is not None:
        return params.strong_bracket_top
    return params.strong_bracket[1] if params.strong_bracket is not None else None


def theorem1(ctx: ExperimentContext) -> ExperimentResult:
    p = ctx.params
    y = p.boundary_site
    return experiment_theorem1(
        ctx.topo, ctx.lambda1, ctx.lambda2, y,
        p.sites or deep_sites(ctx.topo, y),
        ctx.grid((10.0, 20.0, 40.0)),
        ctx.replicas, ctx.seed,
        elsewhere=p.elsewhere,
        T_max=ctx.t_max,
        weak_bracket=p.weak_bracket,
        strong_top=strong_top(p),
        pool=ctx.pool,
    )


def theorem2(ctx: ExperimentContext) -> ExperimentResult:
    return experiment_theorem2(
        ctx.topo, ctx.lambda1, ctx.lambda2, ctx.initial(), ctx.site,
        ctx.grid((5.0, 10.0, 20.0, 40.0)),
        ctx.replicas, ctx.seed,
        size_grid=ctx.params.size_grid,
        strong_bracket=ctx.params.strong_bracket,
        pool=ctx.pool,
    )


def theorem3(ctx: ExperimentContext) -> ExperimentResult:
    return experiment_theorem3(
        ctx.topo, ctx.lambda1, ctx.lambda2, ctx.initial(), ctx.params.target_set,
        ctx.t_eval(0.8), ctx.replicas, ctx.seed,
        T_max=ctx.t_max,
        late_grid=ctx.params.late_grid or None,
        strong_bracket=ctx.params.strong_bracket,
        pool=ctx.pool,
    )


def theorem4(ctx: ExperimentContext) -> ExperimentResult:
    return experiment_theorem4(
        ctx.topo, ctx.lambda1, ctx.lambda2, ctx.initial(), ctx.params.target_set,
        ctx.t_eval(0.8), ctx.replicas, ctx.seed,
        T_max=ctx.t_max,
        weak_bracket=ctx.params.weak_bracket,
        strong_bracket=ctx.params.strong_bracket,
        pool=ctx.pool,
    )


_HANDLERS = {
    "theorem1": theorem1,
    "theorem2": theorem2,
    "theorem3": theorem3,
    "theorem4": theorem4,
}


def get_experiments() -> List[str]:
    return list(_HANDLERS)


@experiment_handler
def handle_experiment(name: str, context: ExperimentContext) -> HandlerOutput:
    return _HANDLERS[name](context)
