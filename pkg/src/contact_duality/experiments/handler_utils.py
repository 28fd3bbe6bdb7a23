"""
Shared utilities for experiment handlers.

Provides the run context handed to every handler and the error handling
wrapper that turns a failed experiment into a structured payload.
"""

import logging
from dataclasses import dataclass
from functools import wraps
from typing import Any, Callable, Dict, List, Optional, Sequence, Union

from ..core.pool import ReplicaPool
from ..core.run_config import RunConfig
from ..estimators.base import ExperimentResult
from ..forward import Configuration
from ..topology import Topology

logger = logging.getLogger(__name__)

HandlerOutput = Union[ExperimentResult, Dict[str, Any]]


@dataclass
class ExperimentContext:
    """Everything a handler needs, resolved from the run config once."""
    config: RunConfig
    topo: Optional[Topology]
    pool: ReplicaPool
    seed: int
    replicas: int
    t_max: float

    @classmethod
    def from_config(cls, config: RunConfig) -> "ExperimentContext":
        return cls(
            config=config,
            topo=config.build_topology() if config.topology is not None else None,
            pool=ReplicaPool(config.workers),
            seed=config.run.seed,
            replicas=config.replicas,
            t_max=config.t_max,
        )

    @property
    def params(self):
        return self.config.experiment

    @property
    def lambda1(self) -> float:
        return self.config.rates.lambda1

    @property
    def lambda2(self) -> float:
        return self.config.rates.lambda2

    @property
    def rate(self) -> float:
        """Single-type rate selected by experiment.rate_kind."""
        return self.config.rates.rate(self.params.rate_kind)

    @property
    def site(self) -> int:
        return self.config.base_site(self.topo)

    def initial(self) -> Configuration:
        return self.config.initial.build(self.topo)

    def grid(self, default: Sequence[float]) -> List[float]:
        return list(self.params.t_grid) or list(default)

    def t_eval(self, fraction: float) -> float:
        """experiment.t_eval, else the given fraction of the horizon."""
        return self.params.t_eval if self.params.t_eval is not None else fraction * self.t_max


def experiment_handler(func: Callable) -> Callable:
    """
    Decorator for experiment handler functions.

    Standardizes error handling:
    - Catches exceptions and returns a formatted error payload
    - Logs errors for debugging

    Args:
        func: Function handling one or more experiments

    Returns:
        Wrapped function with error handling
    """
    @wraps(func)
    def wrapper(name: str, context: ExperimentContext) -> HandlerOutput:
        try:
            return func(name, context)
        except Exception as e:
            logger.error(f"Experiment {name} failed: {e}", exc_info=True)
            return {
                "error": str(e),
                "error_type": type(e).__name__,
                "experiment": name,
            }

    return wrapper


def flagged_check(ok: bool, message: str) -> tuple:
    """(passed, message) with the message dropped on success."""
    return ok, None if ok else message
