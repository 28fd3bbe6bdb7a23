"""
Experiment handlers.

Each handler module provides:
- Handlers: one function per experiment name
- get_experiments(): the names it serves
- handle_experiment(name, context): error-wrapped dispatch
"""

from typing import Callable, Dict, List

from . import duality, survival, theorems
from .handler_utils import ExperimentContext, HandlerOutput, experiment_handler

ExperimentHandler = Callable[[str, ExperimentContext], HandlerOutput]

# Registry populated from the handler modules below
_experiments: Dict[str, ExperimentHandler] = {}


def register_experiment(name: str, handler: ExperimentHandler) -> None:
    """Register an experiment handler."""
    _experiments[name] = handler


def get_experiment(name: str) -> ExperimentHandler:
    """Get handler by experiment name."""
    if name not in _experiments:
        raise KeyError(f"Unknown experiment: {name}. Available: {list(_experiments.keys())}")
    return _experiments[name]


def list_experiments() -> List[str]:
    """List registered experiment names."""
    return list(_experiments.keys())


for _module in (duality, survival, theorems):
    for _name in _module.get_experiments():
        register_experiment(_name, _module.handle_experiment)


__all__ = [
    "ExperimentContext",
    "ExperimentHandler",
    "HandlerOutput",
    "experiment_handler",
    "register_experiment",
    "get_experiment",
    "list_experiments",
]
