"""
Core utilities for the contact process toolkit.

Provides:
- Process-level settings and per-run configuration
- Counter-based random streams
- Interval estimates and the replica pool
"""

from .config import SimulationConfig, load_config, get_config, reset_config
from .rng import StreamFamily, derive_seed, replica_seed, stream, subrun_seed
from .pool import ReplicaPool
from .run_config import EXPERIMENT_NAMES, RunConfig, RunConfigError, load_run_config

__all__ = [
    "SimulationConfig",
    "load_config",
    "get_config",
    "reset_config",
    "StreamFamily",
    "stream",
    "derive_seed",
    "replica_seed",
    "subrun_seed",
    "ReplicaPool",
    "EXPERIMENT_NAMES",
    "RunConfig",
    "RunConfigError",
    "load_run_config",
]
