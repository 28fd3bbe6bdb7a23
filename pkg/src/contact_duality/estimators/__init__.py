"""
Monte Carlo estimators and batch experiments.

Each estimator runs independent replicas through a ReplicaPool and reduces
them in replica order; experiments wrap estimators into ExperimentResult
tables with pass/flag verdicts.
"""

from .base import (
    ExperimentResult,
    SurvivalEstimate,
    TypeSurvivalEstimate,
    Verdict,
)
from .clusters import ClusterSample, ClusterStats, cluster_stats
from .critical import CriticalEstimate, CriticalKind, estimate_critical
from .duals import blocked_prefix_stats, dual_law, duality_batch, experiment_escape_bound
from .exact import oracle_compare
from .initial import make_sector_configuration
from .invariant import OccupancyTable, sample_upper_invariant
from .survival import (
    estimate_hitting,
    estimate_rho,
    estimate_strong_survival,
    estimate_survival,
    estimate_type_survival,
)
from .theorems import (
    experiment_theorem1,
    experiment_theorem2,
    experiment_theorem3,
    experiment_theorem4,
)

__all__ = [
    "ExperimentResult",
    "SurvivalEstimate",
    "TypeSurvivalEstimate",
    "Verdict",
    "ClusterSample",
    "ClusterStats",
    "cluster_stats",
    "CriticalEstimate",
    "CriticalKind",
    "estimate_critical",
    "blocked_prefix_stats",
    "dual_law",
    "duality_batch",
    "experiment_escape_bound",
    "oracle_compare",
    "make_sector_configuration",
    "OccupancyTable",
    "sample_upper_invariant",
    "estimate_hitting",
    "estimate_rho",
    "estimate_strong_survival",
    "estimate_survival",
    "estimate_type_survival",
    "experiment_theorem1",
    "experiment_theorem2",
    "experiment_theorem3",
    "experiment_theorem4",
]
