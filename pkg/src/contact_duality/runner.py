"""
Experiment runner.

Executes the experiment named by a RunConfig, writes its CSV table, JSON
summary and the run manifest, and decides the exit status.
"""

import logging
import time
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Optional

from . import __version__
from .core.run_config import RunConfig
from .estimators.base import ExperimentResult
from .experiments import ExperimentContext, get_experiment
from .reporting import write_csv, write_manifest, write_summary
from .topology import describe

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG = 2
EXIT_FLAGGED = 3


@dataclass
class RunManifest:
    """What a run did; `config` re-runs it exactly."""
    config: Dict[str, Any]
    version: str
    outputs: Dict[str, str] = field(default_factory=dict)
    wall_time_seconds: float = 0.0
    verdicts: List[Dict[str, Any]] = field(default_factory=list)
    flagged: int = 0
    exit_code: int = EXIT_OK
    error: Optional[Dict[str, Any]] = None
    topology: Optional[Dict[str, Any]] = None

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


class ExperimentRunner:
    """Runs one configured experiment end to end."""

    def __init__(self, config: RunConfig):
        self.config = config
        self.name = config.run.experiment
        self.output_dir = config.output_dir

    def _write_outputs(self, result: ExperimentResult) -> Dict[str, str]:
        csv_path = write_csv(self.output_dir / f"{self.name}.csv", result.columns, result.rows)
        summary_path = write_summary(
            self.output_dir / f"{self.name}.json",
            {
                "experiment": self.name,
                "parameters": self.config.echo(),
                "summary": result.summary,
                "verdicts": [v.to_dict() for v in result.verdicts],
                "flagged": result.flagged,
                "passed": result.passed,
            },
        )
        return {"csv": str(csv_path), "summary": str(summary_path)}

    def run(self) -> RunManifest:
        """
        Execute the experiment and write every output.

        Returns:
            RunManifest with exit_code 0 (pass), 1 (handler failure) or
            3 (flagged verdicts)
        """
        manifest = RunManifest(config=self.config.echo(), version=__version__)
        start = time.perf_counter()
        logger.info(f"Running {self.name} (seed={self.config.run.seed}, "
                    f"replicas={self.config.replicas}, workers={self.config.workers})")

        context = ExperimentContext.from_config(self.config)
        if context.topo is not None:
            manifest.topology = describe(context.topo)

        outcome = get_experiment(self.name)(self.name, context)
        if isinstance(outcome, ExperimentResult):
            manifest.outputs = self._write_outputs(outcome)
            manifest.verdicts = [v.to_dict() for v in outcome.verdicts]
            manifest.flagged = outcome.flagged
            manifest.exit_code = EXIT_OK if outcome.passed else EXIT_FLAGGED
        else:
            manifest.error = outcome
            manifest.exit_code = EXIT_FAILURE

        manifest.wall_time_seconds = time.perf_counter() - start
        path = write_manifest(self.output_dir / "manifest.json", manifest.to_dict())
        manifest.outputs["manifest"] = str(path)

        if manifest.exit_code == EXIT_OK:
            logger.info(f"{self.name} passed in {manifest.wall_time_seconds:.1f}s; outputs in "
                        f"{self.output_dir}")
        elif manifest.exit_code == EXIT_FLAGGED:
            logger.warning(f"{self.name} flagged {manifest.flagged} check(s); see {path}")
        else:
            logger.error(f"{self.name} failed: {manifest.error.get('error')}")
        return manifest


def run(config: RunConfig) -> RunManifest:
    """Run one configured experiment."""
    return ExperimentRunner(config).run()

