"""
Per-run configuration.

A run is described by a TOML file with sections [run], [topology], [rates],
[initial] and [experiment]. Overrides of the form section.key=value are
applied to the raw mapping before validation, so every parameter is checked
before any compute starts.
"""

import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Sequence, Tuple, Union

from pydantic import BaseModel, Field, ValidationError, field_validator, model_validator

from ..estimators.initial import make_sector_configuration
from ..forward import Configuration
from ..topology import (
    Topology,
    TopologyKind,
    make_graph,
    make_path,
    make_star,
    make_torus,
    make_tree_ball,
)
from .config import get_config

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

logger = logging.getLogger(__name__)

EXPERIMENT_NAMES = (
    "duality-check",
    "oracle-compare",
    "survival",
    "type-survival",
    "strong-survival",
    "critical",
    "upper-invariant",
    "cluster-stats",
    "theorem1",
    "theorem2",
    "theorem3",
    "theorem4",
    "escape-bound",
    "blocked-prefix",
    "dual-law",
)

# sections each experiment reads besides [run] and [experiment]
REQUIRED_SECTIONS: Dict[str, Tuple[str, ...]] = {
    "duality-check": (),
    "oracle-compare": ("topology", "rates", "initial"),
    "survival": ("topology", "rates"),
    "type-survival": ("topology", "rates", "initial"),
    "strong-survival": ("topology", "rates"),
    "critical": ("topology",),
    "upper-invariant": ("topology", "rates"),
    "cluster-stats": ("topology", "rates"),
    "theorem1": ("topology", "rates"),
    "theorem2": ("topology", "rates", "initial"),
    "theorem3": ("topology", "rates", "initial"),
    "theorem4": ("topology", "rates", "initial"),
    "escape-bound": ("topology", "rates"),
    "blocked-prefix": ("topology", "rates"),
    "dual-law": ("topology", "rates"),
}

TREE_ONLY = ("theorem1", "theorem4", "escape-bound")


class RunConfigError(ValueError):
    """Run configuration could not be read or validated."""


class RunSection(BaseModel):
    """[run]: what to run and where the outputs go."""
    experiment: str
    seed: int = Field(default=0, ge=0, lt=2**64)
    replicas: Optional[int] = Field(default=None, ge=1)  # default REPLICAS
    workers: Optional[int] = Field(default=None, ge=1)  # default WORKERS
    output_dir: Optional[str] = None  # default OUTPUT_DIR
    t_max: Optional[float] = Field(default=None, gt=0)  # default T_MAX

    @field_validator("experiment")
    @classmethod
    def validate_experiment(cls, v: str) -> str:
        if v not in EXPERIMENT_NAMES:
            raise ValueError(f"Unknown experiment '{v}'. Available: {list(EXPERIMENT_NAMES)}")
        return v


class TopologySpec(BaseModel):
    """[topology]: torus, tree-ball, path, star or an explicit graph."""
    kind: Literal["torus", "tree-ball", "path", "star", "graph"]
    d: int = Field(default=1, ge=1)
    extent: Optional[int] = Field(default=None, ge=1)  # L, K, or number of sites
    adjacency: Optional[List[List[int]]] = None
    labels: Optional[List[str]] = None

    @model_validator(mode="after")
    def check_shape(self) -> "TopologySpec":
        if self.kind == "graph":
            if self.adjacency is None:
                raise ValueError("kind 'graph' needs an adjacency list")
        elif self.extent is None:
            raise ValueError(f"kind '{self.kind}' needs extent")
        return self

    def build(self) -> Topology:
        if self.kind == "torus":
            return make_torus(self.d, int(self.extent))
        if self.kind == "tree-ball":
            return make_tree_ball(self.d, int(self.extent))
        if self.kind == "path":
            return make_path(int(self.extent), self.labels)
        if self.kind == "star":
            return make_star(int(self.extent))
        return make_graph(self.adjacency, self.labels)


class RateSpec(BaseModel):
    """[rates]: birth rates with lambda1 <= lambda2."""
    lambda1: float = Field(ge=0)
    lambda2: float = Field(ge=0)

    @model_validator(mode="after")
    def check_order(self) -> "RateSpec":
        if self.lambda1 > self.lambda2:
            raise ValueError(
                f"lambda1 must not exceed lambda2 (got {self.lambda1} > {self.lambda2})"
            )
        return self

    def rate(self, kind: int) -> float:
        """Single-type rate of the given kind."""
        return self.lambda1 if kind == 1 else self.lambda2


class InitialCondition(BaseModel):
    """
    [initial]: the starting configuration.

    kind=uniform fills every site with `state`; kind=string reads `value`
    over {0,1,2}; kind=sites lists `ones` and `twos`; kind=sectors assigns
    (boundary site, state) pairs on a tree ball with `state` elsewhere.
    """
    kind: Literal["uniform", "string", "sites", "sectors"] = "uniform"
    state: int = Field(default=2, ge=0, le=2)
    value: Optional[str] = None
    ones: List[int] = Field(default_factory=list)
    twos: List[int] = Field(default_factory=list)
    sectors: List[Tuple[int, int]] = Field(default_factory=list)

    def build(self, topo: Topology) -> Configuration:
        n = topo.site_count
        if self.kind == "uniform":
            return Configuration.uniform(n, self.state)
        if self.kind == "string":
            if self.value is None or len(self.value) != n:
                raise ValueError(f"initial.value must be a string of {n} states")
            return Configuration.from_string(self.value)
        if self.kind == "sites":
            for x in self.ones + self.twos:
                topo.check_site(x)
            return Configuration.from_sites(n, self.ones, self.twos)
        return make_sector_configuration(topo, self.sectors, default=self.state)


class ExperimentParams(BaseModel):
    """[experiment]: per-experiment knobs; unused keys are ignored by other experiments."""
    site: Optional[int] = None  # base site x (default: root of a tree ball, else 0)
    sites: List[int] = Field(default_factory=list)  # x list, observed sites or targets
    target_set: List[int] = Field(default_factory=list)  # set A
    boundary_site: Optional[int] = None  # y of the sector S(y)
    rate_kind: Literal[1, 2] = 2  # which rate single-type experiments use
    t_grid: List[float] = Field(default_factory=list)
    t_eval: Optional[float] = Field(default=None, gt=0)
    t_probe: Optional[float] = Field(default=None, gt=0)
    rho_time: Optional[float] = Field(default=None, ge=0)
    late_grid: List[float] = Field(default_factory=list)
    bracket: Optional[Tuple[float, float]] = None
    critical_kind: Literal["weak", "strong", "both"] = "both"
    bisection_steps: int = Field(default=6, ge=0)
    threshold: Optional[float] = Field(default=None, gt=0, lt=1)
    size_grid: List[int] = Field(default_factory=lambda: [5])
    radius_grid: List[int] = Field(default_factory=list)
    instances: Optional[int] = Field(default=None, ge=1)  # duality-check (default: replicas)
    compact: bool = True
    lambda_max: float = Field(default=3.0, gt=0)
    max_entries: Optional[int] = Field(default=None, ge=1)
    elsewhere: int = Field(default=2, ge=0, le=2)
    weak_bracket: Optional[Tuple[float, float]] = None
    strong_bracket_top: Optional[float] = Field(default=None, ge=0)
    strong_bracket: Optional[Tuple[float, float]] = None  # estimated strong-survival bracket

    @field_validator("bracket", "weak_bracket", "strong_bracket")
    @classmethod
    def validate_bracket(cls, v: Optional[Tuple[float, float]]) -> Optional[Tuple[float, float]]:
        if v is not None and not 0 <= v[0] < v[1]:
            raise ValueError(f"Bracket must satisfy 0 <= lo < hi, got {v}")
        return v


class RunConfig(BaseModel):
    """A complete, validated run description."""
    run: RunSection
    topology: Optional[TopologySpec] = None
    rates: Optional[RateSpec] = None
    initial: Optional[InitialCondition] = None
    experiment: ExperimentParams = Field(default_factory=ExperimentParams)

    @model_validator(mode="after")
    def check_experiment_inputs(self) -> "RunConfig":
        name = self.run.experiment
        missing = [s for s in REQUIRED_SECTIONS[name] if getattr(self, s) is None]
        if missing:
            raise ValueError(f"Experiment '{name}' needs sections {missing}")

        if self.topology is None:
            return self
        topo = self.topology.build()
        if name in TREE_ONLY and topo.kind is not TopologyKind.TREE_BALL:
            raise ValueError(f"Experiment '{name}' needs a tree-ball topology")
        params = self.experiment
        for x in [params.site, params.boundary_site, *params.sites, *params.target_set]:
            if x is not None:
                topo.check_site(x)
        if self.initial is not None:
            self.initial.build(topo)
        if name == "critical" and params.bracket is None:
            raise ValueError("Experiment 'critical' needs experiment.bracket")
        if name == "theorem1" and params.boundary_site is None:
            raise ValueError("Experiment 'theorem1' needs experiment.boundary_site")
        if name in ("theorem3", "theorem4") and not params.target_set:
            raise ValueError(f"Experiment '{name}' needs experiment.target_set")
        return self

    @property
    def replicas(self) -> int:
        return self.run.replicas if self.run.replicas is not None else get_config().REPLICAS

    @property
    def workers(self) -> int:
        return self.run.workers if self.run.workers is not None else get_config().WORKERS

    @property
    def t_max(self) -> float:
        return self.run.t_max if self.run.t_max is not None else get_config().T_MAX

    @property
    def output_dir(self) -> Path:
        return Path(self.run.output_dir or get_config().OUTPUT_DIR)

    def build_topology(self) -> Topology:
        if self.topology is None:
            raise ValueError(f"Experiment '{self.run.experiment}' has no topology")
        return self.topology.build()

    def base_site(self, topo: Topology) -> int:
        if self.experiment.site is not None:
            return self.experiment.site
        return topo.root if topo.root is not None else 0

    def echo(self) -> Dict[str, Any]:
        """Config as written to the manifest (re-loadable by load_run_config)."""
        return self.model_dump(mode="json", exclude_none=True)


def parse_override(item: str) -> Tuple[str, str, Any]:
    """
    Split "section.key=value"; the value is read as a TOML value, else kept as text.

    Raises:
        RunConfigError: Malformed override
    """
    key, sep, raw = item.partition("=")
    section, dot, field = key.strip().partition(".")
    if not sep or not dot or not section or not field:
        raise RunConfigError(f"Override must look like section.key=value, got {item!r}")
    try:
        value = tomllib.loads(f"v = {raw.strip()}")["v"]
    except tomllib.TOMLDecodeError:
        value = raw.strip()
    return section, field, value


def _read_raw(path: Path) -> Dict[str, Any]:
    if not path.is_file():
        raise RunConfigError(f"Config file not found: {path}")
    try:
        if path.suffix == ".json":
            manifest = json.loads(path.read_text(encoding="utf-8"))
            if "config" not in manifest:
                raise RunConfigError(f"{path} is not a run manifest (no 'config' key)")
            logger.info(f"Re-running config echo from manifest {path}")
            return manifest["config"]
        with open(path, "rb") as f:
            return tomllib.load(f)
    except (tomllib.TOMLDecodeError, json.JSONDecodeError) as e:
        raise RunConfigError(f"Could not parse {path}: {e}") from e


def load_run_config(
    path: Union[str, Path],
    overrides: Sequence[str] = (),
) -> RunConfig:
    """
    Read, override and validate a run configuration.

    Args:
        path: TOML config, or a manifest.json written by a previous run
        overrides: "section.key=value" items, applied in order

    Returns:
        RunConfig

    Raises:
        RunConfigError: Missing file, syntax error or failed validation
    """
    raw = _read_raw(Path(path))
    explicit = set()
    for item in overrides:
        section, field, value = parse_override(item)
        raw.setdefault(section, {})[field] = value
        explicit.add(f"{section}.{field}")

    env_workers = get_config().workers_from_env()
    if env_workers is not None and "run.workers" not in explicit:
        raw.setdefault("run", {})["workers"] = env_workers

    try:
        config = RunConfig.model_validate(raw)
    except ValidationError as e:
        raise RunConfigError(f"Invalid run config {path}:\n{e}") from e
    except ValueError as e:
        raise RunConfigError(f"Invalid run config {path}: {e}") from e

    logger.info(f"Loaded run config: experiment={config.run.experiment}, seed={config.run.seed}")
    return config
