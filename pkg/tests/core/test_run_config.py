"""Tests for per-run configuration."""

import json
import os
from unittest.mock import patch

import pytest

TREE_CONFIG = """
[run]
experiment = "theorem1"
seed = 3
replicas = 50

[topology]
kind = "tree-ball"
d = 2
extent = 3

[rates]
lambda1 = 0.5
lambda2 = 1.0

[experiment]
boundary_site = 1
t_grid = [1.0, 2.0]
"""


def _write(tmp_path, text, name="run.toml"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


class TestLoadRunConfig:
    """Test reading and validating run configs."""

    def test_loads_toml(self, tmp_path):
        """Should parse every section."""
        from contact_duality.core.run_config import load_run_config

        with patch.dict(os.environ, {}, clear=True):
            config = load_run_config(_write(tmp_path, TREE_CONFIG))

        assert config.run.experiment == "theorem1"
        assert config.replicas == 50
        assert config.rates.lambda2 == 1.0
        assert config.experiment.t_grid == [1.0, 2.0]
        assert config.build_topology().site_count == 1 + 3 + 6 + 12
        assert config.base_site(config.build_topology()) == 0

    def test_overrides(self, tmp_path):
        """Should apply TOML-valued overrides and plain-text fallbacks."""
        from contact_duality.core.run_config import load_run_config

        with patch.dict(os.environ, {}, clear=True):
            config = load_run_config(
                _write(tmp_path, TREE_CONFIG),
                ["rates.lambda2=1.5", "experiment.t_grid=[4.0]", "run.output_dir=out/here"],
            )

        assert config.rates.lambda2 == 1.5
        assert config.experiment.t_grid == [4.0]
        assert str(config.output_dir) == "out/here"

    def test_env_workers_unless_overridden(self, tmp_path):
        """Should take WORKERS from the environment unless --set names run.workers."""
        from contact_duality.core.run_config import load_run_config

        path = _write(tmp_path, TREE_CONFIG)
        with patch.dict(os.environ, {"WORKERS": "3"}, clear=True):
            assert load_run_config(path).workers == 3
            assert load_run_config(path, ["run.workers=2"]).workers == 2

    @pytest.mark.parametrize("override", [
        "rates.lambda1=2.0",
        "run.experiment=nonsense",
        "topology.kind=torus",
        "experiment.site=99",
        "run.seed=-1",
        "experiment.strong_bracket=[2.0, 1.0]",
    ])
    def test_rejects_invalid(self, tmp_path, override):
        """Should raise RunConfigError before any compute."""
        from contact_duality.core.run_config import RunConfigError, load_run_config

        with patch.dict(os.environ, {}, clear=True):
            with pytest.raises(RunConfigError):
                load_run_config(_write(tmp_path, TREE_CONFIG), [override])

    def test_missing_sections(self, tmp_path):
        """Should name the sections an experiment needs."""
        from contact_duality.core.run_config import RunConfigError, load_run_config

        path = _write(tmp_path, '[run]\nexperiment = "survival"\n')

        with pytest.raises(RunConfigError, match="topology"):
            load_run_config(path)

    def test_missing_file_and_bad_syntax(self, tmp_path):
        """Should report unreadable configs as config errors."""
        from contact_duality.core.run_config import RunConfigError, load_run_config

        with pytest.raises(RunConfigError):
            load_run_config(tmp_path / "absent.toml")
        with pytest.raises(RunConfigError):
            load_run_config(_write(tmp_path, "[run\nexperiment ="))

    def test_manifest_round_trip(self, tmp_path):
        """Should reload the config echo stored in a manifest."""
        from contact_duality.core.run_config import load_run_config

        with patch.dict(os.environ, {}, clear=True):
            config = load_run_config(_write(tmp_path, TREE_CONFIG))
            manifest = tmp_path / "manifest.json"
            manifest.write_text(json.dumps({"config": config.echo()}), encoding="utf-8")
            reloaded = load_run_config(manifest)

        assert reloaded.echo() == config.echo()

    def test_bad_override_syntax(self):
        """Should reject overrides without section.key=value."""
        from contact_duality.core.run_config import RunConfigError, parse_override

        assert parse_override("rates.lambda1=0.5") == ("rates", "lambda1", 0.5)
        assert parse_override("run.experiment=theorem2") == ("run", "experiment", "theorem2")
        with pytest.raises(RunConfigError):
            parse_override("lambda1=0.5")


class TestSections:
    """Test individual section models."""

    def test_initial_kinds(self):
        """Should build every kind of initial configuration."""
        from contact_duality.core.run_config import InitialCondition
        from contact_duality.topology import make_path, make_tree_ball

        path = make_path(4)
        tree = make_tree_ball(2, 1)

        assert InitialCondition(kind="uniform", state=1).build(path).to_string() == "1111"
        assert InitialCondition(kind="string", value="0120").build(path).to_string() == "0120"
        assert InitialCondition(kind="sites", ones=[0], twos=[3]).build(path).to_string() == "1002"
        sectors = InitialCondition(kind="sectors", sectors=[(1, 1), (2, 2)], state=0)
        assert sectors.build(tree).to_string() == "0120"

    def test_critical_needs_bracket(self):
        """Should require a bracket for the critical experiment."""
        from pydantic import ValidationError

        from contact_duality.core.run_config import RunConfig

        raw = {"run": {"experiment": "critical"}, "topology": {"kind": "torus", "d": 1, "extent": 5}}

        with pytest.raises(ValidationError):
            RunConfig.model_validate(raw)
        raw["experiment"] = {"bracket": [1.0, 2.0]}
        assert RunConfig.model_validate(raw).experiment.bracket == (1.0, 2.0)

    def test_rate_lookup(self):
        """Should return the rate of each kind."""
        from contact_duality.core.run_config import RateSpec

        rates = RateSpec(lambda1=0.5, lambda2=2.0)

        assert rates.rate(1) == 0.5
        assert rates.rate(2) == 2.0

    def test_strong_bracket_feeds_theorem1_top(self):
        """Should fall back to the strong bracket top when no explicit top is set."""
        from contact_duality.core.run_config import ExperimentParams
        from contact_duality.experiments.theorems import strong_top

        assert strong_top(ExperimentParams()) is None
        assert strong_top(ExperimentParams(strong_bracket=(1.5, 1.8))) == 1.8
        assert strong_top(ExperimentParams(strong_bracket=(1.5, 1.8), strong_bracket_top=1.6)) == 1.6
