"""Tests for the command line entry point and the experiment runner."""

import json

import pytest

DUALITY_CONFIG = """
[run]
experiment = "duality-check"
seed = 42
workers = 1

[experiment]
instances = 8
lambda_max = 1.0
t_eval = 1.0
"""


def _write(tmp_path, text, name="run.toml"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


def _run(config, out_dir, *extra):
    from contact_duality.cli import main

    return main(["run", str(config), "--set", f'run.output_dir="{out_dir}"', *extra])


class TestCli:
    """Test exit codes and outputs of `contact-duality run`."""

    def test_duality_check_passes(self, tmp_path):
        """Should exit 0 and write the table, summary and manifest."""
        config = _write(tmp_path, DUALITY_CONFIG)
        out = tmp_path / "out"

        assert _run(config, out) == 0
        assert (out / "duality-check.csv").is_file()
        assert (out / "duality-check.json").is_file()

        manifest = json.loads((out / "manifest.json").read_text(encoding="utf-8"))
        assert manifest["exit_code"] == 0
        assert manifest["flagged"] == 0
        assert manifest["config"]["run"]["seed"] == 42
        assert set(manifest) >= {"config", "version", "outputs", "wall_time_seconds", "verdicts"}

    def test_rerun_is_byte_identical(self, tmp_path):
        """Should reproduce the CSV exactly from the same seed."""
        config = _write(tmp_path, DUALITY_CONFIG)

        assert _run(config, tmp_path / "a") == 0
        assert _run(config, tmp_path / "b") == 0

        first = (tmp_path / "a" / "duality-check.csv").read_bytes()
        assert first == (tmp_path / "b" / "duality-check.csv").read_bytes()

    def test_worker_count_does_not_change_results(self, tmp_path):
        """Should write the same CSV with one or two workers."""
        config = _write(tmp_path, DUALITY_CONFIG)

        assert _run(config, tmp_path / "one", "--set", "run.workers=1") == 0
        assert _run(config, tmp_path / "two", "--set", "run.workers=2") == 0

        one = (tmp_path / "one" / "duality-check.csv").read_bytes()
        assert one == (tmp_path / "two" / "duality-check.csv").read_bytes()

    def test_rerun_from_manifest(self, tmp_path):
        """Should accept a manifest in place of the TOML file."""
        from contact_duality.cli import main

        config = _write(tmp_path, DUALITY_CONFIG)
        assert _run(config, tmp_path / "a") == 0

        manifest = tmp_path / "a" / "manifest.json"
        assert main(["run", str(manifest), "--set", f'run.output_dir="{tmp_path / "b"}"']) == 0
        assert (tmp_path / "a" / "duality-check.csv").read_bytes() == \
            (tmp_path / "b" / "duality-check.csv").read_bytes()

    def test_missing_file(self, tmp_path):
        """Should exit 2 for a config that does not exist."""
        from contact_duality.cli import main

        assert main(["run", str(tmp_path / "nope.toml")]) == 2

    def test_rate_order_violation(self, tmp_path):
        """Should exit 2 before any compute when lambda1 exceeds lambda2."""
        config = _write(tmp_path, """
[run]
experiment = "survival"
replicas = 100

[topology]
kind = "path"
extent = 3

[rates]
lambda1 = 2.0
lambda2 = 1.0
""")
        out = tmp_path / "out"

        assert _run(config, out) == 2
        assert not (out / "manifest.json").exists()

    def test_bad_override(self, tmp_path):
        """Should exit 2 for an override without a section."""
        config = _write(tmp_path, DUALITY_CONFIG)

        assert _run(config, tmp_path / "out", "--set", "seed=3") == 2

    def test_unknown_subcommand(self):
        """Should reject a missing subcommand through argparse."""
        from contact_duality.cli import main

        with pytest.raises(SystemExit):
            main([])


class TestRunner:
    """Test the runner without the CLI."""

    def test_handler_failure_exits_one(self, tmp_path):
        """Should record the error payload and exit 1."""
        from unittest.mock import patch

        from contact_duality.core.run_config import RunConfig
        from contact_duality.runner import EXIT_FAILURE, run

        config = RunConfig.model_validate({
            "run": {"experiment": "duality-check", "workers": 1, "output_dir": str(tmp_path)},
            "experiment": {"instances": 2},
        })

        def failing(name, ctx):
            return {"error": "boom", "error_type": "RuntimeError", "experiment": name}

        with patch("contact_duality.runner.get_experiment", return_value=failing):
            manifest = run(config)

        assert manifest.exit_code == EXIT_FAILURE
        assert manifest.error["error"] == "boom"
        assert (tmp_path / "manifest.json").is_file()

    def test_flagged_verdict_exits_three(self, tmp_path):
        """Should exit 3 when a check is flagged."""
        from unittest.mock import patch

        from contact_duality.core.run_config import RunConfig
        from contact_duality.estimators import ExperimentResult
        from contact_duality.runner import EXIT_FLAGGED, run

        config = RunConfig.model_validate({
            "run": {"experiment": "duality-check", "workers": 1, "output_dir": str(tmp_path)},
        })

        def flagged(name, ctx):
            result = ExperimentResult(experiment=name, columns=["a"], rows=[[1]])
            result.add_verdict("always", (False, "forced"))
            return result

        with patch("contact_duality.runner.get_experiment", return_value=flagged):
            manifest = run(config)

        assert manifest.exit_code == EXIT_FLAGGED
        assert manifest.flagged == 1
        assert (tmp_path / "duality-check.csv").read_text(encoding="utf-8") == "a\n1\n"
