"""Tests for experiment configuration, overrides and run reports."""
import json

import pytest

from spectral_tori.errors import CheckFailure, ConfigError, NumericalError, SpectralToriError
from spectral_tori.models.schemas import ExperimentConfig, RunReport, apply_override, to_complex


class TestExperimentConfig:
    """Tests for loading experiment configuration."""

    def test_defaults(self):
        """Should build a complete configuration without input."""
        config = ExperimentConfig.load()
        assert config.surface.kind == "revolution"
        assert config.grid.n1 == 64
        assert config.output.include_timing is False

    def test_file_then_overrides(self, tmp_path):
        """Should let overrides win over the file."""
        path = tmp_path / "config.json"
        path.write_text(json.dumps({"grid": {"n1": 32, "n2": 16}, "scan": {"cutoff": 2}}), encoding="utf-8")
        config = ExperimentConfig.load(path, ["grid.n1=128", "surface.kind=clifford"])
        assert config.grid.n1 == 128
        assert config.grid.n2 == 16
        assert config.scan.cutoff == 2
        assert config.surface.kind == "clifford"

    def test_odd_grid_size(self):
        """Should refuse an odd grid size."""
        with pytest.raises(ConfigError) as exc_info:
            ExperimentConfig.load(overrides=["grid.n1=31"])
        assert exc_info.value.code == "CONFIG_INVALID"

    def test_unknown_key(self):
        """Should refuse keys outside the schema."""
        with pytest.raises(ConfigError) as exc_info:
            ExperimentConfig.load(overrides=["grid.n3=8"])
        assert exc_info.value.code == "CONFIG_INVALID"

    def test_torus_radii(self):
        """Should require R > r for a torus of revolution."""
        with pytest.raises(ConfigError):
            ExperimentConfig.load(overrides=["surface.R=1.0", "surface.r=1.5"])

    def test_missing_mesh(self, tmp_path):
        """Should require an existing mesh file."""
        with pytest.raises(ConfigError):
            ExperimentConfig.load(overrides=["surface.kind=mesh", f"surface.mesh_file={tmp_path / 'none.obj'}"])

    def test_one_dim_samples(self):
        """Should require an even number of samples for a one-dimensional potential."""
        with pytest.raises(ConfigError):
            ExperimentConfig.load(overrides=["potential.kind=one_dim", "potential.samples=[1, 2, 3, 4, 5]"])

    def test_field_file_required(self, tmp_path):
        """Should require an existing field file for a field_file potential."""
        with pytest.raises(ConfigError):
            ExperimentConfig.load(overrides=["potential.kind=field_file"])
        with pytest.raises(ConfigError):
            ExperimentConfig.load(overrides=["potential.kind=field_file", f"potential.field_file={tmp_path / 'none.json'}"])

    def test_unreadable_file(self, tmp_path):
        """Should report a missing file."""
        with pytest.raises(ConfigError) as exc_info:
            ExperimentConfig.load(tmp_path / "missing.json")
        assert exc_info.value.code == "CONFIG_UNREADABLE"

    def test_not_json(self, tmp_path):
        """Should report a file that is not JSON."""
        path = tmp_path / "config.json"
        path.write_text("grid: 1", encoding="utf-8")
        with pytest.raises(ConfigError) as exc_info:
            ExperimentConfig.load(path)
        assert exc_info.value.code == "CONFIG_NOT_JSON"

    def test_not_an_object(self, tmp_path):
        """Should report a JSON file holding a list."""
        path = tmp_path / "config.json"
        path.write_text("[1, 2]", encoding="utf-8")
        with pytest.raises(ConfigError) as exc_info:
            ExperimentConfig.load(path)
        assert exc_info.value.code == "CONFIG_NOT_OBJECT"


class TestOverrides:
    """Tests for dotted key=value overrides."""

    def test_json_and_string_values(self):
        """Should parse JSON values and keep other text as strings."""
        data: dict = {}
        apply_override(data, "scan.fixed=[0.3, 0.2]")
        apply_override(data, "output.directory=results")
        assert data == {"scan": {"fixed": [0.3, 0.2]}, "output": {"directory": "results"}}

    def test_missing_separator(self):
        """Should refuse an override without '='."""
        with pytest.raises(ConfigError) as exc_info:
            apply_override({}, "grid.n1")
        assert exc_info.value.code == "BAD_OVERRIDE"

    def test_descend_into_value(self):
        """Should refuse to descend into a non-object."""
        with pytest.raises(ConfigError) as exc_info:
            apply_override({"grid": 3}, "grid.n1=8")
        assert exc_info.value.code == "BAD_OVERRIDE"

    def test_to_complex(self):
        """Should accept pairs and plain numbers."""
        assert to_complex((0.5, -1.0)) == 0.5 - 1.0j
        assert to_complex(2.0) == 2.0


class TestRunReport:
    """Tests for checks recorded on a report."""

    def test_hard_and_soft_checks(self):
        """Should list only failed hard checks."""
        report = RunReport(subcommand="dual", config={})
        assert report.check("ok", 1e-12, 1e-10)
        assert not report.check("soft", 1.0, 1e-10, hard=False)
        assert not report.check("hard", 1.0, 1e-10)
        assert report.failed == ["hard"]

    def test_missing_value_fails(self):
        """Should fail a check without a finite value."""
        report = RunReport(subcommand="dual", config={})
        assert not report.check("missing", None, 1.0)
        assert not report.check("nan", float("nan"), 1.0)
        assert report.checks[1].value is None


class TestErrors:
    """Tests for the error hierarchy."""

    def test_exit_codes(self):
        """Should map each error class to its CLI exit status."""
        assert ConfigError("x").exit_code == 1
        assert NumericalError("x").exit_code == 2
        assert CheckFailure(["a"]).exit_code == 3

    def test_to_dict(self):
        """Should expose code and message."""
        error = CheckFailure(["a", "b"])
        assert isinstance(error, SpectralToriError)
        assert error.to_dict() == {"code": "CHECK_FAILED", "message": "2 hard check(s) failed: a, b"}
