"""Tests for the command line and the subcommand runner."""
import json

import pytest

from spectral_tori.commands import PIPELINES, run_subcommand
from spectral_tori.errors import ConfigError
from spectral_tori.main import main
from spectral_tori.models.schemas import SUBCOMMANDS, ExperimentConfig

SMALL = ["--override", "grid.n1=16", "--override", "grid.n2=16", "--override", "scan.cutoff=2"]


def last_json_line(text: str) -> dict:
    return json.loads(text.strip().splitlines()[-1])


class TestMain:
    """Tests for the spectral-tori entry point."""

    def test_potential_subcommand(self, tmp_path, capsys):
        """Should exit 0 and write the report and the samples."""
        assert main(["potential", "--out", str(tmp_path), *SMALL]) == 0
        summary = last_json_line(capsys.readouterr().out)
        assert summary == {"subcommand": "potential", "checks": 1, "failed": []}

        report = json.loads((tmp_path / "potential_report.json").read_text(encoding="utf-8"))
        assert report["results"]["willmore_potential"] == 0.0
        assert report["timing"] is None
        assert "numpy" in report["versions"]
        assert report["tables"] == ["potential.csv", "potential_field.json", "potential_report.json"]
        lines = (tmp_path / "potential.csv").read_text(encoding="utf-8").splitlines()
        assert lines[0] == "s,t,x,y,re,im"
        assert len(lines) == 1 + 16 * 16

    def test_invalid_configuration(self, tmp_path, capsys):
        """Should exit 1 and print the error as JSON."""
        assert main(["potential", "--out", str(tmp_path), "--override", "grid.n1=7"]) == 1
        error = last_json_line(capsys.readouterr().out)["error"]
        assert error["code"] == "CONFIG_INVALID"
        assert not (tmp_path / "potential_report.json").exists()

    def test_config_file(self, tmp_path, capsys):
        """Should read the configuration file given with --config."""
        path = tmp_path / "config.json"
        path.write_text(
            json.dumps({"grid": {"n1": 16, "n2": 16}, "scan": {"cutoff": 2}, "potential": {"kind": "constant", "value": [0.5, 0.0]}}),
            encoding="utf-8",
        )
        assert main(["potential", "--config", str(path), "--out", str(tmp_path)]) == 0
        report = json.loads((tmp_path / "potential_report.json").read_text(encoding="utf-8"))
        assert report["results"]["willmore_potential"] == pytest.approx(1.0)

    def test_field_file_round_trip(self, tmp_path, capsys):
        """Should read back the field a previous potential run wrote."""
        first = tmp_path / "first"
        args = ["--override", "potential.kind=constant", "--override", "potential.value=[0.5, 0.0]"]
        assert main(["potential", "--out", str(first), *SMALL, *args]) == 0
        field_file = first / "potential_field.json"
        assert json.loads(field_file.read_text(encoding="utf-8"))["n1"] == 16

        second = tmp_path / "second"
        reload = ["--override", "potential.kind=field_file", "--override", f"potential.field_file={field_file}"]
        assert main(["potential", "--out", str(second), "--override", "scan.cutoff=2", *reload]) == 0
        report = json.loads((second / "potential_report.json").read_text(encoding="utf-8"))
        assert report["results"]["willmore_potential"] == pytest.approx(1.0)
        assert (second / "potential.csv").read_text(encoding="utf-8") == (first / "potential.csv").read_text(encoding="utf-8")

    def test_unknown_subcommand(self):
        """Should let argparse refuse unknown subcommands."""
        with pytest.raises(SystemExit):
            main(["nonsense"])


class TestRunSubcommand:
    """Tests for the pipeline runner."""

    def test_every_subcommand_has_a_pipeline(self):
        """Should register one pipeline per subcommand."""
        assert set(PIPELINES) == set(SUBCOMMANDS)

    def test_unknown_name(self, tmp_path):
        """Should refuse names outside the subcommand list."""
        with pytest.raises(ConfigError) as exc_info:
            run_subcommand("nonsense", ExperimentConfig(), tmp_path)
        assert exc_info.value.code == "UNKNOWN_SUBCOMMAND"

    def test_timing_on_request(self, tmp_path):
        """Should record the wall time only when asked."""
        config = ExperimentConfig.load(overrides=["grid.n1=16", "grid.n2=16", "scan.cutoff=2", "output.include_timing=true"])
        report = run_subcommand("potential", config, tmp_path)
        assert report.timing is not None and report.timing >= 0.0

    def test_revolve_tables(self, tmp_path):
        """Should write the mesh, the profile table and the report of a torus."""
        config = ExperimentConfig.load(overrides=["grid.n1=32", "grid.n2=16"])
        report = run_subcommand("revolve", config, tmp_path, raise_on_failure=False)
        assert report.tables == ["revolve.obj", "revolve_profile.csv", "revolve_report.json"]
        for name in report.tables:
            assert (tmp_path / name).is_file()
        assert report.results["character"] in ([1, 1], [1, -1], [-1, 1], [-1, -1])
        saved = json.loads((tmp_path / "revolve_report.json").read_text(encoding="utf-8"))["results"]
        assert {"willmore", "closureDefect", "isothermicDefect", "characters"} <= set(saved)
        assert saved["willmore"] == pytest.approx(report.results["willmore_closed_form"], rel=1e-6)
        assert len(saved["closureDefect"]) == 3
        assert all(len(pair) == 2 for pair in saved["closureDefect"])
        assert saved["characters"] == [report.results["character"], report.results["character"]]
