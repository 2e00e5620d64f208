"""Tests for CSV, OBJ and JSON output."""
import csv
import json

import numpy as np
import pytest

from spectral_tori.core.fields import FundamentalGrid, Lattice, PeriodicField
from spectral_tori.models.schemas import RunReport
from spectral_tori.services.catalog import plane
from spectral_tori.services.export import (
    FIELD_COLUMNS,
    SPECTRUM_COLUMNS,
    SPECTRUM_EXTRA_COLUMNS,
    ExportError,
    complex_rows,
    export_field_csv,
    export_field_json,
    export_report_json,
    export_spectrum_csv,
    export_surface_obj,
    jsonable,
    load_field_json,
    load_surface_obj,
    write_csv,
)
from spectral_tori.services.floquet_2d import QuasimomentumPoint, SpectrumSample


class TestCsv:
    """Tests for CSV tables."""

    def test_header_only(self, tmp_path):
        """Should write just the header for an empty table."""
        path = write_csv(tmp_path / "empty.csv", ["a", "b"], [])
        assert path.read_text(encoding="utf-8") == "a,b\n"

    def test_values(self, tmp_path):
        """Should write floats with repr, booleans as 0/1 and None as empty."""
        path = write_csv(tmp_path / "t.csv", ["x", "flag", "none"], [{"x": 0.1, "flag": True, "none": None}])
        with path.open(encoding="utf-8") as handle:
            rows = list(csv.DictReader(handle))
        assert rows == [{"x": "0.1", "flag": "1", "none": ""}]

    def test_creates_directories(self, tmp_path):
        """Should create missing parent directories."""
        path = write_csv(tmp_path / "a" / "b" / "t.csv", ["x"], [{"x": 1}])
        assert path.is_file()

    def test_unwritable_path(self, tmp_path):
        """Should raise an export error when the parent is a file."""
        blocker = tmp_path / "file"
        blocker.write_text("x", encoding="utf-8")
        with pytest.raises(ExportError) as exc_info:
            write_csv(blocker / "t.csv", ["x"], [])
        assert exc_info.value.code == "UNWRITABLE_PATH"
        assert exc_info.value.exit_code == 1

    def test_spectrum_columns(self, tmp_path):
        """Should write one line per sample with split complex columns."""
        k = QuasimomentumPoint(0.1 + 0.2j, -0.3j)
        sample = SpectrumSample(k, 1e-3, (1.0 + 1.0j, 2.0), flagged=True, parameter=0.5j)
        path = export_spectrum_csv(tmp_path / "s.csv", [sample])
        with path.open(encoding="utf-8") as handle:
            reader = csv.DictReader(handle)
            rows = list(reader)
        names = tuple(reader.fieldnames or ())
        assert names[: len(SPECTRUM_COLUMNS)] == ("k1_re", "k1_im", "k2_re", "k2_im", "witness", "mu1_re", "mu1_im", "mu2_re", "mu2_im")
        assert names[len(SPECTRUM_COLUMNS) :] == SPECTRUM_EXTRA_COLUMNS
        assert float(rows[0]["parameter_im"]) == 0.5
        assert float(rows[0]["k1_im"]) == 0.2
        assert rows[0]["resonance_witness"] == ""
        assert rows[0]["flagged"] == "1"

    def test_complex_rows(self):
        """Should split complex values and drop list-valued columns."""
        columns, rows = complex_rows([{"l": 1, "k": 2.0 - 1.0j, "all": [1, 2]}])
        assert columns == ["l", "k_re", "k_im"]
        assert rows[0]["k_im"] == -1.0


class TestFieldFiles:
    """Tests for sampled fields on disk."""

    def test_field_csv(self, tmp_path):
        """Should write s, t, the lattice point and the value of every sample."""
        grid = FundamentalGrid(Lattice(2.0, 1.0 + 3.0j), 8, 8)
        field = PeriodicField(grid, grid.points**2)
        path = export_field_csv(tmp_path / "f.csv", field)
        with path.open(encoding="utf-8") as handle:
            reader = csv.DictReader(handle)
            rows = list(reader)
        assert tuple(reader.fieldnames or ()) == FIELD_COLUMNS == ("s", "t", "x", "y", "re", "im")
        assert len(rows) == 64
        row = rows[8 + 3]
        s, t = float(row["s"]), float(row["t"])
        assert (s, t) == (0.125, 0.375)
        z = s * 2.0 + t * (1.0 + 3.0j)
        assert float(row["x"]) == pytest.approx(z.real)
        assert float(row["y"]) == pytest.approx(z.imag)
        assert float(row["re"]) + 1j * float(row["im"]) == pytest.approx(z**2)

    def test_field_json_round_trip(self, tmp_path):
        """Should read back the lattice, the character and the values."""
        grid = FundamentalGrid(Lattice.hexagonal(), 8, 10)
        field = PeriodicField(grid, np.exp(2j * np.pi * grid.st[0]) * 0.5, (-1, 1))
        loaded = load_field_json(export_field_json(tmp_path / "f.json", field))
        assert loaded.character == (-1, 1)
        assert loaded.grid.shape == (8, 10)
        np.testing.assert_allclose(loaded.values, field.values, atol=1e-15)
        np.testing.assert_allclose(loaded.grid.lattice.generators, grid.lattice.generators)

    def test_malformed_field(self, tmp_path):
        """Should refuse a document without samples."""
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({"n1": 8}), encoding="utf-8")
        with pytest.raises(ExportError) as exc_info:
            load_field_json(path)
        assert exc_info.value.code == "BAD_FIELD_DOCUMENT"
        assert exc_info.value.exit_code == 1


class TestObj:
    """Tests for surface meshes."""

    def test_closed_torus_faces_wrap(self, tmp_path, torus):
        """Should write n1 n2 vertices and as many quads for a closed torus."""
        immersion = torus.immersion(torus.grid(8, 8))
        text = export_surface_obj(tmp_path / "t.obj", immersion).read_text(encoding="utf-8")
        lines = text.splitlines()
        assert sum(line.startswith("v ") for line in lines) == 64
        faces = [line for line in lines if line.startswith("f ")]
        assert len(faces) == 64
        assert min(int(i) for f in faces for i in f.split()[1:]) == 1
        assert max(int(i) for f in faces for i in f.split()[1:]) == 64

    def test_open_plane_faces(self, tmp_path):
        """Should not wrap faces of an open surface."""
        path = export_surface_obj(tmp_path / "p.obj", plane(n1=8, n2=8))
        faces = [line for line in path.read_text(encoding="utf-8").splitlines() if line.startswith("f ")]
        assert len(faces) == 49

    def test_y_up_axes(self, tmp_path):
        """Should write (x, y, z) as (x, z, -y)."""
        path = export_surface_obj(tmp_path / "p.obj", plane(n1=8, n2=8))
        vertex = next(line for line in path.read_text(encoding="utf-8").splitlines() if line.startswith("v ")).split()
        assert [float(v) for v in vertex[1:]] == [0.0, 0.0, -0.0]

    def test_load_back(self, tmp_path, torus):
        """Should read exported vertices onto a grid of the same size."""
        grid = torus.grid(8, 8)
        immersion = torus.immersion(grid)
        loaded = load_surface_obj(export_surface_obj(tmp_path / "t.obj", immersion), grid)
        np.testing.assert_allclose(loaded.points, immersion.points, atol=1e-12)

    def test_load_wrong_size(self, tmp_path, torus):
        """Should refuse a mesh with a different number of vertices."""
        path = export_surface_obj(tmp_path / "t.obj", torus.immersion(torus.grid(8, 8)))
        with pytest.raises(ExportError) as exc_info:
            load_surface_obj(path, FundamentalGrid(torus.lattice, 16, 16))
        assert exc_info.value.code == "BAD_MESH"


class TestJson:
    """Tests for JSON reports."""

    def test_jsonable(self):
        """Should turn complex numbers into pairs and non-finite floats into null."""
        value = jsonable({"c": 1.0 - 2.0j, "a": np.array([1, 2]), "n": float("nan"), "b": np.bool_(True)})
        assert value == {"c": [1.0, -2.0], "a": [1, 2], "n": None, "b": True}

    def test_report_file(self, tmp_path):
        """Should write a report that loads back with its checks."""
        report = RunReport(subcommand="potential", config={})
        report.check("residual", 1e-12, 1e-10)
        report.results["mean"] = 0.5j
        path = export_report_json(tmp_path / "r.json", report)
        data = json.loads(path.read_text(encoding="utf-8"))
        assert data["subcommand"] == "potential"
        assert data["checks"][0]["passed"] is True
        assert data["results"]["mean"] == [0.0, 0.5]
