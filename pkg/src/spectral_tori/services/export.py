"""On-disk formats: CSV tables, OBJ surface meshes and JSON reports.

CSV uses '.' decimals via repr of floats; OBJ vertices are written y-up and
right-handed, (x, y, z) -> (x, z, -y), with 1-based quad faces wrapping across
both periods of a closed torus.
"""
from __future__ import annotations

import csv
import json
from collections.abc import Mapping, Sequence
from pathlib import Path
from typing import Any

import numpy as np

from ..core.fields import FieldError, FundamentalGrid, PeriodicField, field_from_dict, field_to_dict
from ..errors import ConfigError
from ..logging import get_logger
from ..models.schemas import RunReport
from .floquet_2d import SpectrumSample
from .surface_r3 import ImmersionR3

logger = get_logger(__name__)

# Scan tables: these columns first, then SPECTRUM_EXTRA_COLUMNS.
SPECTRUM_COLUMNS = (
    "k1_re",
    "k1_im",
    "k2_re",
    "k2_im",
    "witness",
    "mu1_re",
    "mu1_im",
    "mu2_re",
    "mu2_im",
)
SPECTRUM_EXTRA_COLUMNS = ("parameter_re", "parameter_im", "resonance_witness", "flagged")
FIELD_COLUMNS = ("s", "t", "x", "y", "re", "im")


class ExportError(ConfigError):
    """An output file cannot be written or read back."""

    def __init__(self, message: str, code: str = "UNWRITABLE_PATH"):
        super().__init__(message, code=code)


def jsonable(value: Any) -> Any:
    """Plain JSON types; complex numbers become [re, im]."""
    if isinstance(value, Mapping):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return jsonable(value.tolist())
    if isinstance(value, (complex, np.complexfloating)):
        return [float(value.real), float(value.imag)]
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (float, np.floating)):
        number = float(value)
        return number if np.isfinite(number) else None
    return value


def _format(value: Any) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if value is None:
        return ""
    return str(value)


def _open_for_writing(path: Path) -> Path:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ExportError(f"cannot create directory {path.parent}: {exc}") from exc
    return path


def write_csv(path: str | Path, columns: Sequence[str], rows: Sequence[Mapping[str, Any]]) -> Path:
    """Header line, then one line per row; an empty row list gives a header-only file."""
    target = _open_for_writing(Path(path))
    try:
        with target.open("w", newline="", encoding="utf-8") as handle:
            writer = csv.DictWriter(handle, fieldnames=list(columns), lineterminator="\n")
            writer.writeheader()
            for row in rows:
                writer.writerow({c: _format(row.get(c)) for c in columns})
    except OSError as exc:
        raise ExportError(f"cannot write {target}: {exc}") from exc
    logger.debug("csv_written", path=str(target), rows=len(rows))
    return target


def spectrum_rows(samples: Sequence[SpectrumSample]) -> list[dict[str, Any]]:
    rows = []
    for s in samples:
        p = 0j if s.parameter is None else s.parameter
        mu1, mu2 = s.multipliers
        rows.append(
            {
                "parameter_re": p.real,
                "parameter_im": p.imag,
                "k1_re": s.k.k1.real,
                "k1_im": s.k.k1.imag,
                "k2_re": s.k.k2.real,
                "k2_im": s.k.k2.imag,
                "witness": s.witness,
                "resonance_witness": s.resonance_witness,
                "mu1_re": mu1.real,
                "mu1_im": mu1.imag,
                "mu2_re": mu2.real,
                "mu2_im": mu2.imag,
                "flagged": s.flagged,
            }
        )
    return rows


def export_spectrum_csv(path: str | Path, samples: Sequence[SpectrumSample]) -> Path:
    return write_csv(path, SPECTRUM_COLUMNS + SPECTRUM_EXTRA_COLUMNS, spectrum_rows(samples))


def field_rows(field: PeriodicField) -> list[dict[str, float]]:
    """One row per sample: lattice coordinates, the point s gamma1 + t gamma2 and the value."""
    s, t = field.grid.st
    z = field.grid.points
    return [
        {
            "s": float(s.flat[i]),
            "t": float(t.flat[i]),
            "x": float(z.flat[i].real),
            "y": float(z.flat[i].imag),
            "re": float(v.real),
            "im": float(v.imag),
        }
        for i, v in enumerate(field.values.ravel())
    ]


def export_field_csv(path: str | Path, field: PeriodicField) -> Path:
    return write_csv(path, FIELD_COLUMNS, field_rows(field))


def export_field_json(path: str | Path, field: PeriodicField) -> Path:
    target = _open_for_writing(Path(path))
    try:
        target.write_text(json.dumps(field_to_dict(field)) + "\n", encoding="utf-8")
    except OSError as exc:
        raise ExportError(f"cannot write {target}: {exc}") from exc
    return target


def load_field_json(path: str | Path) -> PeriodicField:
    """Read a field written by :func:`export_field_json`.

    Raises:
        ExportError: unreadable file or a malformed field document
    """
    source = Path(path)
    try:
        data = json.loads(source.read_text(encoding="utf-8"))
    except (OSError, ValueError) as exc:
        raise ExportError(f"cannot read field {source}: {exc}", code="BAD_FIELD_DOCUMENT") from exc
    if not isinstance(data, dict):
        raise ExportError(f"field {source} is not a JSON object", code="BAD_FIELD_DOCUMENT")
    try:
        return field_from_dict(data)
    except FieldError as exc:
        raise ExportError(exc.message, code=exc.code) from exc


def complex_rows(records: Sequence[Mapping[str, Any]]) -> tuple[list[str], list[dict[str, Any]]]:
    """Split complex entries into _re/_im columns; columns follow the first record."""
    if not records:
        return [], []
    columns: list[str] = []
    for key, value in records[0].items():
        if isinstance(value, (complex, np.complexfloating)):
            columns += [f"{key}_re", f"{key}_im"]
        elif not isinstance(value, (list, tuple, np.ndarray, Mapping)):
            columns.append(key)
    rows = []
    for record in records:
        row: dict[str, Any] = {}
        for key, value in record.items():
            if isinstance(value, (complex, np.complexfloating)):
                row[f"{key}_re"] = float(value.real)
                row[f"{key}_im"] = float(value.imag)
            else:
                row[key] = value
        rows.append(row)
    return columns, rows


def export_surface_obj(path: str | Path, immersion: ImmersionR3) -> Path:
    """n1 n2 vertices and quads; faces wrap around both periods when the torus closes."""
    target = _open_for_writing(Path(path))
    points = immersion.points
    n1, n2 = immersion.grid.shape
    wrap = immersion.is_closed()
    try:
        with target.open("w", encoding="utf-8") as handle:
            handle.write(f"# spectral-tori surface {n1} x {n2}\n")
            for j in range(n1):
                for k in range(n2):
                    x, y, z = points[:, j, k]
                    handle.write(f"v {float(x)!r} {float(z)!r} {float(-y)!r}\n")
            last1 = n1 if wrap else n1 - 1
            last2 = n2 if wrap else n2 - 1
            for j in range(last1):
                for k in range(last2):
                    # OBJ is 1-indexed
                    a = j * n2 + k + 1
                    b = ((j + 1) % n1) * n2 + k + 1
                    c = ((j + 1) % n1) * n2 + (k + 1) % n2 + 1
                    d = j * n2 + (k + 1) % n2 + 1
                    handle.write(f"f {a} {b} {c} {d}\n")
    except OSError as exc:
        raise ExportError(f"cannot write {target}: {exc}") from exc
    logger.debug("obj_written", path=str(target), vertices=n1 * n2, closed=wrap)
    return target


def load_surface_obj(path: str | Path, grid: FundamentalGrid) -> ImmersionR3:
    """Read the vertices of an exported mesh back onto a grid of the same size.

    Raises:
        ExportError: unreadable file or a vertex count that does not match the grid
    """
    source = Path(path)
    vertices: list[tuple[float, float, float]] = []
    try:
        with source.open(encoding="utf-8") as handle:
            for line in handle:
                if line.startswith("v "):
                    _, x, y, z = line.split()[:4]
                    vertices.append((float(x), -float(z), float(y)))
    except (OSError, ValueError) as exc:
        raise ExportError(f"cannot read mesh {source}: {exc}", code="BAD_MESH") from exc
    n1, n2 = grid.shape
    if len(vertices) != n1 * n2:
        raise ExportError(
            f"mesh {source} has {len(vertices)} vertices, grid needs {n1 * n2}", code="BAD_MESH"
        )
    points = np.asarray(vertices, dtype=float).reshape(n1, n2, 3)
    return ImmersionR3.from_points(grid, np.moveaxis(points, -1, 0))


def report_json(report: RunReport) -> str:
    return json.dumps(jsonable(report.model_dump()), indent=2, sort_keys=True) + "\n"


def export_report_json(path: str | Path, report: RunReport) -> Path:
    target = _open_for_writing(Path(path))
    try:
        target.write_text(report_json(report), encoding="utf-8")
    except OSError as exc:
        raise ExportError(f"cannot write {target}: {exc}") from exc
    return target
