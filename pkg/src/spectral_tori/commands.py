"""Subcommand pipelines.

Each pipeline builds its inputs from an :class:`ExperimentConfig`, records
residuals as checks on a :class:`RunReport` and writes its tables into the
output directory. :func:`run_subcommand` adds the report JSON and turns failed
hard checks into :class:`CheckFailure`.
"""
from __future__ import annotations

import platform
import time
from collections.abc import Callable, Sequence
from importlib import metadata
from pathlib import Path
from typing import Any

import numpy as np
from scipy import signal

from . import __version__
from .config import get_settings
from .core.fields import FieldError, FundamentalGrid, Lattice, PeriodicField, domain_integral
from .errors import CheckFailure, ConfigError, SpectralToriError
from .logging import get_logger
from .models.schemas import SUBCOMMANDS, ExperimentConfig, RunReport, to_complex
from .services import catalog, export
from .services.floquet_1d import (
    Potential1D,
    branch_points,
    kruskal_invariants,
    match_points,
    miura,
    multiplier_table,
    schrodinger_residual,
    zs_monodromy,
)
from .services.floquet_2d import (
    KSlice,
    QuasimomentumPoint,
    ScanResult,
    TruncatedPencil,
    constant_potential_branch,
    extract_c1,
    multiplier_basis_change,
    regrid,
    spectrum_scan,
    trace_branch,
    zero_potential_planes,
    zero_potential_resonances,
)
from .services.isospectral import (
    axial_period,
    conformal_image_check,
    dual_isospectrality,
    kruskal_table,
)
from .services.lax import (
    LaxConnection,
    SinhGordonField,
    cmc_monodromy,
    cmc_prop_map,
    extract_dirac_pair,
    extraction_curve,
    grid_floquet_functions,
    involution_check,
    isothermic_codazzi_residuals,
    isothermic_pencil,
    lax_monodromy,
    liouville_residual,
    pencil_from_surface,
    sign_isospectrality,
    sinh_gordon_solution,
    system_residual,
    vacuum_monodromy_eigenvalues,
    zero_curvature_residual,
)
from .services.moebius import Homothety, Inversion, Isometry, MoebiusMap
from .services.sphere import (
    CLIFFORD_POTENTIAL,
    HitchinFamily,
    SphereError,
    clifford_floquet_function,
    clifford_harmonic_residual,
    clifford_spectrum_map,
    eigenfunction_from_hitchin,
    gauge_residuals,
    harmonic_residuals,
    project_to_r3,
    sphere_dirac_residual,
    spinor_from_s3,
    willmore_s3,
)
from .services.surface_r3 import (
    ImmersionR3,
    closure_defect,
    dual_isothermic,
    dual_spinor,
    fundamental_forms,
    gauss_weingarten_residual,
    spinor_from_surface,
    spinors_agree,
    surface_from_spinor,
    willmore_direct,
    willmore_from_potential,
)

logger = get_logger(__name__)

Pipeline = Callable[[ExperimentConfig, RunReport, Path], None]
PIPELINES: dict[str, Pipeline] = {}

TWO_PI_SQUARED = 2.0 * np.pi**2


def pipeline(name: str) -> Callable[[Pipeline], Pipeline]:
    def register(fn: Pipeline) -> Pipeline:
        PIPELINES[name] = fn
        return fn

    return register


# =============================================================================
# Entry point
# =============================================================================


def run_subcommand(
    name: str,
    config: ExperimentConfig,
    out_dir: str | Path | None = None,
    raise_on_failure: bool = True,
) -> RunReport:
    """Run one pipeline and write ``<name>_report.json``.

    Raises:
        ConfigError: unknown subcommand or unusable configuration
        NumericalError: a computation failed on the configured data
        CheckFailure: at least one hard check failed (report is written first)
    """
    if name not in SUBCOMMANDS:
        raise ConfigError(
            f"unknown subcommand {name!r}; expected one of {', '.join(SUBCOMMANDS)}",
            code="UNKNOWN_SUBCOMMAND",
        )
    out = Path(config.output.directory if out_dir is None else out_dir)
    report = RunReport(subcommand=name, config=config.model_dump(mode="json"), versions=_versions())
    log = logger.bind(subcommand=name)
    log.info("subcommand_started", out=str(out))

    start = time.perf_counter()
    PIPELINES[name](config, report, out)
    elapsed = time.perf_counter() - start
    if config.output.include_timing:
        report.timing = elapsed

    report.tables.append(f"{name}_report.json")
    export.export_report_json(out / f"{name}_report.json", report)
    log.info("subcommand_finished", seconds=round(elapsed, 3), checks=len(report.checks), failed=report.failed)
    if report.failed and raise_on_failure:
        raise CheckFailure(report.failed)
    return report


def _versions() -> dict[str, str]:
    versions = {"spectral_tori": __version__, "python": platform.python_version()}
    for package in ("numpy", "scipy", "pydantic", "structlog"):
        try:
            versions[package] = metadata.version(package)
        except metadata.PackageNotFoundError:
            versions[package] = "unknown"
    return versions


def _write(report: RunReport, out: Path, filename: str, columns: Sequence[str], rows: Sequence[dict[str, Any]]) -> None:
    export.write_csv(out / filename, columns, rows)
    report.tables.append(filename)


def _write_records(report: RunReport, out: Path, filename: str, records: Sequence[dict[str, Any]]) -> None:
    columns, rows = export.complex_rows(records)
    _write(report, out, filename, columns, rows)


def _relative(value: float, reference: float) -> float:
    return abs(value - reference) / max(1.0, abs(reference))


# =============================================================================
# Inputs from configuration
# =============================================================================


def build_lattice(config: ExperimentConfig) -> Lattice:
    spec = config.lattice
    try:
        if spec.kind == "square":
            return Lattice.square(spec.side)
        if spec.kind == "hexagonal":
            return Lattice.hexagonal(spec.side)
        return Lattice(to_complex(spec.gamma1), to_complex(spec.gamma2))
    except FieldError as exc:
        raise ConfigError(exc.message, code=exc.code) from exc


def build_surface(config: ExperimentConfig) -> ImmersionR3:
    """The configured surface as a conformal immersion into R3."""
    spec = config.surface
    n1, n2 = config.grid.n1, config.grid.n2
    if spec.kind == "revolution":
        torus = catalog.TorusOfRevolution(spec.R, spec.r)
        return torus.immersion(torus.grid(n1, n2))
    if spec.kind == "clifford":
        return project_to_r3(catalog.clifford_torus(n1, n2))
    if spec.kind == "flat-s3":
        return project_to_r3(catalog.flat_torus_s3(spec.angle, n1, n2))
    if spec.kind == "plane":
        return catalog.plane(build_lattice(config), n1, n2)
    assert spec.mesh_file is not None
    return export.load_surface_obj(spec.mesh_file, FundamentalGrid(build_lattice(config), n1, n2))


def build_potential(config: ExperimentConfig) -> PeriodicField:
    """The configured potential as a field on the lattice grid (or on the surface grid)."""
    spec = config.potential
    if spec.kind == "from_surface":
        surface = build_surface(config)
        return PeriodicField(surface.grid, fundamental_forms(surface).potential())
    if spec.kind == "field_file":
        assert spec.field_file is not None
        return export.load_field_json(spec.field_file)
    grid = FundamentalGrid(build_lattice(config), config.grid.n1, config.grid.n2)
    if spec.kind == "zero":
        return PeriodicField.constant(grid, 0.0)
    if spec.kind == "constant":
        return PeriodicField.constant(grid, to_complex(spec.value))
    assert spec.samples is not None
    samples = np.asarray(spec.samples, dtype=float)
    if samples.size != grid.n1:
        samples = signal.resample(samples, grid.n1)
    return PeriodicField(grid, np.repeat(samples[:, None], grid.n2, axis=1))


def build_potential_1d(config: ExperimentConfig) -> Potential1D:
    spec = config.potential
    if spec.kind == "zero":
        return Potential1D.constant(0.0, spec.period)
    if spec.kind == "constant":
        return Potential1D.constant(to_complex(spec.value), spec.period)
    if spec.kind == "one_dim":
        assert spec.samples is not None
        return Potential1D(np.asarray(spec.samples, dtype=complex), spec.period)
    if spec.kind == "field_file":
        field = build_potential(config)
        return Potential1D.from_surface(field.values, abs(field.grid.lattice.gamma1))
    surface = build_surface(config)
    return Potential1D.from_surface(fundamental_forms(surface).potential(), axial_period(surface))


def build_moebius(config: ExperimentConfig) -> MoebiusMap:
    spec = config.moebius
    primitives: list[Isometry | Homothety | Inversion] = [Inversion(spec.center, spec.radius)]
    if spec.scale != 1.0:
        primitives.append(Homothety(spec.scale))
    if any(spec.translation):
        primitives.append(Isometry(translation=spec.translation))
    return MoebiusMap(tuple(primitives))


def _lambdas(config: ExperimentConfig, allow_zero: bool) -> list[complex]:
    lams = [to_complex(v) for v in config.lax.lambdas]
    if allow_zero:
        return lams
    kept = [lam for lam in lams if lam != 0]
    if len(kept) < len(lams):
        logger.warning("lambda_skipped", reason="pole of the pencil at 0")
    return kept


def _torus(config: ExperimentConfig) -> catalog.TorusOfRevolution:
    if config.surface.kind != "revolution":
        raise ConfigError(
            f"this subcommand needs surface.kind 'revolution', got {config.surface.kind!r}",
            code="SURFACE_KIND",
        )
    return catalog.TorusOfRevolution(config.surface.R, config.surface.r)


# =============================================================================
# Surfaces
# =============================================================================


@pipeline("clifford")
def run_clifford(config: ExperimentConfig, report: RunReport, out: Path) -> None:
    """Closed-form data of the Clifford torus in S3 and of its stereographic image."""
    immersion = catalog.clifford_torus(config.grid.n1, config.grid.n2)
    spinor = spinor_from_s3(immersion)
    hopf = spinor.hopf()
    report.check("exp_alpha", float(np.max(np.abs(spinor.exp_alpha - 1.0 / np.sqrt(2.0)))), 1e-10)
    report.check("potential", float(np.max(np.abs(spinor.potential - CLIFFORD_POTENTIAL))), 1e-10)
    report.check("hopf_modulus", float(np.max(np.abs(np.abs(hopf) - 0.25))), 1e-10)
    report.check("dirac_residual", spinor.dirac_residual(), 1e-8)
    report.check("constraint_defect", spinor.constraint_defect(), 1e-10)
    gauss, codazzi = spinor.codazzi_residuals()
    report.check("gauss_equation", gauss, 1e-7)
    report.check("codazzi_equation", codazzi, 1e-7)
    _, minimal = harmonic_residuals(immersion)
    report.check("harmonic_residual", minimal, get_settings().harmonic_tolerance)
    w_s3 = willmore_s3(spinor)
    report.check("willmore_s3", abs(w_s3 - TWO_PI_SQUARED), 1e-8)

    closed1, closed2 = catalog.clifford_spinor_closed_form(immersion.grid)
    a = np.stack([spinor.psi1.values, spinor.psi2.values])
    b = np.stack([closed1, closed2])
    report.check("closed_form_spinor", float(min(np.max(np.abs(a - b)), np.max(np.abs(a + b)))), 1e-10, hard=False)

    projected = project_to_r3(immersion)
    data = fundamental_forms(projected)
    w_direct = willmore_direct(data)
    w_potential = willmore_from_potential(spinor_from_surface(projected))
    report.check("willmore_projected_direct", abs(w_direct - TWO_PI_SQUARED), 1e-6)
    report.check("willmore_projected_potential", abs(w_potential - TWO_PI_SQUARED), 1e-6)
    report.check("willmore_routes_agree", abs(w_direct - w_potential), 1e-6)

    export.export_surface_obj(out / "clifford.obj", projected)
    report.tables.append("clifford.obj")
    report.results.update(
        {
            "exp_alpha": float(np.mean(spinor.exp_alpha)),
            "potential": complex(np.mean(spinor.potential)),
            "hopf": complex(np.mean(hopf)),
            "mean_curvature": float(np.mean(spinor.mean_curvature)),
            "character": list(spinor.character),
            "willmore_s3": w_s3,
            "willmore_projected": w_direct,
            "willmore_projected_potential": w_potential,
        }
    )


@pipeline("revolve")
def run_revolve(config: ExperimentConfig, report: RunReport, out: Path) -> None:
    """Spinor of a torus of revolution, its closed forms and the Weierstrass round trip."""
    torus = _torus(config)
    grid = torus.grid(config.grid.n1, config.grid.n2)
    immersion = torus.immersion(grid)
    data = fundamental_forms(immersion)
    psi = spinor_from_surface(immersion)
    rebuilt = surface_from_spinor(psi, immersion.points[:, 0, 0])
    x = grid.points.real

    report.check("round_trip_vertex_error", float(np.max(np.abs(rebuilt.points - immersion.points))), 1e-6)
    closure = closure_defect(psi)
    isothermic = data.isothermic_defect()
    report.check("closure_defect", max(abs(c) for c in closure), 1e-8)
    report.check("dirac_residual", psi.dirac_residual(), 1e-8)
    report.check("gauss_weingarten_residual", gauss_weingarten_residual(psi, data), 1e-7)
    report.check("potential_closed_form", float(np.max(np.abs(data.potential() - torus.potential(x)))), 1e-8)
    report.check(
        "dual_potential_closed_form", float(np.max(np.abs(data.dual_potential() - torus.dual_potential))), 1e-8
    )
    report.check("mean_curvature_closed_form", float(np.max(np.abs(data.mean_curvature - torus.mean_curvature(x)))), 1e-8)
    report.check("isothermic_defect", isothermic, get_settings().isothermic_tolerance)
    w_direct = willmore_direct(data)
    report.check("willmore_closed_form", _relative(w_direct, torus.willmore), 1e-8)

    export.export_surface_obj(out / "revolve.obj", immersion)
    report.tables.append("revolve.obj")
    profile = [
        {
            "x": float(x[j, 0]),
            "exp_alpha": float(data.exp_alpha[j, 0]),
            "mean_curvature": float(data.mean_curvature[j, 0]),
            "potential": float(data.potential()[j, 0]),
            "dual_potential": float(data.dual_potential()[j, 0]),
        }
        for j in range(grid.n1)
    ]
    _write(report, out, "revolve_profile.csv", list(profile[0]), profile)
    report.results.update(
        {
            "period": torus.period,
            "character": list(psi.character),
            "willmore": w_direct,
            "closureDefect": list(closure),
            "isothermicDefect": isothermic,
            "characters": [list(psi.psi1.character), list(psi.psi2.character)],
            "willmore_closed_form": torus.willmore,
            "dual_potential": torus.dual_potential,
        }
    )


@pipeline("potential")
def run_potential(config: ExperimentConfig, report: RunReport, out: Path) -> None:
    """Samples of the configured potential and 4 times the integral of |V|^2."""
    field = build_potential(config)
    grid = field.grid
    values = field.values
    willmore = float(4.0 * domain_integral(grid, np.abs(values) ** 2))
    pencil = TruncatedPencil.from_potential(field, config.scan.cutoff)
    report.check("truncation_tail", pencil.tail, get_settings().truncation_tail_tolerance, hard=False)

    export.export_field_csv(out / "potential.csv", field)
    export.export_field_json(out / "potential_field.json", field)
    report.tables += ["potential.csv", "potential_field.json"]
    report.results.update(
        {
            "lattice": grid.lattice.to_dict(),
            "mean": complex(np.mean(values)),
            "mean_square": float(np.mean(np.abs(values) ** 2)),
            "max_abs": float(np.max(np.abs(values))),
            "willmore_potential": willmore,
            "truncation_tail": pencil.tail,
        }
    )


@pipeline("willmore")
def run_willmore(config: ExperimentConfig, report: RunReport, out: Path) -> None:
    """Willmore energy by the direct integral, by 4 int U^2 and by spectral asymptotics."""
    surface = build_surface(config)
    data = fundamental_forms(surface)
    w_direct = willmore_direct(data)
    w_potential = willmore_from_potential(spinor_from_surface(surface))
    report.check("routes_agree", abs(w_direct - w_potential) / max(1.0, abs(w_direct)), 1e-6)
    if config.surface.kind == "clifford":
        report.check("clifford_minimum", abs(w_direct - TWO_PI_SQUARED), 1e-6)
    if config.surface.kind == "revolution":
        torus = catalog.TorusOfRevolution(config.surface.R, config.surface.r)
        report.check("closed_form", _relative(w_direct, torus.willmore), 1e-6)
        report.check("quadrature", _relative(w_direct, torus.willmore_quadrature()), 1e-6)

    results: dict[str, Any] = {"direct": w_direct, "potential": w_potential}
    potential = data.potential()
    if _x_only(potential):
        u = Potential1D.from_surface(potential, axial_period(surface))
        k1 = kruskal_invariants(miura(u), 1, surface.grid.lattice.gamma2.imag)[0].real
        report.check("kruskal_route", _relative(k1, w_direct), 1e-6)
        results["kruskal"] = k1
    fit = extract_c1(PeriodicField(surface.grid, potential), cutoff=config.scan.cutoff)
    report.check("asymptotic_route", _relative(fit.willmore, w_direct), 1e-4, hard=False)
    results.update({"asymptotic": fit.willmore, "c1": fit.c1, "fit_residual": fit.residual})
    report.results.update(results)


def _x_only(values: np.ndarray, tolerance: float = 1e-8) -> bool:
    spread = float(np.max(np.abs(values - values.mean(axis=1, keepdims=True))))
    return spread <= tolerance * (1.0 + float(np.max(np.abs(values))))


# =============================================================================
# One-dimensional spectra
# =============================================================================


@pipeline("spectrum1d")
def run_spectrum1d(config: ExperimentConfig, report: RunReport, out: Path) -> None:
    """Branch and resonance points of Tr^2 - 4 and the monodromy along the real axis."""
    potential = build_potential_1d(config)
    scan = config.scan
    curve = branch_points(potential, scan.region, scan.box_width, scan.budget)
    report.check("search_complete", 1.0 if curve.incomplete else 0.0, 0.0, hard=False)

    lams = np.linspace(scan.region[0], scan.region[1], 100).astype(complex)
    monodromy = zs_monodromy(potential, lams)
    det_defect = float(np.max(np.abs(np.linalg.det(monodromy) - 1.0)))
    report.check("determinant_defect", det_defect, get_settings().determinant_tolerance)
    trace = np.trace(monodromy, axis1=-2, axis2=-1)
    period = potential.period

    if potential.is_constant:
        c = complex(potential.samples[0])
        if c == 0:
            oracle = 2.0 * np.cos(lams * period)
            report.check("zero_potential_trace", float(np.max(np.abs(trace - oracle))), 1e-10)
        else:
            oracle = np.array([_constant_trace(c, lam, period) for lam in lams])
            report.check("constant_trace_oracle", float(np.max(np.abs(trace - oracle))), 1e-9)
            stepped = Potential1D.from_function(lambda x: np.full(x.shape, c), period)
            stepped_trace = np.trace(zs_monodromy(stepped, lams), axis1=-2, axis2=-1)
            report.check("constant_trace_integrated", float(np.max(np.abs(stepped_trace - oracle))), 1e-9)

    _write_records(report, out, "spectrum1d.csv", multiplier_table(potential, list(lams)))
    points = [{"kind": "branch", "lambda": p} for p in curve.branch_points]
    points += [{"kind": "resonance", "lambda": p} for p in curve.resonance_points]
    _write(report, out, "spectrum1d_points.csv", ["kind", "lambda_re", "lambda_im"], export.complex_rows(points)[1])
    report.results.update(
        {
            "period": period,
            "branch_points": curve.branch_points,
            "resonance_points": curve.resonance_points,
            "genus_estimate": curve.genus_estimate,
            "boxes_examined": curve.boxes_examined,
            "incomplete": curve.incomplete,
        }
    )


def _constant_trace(c: complex, lam: complex, period: float) -> complex:
    """Trace of exp(A) from the eigendecomposition of A = T [[-i l, 2c], [-2c, i l]]."""
    a = period * np.array([[-1j * lam, 2.0 * c], [-2.0 * c, 1j * lam]])
    values, vectors = np.linalg.eig(a)
    if np.linalg.cond(vectors) > 1e8:
        # A nilpotent up to rounding: exp(A) = 1 + A
        return 2.0 + complex(np.trace(a))
    return complex(np.trace(vectors @ np.diag(np.exp(values)) @ np.linalg.inv(vectors)))


@pipeline("kruskal")
def run_kruskal(config: ExperimentConfig, report: RunReport, out: Path) -> None:
    """Kruskal integrals of the Miura image of the surface potential; K1 is the Willmore energy."""
    surface = build_surface(config)
    data = fundamental_forms(surface)
    u = Potential1D.from_surface(data.potential(), axial_period(surface))
    transverse = surface.grid.lattice.gamma2.imag
    values = kruskal_invariants(miura(u), config.kruskal_count, transverse)
    other = kruskal_invariants(miura(u, "U2"), config.kruskal_count, transverse)
    w_direct = willmore_direct(data)
    report.check("k1_willmore", _relative(values[0].real, w_direct), 1e-6)
    report.check("k1_real", abs(values[0].imag), 1e-8, hard=False)

    lams = _lambdas(config, allow_zero=True)
    for convention in ("4U2", "U2"):
        worst = max(schrodinger_residual(u, lam, convention) for lam in lams)
        report.check(f"schrodinger_{convention}", worst, 1e-6, hard=False)

    rows = [
        {"l": i + 1, "k": k, "k_u2": k2} for i, (k, k2) in enumerate(zip(values, other, strict=True))
    ]
    _write_records(report, out, "kruskal.csv", rows)
    report.results.update({"kruskal": values, "kruskal_u2": other, "willmore": w_direct})


@pipeline("dual")
def run_dual(config: ExperimentConfig, report: RunReport, out: Path) -> None:
    """Kruskal integrals and branch points of U and of the dual potential U*."""
    surface = build_surface(config)
    result = dual_isospectrality(surface, config.kruskal_count, config.scan.region)
    report.check("kruskal_agree", result.max_relative_difference, 1e-6)
    report.check("branch_points_agree", result.branch_point_distance, 1e-5, hard=False)

    data = fundamental_forms(surface)
    psi = spinor_from_surface(surface)
    dual = dual_spinor(psi, data.dual_potential())
    report.check("dual_spinor_residual", dual.dirac_residual(), 1e-7, hard=False)
    numeric = spinor_from_surface(dual_isothermic(surface))
    report.check("dual_spinor_matches_surface", spinors_agree(dual, numeric), 1e-6, hard=False)

    _write_records(report, out, "dual_kruskal.csv", list(kruskal_table(result.kruskal)))
    report.results.update(
        {
            "kruskal_potential": result.kruskal.first,
            "kruskal_dual": result.kruskal.second,
            "branch_point_distance": result.branch_point_distance,
            "dual_potential_mean": complex(np.mean(result.dual_potential.samples)),
        }
    )


# =============================================================================
# Two-dimensional spectra
# =============================================================================


def _slice(config: ExperimentConfig, plane: str | None = None, fixed: complex | None = None, center: complex | None = None) -> KSlice:
    scan = config.scan
    plane = scan.plane if plane is None else plane
    fixed = to_complex(scan.fixed) if fixed is None else fixed
    center = to_complex(scan.center) if center is None else center
    if plane == "lambda":
        return KSlice.lambda_plane(fixed, center, scan.half_widths, scan.points)
    return KSlice.w_plane(fixed, center, scan.half_widths, scan.points)


def _zero_set_distance(first: Sequence[complex], second: Sequence[complex], kslice: KSlice) -> float:
    """Largest distance from a zero well inside the slice to the other set, both ways."""
    margin = -kslice.cell
    worst = 0.0
    for a, b in ((first, second), (second, first)):
        for z in a:
            if kslice.contains(complex(z), margin):
                worst = max(worst, min((abs(z - w) for w in b), default=float("inf")))
    return worst


def _analytic_plane_distance(scan: ScanResult, config: ExperimentConfig, lattice: Lattice) -> float | None:
    """Distance of the zero set of V = 0 from its closed form, or None when the whole slice is spectral."""
    lams, ws = zero_potential_planes(lattice, config.scan.cutoff + 2)
    moving, other = (lams, ws) if config.scan.plane == "lambda" else (ws, lams)
    fixed = to_complex(config.scan.fixed)
    if any(abs(o - fixed) <= 1e-12 * (1.0 + abs(o)) for o in other):
        return None
    center = to_complex(config.scan.center)
    return _zero_set_distance([p - center for p in moving], scan.zero_parameters(), scan.kslice)


def _resonance_residual(lattice: Lattice, max_index: int = 3) -> float:
    """Multipliers at (l, W) = (a(kappa), 0) against those at (0, b(kappa))."""
    worst = 0.0
    for plus, minus in zero_potential_resonances(lattice, max_index):
        first = QuasimomentumPoint.from_lambda_w(plus, 0.0).multipliers(lattice)
        second = QuasimomentumPoint.from_lambda_w(0.0, minus).multipliers(lattice)
        for mu, nu in zip(first, second, strict=True):
            worst = max(worst, abs(mu - nu) / max(1.0, abs(mu)))
    return worst


@pipeline("spectrum2d")
def run_spectrum2d(config: ExperimentConfig, report: RunReport, out: Path) -> None:
    """Witness scan of a slice of k-space with the symmetry and basis checks it admits."""
    field = build_potential(config)
    lattice = field.grid.lattice
    scan_spec = config.scan
    kslice = _slice(config)
    scan = spectrum_scan(field, kslice, scan_spec.cutoff, scan_spec.zero_factor, scan_spec.witness)
    cell = kslice.cell
    report.check("truncation_adequate", 0.0 if scan.truncation_adequate else 1.0, 0.0, hard=False)
    export.export_spectrum_csv(out / "spectrum2d.csv", scan.samples)
    export.export_spectrum_csv(out / "spectrum2d_zeros.csv", scan.zeros)
    report.tables += ["spectrum2d.csv", "spectrum2d_zeros.csv"]

    values = field.values
    is_zero = not np.any(values)
    is_constant = bool(np.all(values == values.flat[0]))
    is_real = not np.any(values.imag)
    origin_zero = to_complex(scan_spec.fixed) == 0 and to_complex(scan_spec.center) == 0
    results: dict[str, Any] = {
        "zeros": scan.zero_parameters(),
        "median_witness": scan.median,
        "threshold": scan.threshold,
        "cell": cell,
    }

    if is_zero:
        distance = _analytic_plane_distance(scan, config, lattice)
        results["degenerate_slice"] = distance is None
        if distance is None:
            logger.warning("slice_inside_spectrum", plane=scan_spec.plane, fixed=str(to_complex(scan_spec.fixed)))
        else:
            report.check("analytic_planes", distance, cell)
        report.check("resonance_pairs", _resonance_residual(lattice), 1e-10)

    if is_real and origin_zero and not is_zero:
        negation, _ = scan.symmetry_residuals()
        report.check("symmetry_negation", negation, cell)
        other_plane = "w" if scan_spec.plane == "lambda" else "lambda"
        mirror = spectrum_scan(field, _slice(config, plane=other_plane), scan_spec.cutoff, scan_spec.zero_factor, scan_spec.witness)
        conjugated = [complex(np.conj(z)) for z in scan.zero_parameters()]
        report.check("symmetry_conjugation", _zero_set_distance(conjugated, mirror.zero_parameters(), kslice), cell)

    pencil = TruncatedPencil.from_potential(field, scan_spec.cutoff)
    checked = scan.samples[:: max(1, len(scan.samples) // 7)]
    translation = 0.0
    for sample in checked:
        for kappa in lattice.dual_generators:
            shifted = sample.k.shifted(kappa)
            translation = max(translation, abs(pencil.witness(shifted) - pencil.witness(sample.k)))
            for mu, nu in zip(shifted.multipliers(lattice), sample.multipliers, strict=True):
                translation = max(translation, abs(mu - nu) / max(1.0, abs(nu)))
    report.check("dual_translation_invariance", translation, 1e-10)

    basis = ((1, 1), (0, 1))
    changed_lattice = lattice.change_basis(basis)
    law = 0.0
    for sample, moved in zip(checked, multiplier_basis_change(checked, basis), strict=True):
        for mu, nu in zip(moved.multipliers, sample.k.multipliers(changed_lattice), strict=True):
            law = max(law, abs(mu - nu) / max(1.0, abs(nu)))
    report.check("basis_change_law", law, 1e-12)

    n1, n2 = field.grid.shape
    if n2 % n1 == 0:
        moved_scan = spectrum_scan(regrid(field, basis), kslice, scan_spec.cutoff, scan_spec.zero_factor, scan_spec.witness)
        report.check(
            "basis_change_spectrum",
            _zero_set_distance(scan.zero_parameters(), moved_scan.zero_parameters(), kslice),
            cell,
            hard=is_constant,
        )
    else:
        logger.warning("basis_change_grid_incompatible", shape=[n1, n2])

    if not is_zero:
        results.update(_branch_and_fit(config, field, report, out, is_constant))
    report.results.update(results)


def _branch_and_fit(
    config: ExperimentConfig, field: PeriodicField, report: RunReport, out: Path, is_constant: bool
) -> dict[str, Any]:
    """Trace the sheet W -> 0 along a ray and fit its large-l coefficient C1."""
    scan_spec = config.scan
    r0, r1 = scan_spec.branch_radii
    lams = np.linspace(r0, r1, scan_spec.branch_points) * np.exp(0.3j)
    branch = trace_branch(field, list(lams), cutoff=scan_spec.cutoff)
    fit = extract_c1(field, cutoff=scan_spec.cutoff)
    willmore = float(4.0 * domain_integral(field.grid, np.abs(field.values) ** 2))
    report.check("branch_complete", 1.0 if branch.partial else 0.0, 0.0, hard=is_constant)
    report.check("c1_willmore", _relative(fit.willmore, willmore), 1e-4, hard=is_constant)

    rows: list[dict[str, Any]] = []
    if is_constant:
        c = complex(field.values.flat[0])
        traced = np.array([s.k.w for s in branch.samples])
        expected = constant_potential_branch(c, [s.parameter for s in branch.samples])
        deviation = float(np.max(np.abs(traced - expected))) if traced.size else float("inf")
        report.check("constant_branch", deviation, 1e-8)
        report.check("c1_closed_form", abs(fit.c1 + abs(c) ** 2), 1e-4)
        rows = [
            {"lambda": s.parameter, "w": s.k.w, "w_closed_form": e}
            for s, e in zip(branch.samples, expected, strict=True)
        ]
    else:
        rows = [{"lambda": s.parameter, "w": s.k.w} for s in branch.samples]
    _write_records(report, out, "spectrum2d_branch.csv", rows)
    return {
        "branch_partial": branch.partial,
        "c1": fit.c1,
        "c3": fit.c3,
        "c5": fit.c5,
        "fit_residual": fit.residual,
        "fit_reliable": fit.reliable,
        "willmore_asymptotic": fit.willmore,
        "willmore_potential": willmore,
    }


# =============================================================================
# Lax pencils
# =============================================================================


@pipeline("cmc-curve")
def run_cmc_curve(config: ExperimentConfig, report: RunReport, out: Path) -> None:
    """Sinh-Gordon profile, both CMC pencils, monodromy symmetries and the propagation map."""
    field = sinh_gordon_solution(config.lax.amplitude, config.grid.n1, config.grid.n2)
    lams = _lambdas(config, allow_zero=False)
    if not lams:
        raise ConfigError("cmc-curve needs at least one nonzero lambda", code="NO_LAMBDA")
    report.check("sinh_gordon_residual", field.residual, 1e-8)

    zcc = LaxConnection.cmc(field, "cmc-zcc")
    geom = LaxConnection.cmc(field, "cmc-geom")
    flatness = {tag: [zero_curvature_residual(c, lam) for lam in lams] for tag, c in (("zcc", zcc), ("geom", geom))}
    for tag, values in flatness.items():
        report.check(f"zero_curvature_{tag}", max(values), get_settings().lax_tolerance)
        report.check(f"lambda_independence_{tag}", max(values) - min(values), 1e-9)

    vacuum = SinhGordonField.vacuum(field.grid)
    period = zcc.period
    rows: list[dict[str, Any]] = []
    worst = {"involution": 0.0, "liouville": 0.0, "vacuum": 0.0, "floquet": 0.0, "prop_map": 0.0}
    for lam in lams:
        monodromy = cmc_monodromy(field, lam)
        involution = involution_check(zcc, lam)
        worst["involution"] = max(worst["involution"], involution.eigenvalue_distance)
        worst["liouville"] = max(worst["liouville"], liouville_residual(zcc, monodromy))
        expected = vacuum_monodromy_eigenvalues(lam, period)
        got = cmc_monodromy(vacuum, lam).eigenvalues
        scale = 1.0 + max(abs(e) for e in expected)
        worst["vacuum"] = max(worst["vacuum"], match_points(list(got), list(expected)) / scale)
        for phi in grid_floquet_functions(zcc, lam):
            worst["floquet"] = max(worst["floquet"], system_residual(zcc, lam, phi))
            propagated = cmc_prop_map(phi, field.alpha, lam)
            if propagated.residual is not None:
                worst["prop_map"] = max(worst["prop_map"], propagated.residual)
        e1, e2 = monodromy.eigenvalues
        rows.append(
            {
                "lambda": lam,
                "eigenvalue1": complex(e1),
                "eigenvalue2": complex(e2),
                "condition": involution.condition,
                "monodromy_error": monodromy.error,
            }
        )
    report.check("involution_eigenvalues", worst["involution"], 1e-9)
    report.check("liouville", worst["liouville"], 1e-9)
    report.check("vacuum_monodromy", worst["vacuum"], 1e-9)
    report.check("floquet_residual", worst["floquet"], 1e-7)
    report.check("prop_map_residual", worst["prop_map"], 1e-7)

    perturbed = field.perturbed(1e-3, config.seed)
    _write_records(report, out, "cmc_monodromy.csv", rows)
    report.results.update(
        {
            "period": period,
            "amplitude": config.lax.amplitude,
            "sinh_gordon_residual": field.residual,
            "perturbed_residual": perturbed.residual,
            "zero_curvature": flatness,
        }
    )


@pipeline("isothermic-pencil")
def run_isothermic_pencil(config: ExperimentConfig, report: RunReport, out: Path) -> None:
    """The 4x4 pencil of a torus of revolution and the Dirac pairs it carries at l = 0."""
    torus = catalog.TorusOfRevolution(config.surface.R, config.surface.r)
    grid = torus.grid(config.grid.n1, config.grid.n2)
    x = grid.points.real
    alpha = np.log(torus.exp_alpha(x))
    k1, k2 = torus.line_curvatures(x)
    gauss, codazzi1, codazzi2 = isothermic_codazzi_residuals(grid, alpha, k1, k2)
    tolerance = get_settings().codazzi_tolerance
    report.check("gauss", gauss, tolerance)
    report.check("codazzi_first", codazzi1, tolerance)
    report.check("codazzi_second", codazzi2, tolerance)

    connection = isothermic_pencil(grid, alpha, k1, k2)
    lams = _lambdas(config, allow_zero=True)
    flatness = max(zero_curvature_residual(connection, lam) for lam in lams)
    report.check("zero_curvature", flatness, get_settings().lax_tolerance)
    involution = max(involution_check(connection, lam).eigenvalue_distance for lam in lams)
    report.check("involution_eigenvalues", involution, 1e-9)
    liouville = max(liouville_residual(connection, lax_monodromy(connection, lam)) for lam in lams)
    report.check("liouville", liouville, 1e-9)

    pairs = [extract_dirac_pair(phi, connection) for phi in grid_floquet_functions(connection, 0.0)]
    best = min(pairs, key=lambda p: p.residual + p.residual_star)
    report.check("extraction_residual", best.residual, 1e-7)
    report.check("extraction_residual_dual", best.residual_star, 1e-7)
    potential = torus.potential(x)
    plus, minus = sign_isospectrality(best.psi, potential)
    report.check("sign_isospectrality", max(plus, minus), 1e-7, hard=False)

    numeric = pencil_from_surface(fundamental_forms(torus.immersion(grid)))
    report.check("surface_pencil_zero_curvature", zero_curvature_residual(numeric, lams[0] if lams else 1.0), 1e-6, hard=False)

    curve = extraction_curve(connection, [0.0] + [lam for lam in lams if lam != 0])
    _write_records(report, out, "isothermic_extraction.csv", curve)
    report.results.update(
        {
            "multipliers": list(best.multipliers),
            "extraction_curve": [{"lambda": r["lambda"], "residual": r["residual"]} for r in curve],
        }
    )


# =============================================================================
# S3 and Moebius geometry
# =============================================================================


@pipeline("s3-spectrum")
def run_s3_spectrum(config: ExperimentConfig, report: RunReport, out: Path) -> None:
    """Clifford Floquet functions, the Hitchin family and the gauge to D^S."""
    immersion = catalog.clifford_torus(config.grid.n1, config.grid.n2)
    grid = immersion.grid
    spinor = spinor_from_s3(immersion)
    lams = _lambdas(config, allow_zero=False)
    if not lams:
        raise ConfigError("s3-spectrum needs at least one nonzero lambda", code="NO_LAMBDA")

    pencil = TruncatedPencil.from_potential(PeriodicField.constant(grid, CLIFFORD_POTENTIAL), config.scan.cutoff)
    rows: list[dict[str, Any]] = []
    worst = {"dirac": 0.0, "harmonic": 0.0, "multipliers": 0.0, "branch": 0.0}
    for lam in lams:
        psi = clifford_floquet_function(grid, lam)
        worst["dirac"] = max(worst["dirac"], sphere_dirac_residual(grid, psi.values, psi.shifts, CLIFFORD_POTENTIAL))
        worst["harmonic"] = max(worst["harmonic"], clifford_harmonic_residual(psi))
        expected = clifford_spectrum_map(lam)
        for mu, nu in zip(psi.multipliers, expected, strict=True):
            worst["multipliers"] = max(worst["multipliers"], abs(mu - nu) / max(1.0, abs(nu)))
        w = complex(constant_potential_branch(CLIFFORD_POTENTIAL, lam))
        worst["branch"] = max(worst["branch"], pencil.witness(QuasimomentumPoint.from_lambda_w(lam, w)))
        rows.append({"lambda": lam, "w": w, "mu1": expected[0], "mu2": expected[1]})
    report.check("floquet_dirac_residual", worst["dirac"], 1e-8)
    report.check("floquet_harmonic_residual", worst["harmonic"], 1e-8)
    report.check("spectrum_map", worst["multipliers"], 1e-10)
    report.check("constant_branch_witness", worst["branch"], 1e-10)

    family = HitchinFamily.from_immersion(immersion)
    placements = {p: max(family.flatness_residual(lam, p) for lam in lams) for p in ("family", "eigenfunction")}
    l1, l2 = gauge_residuals(spinor, immersion)
    report.check("gauge_conjugation", max(l1, l2), 1e-8)
    gauged = [eigenfunction_from_hitchin(family, spinor, lam) for lam in lams]
    report.check("gauged_dirac_residual", max(g.residual for g in gauged), 1e-8)
    signs_match = all(g.residual <= g.unsigned_residual for g in gauged)
    report.check("gauged_character_signs", 0.0 if signs_match else 1.0, 0.0, hard=spinor.character != (1, 1))

    projected = fundamental_forms(project_to_r3(immersion))
    r3_willmore = float(4.0 * domain_integral(grid, projected.potential() ** 2))

    angle = config.surface.angle if abs(config.surface.angle - np.pi / 4.0) > 1e-3 else np.pi / 6.0
    flat = catalog.flat_torus_s3(angle, config.grid.n1, config.grid.n2)
    flat_spinor = spinor_from_s3(flat)
    report.check(
        "flat_mean_curvature", float(np.max(np.abs(flat_spinor.mean_curvature - 1.0 / np.tan(2.0 * angle)))), 1e-8
    )
    try:
        HitchinFamily.from_immersion(flat)
        rejected = ""
    except SphereError as exc:
        rejected = exc.code
    report.check("non_harmonic_rejected", 0.0 if rejected == "NOT_HARMONIC" else 1.0, 0.0)

    _write_records(report, out, "s3_spectrum.csv", rows)
    report.results.update(
        {
            "flatness_by_placement": placements,
            "flat_placement": min(placements, key=lambda p: placements[p]),
            "hitchin_multipliers": [list(g.hitchin_multipliers) for g in gauged],
            "spinor_character": list(spinor.character),
            "willmore_s3": willmore_s3(spinor),
            "willmore_r3_projection": r3_willmore,
            "negative_control_angle": angle,
            "negative_control_error": rejected,
        }
    )


@pipeline("moebius")
def run_moebius(config: ExperimentConfig, report: RunReport, out: Path) -> None:
    """Dual potential, Blaschke density and spectral data of a conformal image."""
    surface = build_surface(config)
    moebius = build_moebius(config)
    result = conformal_image_check(surface, moebius, config.kruskal_count, config.scan.region)
    report.check("dual_potential", result.dual_potential_defect, 1e-6)
    report.check("blaschke_density", result.blaschke_defect, 1e-6)
    report.check("willmore_invariance", _relative(result.willmore_after, result.willmore_before), 1e-6)
    if result.kruskal is not None:
        report.check("kruskal", result.kruskal.max_relative_difference, 1e-5)
    if result.branch_point_distance is not None:
        report.check("branch_points", result.branch_point_distance, 1e-5)
    if result.kruskal is not None:
        _write_records(report, out, "moebius_kruskal.csv", list(kruskal_table(result.kruskal)))
    report.results.update(result.as_dict())


# =============================================================================
# Full suite
# =============================================================================


VERIFY_SUITE: tuple[tuple[str, dict[str, Any]], ...] = (
    ("clifford", {}),
    ("revolve", {"surface.kind": "revolution"}),
    ("willmore", {"surface.kind": "clifford"}),
    ("kruskal", {"surface.kind": "revolution"}),
    ("dual", {"surface.kind": "revolution"}),
    ("spectrum1d", {"potential.kind": "zero"}),
    ("spectrum2d", {"potential.kind": "zero", "scan.fixed": [0.3, 0.2]}),
    ("spectrum2d", {"potential.kind": "constant", "potential.value": [0.2, 0.0]}),
    ("cmc-curve", {}),
    ("isothermic-pencil", {"surface.kind": "revolution"}),
    ("s3-spectrum", {}),
    ("moebius", {"surface.kind": "revolution"}),
)


def _variant(config: ExperimentConfig, overrides: dict[str, Any]) -> ExperimentConfig:
    data = config.model_dump(mode="json")
    for key, value in overrides.items():
        node = data
        *parents, leaf = key.split(".")
        for part in parents:
            node = node[part]
        node[leaf] = value
    return ExperimentConfig.model_validate(data)


@pipeline("verify")
def run_verify(config: ExperimentConfig, report: RunReport, out: Path) -> None:
    """Every pipeline on builtin inputs; sub-reports go to ``verify/<n>_<name>``."""
    summary: dict[str, Any] = {}
    for index, (name, overrides) in enumerate(VERIFY_SUITE):
        label = f"{index:02d}_{name}"
        try:
            sub = run_subcommand(name, _variant(config, overrides), out / "verify" / label, raise_on_failure=False)
        except SpectralToriError as exc:
            logger.error("verify_step_failed", step=label, error=exc.code)
            report.check(f"{label}.completed", None, 0.0)
            summary[label] = {"error": exc.to_dict()}
            continue
        for check in sub.checks:
            report.checks.append(check.model_copy(update={"name": f"{label}.{check.name}"}))
        summary[label] = {"checks": len(sub.checks), "failed": sub.failed}
        report.tables.append(f"verify/{label}/{name}_report.json")
    report.results["suite"] = summary
    report.results["failed"] = report.failed
