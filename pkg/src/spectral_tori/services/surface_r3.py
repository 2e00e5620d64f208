"""Surfaces in R3 in a conformal parameter.

Fundamental forms, the Weierstrass spinor of a surface and the surface of a
spinor, potentials, Willmore energy, closure of periods and dual isothermic
surfaces. All differentiation is spectral on the parameter grid.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from numpy.typing import ArrayLike, NDArray

from ..config import get_settings
from ..core.fields import (
    Character,
    FundamentalGrid,
    PeriodicField,
    domain_integral,
    dz,
    dzbar,
    integrate_wirtinger,
    wirtinger,
)
from ..errors import NumericalError
from ..logging import get_logger

logger = get_logger(__name__)

ComplexArray = NDArray[np.complex128]
RealArray = NDArray[np.float64]


class SurfaceError(NumericalError):
    """Base error for surface operations."""

    def __init__(self, message: str, code: str = "SURFACE_ERROR"):
        super().__init__(message, code=code)


class ConformalityError(SurfaceError):
    """The parameter is not conformal for the induced metric."""

    def __init__(self, defect: float, location: tuple[float, float]):
        self.defect = defect
        self.location = location
        super().__init__(
            f"conformality defect {defect:.3e} at (s, t) = ({location[0]:.4f}, {location[1]:.4f})",
            code="CONFORMALITY_DEFECT",
        )


class DegenerateSpinorError(SurfaceError):
    """Both candidate spinor squares vanish."""

    def __init__(self, location: tuple[float, float]):
        self.location = location
        super().__init__(
            f"spinor components vanish together at (s, t) = ({location[0]:.4f}, {location[1]:.4f})",
            code="DEGENERATE_SPINOR",
        )


class SpinStructureError(SurfaceError):
    """Square-root continuation does not close up with a sign."""

    def __init__(self, message: str):
        super().__init__(message, code="INCONSISTENT_SPIN_STRUCTURE")


def _grid_location(grid: FundamentalGrid, flat_index: int) -> tuple[float, float]:
    j, k = np.unravel_index(flat_index, grid.shape)
    return float(j) / grid.n1, float(k) / grid.n2


# =============================================================================
# Immersions and their fundamental forms
# =============================================================================


@dataclass(frozen=True, eq=False)
class ImmersionR3:
    """F = P + s tau1 + t tau2 with P periodic; F(z + gamma_j) = F(z) + tau_j."""

    grid: FundamentalGrid
    periodic: RealArray
    periods: RealArray

    def __post_init__(self) -> None:
        periodic = np.array(self.periodic, dtype=float)
        periods = np.array(self.periods, dtype=float)
        if periodic.shape != (3,) + self.grid.shape or periods.shape != (2, 3):
            raise SurfaceError(
                f"immersion arrays have shapes {periodic.shape} and {periods.shape}",
                code="SHAPE_MISMATCH",
            )
        if not (np.all(np.isfinite(periodic)) and np.all(np.isfinite(periods))):
            raise SurfaceError("immersion samples must be finite", code="NON_FINITE_VALUES")
        periodic.setflags(write=False)
        periods.setflags(write=False)
        object.__setattr__(self, "periodic", periodic)
        object.__setattr__(self, "periods", periods)

    @classmethod
    def from_points(
        cls, grid: FundamentalGrid, points: ArrayLike, periods: ArrayLike | None = None
    ) -> ImmersionR3:
        """Split sampled points into periodic part and linear growth."""
        pts = np.asarray(points, dtype=float)
        tau = np.zeros((2, 3)) if periods is None else np.asarray(periods, dtype=float)
        s, t = grid.st
        periodic = pts - s * tau[0][:, None, None] - t * tau[1][:, None, None]
        return cls(grid, periodic, tau)

    @cached_property
    def points(self) -> RealArray:
        s, t = self.grid.st
        pts: RealArray = self.periodic + s * self.periods[0][:, None, None] + t * self.periods[1][:, None, None]
        return pts

    def closure_norm(self) -> float:
        """|tau1| + |tau2|; zero for a closed torus."""
        return float(np.linalg.norm(self.periods[0]) + np.linalg.norm(self.periods[1]))

    def is_closed(self, tolerance: float = 1e-8) -> bool:
        return self.closure_norm() < tolerance

    def derivative_z(self) -> ComplexArray:
        """F_z including the contribution of the translation periods."""
        cs, ct = self.grid.lattice.wirtinger_coefficients
        fz, _ = wirtinger(self.grid, self.periodic)
        linear = self.periods[0] * cs + self.periods[1] * ct
        result: ComplexArray = fz + linear[:, None, None]
        return result

    def translated(self, offset: ArrayLike) -> ImmersionR3:
        return ImmersionR3(self.grid, self.periodic + np.asarray(offset, dtype=float)[:, None, None], self.periods)


@dataclass(frozen=True, eq=False)
class SurfaceData:
    """Metric, normal and second fundamental form of a conformal immersion."""

    grid: FundamentalGrid
    exp_alpha: RealArray
    mean_curvature: RealArray
    gauss_curvature: RealArray
    hopf: ComplexArray
    b: RealArray
    normal: RealArray
    conformality_defect: float

    @property
    def alpha(self) -> RealArray:
        return np.log(self.exp_alpha)

    def potential(self) -> RealArray:
        """U = H e^alpha / 2."""
        return 0.5 * self.mean_curvature * self.exp_alpha

    def dual_potential(self) -> RealArray:
        """U* = -Re(A) e^{-alpha}, the potential of the dual isothermic surface."""
        return -self.hopf.real / self.exp_alpha

    def principal_curvatures(self) -> tuple[RealArray, RealArray]:
        """(k_max, k_min) = H +/- 2|A| e^{-2 alpha}."""
        spread = 2.0 * np.abs(self.hopf) / self.exp_alpha**2
        return self.mean_curvature + spread, self.mean_curvature - spread

    def line_curvatures(self) -> tuple[RealArray, RealArray]:
        """Normal curvatures along the x and y parameter lines."""
        e2a = self.exp_alpha**2
        return 2.0 * (self.b + self.hopf.real) / e2a, 2.0 * (self.b - self.hopf.real) / e2a

    def blaschke_density(self) -> RealArray:
        """16 |A|^2 e^{-2 alpha}, the conformally invariant Willmore density."""
        return 16.0 * np.abs(self.hopf) ** 2 / self.exp_alpha**2

    def isothermic_defect(self) -> float:
        """max |Im A| relative to 1 + max |A|."""
        return float(np.max(np.abs(self.hopf.imag)) / (1.0 + np.max(np.abs(self.hopf))))

    def codazzi_residuals(self) -> tuple[float, float]:
        """Residuals of the Gauss and Codazzi equations in conformal form."""
        alpha_z, _ = wirtinger(self.grid, self.alpha)
        _, alpha_zzbar = wirtinger(self.grid, alpha_z)
        e2a = self.exp_alpha**2
        gauss = alpha_zzbar + (self.b**2 - np.abs(self.hopf) ** 2) / e2a
        _, hopf_zbar = wirtinger(self.grid, self.hopf)
        h_z, _ = wirtinger(self.grid, self.mean_curvature)
        codazzi = hopf_zbar - 0.5 * h_z * e2a
        return float(np.max(np.abs(gauss))), float(np.max(np.abs(codazzi)))


def fundamental_forms(immersion: ImmersionR3, tolerance: float | None = None) -> SurfaceData:
    """Metric, normal, Hopf differential and curvatures of a conformal immersion.

    Raises:
        ConformalityError: |<F_z, F_z>| exceeds tolerance * mean(e^{2 alpha})
        SurfaceError: the metric degenerates somewhere (not an immersion)
    """
    tol = get_settings().conformality_tolerance if tolerance is None else tolerance
    grid = immersion.grid
    fz = immersion.derivative_z()
    e2a = 2.0 * np.sum(np.abs(fz) ** 2, axis=0)
    scale = float(np.mean(e2a))
    if scale <= 0.0 or np.min(e2a) <= 1e-14 * scale:
        idx = int(np.argmin(e2a))
        raise SurfaceError(
            f"metric degenerates at (s, t) = {_grid_location(grid, idx)}", code="NOT_IMMERSED"
        )
    defect = np.abs(np.sum(fz**2, axis=0))
    worst = int(np.argmax(defect))
    relative = float(defect.ravel()[worst]) / scale
    if relative > tol:
        raise ConformalityError(relative, _grid_location(grid, worst))

    fx = 2.0 * fz.real
    fy = -2.0 * fz.imag
    cross = np.cross(fx, fy, axis=0)
    normal = cross / np.linalg.norm(cross, axis=0)

    fzz, fzzbar = wirtinger(grid, fz)
    hopf = np.sum(fzz * normal, axis=0)
    b = np.sum(fzzbar * normal, axis=0).real
    return SurfaceData(
        grid=grid,
        exp_alpha=np.sqrt(e2a),
        mean_curvature=2.0 * b / e2a,
        gauss_curvature=4.0 * (b**2 - np.abs(hopf) ** 2) / e2a**2,
        hopf=hopf,
        b=b,
        normal=normal,
        conformality_defect=relative,
    )


def willmore_direct(data: SurfaceData) -> float:
    """Integral of H^2 e^{2 alpha} dx dy."""
    return float(domain_integral(data.grid, data.mean_curvature**2 * data.exp_alpha**2))


# =============================================================================
# Weierstrass spinors
# =============================================================================


@dataclass(frozen=True, eq=False)
class WeierstrassSpinor:
    """(psi1, psi2) solving D psi = 0 with real potential U."""

    psi1: PeriodicField
    psi2: PeriodicField
    potential: PeriodicField

    def __post_init__(self) -> None:
        if self.psi1.grid != self.psi2.grid or self.potential.grid != self.psi1.grid:
            raise SurfaceError("spinor components live on different grids", code="GRID_MISMATCH")
        if self.psi1.character != self.psi2.character:
            raise SurfaceError(
                f"spinor components have characters {self.psi1.character} and {self.psi2.character}",
                code="CHARACTER_MISMATCH",
            )
        if self.potential.character != (1, 1):
            raise SurfaceError("the potential must be periodic", code="CHARACTER_MISMATCH")
        object.__setattr__(self, "potential", self.potential.with_values(self.potential.values.real))

    @classmethod
    def from_arrays(
        cls,
        grid: FundamentalGrid,
        psi1: ArrayLike,
        psi2: ArrayLike,
        potential: ArrayLike,
        character: Character = (1, 1),
    ) -> WeierstrassSpinor:
        return cls(
            PeriodicField(grid, psi1, character),
            PeriodicField(grid, psi2, character),
            PeriodicField(grid, np.broadcast_to(np.asarray(potential, dtype=float), grid.shape)),
        )

    @property
    def grid(self) -> FundamentalGrid:
        return self.psi1.grid

    @property
    def character(self) -> Character:
        return self.psi1.character

    @property
    def exp_alpha(self) -> RealArray:
        return np.abs(self.psi1.values) ** 2 + np.abs(self.psi2.values) ** 2

    def z_derivative(self) -> ComplexArray:
        """F_z from the Weierstrass formulas."""
        p1 = self.psi1.values
        p2bar = np.conj(self.psi2.values)
        return np.stack(
            [
                0.5j * (p2bar**2 + p1**2),
                0.5 * (p2bar**2 - p1**2),
                p1 * p2bar,
            ]
        )

    def dirac_residual(self) -> float:
        """max|d psi2 + U psi1| + max|-dbar psi1 + U psi2|."""
        u = self.potential.values.real
        first = dz(self.psi2).values + u * self.psi1.values
        second = -dzbar(self.psi1).values + u * self.psi2.values
        return float(np.max(np.abs(first)) + np.max(np.abs(second)))


def continue_spinor_branch(
    grid: FundamentalGrid,
    z: ComplexArray,
    character_tolerance: float | None = None,
    degenerate_tolerance: float | None = None,
) -> tuple[ComplexArray, ComplexArray, Character]:
    """Continuous square roots psi1, conj(psi2) of psi1^2 = -iZ1 - Z2, conj(psi2)^2 = -iZ1 + Z2.

    Signs are aligned along the first column, then across all rows, seeded by
    Re psi1 >= 0 at the grid origin (psi2 when psi1 vanishes there). The character
    is the sign relating the last and first samples along each generator.
    """
    settings = get_settings()
    char_tol = settings.character_tolerance if character_tolerance is None else character_tolerance
    deg_tol = settings.degenerate_spinor_tolerance if degenerate_tolerance is None else degenerate_tolerance

    a = -1j * z[0] - z[1]
    b = -1j * z[0] + z[1]
    size = np.abs(a) + np.abs(b)
    if np.min(size) <= deg_tol * np.max(size):
        raise DegenerateSpinorError(_grid_location(grid, int(np.argmin(size))))
    use_a = np.abs(a) >= np.abs(b)
    root_a = np.sqrt(a)
    root_b = np.sqrt(b)
    with np.errstate(divide="ignore", invalid="ignore"):
        p1 = np.where(use_a, root_a, z[2] / root_b)
        p2bar = np.where(use_a, z[2] / root_a, root_b)
    pair = np.stack([p1, p2bar])

    for j in range(1, grid.n1):
        if np.real(np.vdot(pair[:, j - 1, 0], pair[:, j, 0])) < 0:
            pair[:, j, 0] *= -1.0
    for k in range(1, grid.n2):
        dots = np.real(np.sum(np.conj(pair[:, :, k - 1]) * pair[:, :, k], axis=0))
        pair[:, dots < 0, k] *= -1.0

    character = (
        _wrap_sign(pair[:, -1, :], pair[:, 0, :], char_tol, "gamma1"),
        _wrap_sign(pair[:, :, -1], pair[:, :, 0], char_tol, "gamma2"),
    )

    origin = pair[:, 0, 0]
    lead = origin[0] if abs(origin[0]) > 1e-8 * np.linalg.norm(origin) else np.conj(origin[1])
    if lead.real < 0:
        pair *= -1.0
    return pair[0], pair[1], character


def _wrap_sign(last: ComplexArray, first: ComplexArray, tolerance: float, name: str) -> int:
    cosines = np.real(np.sum(np.conj(last) * first, axis=0)) / (
        np.linalg.norm(last, axis=0) * np.linalg.norm(first, axis=0)
    )
    signs = np.sign(cosines)
    if np.min(np.abs(cosines)) < tolerance or not np.all(signs == signs[0]):
        raise SpinStructureError(
            f"continuation along {name} does not close with a common sign "
            f"(cosines in [{np.min(cosines):.3f}, {np.max(cosines):.3f}])"
        )
    return int(signs[0])


def spinor_from_surface(
    immersion: ImmersionR3,
    conformality_tolerance: float | None = None,
    character_tolerance: float | None = None,
) -> WeierstrassSpinor:
    """Weierstrass spinor and potential U = H e^alpha / 2 of a conformal immersion."""
    data = fundamental_forms(immersion, conformality_tolerance)
    p1, p2bar, character = continue_spinor_branch(
        immersion.grid, immersion.derivative_z(), character_tolerance
    )
    logger.debug("spinor_extracted", character=character)
    return WeierstrassSpinor.from_arrays(
        immersion.grid, p1, np.conj(p2bar), data.potential(), character
    )


def surface_from_spinor(psi: WeierstrassSpinor, base_point: ArrayLike = (0.0, 0.0, 0.0)) -> ImmersionR3:
    """Integrate the Weierstrass formulas; F at the grid origin equals ``base_point``."""
    periodic, periods = integrate_wirtinger(psi.grid, psi.z_derivative())
    periodic = periodic - periodic[:, :1, :1] + np.asarray(base_point, dtype=float)[:, None, None]
    return ImmersionR3(psi.grid, periodic, periods)


def closure_defect(psi: WeierstrassSpinor) -> tuple[complex, complex, complex]:
    """-i times the integrals of conj(psi1)^2, psi2^2 and conj(psi1) psi2.

    All three vanish exactly when the represented surface closes up.
    """
    p1bar = np.conj(psi.psi1.values)
    p2 = psi.psi2.values
    integrands = np.stack([p1bar**2, p2**2, p1bar * p2])
    values = -1j * domain_integral(psi.grid, integrands)
    return complex(values[0]), complex(values[1]), complex(values[2])


def willmore_from_potential(psi: WeierstrassSpinor) -> float:
    """4 times the integral of U^2 dx dy."""
    return float(4.0 * domain_integral(psi.grid, psi.potential.values.real**2))


def gauss_weingarten_residual(psi: WeierstrassSpinor, data: SurfaceData) -> float:
    """Residual of both first-order systems psi_z = (...) psi and psi_zbar = (...) psi."""
    alpha_z, alpha_zbar = wirtinger(psi.grid, data.alpha)
    a_scaled = data.hopf / data.exp_alpha
    u = psi.potential.values.real
    p1, p2 = psi.psi1.values, psi.psi2.values
    p1_z, p1_zbar = wirtinger(psi.grid, p1, psi.psi1.shifts)
    p2_z, p2_zbar = wirtinger(psi.grid, p2, psi.psi2.shifts)
    residuals = [
        p1_z - alpha_z * p1 - a_scaled * p2,
        p2_z + u * p1,
        p1_zbar - u * p2,
        p2_zbar + np.conj(a_scaled) * p1 - alpha_zbar * p2,
    ]
    return float(max(np.max(np.abs(r)) for r in residuals))


def spinors_agree(first: WeierstrassSpinor, second: WeierstrassSpinor) -> float:
    """Pointwise distance between two spinors up to one global sign."""
    a = np.stack([first.psi1.values, first.psi2.values])
    b = np.stack([second.psi1.values, second.psi2.values])
    return float(min(np.max(np.abs(a - b)), np.max(np.abs(a + b))))


# =============================================================================
# Dual isothermic surfaces and reparametrization
# =============================================================================


def dual_isothermic(immersion: ImmersionR3, tolerance: float | None = None) -> ImmersionR3:
    """Dual surface with F*_z = e^{-2 alpha} F_zbar, anchored at the origin.

    Raises:
        SurfaceError: Im A is not small, so the parameter is not isothermic
    """
    tol = get_settings().isothermic_tolerance if tolerance is None else tolerance
    data = fundamental_forms(immersion)
    defect = data.isothermic_defect()
    if defect > tol:
        raise SurfaceError(
            f"parameter is not isothermic: relative max|Im A| = {defect:.3e}", code="NOT_ISOTHERMIC"
        )
    g = np.conj(immersion.derivative_z()) / data.exp_alpha**2
    periodic, periods = integrate_wirtinger(immersion.grid, g)
    periodic = periodic - periodic[:, :1, :1]
    return ImmersionR3(immersion.grid, periodic, periods)


def dual_spinor(psi: WeierstrassSpinor, dual_potential: ArrayLike) -> WeierstrassSpinor:
    """(i e^{-alpha} psi2, i e^{-alpha} psi1), the spinor of the dual surface."""
    inv = 1.0 / psi.exp_alpha
    return WeierstrassSpinor.from_arrays(
        psi.grid,
        1j * inv * psi.psi2.values,
        1j * inv * psi.psi1.values,
        dual_potential,
        psi.character,
    )


def reparametrize(psi: WeierstrassSpinor, t: complex) -> WeierstrassSpinor:
    """Spinor in the parameter w with z = t^2 w.

    The lattice becomes Lambda / t^2, the potential |t|^2 U and the spinor
    (t psi1, conj(t) psi2); samples stay attached to the same surface points.
    """
    t = complex(t)
    if t == 0:
        raise SurfaceError("reparametrization factor must be nonzero", code="ZERO_FACTOR")
    grid = psi.grid.with_lattice(psi.grid.lattice.scaled(1.0 / t**2))
    return WeierstrassSpinor.from_arrays(
        grid,
        t * psi.psi1.values,
        np.conj(t) * psi.psi2.values,
        abs(t) ** 2 * psi.potential.values.real,
        psi.character,
    )


def sign_flipped(psi: WeierstrassSpinor) -> WeierstrassSpinor:
    """(psi1, -psi2) with potential -U; solves the Dirac equation with flipped sign."""
    return WeierstrassSpinor.from_arrays(
        psi.grid, psi.psi1.values, -psi.psi2.values, -psi.potential.values.real, psi.character
    )
