"""Surfaces in the three-sphere, identified with SU(2).

A conformal map f: C/Lambda -> SU(2) is described by Psi = f^{-1} f_z and
Psi* = f^{-1} f_zbar. Writing Psi = Z1 e1 + Z2 e2 + Z3 e3 gives the same spinor
formulas as in R3, now with the complex potential V = (H - i) e^alpha / 2.
Minimal tori are harmonic maps and carry the Hitchin family of flat
connections, whose parallel sections are gauge equivalent to Floquet
functions of the Dirac operator with potential V.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from numpy.typing import ArrayLike, NDArray

from ..config import get_settings
from ..core.fields import (
    BlochField,
    Character,
    FundamentalGrid,
    PeriodicField,
    domain_integral,
    wirtinger,
)
from ..core.transfer import (
    TransferResult,
    half_step_samples,
    refined_path_transfer,
    refined_transfer_matrix,
)
from ..errors import ConfigError, NumericalError
from ..logging import get_logger
from .surface_r3 import ImmersionR3, continue_spinor_branch

logger = get_logger(__name__)

ComplexArray = NDArray[np.complex128]
RealArray = NDArray[np.float64]

E1 = np.array([[1j, 0], [0, -1j]])
E2 = np.array([[0, 1], [-1, 0]], dtype=complex)
E3 = np.array([[0, 1j], [1j, 0]])

PLACEMENTS = ("family", "eigenfunction")


class SphereError(NumericalError):
    """Invalid data for a surface in S3."""

    def __init__(self, message: str, code: str = "SPHERE_ERROR"):
        super().__init__(message, code=code)


# =============================================================================
# Matrix fields
# =============================================================================


def matrix_wirtinger(grid: FundamentalGrid, m: ArrayLike) -> tuple[ComplexArray, ComplexArray]:
    """(d/dz, d/dzbar) of a matrix field of shape (n1, n2, p, q)."""
    moved = np.moveaxis(np.asarray(m, dtype=complex), (0, 1), (-2, -1))
    d, dbar = wirtinger(grid, moved)
    return np.moveaxis(d, (-2, -1), (0, 1)), np.moveaxis(dbar, (-2, -1), (0, 1))


def commutator(a: ComplexArray, b: ComplexArray) -> ComplexArray:
    result: ComplexArray = a @ b - b @ a
    return result


def quaternion_matrix(x: ArrayLike) -> ComplexArray:
    """[[x4 + i x1, x2 + i x3], [-x2 + i x3, x4 - i x1]] for x of shape (..., 4)."""
    x = np.asarray(x, dtype=float)
    out = np.empty(x.shape[:-1] + (2, 2), dtype=complex)
    out[..., 0, 0] = x[..., 3] + 1j * x[..., 0]
    out[..., 0, 1] = x[..., 1] + 1j * x[..., 2]
    out[..., 1, 0] = -x[..., 1] + 1j * x[..., 2]
    out[..., 1, 1] = x[..., 3] - 1j * x[..., 0]
    return out


def quaternion_coordinates(a: ArrayLike) -> RealArray:
    """Inverse of :func:`quaternion_matrix`."""
    a = np.asarray(a, dtype=complex)
    return np.stack([a[..., 0, 0].imag, a[..., 0, 1].real, a[..., 0, 1].imag, a[..., 0, 0].real], axis=-1)


@dataclass(frozen=True, eq=False)
class SU2Immersion:
    """Samples f(z) in SU(2), shape (n1, n2, 2, 2)."""

    grid: FundamentalGrid
    samples: ComplexArray

    def __post_init__(self) -> None:
        f = np.array(self.samples, dtype=complex)
        if f.shape != self.grid.shape + (2, 2):
            raise SphereError(f"SU(2) samples have shape {f.shape}", code="SHAPE_MISMATCH")
        if not np.all(np.isfinite(f)):
            raise SphereError("SU(2) samples must be finite", code="NON_FINITE_VALUES")
        tol = get_settings().su2_tolerance
        unitarity = np.max(np.abs(f @ np.conj(np.swapaxes(f, -1, -2)) - np.eye(2)))
        det = np.max(np.abs(np.linalg.det(f) - 1.0))
        if max(unitarity, det) > tol:
            raise SphereError(
                f"samples are not special unitary (|f f^* - 1| = {unitarity:.2e}, |det f - 1| = {det:.2e})",
                code="NOT_SPECIAL_UNITARY",
            )
        f.setflags(write=False)
        object.__setattr__(self, "samples", f)

    @cached_property
    def psi_pair(self) -> tuple[ComplexArray, ComplexArray]:
        """(Psi, Psi*) = (f^{-1} f_z, f^{-1} f_zbar)."""
        f_z, f_zbar = matrix_wirtinger(self.grid, self.samples)
        inverse = np.conj(np.swapaxes(self.samples, -1, -2))
        return inverse @ f_z, inverse @ f_zbar

    def coordinates(self) -> RealArray:
        """Points of S3 in R4, shape (n1, n2, 4)."""
        return quaternion_coordinates(self.samples)


def z_coordinates(psi: ComplexArray) -> ComplexArray:
    """(Z1, Z2, Z3) with Psi = Z1 e1 + Z2 e2 + Z3 e3, shape (3, n1, n2)."""
    return np.stack(
        [
            -1j * psi[..., 0, 0],
            0.5 * (psi[..., 0, 1] - psi[..., 1, 0]),
            -0.5j * (psi[..., 0, 1] + psi[..., 1, 0]),
        ]
    )


def harmonic_residuals(immersion: SU2Immersion) -> tuple[float, float]:
    """Residuals of dbar Psi - d Psi* + [Psi*, Psi] = 0 and dbar Psi + d Psi* = 0.

    The first holds for every smooth map; the second characterizes minimal maps.
    Both are relative to max |Psi|^2.
    """
    psi, psi_star = immersion.psi_pair
    _, psi_zbar = matrix_wirtinger(immersion.grid, psi)
    psi_star_z, _ = matrix_wirtinger(immersion.grid, psi_star)
    scale = 1.0 + float(np.max(np.abs(psi))) ** 2
    first = psi_zbar - psi_star_z + commutator(psi_star, psi)
    second = psi_zbar + psi_star_z
    return float(np.max(np.abs(first))) / scale, float(np.max(np.abs(second))) / scale


def fit_mean_curvature(immersion: SU2Immersion) -> tuple[RealArray, float]:
    """Least-squares H in dbar Psi + d Psi* = i H [Psi*, Psi], pointwise.

    Returns H and the relative residual of the fitted equation.
    """
    psi, psi_star = immersion.psi_pair
    _, psi_zbar = matrix_wirtinger(immersion.grid, psi)
    psi_star_z, _ = matrix_wirtinger(immersion.grid, psi_star)
    lhs = psi_zbar + psi_star_z
    m = 1j * commutator(psi_star, psi)
    weight = np.sum(np.abs(m) ** 2, axis=(-2, -1))
    h = np.real(np.sum(np.conj(m) * lhs, axis=(-2, -1))) / weight
    residual = np.max(np.abs(lhs - h[..., None, None] * m)) / (1.0 + np.max(np.abs(lhs)))
    return h, float(residual)


# =============================================================================
# Spinors in S3
# =============================================================================


@dataclass(frozen=True, eq=False)
class SphereSpinor:
    """(psi1, psi2) solving D^S psi = 0, D^S = [[V, d], [-dbar, conj V]]."""

    psi1: PeriodicField
    psi2: PeriodicField
    potential: ComplexArray
    mean_curvature: RealArray

    def __post_init__(self) -> None:
        if self.psi1.grid != self.psi2.grid:
            raise SphereError("spinor components live on different grids", code="GRID_MISMATCH")
        if self.psi1.character != self.psi2.character:
            raise SphereError("spinor components have different characters", code="CHARACTER_MISMATCH")
        potential = np.array(np.broadcast_to(self.potential, self.grid.shape), dtype=complex)
        potential.setflags(write=False)
        object.__setattr__(self, "potential", potential)

    @classmethod
    def from_arrays(
        cls,
        grid: FundamentalGrid,
        psi1: ArrayLike,
        psi2: ArrayLike,
        potential: ArrayLike,
        character: Character = (1, 1),
    ) -> SphereSpinor:
        v = np.broadcast_to(np.asarray(potential, dtype=complex), grid.shape)
        p1 = PeriodicField(grid, psi1, character)
        p2 = PeriodicField(grid, psi2, character)
        e_alpha = np.abs(p1.values) ** 2 + np.abs(p2.values) ** 2
        return cls(p1, p2, v, 2.0 * v.real / e_alpha)

    @property
    def grid(self) -> FundamentalGrid:
        return self.psi1.grid

    @property
    def character(self) -> Character:
        return self.psi1.character

    @property
    def exp_alpha(self) -> RealArray:
        return np.abs(self.psi1.values) ** 2 + np.abs(self.psi2.values) ** 2

    def dirac_residual(self) -> float:
        """max|V psi1 + d psi2| + max|-dbar psi1 + conj(V) psi2|."""
        values = np.stack([self.psi1.values, self.psi2.values])
        return sphere_dirac_residual(self.grid, values, self.psi1.shifts, self.potential)

    def conjugate(self) -> SphereSpinor:
        """(conj psi2, -conj psi1), the second solution of D^S psi = 0."""
        return SphereSpinor(
            self.psi2.conj(),
            -self.psi1.conj(),
            self.potential,
            self.mean_curvature,
        )

    def constraint_defect(self) -> float:
        """max|conj(V) - V - i e^alpha|; zero for every spinor of a surface in S3."""
        v = self.potential
        return float(np.max(np.abs(np.conj(v) - v - 1j * self.exp_alpha)))

    def hopf(self) -> ComplexArray:
        """A = (psi1)_z conj(psi2) - (conj psi2)_z psi1."""
        p1 = self.psi1.values
        p2bar = np.conj(self.psi2.values)
        p1_z, _ = wirtinger(self.grid, p1, self.psi1.shifts)
        p2bar_z, _ = wirtinger(self.grid, p2bar, self.psi1.shifts)
        result: ComplexArray = p1_z * p2bar - p2bar_z * p1
        return result

    def codazzi_residuals(self) -> tuple[float, float]:
        """Residuals of the Gauss and Codazzi equations of a surface in S3."""
        alpha = np.log(self.exp_alpha)
        alpha_z, _ = wirtinger(self.grid, alpha)
        _, alpha_zzbar = wirtinger(self.grid, alpha_z)
        hopf = self.hopf()
        v = self.potential
        e_alpha = self.exp_alpha
        gauss = alpha_zzbar + np.abs(v) ** 2 - np.abs(hopf) ** 2 / e_alpha**2
        _, hopf_zbar = wirtinger(self.grid, hopf)
        vbar_z, _ = wirtinger(self.grid, np.conj(v))
        codazzi = hopf_zbar - (vbar_z - alpha_z * np.conj(v)) * e_alpha
        return float(np.max(np.abs(gauss))), float(np.max(np.abs(codazzi)))

    def gauge_matrix(self) -> ComplexArray:
        """L with L^{-1} Psi L = e^alpha [[0, 1], [0, 0]], det L = e^alpha; shape (n1, n2, 2, 2)."""
        p1, p2 = self.psi1.values, self.psi2.values
        a = (-1j * np.conj(p1) + p2) / np.sqrt(2.0)
        b = (-1j * p1 + np.conj(p2)) / np.sqrt(2.0)
        det = np.abs(a) ** 2 + np.abs(b) ** 2
        if np.min(det) <= 1e-14 * np.max(det):
            raise SphereError("gauge matrix is singular where the spinor vanishes", code="SINGULAR_GAUGE")
        out = np.empty(self.grid.shape + (2, 2), dtype=complex)
        out[..., 0, 0] = np.conj(a)
        out[..., 0, 1] = -np.conj(b)
        out[..., 1, 0] = b
        out[..., 1, 1] = a
        return out


def sphere_dirac_residual(
    grid: FundamentalGrid,
    values: ArrayLike,
    shifts: tuple[complex, complex],
    potential: ArrayLike,
) -> float:
    """Residual of D^S on samples with the given frequency shifts, relative to max|psi|."""
    psi = np.asarray(values, dtype=complex)
    v = np.asarray(potential, dtype=complex)
    d_psi, dbar_psi = wirtinger(grid, psi, shifts)
    first = v * psi[0] + d_psi[1]
    second = -dbar_psi[0] + np.conj(v) * psi[1]
    return float(np.max(np.abs(first)) + np.max(np.abs(second))) / float(np.max(np.abs(psi)))


def spinor_from_s3(
    immersion: SU2Immersion,
    conformality_tolerance: float | None = None,
    character_tolerance: float | None = None,
) -> SphereSpinor:
    """Spinor, mean curvature and potential V = (H - i) e^alpha / 2 of a conformal map into S3.

    Raises:
        SphereError: the map is not conformal
    """
    settings = get_settings()
    tol = settings.conformality_tolerance if conformality_tolerance is None else conformality_tolerance
    psi, _ = immersion.psi_pair
    z = z_coordinates(psi)
    scale = float(np.mean(np.sum(np.abs(z) ** 2, axis=0)))
    defect = float(np.max(np.abs(np.sum(z**2, axis=0)))) / scale
    if defect > tol:
        raise SphereError(f"map into S3 is not conformal (defect {defect:.3e})", code="CONFORMALITY_DEFECT")
    p1, p2bar, character = continue_spinor_branch(immersion.grid, z, character_tolerance)
    h, fit_residual = fit_mean_curvature(immersion)
    e_alpha = np.abs(p1) ** 2 + np.abs(p2bar) ** 2
    logger.debug("sphere_spinor_extracted", character=character, mean_curvature_fit=fit_residual)
    grid = immersion.grid
    return SphereSpinor(
        PeriodicField(grid, p1, character),
        PeriodicField(grid, np.conj(p2bar), character),
        0.5 * (h - 1j) * e_alpha,
        h,
    )


def willmore_s3(spinor: SphereSpinor) -> float:
    """Integral of (H^2 + 1) e^{2 alpha} = 4 |V|^2 over the torus."""
    return float(4.0 * domain_integral(spinor.grid, np.abs(spinor.potential) ** 2))


# =============================================================================
# Clifford torus spectrum
# =============================================================================

CLIFFORD_POTENTIAL = -1j / (2.0 * np.sqrt(2.0))


def clifford_spectrum_map(lam: complex) -> tuple[complex, complex]:
    """Multipliers (exp(2 pi l - pi/(4 l)), exp(2 pi i l + i pi/(4 l))) of the Clifford torus."""
    lam = complex(lam)
    if lam == 0:
        raise ConfigError("the Clifford spectral parameter must be nonzero")
    return (
        complex(np.exp(2.0 * np.pi * lam - np.pi / (4.0 * lam))),
        complex(np.exp(2j * np.pi * lam + 1j * np.pi / (4.0 * lam))),
    )


def clifford_floquet_function(grid: FundamentalGrid, lam: complex) -> BlochField:
    """(1, i / (2 sqrt2 l)) exp(l z - zbar / (8 l)) with exact exponents."""
    lam = complex(lam)
    if lam == 0:
        raise ConfigError("the Clifford spectral parameter must be nonzero")
    z = grid.points
    e = np.exp(lam * z - np.conj(z) / (8.0 * lam))
    values = np.stack([e, 1j / (2.0 * np.sqrt(2.0) * lam) * e])
    g1, g2 = grid.lattice.generators
    exponents = (lam * g1 - np.conj(g1) / (8.0 * lam), lam * g2 - np.conj(g2) / (8.0 * lam))
    return BlochField(grid, values, exponents)


def clifford_harmonic_residual(psi: BlochField) -> float:
    """max |(d dbar + 1/8) psi_j| relative to max|psi|."""
    d, _ = wirtinger(psi.grid, psi.values, psi.shifts)
    _, ddbar = wirtinger(psi.grid, d, psi.shifts)
    return float(np.max(np.abs(ddbar + psi.values / 8.0)) / np.max(np.abs(psi.values)))


# =============================================================================
# Hitchin family
# =============================================================================


def hitchin_coefficients(lam: complex, placement: str = "family") -> tuple[complex, complex]:
    """(c1, c2) in d + c1 Psi, dbar + c2 Psi*.

    ``family`` puts (1 + 1/l)/2 on Psi and ``eigenfunction`` puts (1 + l)/2 there.
    """
    lam = complex(lam)
    if lam == 0:
        raise ConfigError("the Hitchin parameter must be nonzero")
    if placement == "family":
        return 0.5 * (1.0 + 1.0 / lam), 0.5 * (1.0 + lam)
    if placement == "eigenfunction":
        return 0.5 * (1.0 + lam), 0.5 * (1.0 + 1.0 / lam)
    raise ConfigError(f"unknown Hitchin placement {placement!r}; expected one of {PLACEMENTS}")


@dataclass(frozen=True, eq=False)
class HitchinFamily:
    """The connections d + c1(l) Psi, dbar + c2(l) Psi* of a harmonic map."""

    immersion: SU2Immersion

    @classmethod
    def from_immersion(cls, immersion: SU2Immersion, tolerance: float | None = None) -> HitchinFamily:
        """Raises SphereError when the map is not harmonic (not minimal)."""
        tol = get_settings().harmonic_tolerance if tolerance is None else tolerance
        _, minimal = harmonic_residuals(immersion)
        if minimal > tol:
            raise SphereError(
                f"map is not harmonic: relative residual of dbar Psi + d Psi* is {minimal:.3e}",
                code="NOT_HARMONIC",
            )
        return cls(immersion)

    @property
    def grid(self) -> FundamentalGrid:
        return self.immersion.grid

    def connection(self, lam: complex, placement: str = "family") -> tuple[ComplexArray, ComplexArray]:
        c1, c2 = hitchin_coefficients(lam, placement)
        psi, psi_star = self.immersion.psi_pair
        return c1 * psi, c2 * psi_star

    def flatness_residual(self, lam: complex, placement: str = "family") -> float:
        """max |d Q - dbar P + [P, Q]| for the connection d + P, dbar + Q."""
        p, q = self.connection(lam, placement)
        _, p_zbar = matrix_wirtinger(self.grid, p)
        q_z, _ = matrix_wirtinger(self.grid, q)
        return float(np.max(np.abs(q_z - p_zbar + commutator(p, q))))

    def _line_coefficients(self, lam: complex, placement: str, generator: int) -> ComplexArray:
        """-(c1 gamma Psi + c2 conj(gamma) Psi*) along every line parallel to a generator."""
        c1, c2 = hitchin_coefficients(lam, placement)
        psi, psi_star = self.immersion.psi_pair
        gamma = self.grid.lattice.generators[generator]
        result: ComplexArray = -(c1 * gamma * psi + c2 * np.conj(gamma) * psi_star)
        return result

    def monodromy(self, lam: complex, generator: int, placement: str = "family") -> TransferResult:
        """Parallel transport around the generator loop based at the grid origin."""
        if generator not in (0, 1):
            raise ConfigError(f"generator index must be 0 or 1, got {generator}")
        coeff = self._line_coefficients(lam, placement, generator)
        line = coeff[:, 0] if generator == 0 else coeff[0, :]
        return refined_transfer_matrix(lambda steps: half_step_samples(line, steps, axis=0))

    def transport(self, lam: complex, placement: str = "family") -> ComplexArray:
        """Fundamental solution Y(z) on the grid with Y = 1 at the origin, shape (n1, n2, 2, 2).

        Transport runs along the first generator through the origin, then along
        the second generator from every sample of that line.
        """
        coeff_s = self._line_coefficients(lam, placement, 0)
        coeff_t = self._line_coefficients(lam, placement, 1)
        first = refined_path_transfer(
            lambda steps: half_step_samples(coeff_s[:, 0], steps, axis=0), self.grid.n1
        ).matrix[: self.grid.n1]
        second = refined_path_transfer(
            lambda steps: half_step_samples(coeff_t, steps, axis=1), self.grid.n2
        ).matrix[:, : self.grid.n2]
        result: ComplexArray = second @ first[:, None]
        return result


def multipliers_of(matrix: ComplexArray) -> tuple[complex, complex]:
    """Eigenvalues of a 2x2 monodromy, larger modulus first."""
    values = np.linalg.eigvals(matrix)
    order = np.argsort(-np.abs(values))
    return complex(values[order[0]]), complex(values[order[1]])


@dataclass(frozen=True)
class GaugedEigenfunction:
    """Floquet function of D^S obtained from a parallel section of the Hitchin family."""

    psi: BlochField
    hitchin_multipliers: tuple[complex, complex]
    residual: float
    unsigned_residual: float
    flatness: float


def gauge_residuals(spinor: SphereSpinor, immersion: SU2Immersion) -> tuple[float, float]:
    """max |L^{-1} Psi L - e^alpha n| and max |L^{-1} Psi* L + e^alpha n^T|, n = [[0, 1], [0, 0]]."""
    gauge = spinor.gauge_matrix()
    inverse = np.linalg.inv(gauge)
    psi, psi_star = immersion.psi_pair
    e_alpha = spinor.exp_alpha
    nil = np.zeros(spinor.grid.shape + (2, 2), dtype=complex)
    nil[..., 0, 1] = e_alpha
    first = inverse @ psi @ gauge - nil
    second = inverse @ psi_star @ gauge + np.swapaxes(nil, -1, -2)
    return float(np.max(np.abs(first))), float(np.max(np.abs(second)))


def eigenfunction_from_hitchin(family: HitchinFamily, spinor: SphereSpinor, lam: complex) -> GaugedEigenfunction:
    """psi~ = e^alpha [[0, i l], [1, 0]] L^{-1} phi for a common eigenvector phi of both monodromies.

    phi is parallel for the eigenfunction placement. psi~ solves D^S psi~ = 0 with
    V = -i e^alpha / 2; its multipliers are the Hitchin multipliers times the
    spin character of the spinor that built L.
    """
    lam = complex(lam)
    placement = "eigenfunction"
    h1 = family.monodromy(lam, 0, placement).matrix
    h2 = family.monodromy(lam, 1, placement).matrix
    vector = _common_eigenvector(h1, h2)
    mu = tuple(complex(np.vdot(vector, h @ vector) / np.vdot(vector, vector)) for h in (h1, h2))

    fundamental = family.transport(lam, placement)
    phi = np.moveaxis(fundamental @ vector, -1, 0)
    gauge = spinor.gauge_matrix()
    adjoint = np.conj(np.swapaxes(gauge, -1, -2))
    rotated = np.einsum("jkab,bjk->ajk", adjoint, phi)
    values = np.stack([1j * lam * rotated[1], rotated[0]])

    e1, e2 = spinor.character
    psi = BlochField.from_multipliers(spinor.grid, values, (e1 * mu[0], e2 * mu[1]))
    potential = -0.5j * spinor.exp_alpha
    residual = sphere_dirac_residual(psi.grid, psi.values, psi.shifts, potential)
    unsigned = BlochField.from_multipliers(spinor.grid, values, (mu[0], mu[1]))
    unsigned_residual = sphere_dirac_residual(unsigned.grid, unsigned.values, unsigned.shifts, potential)
    logger.info(
        "hitchin_eigenfunction",
        lam=str(lam),
        residual=residual,
        unsigned_residual=unsigned_residual,
    )
    return GaugedEigenfunction(
        psi=psi,
        hitchin_multipliers=(mu[0], mu[1]),
        residual=residual,
        unsigned_residual=unsigned_residual,
        flatness=family.flatness_residual(lam, placement),
    )


def _common_eigenvector(h1: ComplexArray, h2: ComplexArray) -> ComplexArray:
    for h in (h1, h2):
        values, vectors = np.linalg.eig(h)
        if abs(values[0] - values[1]) > 1e-8 * (1.0 + np.max(np.abs(values))):
            vec: ComplexArray = vectors[:, int(np.argmax(np.abs(values)))]
            return vec
    return np.array([1.0, 0.0], dtype=complex)


# =============================================================================
# Stereographic projection
# =============================================================================


def stereographic(a: ArrayLike) -> RealArray:
    """(1 + a)(1 - a)^{-1}, read as a point of R3; the identity maps to infinity."""
    a = np.asarray(a, dtype=complex)
    x4 = a[..., 0, 0].real
    pole = np.abs(1.0 - x4) <= 1e-14
    eye = np.eye(2)
    safe = np.where(pole[..., None, None], -eye, a)
    image = (eye + safe) @ np.linalg.inv(eye - safe)
    coords = quaternion_coordinates(image)[..., :3]
    coords[pole] = np.inf
    return coords


def stereographic_inverse(points: ArrayLike) -> ComplexArray:
    """(b - 1)(b + 1)^{-1} with b the imaginary quaternion of a point of R3."""
    pts = np.asarray(points, dtype=float)
    b = quaternion_matrix(np.concatenate([pts, np.zeros(pts.shape[:-1] + (1,))], axis=-1))
    eye = np.eye(2)
    result: ComplexArray = (b - eye) @ np.linalg.inv(b + eye)
    return result


def project_to_r3(immersion: SU2Immersion) -> ImmersionR3:
    """Stereographic image of a torus in S3 as a closed torus in R3."""
    coords = stereographic(immersion.samples)
    if not np.all(np.isfinite(coords)):
        raise SphereError("surface passes through the projection pole", code="SURFACE_THROUGH_POLE")
    return ImmersionR3.from_points(immersion.grid, np.moveaxis(coords, -1, 0))


def lift_to_s3(immersion: ImmersionR3) -> SU2Immersion:
    """Inverse stereographic image of a closed torus in R3."""
    return SU2Immersion(immersion.grid, stereographic_inverse(np.moveaxis(immersion.points, 0, -1)))
