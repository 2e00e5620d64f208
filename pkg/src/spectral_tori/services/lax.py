"""Lax pairs of integrable tori.

Constant mean curvature tori (H = 1, Hopf differential 1/2 dz^2) come with two
commutation representations of the sinh-Gordon equation u_zzbar + sinh u = 0,
u = 2 alpha:

    cmc-geom   psi_z = [[a_z, -l^2 e^-a / 2], [-e^a / 2, 0]] psi,
               psi_zbar = [[0, e^a / 2], [l^-2 e^-a / 2, a_zbar]] psi
    cmc-zcc    phi_z = 1/2 [[-u_z, -l], [-l, u_z]] phi,
               phi_zbar = 1/(2 l) [[0, e^-u], [e^u, 0]] phi

Isothermic tori with line curvatures k1, k2 carry the 4x4 pencil

    U^ = [[U, l J-], [l J+, U + a_z]],   V^ = [[V, l J+], [l J-, V + a_zbar]]

whose l = 0 blocks are the Dirac problems with potentials (k1 + k2) e^a / 4
and (k2 - k1) e^a / 4. Monodromies are taken along the real period of
y-independent data, where phi_x = (U + V) phi.
"""
from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import integrate

from ..config import get_settings
from ..core.fields import BlochField, FundamentalGrid, Lattice, wirtinger
from ..core.transfer import half_step_samples, refined_path_transfer, refined_transfer_matrix
from ..errors import ConfigError, NumericalError
from ..logging import get_logger
from .floquet_1d import match_points
from .sphere import commutator, matrix_wirtinger, sphere_dirac_residual
from .surface_r3 import SurfaceData

logger = get_logger(__name__)

ComplexArray = NDArray[np.complex128]
RealArray = NDArray[np.float64]

LAX_TAGS = ("cmc-geom", "cmc-zcc", "isothermic-4x4")

J_PLUS = np.array([[0, 1], [0, 0]], dtype=complex)
J_MINUS = np.array([[0, 0], [1, 0]], dtype=complex)


class LaxError(NumericalError):
    """Lax data that cannot be used."""

    def __init__(self, message: str, code: str = "LAX_ERROR"):
        super().__init__(message, code=code)


def _x_independent_of_y(values: RealArray, tolerance: float = 1e-10) -> bool:
    spread = np.max(np.abs(values - values[..., :1]))
    return bool(spread <= tolerance * (1.0 + np.max(np.abs(values))))


# =============================================================================
# Sinh-Gordon fields
# =============================================================================


@dataclass(frozen=True, eq=False)
class SinhGordonField:
    """Real u = 2 alpha on a grid."""

    grid: FundamentalGrid
    u: RealArray

    def __post_init__(self) -> None:
        arr = np.array(self.u, dtype=float)
        if arr.shape != self.grid.shape:
            raise LaxError(f"field shape {arr.shape} does not match grid {self.grid.shape}", code="SHAPE_MISMATCH")
        if not np.all(np.isfinite(arr)):
            raise LaxError("non-finite samples in sinh-Gordon field", code="NON_FINITE_VALUES")
        arr.setflags(write=False)
        object.__setattr__(self, "u", arr)

    @classmethod
    def vacuum(cls, grid: FundamentalGrid) -> SinhGordonField:
        return cls(grid, np.zeros(grid.shape))

    @property
    def alpha(self) -> RealArray:
        return 0.5 * self.u

    @cached_property
    def residual(self) -> float:
        """max |u_zzbar + sinh u|."""
        u_z, _ = wirtinger(self.grid, self.u)
        _, u_zzbar = wirtinger(self.grid, u_z)
        return float(np.max(np.abs(u_zzbar + np.sinh(self.u))))

    @property
    def depends_on_x_only(self) -> bool:
        return _x_independent_of_y(self.u)

    def perturbed(self, amplitude: float, seed: int = 0) -> SinhGordonField:
        """u plus uniform noise in [-amplitude, amplitude]."""
        rng = np.random.default_rng(seed)
        return SinhGordonField(self.grid, self.u + amplitude * rng.uniform(-1.0, 1.0, self.grid.shape))


def sinh_gordon_solution(amplitude: float, n1: int = 64, n2: int = 16) -> SinhGordonField:
    """y-independent solution of u_xx = -4 sinh u with u(0) = amplitude, u'(0) = 0.

    The half period is the first return of u' to zero from below; the profile
    is reflected about it. The lattice is (T, 2 pi i).

    Raises:
        ConfigError: the amplitude is not positive and finite
    """
    if not (np.isfinite(amplitude) and amplitude > 0):
        raise ConfigError(f"sinh-Gordon amplitude must be positive, got {amplitude}")

    def rhs(_: float, y: RealArray) -> list[float]:
        return [y[1], -4.0 * np.sinh(y[0])]

    def turning(_: float, y: RealArray) -> float:
        return float(y[1])

    turning.terminal = True  # type: ignore[attr-defined]
    turning.direction = 1.0  # type: ignore[attr-defined]

    # small amplitudes oscillate with period pi; allow for slower large swings
    horizon = 4.0 * np.pi
    sol = integrate.solve_ivp(
        rhs,
        (0.0, horizon),
        [amplitude, 0.0],
        method="DOP853",
        rtol=1e-13,
        atol=1e-13,
        events=turning,
        dense_output=True,
    )
    if not sol.t_events[0].size:
        raise NumericalError(f"no turning point of the sinh-Gordon profile within {horizon}", code="NO_HALF_PERIOD")
    half = float(sol.t_events[0][0])
    period = 2.0 * half
    x = np.arange(n1) * period / n1
    reflected = np.where(x <= half, x, period - x)
    profile = sol.sol(reflected)[0]
    grid = FundamentalGrid(Lattice(complex(period), 2j * np.pi), n1, n2)
    field = SinhGordonField(grid, np.repeat(profile[:, None], n2, axis=1))
    logger.debug("sinh_gordon_solution", amplitude=amplitude, period=period, residual=field.residual)
    return field


# =============================================================================
# Connections
# =============================================================================


@dataclass(frozen=True, eq=False)
class LaxConnection:
    """d + U(l), dbar + V(l) on a grid, built from alpha (and k1, k2 for isothermic data)."""

    tag: str
    grid: FundamentalGrid
    alpha: RealArray
    k1: RealArray | None = None
    k2: RealArray | None = None

    def __post_init__(self) -> None:
        if self.tag not in LAX_TAGS:
            raise ConfigError(f"unknown Lax pencil {self.tag!r}; expected one of {LAX_TAGS}")
        if self.tag == "isothermic-4x4" and (self.k1 is None or self.k2 is None):
            raise ConfigError("the isothermic pencil needs both line curvatures")

    @classmethod
    def cmc(cls, field: SinhGordonField, tag: str = "cmc-zcc") -> LaxConnection:
        if tag == "isothermic-4x4":
            raise ConfigError("a sinh-Gordon field carries only the CMC pencils")
        return cls(tag, field.grid, field.alpha)

    @property
    def dimension(self) -> int:
        return 4 if self.tag == "isothermic-4x4" else 2

    @property
    def has_pole(self) -> bool:
        return self.tag != "isothermic-4x4"

    @cached_property
    def _alpha_derivatives(self) -> tuple[ComplexArray, ComplexArray]:
        return wirtinger(self.grid, self.alpha)

    def matrices(self, lam: complex) -> tuple[ComplexArray, ComplexArray]:
        """(U, V), each of shape (n1, n2, d, d).

        Raises:
            LaxError: l = 0 for a pencil with a pole there
        """
        lam = complex(lam)
        if lam == 0 and self.has_pole:
            raise LaxError(f"the {self.tag} pencil has a pole at l = 0", code="POLE_OF_PENCIL")
        a_z, a_zbar = self._alpha_derivatives
        ea = np.exp(self.alpha)
        shape = self.grid.shape
        if self.tag == "cmc-geom":
            u = np.zeros(shape + (2, 2), dtype=complex)
            v = np.zeros(shape + (2, 2), dtype=complex)
            u[..., 0, 0] = a_z
            u[..., 0, 1] = -(lam**2) / (2.0 * ea)
            u[..., 1, 0] = -ea / 2.0
            v[..., 0, 1] = ea / 2.0
            v[..., 1, 0] = 1.0 / (2.0 * lam**2 * ea)
            v[..., 1, 1] = a_zbar
            return u, v
        if self.tag == "cmc-zcc":
            u_z = 2.0 * a_z
            u = np.zeros(shape + (2, 2), dtype=complex)
            v = np.zeros(shape + (2, 2), dtype=complex)
            u[..., 0, 0] = -u_z / 2.0
            u[..., 0, 1] = -lam / 2.0
            u[..., 1, 0] = -lam / 2.0
            u[..., 1, 1] = u_z / 2.0
            v[..., 0, 1] = np.exp(-2.0 * self.alpha) / (2.0 * lam)
            v[..., 1, 0] = np.exp(2.0 * self.alpha) / (2.0 * lam)
            return u, v
        return self._isothermic_matrices(lam, a_z, a_zbar, ea)

    def _isothermic_matrices(
        self, lam: complex, a_z: ComplexArray, a_zbar: ComplexArray, ea: RealArray
    ) -> tuple[ComplexArray, ComplexArray]:
        assert self.k1 is not None and self.k2 is not None
        k1, k2 = self.k1, self.k2
        shape = self.grid.shape
        small_u = np.zeros(shape + (2, 2), dtype=complex)
        small_v = np.zeros(shape + (2, 2), dtype=complex)
        small_u[..., 0, 0] = a_z
        small_u[..., 0, 1] = (k1 - k2) * ea / 4.0
        small_u[..., 1, 0] = -(k1 + k2) * ea / 4.0
        small_v[..., 0, 1] = (k1 + k2) * ea / 4.0
        small_v[..., 1, 0] = (k2 - k1) * ea / 4.0
        small_v[..., 1, 1] = a_zbar
        eye = np.eye(2)
        u = np.zeros(shape + (4, 4), dtype=complex)
        v = np.zeros(shape + (4, 4), dtype=complex)
        u[..., :2, :2] = small_u
        u[..., :2, 2:] = lam * J_MINUS
        u[..., 2:, :2] = lam * J_PLUS
        u[..., 2:, 2:] = small_u + a_z[..., None, None] * eye
        v[..., :2, :2] = small_v
        v[..., :2, 2:] = lam * J_PLUS
        v[..., 2:, :2] = lam * J_MINUS
        v[..., 2:, 2:] = small_v + a_zbar[..., None, None] * eye
        return u, v

    @property
    def depends_on_x_only(self) -> bool:
        fields = [self.alpha] + [k for k in (self.k1, self.k2) if k is not None]
        return all(_x_independent_of_y(f) for f in fields)

    @property
    def period(self) -> float:
        """Real first period of a rectangular lattice."""
        g1, g2 = self.grid.lattice.generators
        if abs(g1.imag) > 1e-12 * abs(g1) or abs(g2.real) > 1e-12 * abs(g2):
            raise LaxError("monodromy needs a rectangular lattice (T, i L)", code="NOT_RECTANGULAR")
        return float(g1.real)


def zero_curvature_residual(connection: LaxConnection, lam: complex) -> float:
    """max |U_zbar - V_z + [U, V]|."""
    u, v = connection.matrices(lam)
    _, u_zbar = matrix_wirtinger(connection.grid, u)
    v_z, _ = matrix_wirtinger(connection.grid, v)
    return float(np.max(np.abs(u_zbar - v_z + commutator(u, v))))


def system_residual(connection: LaxConnection, lam: complex, phi: BlochField) -> float:
    """(max |phi_z - U phi| + max |phi_zbar - V phi|) relative to max|phi|."""
    u, v = connection.matrices(lam)
    values = phi.values
    d, dbar = wirtinger(phi.grid, values, phi.shifts)
    first = d - np.einsum("jkab,bjk->ajk", u, values)
    second = dbar - np.einsum("jkab,bjk->ajk", v, values)
    scale = float(np.max(np.abs(values)))
    if scale == 0.0:
        return 0.0
    return float(np.max(np.abs(first)) + np.max(np.abs(second))) / scale


# =============================================================================
# Isothermic data
# =============================================================================


def isothermic_codazzi_residuals(
    grid: FundamentalGrid, alpha: ArrayLike, k1: ArrayLike, k2: ArrayLike
) -> tuple[float, float, float]:
    """Residuals of a_xx + a_yy + k1 k2 e^{2a} = 0, k2_x - (k1 - k2) a_x = 0 and k1_y + (k1 - k2) a_y = 0."""
    a = np.asarray(alpha, dtype=float)
    c1 = np.asarray(k1, dtype=float)
    c2 = np.asarray(k2, dtype=float)

    def partials(f: RealArray) -> tuple[RealArray, RealArray]:
        d, dbar = wirtinger(grid, f)
        return (d + dbar).real, (1j * (d - dbar)).real

    a_x, a_y = partials(a)
    a_z, _ = wirtinger(grid, a)
    _, a_zzbar = wirtinger(grid, a_z)
    gauss = 4.0 * a_zzbar.real + c1 * c2 * np.exp(2.0 * a)
    k2_x, _ = partials(c2)
    _, k1_y = partials(c1)
    first = k2_x - (c1 - c2) * a_x
    second = k1_y + (c1 - c2) * a_y
    return float(np.max(np.abs(gauss))), float(np.max(np.abs(first))), float(np.max(np.abs(second)))


def isothermic_pencil(
    grid: FundamentalGrid,
    alpha: ArrayLike,
    k1: ArrayLike,
    k2: ArrayLike,
    tolerance: float | None = None,
) -> LaxConnection:
    """The 4x4 pencil of isothermic data.

    Raises:
        LaxError: the data violate the Gauss or Codazzi equations beyond tolerance
    """
    tol = get_settings().codazzi_tolerance if tolerance is None else tolerance
    residuals = isothermic_codazzi_residuals(grid, alpha, k1, k2)
    if max(residuals) > tol:
        raise LaxError(
            f"isothermic data violate the compatibility equations: residuals {residuals}",
            code="CODAZZI_RESIDUAL",
        )
    return LaxConnection(
        "isothermic-4x4",
        grid,
        np.asarray(alpha, dtype=float),
        np.asarray(k1, dtype=float),
        np.asarray(k2, dtype=float),
    )


def pencil_from_surface(data: SurfaceData, tolerance: float | None = None) -> LaxConnection:
    """Isothermic pencil of a surface in an isothermic parameter; k1, k2 are the line curvatures."""
    k1, k2 = data.line_curvatures()
    return isothermic_pencil(data.grid, data.alpha, k1, k2, tolerance)


# =============================================================================
# Monodromy along the real period
# =============================================================================


@dataclass(frozen=True)
class LaxMonodromy:
    """Transfer matrix of phi_x = (U + V) phi over one real period."""

    tag: str
    lam: complex
    matrix: ComplexArray
    steps: int
    error: float

    @property
    def eigenvalues(self) -> ComplexArray:
        values = np.linalg.eigvals(self.matrix)
        result: ComplexArray = values[np.argsort(-np.abs(values))]
        return result

    @property
    def condition(self) -> float:
        """Condition number of the eigenvector matrix."""
        _, vectors = np.linalg.eig(self.matrix)
        return float(np.linalg.cond(vectors))


def _line_coefficient(connection: LaxConnection, lam: complex) -> ComplexArray:
    if not connection.depends_on_x_only:
        raise LaxError("monodromy along x needs y-independent data", code="NOT_Y_INDEPENDENT")
    u, v = connection.matrices(lam)
    result: ComplexArray = (u + v)[:, 0]
    return result


def lax_monodromy(connection: LaxConnection, lam: complex, tolerance: float | None = None) -> LaxMonodromy:
    """Monodromy over [0, T] for y-independent data.

    Raises:
        LaxError: the data depend on y, the lattice is not rectangular or l is a pole
    """
    lam = complex(lam)
    period = connection.period
    line = period * _line_coefficient(connection, lam)
    result = refined_transfer_matrix(
        lambda steps: half_step_samples(line, steps, axis=0), tolerance, unimodular=False
    )
    return LaxMonodromy(connection.tag, lam, result.matrix, result.steps, result.error)


def cmc_monodromy(field: SinhGordonField, lam: complex, tolerance: float | None = None) -> LaxMonodromy:
    """Monodromy of the zero-curvature pencil; its eigenvalues are the CMC multipliers over l."""
    return lax_monodromy(LaxConnection.cmc(field, "cmc-zcc"), lam, tolerance)


def vacuum_monodromy_eigenvalues(lam: complex, period: float) -> tuple[complex, complex]:
    """exp(+-T c) with c = (1/l - l) / 2, the u = 0 closed form."""
    c = 0.5 * (1.0 / complex(lam) - complex(lam))
    return complex(np.exp(period * c)), complex(np.exp(-period * c))


def involution_matrix(dimension: int) -> ComplexArray:
    """diag(1, -1) for the CMC pencils, diag(1, 1, -1, -1) for the isothermic pencil."""
    half = dimension // 2
    return np.diag([1.0] * half + [-1.0] * half).astype(complex)


@dataclass(frozen=True)
class InvolutionCheck:
    lam: complex
    eigenvalue_distance: float
    conjugation_residual: float
    condition: float


def involution_check(connection: LaxConnection, lam: complex) -> InvolutionCheck:
    """Compare M(-l) with S M(l) S and the eigenvalue multisets at l and -l."""
    lam = complex(lam)
    plus = lax_monodromy(connection, lam)
    minus = lax_monodromy(connection, -lam)
    s = involution_matrix(connection.dimension)
    conjugated = s @ plus.matrix @ s
    scale = 1.0 + float(np.max(np.abs(plus.matrix)))
    return InvolutionCheck(
        lam=lam,
        eigenvalue_distance=match_points(list(plus.eigenvalues), list(minus.eigenvalues)),
        conjugation_residual=float(np.max(np.abs(minus.matrix - conjugated))) / scale,
        condition=plus.condition,
    )


def liouville_residual(connection: LaxConnection, monodromy: LaxMonodromy) -> float:
    """|det M - exp(integral of tr(U + V) dx)| relative to the exponential."""
    line = _line_coefficient(connection, monodromy.lam)
    trace_integral = connection.period * np.mean(np.trace(line, axis1=-2, axis2=-1))
    expected = np.exp(trace_integral)
    return float(abs(np.linalg.det(monodromy.matrix) - expected) / abs(expected))


# =============================================================================
# Floquet functions on the grid
# =============================================================================


def _joint_eigenbasis(first: ComplexArray, second: ComplexArray) -> ComplexArray:
    """Eigenvectors of a generic combination of two commuting matrices, as columns."""
    weight = 0.6180339887 * (1.0 + np.max(np.abs(first))) / (1.0 + np.max(np.abs(second)))
    _, vectors = np.linalg.eig(first + weight * second)
    result: ComplexArray = vectors
    return result


def grid_floquet_functions(connection: LaxConnection, lam: complex) -> list[BlochField]:
    """Common eigenfunctions of both translations for y-independent data.

    phi(x, y) = e^{nu y} X(x) v where X is the transfer along x and v a common
    eigenvector of the x-monodromy and of C0 = i (U - V) at x = 0.
    """
    lam = complex(lam)
    grid = connection.grid
    period = connection.period
    height = grid.lattice.gamma2.imag
    line = period * _line_coefficient(connection, lam)
    transfer = refined_path_transfer(lambda steps: half_step_samples(line, steps, axis=0), grid.n1).matrix
    monodromy = transfer[grid.n1]
    u, v = connection.matrices(lam)
    c0 = 1j * (u[0, 0] - v[0, 0])
    basis = _joint_eigenbasis(c0, monodromy)

    y = grid.points.imag
    out = []
    for j in range(basis.shape[1]):
        vec = basis[:, j]
        norm = np.vdot(vec, vec)
        mu1 = complex(np.vdot(vec, monodromy @ vec) / norm)
        nu = complex(np.vdot(vec, c0 @ vec) / norm)
        line_values = transfer[: grid.n1] @ vec
        values = np.moveaxis(line_values, -1, 0)[:, :, None] * np.exp(nu * y)[None]
        out.append(BlochField(grid, values, (complex(np.log(mu1)), nu * height)))
    return out


# =============================================================================
# Maps between Floquet functions
# =============================================================================


@dataclass(frozen=True)
class PropagatedFunction:
    psi: BlochField
    residual: float | None
    degenerate: bool


def cmc_prop_map(phi: BlochField, alpha: ArrayLike, lam: complex) -> PropagatedFunction:
    """psi = (l phi2, e^alpha phi1) and its residual in the geometric pencil.

    A solution of the zero-curvature pencil goes to a solution of the geometric
    one with the same multipliers. At l = 0 the first component vanishes and
    the target pencil has a pole, so no residual is computed.
    """
    lam = complex(lam)
    a = np.asarray(alpha, dtype=float)
    values = np.stack([lam * phi.values[1], np.exp(a) * phi.values[0]])
    psi = BlochField(phi.grid, values, phi.exponents)
    if lam == 0:
        logger.warning("propagation_degenerate", lam="0")
        return PropagatedFunction(psi, None, True)
    target = LaxConnection("cmc-geom", phi.grid, a)
    return PropagatedFunction(psi, system_residual(target, lam, psi), False)


@dataclass(frozen=True)
class DiracPair:
    """psi = e^-a (phi3, phi4) and psi* = e^-a (phi2, phi1) with their Dirac residuals."""

    psi: BlochField
    psi_star: BlochField
    residual: float
    residual_star: float

    @property
    def multipliers(self) -> tuple[complex, complex]:
        return self.psi.multipliers


def extract_dirac_pair(phi_hat: BlochField, connection: LaxConnection) -> DiracPair:
    """Both Dirac solutions carried by a solution of the isothermic pencil.

    Residuals are taken against U = (k1 + k2) e^a / 4 and U* = (k2 - k1) e^a / 4
    and are relative to the size of the whole extracted vector.

    Raises:
        LaxError: the pencil is not isothermic or e^alpha vanishes
    """
    if connection.tag != "isothermic-4x4" or connection.k1 is None or connection.k2 is None:
        raise LaxError("Dirac pairs come from the isothermic pencil", code="NOT_ISOTHERMIC")
    ea = np.exp(connection.alpha)
    if np.min(ea) <= 1e-300:
        raise LaxError("e^alpha vanishes", code="DEGENERATE_METRIC")
    inv = 1.0 / ea
    values = phi_hat.values
    psi = BlochField(phi_hat.grid, np.stack([inv * values[2], inv * values[3]]), phi_hat.exponents)
    psi_star = BlochField(phi_hat.grid, np.stack([inv * values[1], inv * values[0]]), phi_hat.exponents)
    potential = (connection.k1 + connection.k2) * ea / 4.0
    dual = (connection.k2 - connection.k1) * ea / 4.0
    reference = float(np.max(np.abs(inv * values)))
    return DiracPair(
        psi, psi_star, _dirac_residual(psi, potential, reference), _dirac_residual(psi_star, dual, reference)
    )


def embed_dirac_pair(psi: BlochField, psi_star: BlochField, alpha: ArrayLike) -> BlochField:
    """phi^ = e^a (psi*2, psi*1, psi1, psi2), the inverse of the extraction."""
    ea = np.exp(np.asarray(alpha, dtype=float))
    values = ea * np.stack([psi_star.values[1], psi_star.values[0], psi.values[0], psi.values[1]])
    return BlochField(psi.grid, values, psi.exponents)


def _dirac_residual(psi: BlochField, potential: ArrayLike, reference: float = 0.0) -> float:
    """Residual relative to max(max|psi|, reference)."""
    size = float(np.max(np.abs(psi.values)))
    if size == 0.0:
        return 0.0
    return sphere_dirac_residual(psi.grid, psi.values, psi.shifts, potential) * size / max(size, reference)


def sign_isospectrality(psi: BlochField, potential: ArrayLike) -> tuple[float, float]:
    """Dirac residuals of psi for U and of (psi1, -psi2) for -U; the multipliers agree by construction."""
    u = np.asarray(potential, dtype=float)
    flipped = BlochField(psi.grid, np.stack([psi.values[0], -psi.values[1]]), psi.exponents)
    return _dirac_residual(psi, u), _dirac_residual(flipped, -u)


def extraction_curve(connection: LaxConnection, lams: Sequence[complex]) -> list[dict[str, object]]:
    """Best extraction residuals over the grid Floquet functions at each l."""
    rows: list[dict[str, object]] = []
    for lam in lams:
        pairs = [extract_dirac_pair(phi, connection) for phi in grid_floquet_functions(connection, lam)]
        rows.append(
            {
                "lambda": complex(lam),
                "residual": min(p.residual + p.residual_star for p in pairs),
                "multipliers": [p.multipliers for p in pairs],
            }
        )
    return rows


def lambda_report(connection: LaxConnection, lams: Sequence[complex]) -> list[dict[str, object]]:
    """Eigenvalues and residuals of the monodromy at each sample l."""
    rows: list[dict[str, object]] = []
    for lam in lams:
        monodromy = lax_monodromy(connection, lam)
        rows.append(
            {
                "lambda": complex(lam),
                "eigenvalues": [complex(e) for e in monodromy.eigenvalues],
                "zero_curvature_residual": zero_curvature_residual(connection, lam),
                "liouville_residual": liouville_residual(connection, monodromy),
                "monodromy_error": monodromy.error,
            }
        )
    return rows
