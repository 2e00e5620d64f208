"""Lattices, sampled fields with spin characters and spectral calculus on flat tori.

A field on C/Lambda is sampled at z_jk = (j/n1) gamma1 + (k/n2) gamma2. Derivatives are
taken in the lattice coordinates (s, t) by FFT and combined with the constant Jacobian
of (s, t) -> (x, y). Antiperiodic characters use half-integer frequencies; Bloch fields
with arbitrary multipliers are demodulated by their exponential factor first.
"""
from __future__ import annotations

from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Union

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import fft as sfft
from scipy.linalg import toeplitz

from ..config import get_settings
from ..errors import NumericalError

ComplexArray = NDArray[np.complex128]
RealArray = NDArray[np.float64]
IntMatrix = tuple[tuple[int, int], tuple[int, int]]
Character = tuple[int, int]

IDENTITY: IntMatrix = ((1, 0), (0, 1))


class FieldError(NumericalError):
    """Invalid lattice, grid or field data."""

    def __init__(self, message: str, code: str = "FIELD_ERROR"):
        super().__init__(message, code=code)


# =============================================================================
# Unimodular matrices
# =============================================================================


def as_unimodular(m: ArrayLike) -> IntMatrix:
    """Validate a 2x2 integer matrix of determinant 1."""
    arr = np.asarray(m)
    if arr.shape != (2, 2):
        raise FieldError(f"basis change must be a 2x2 matrix, got shape {arr.shape}", code="NOT_UNIMODULAR")
    if not np.all(np.isfinite(arr)) or not np.all(arr == np.round(arr)):
        raise FieldError("basis change must have integer entries", code="NOT_UNIMODULAR")
    a, b, c, d = (int(round(float(np.real(v)))) for v in arr.ravel())
    det = a * d - b * c
    if det != 1:
        raise FieldError(f"basis change must have determinant 1, got {det}", code="NOT_UNIMODULAR")
    return ((a, b), (c, d))


def invert_unimodular(m: ArrayLike) -> IntMatrix:
    """Inverse of an SL(2,Z) matrix."""
    (a, b), (c, d) = as_unimodular(m)
    return ((d, -b), (-c, a))


def _compose(m: IntMatrix, n: IntMatrix) -> IntMatrix:
    (a, b), (c, d) = m
    (e, f), (g, h) = n
    return ((a * e + b * g, a * f + b * h), (c * e + d * g, c * f + d * h))


# =============================================================================
# Lattice and grid
# =============================================================================


@dataclass(frozen=True)
class Lattice:
    """Period lattice gamma1 Z + gamma2 Z.

    The generators are stored as base generators plus the accumulated integer basis
    change, so that a change of basis followed by its inverse is exact.
    """

    base1: complex
    base2: complex
    basis: IntMatrix = IDENTITY

    def __post_init__(self) -> None:
        b1, b2 = complex(self.base1), complex(self.base2)
        if not (np.isfinite(b1) and np.isfinite(b2)):
            raise FieldError("lattice generators must be finite", code="NON_FINITE_VALUES")
        object.__setattr__(self, "base1", b1)
        object.__setattr__(self, "base2", b2)
        object.__setattr__(self, "basis", as_unimodular(self.basis))
        cross = (b1.conjugate() * b2).imag
        if abs(cross) <= 1e-14 * abs(b1) * abs(b2) or cross == 0.0:
            raise FieldError(
                f"generators {b1} and {b2} are linearly dependent over R",
                code="DEGENERATE_LATTICE",
            )

    @classmethod
    def square(cls, side: float = 1.0) -> Lattice:
        return cls(complex(side), 1j * side)

    @classmethod
    def hexagonal(cls, side: float = 1.0) -> Lattice:
        return cls(complex(side), side * complex(0.5, np.sqrt(3.0) / 2.0))

    @property
    def gamma1(self) -> complex:
        (a, b), _ = self.basis
        return a * self.base1 + b * self.base2

    @property
    def gamma2(self) -> complex:
        _, (c, d) = self.basis
        return c * self.base1 + d * self.base2

    @property
    def generators(self) -> tuple[complex, complex]:
        return self.gamma1, self.gamma2

    @property
    def area(self) -> float:
        """Area of the fundamental parallelogram."""
        return abs((self.gamma1.conjugate() * self.gamma2).imag)

    @property
    def orientation(self) -> float:
        """Im(conj(gamma1) gamma2), signed."""
        return (self.gamma1.conjugate() * self.gamma2).imag

    @property
    def dual_generators(self) -> tuple[complex, complex]:
        """Generators of Lambda* with <gamma_j*, gamma_k> = delta_jk."""
        g1, g2 = self.generators
        w = self.orientation
        return -1j * g2 / w, 1j * g1 / w

    @property
    def wirtinger_coefficients(self) -> tuple[complex, complex]:
        """(d s/d z, d t/d z) for z = s gamma1 + t gamma2."""
        g1, g2 = self.generators
        denom = g1 * g2.conjugate() - g1.conjugate() * g2
        return g2.conjugate() / denom, -g1.conjugate() / denom

    def change_basis(self, m: ArrayLike) -> Lattice:
        """New generators (a gamma1 + b gamma2, c gamma1 + d gamma2)."""
        return Lattice(self.base1, self.base2, _compose(as_unimodular(m), self.basis))

    def scaled(self, factor: complex) -> Lattice:
        """The lattice factor * Lambda in its current basis."""
        return Lattice(factor * self.gamma1, factor * self.gamma2)

    def pairing(self, k1: complex, k2: complex, gamma: complex) -> complex:
        """<k, gamma> = k1 Re(gamma) + k2 Im(gamma), bilinear in complex k."""
        return k1 * gamma.real + k2 * gamma.imag

    def reduce_quasimomentum(self, k1: complex, k2: complex) -> tuple[complex, complex]:
        """Representative of (k1, k2) modulo Lambda* with real pairings in [-1/2, 1/2)."""
        d1, d2 = self.dual_generators
        for g, d in zip(self.generators, (d1, d2), strict=True):
            n = np.floor(self.pairing(k1.real, k2.real, g).real + 0.5)
            k1 -= n * d.real
            k2 -= n * d.imag
        return complex(k1), complex(k2)

    def to_dict(self) -> dict[str, list[float]]:
        g1, g2 = self.generators
        return {"gamma1": [g1.real, g1.imag], "gamma2": [g2.real, g2.imag]}

    @classmethod
    def from_dict(cls, data: dict[str, Sequence[float]]) -> Lattice:
        return cls(complex(*data["gamma1"]), complex(*data["gamma2"]))


@dataclass(frozen=True)
class FundamentalGrid:
    """Uniform samples of the fundamental parallelogram, endpoints excluded."""

    lattice: Lattice
    n1: int = 64
    n2: int = 64

    def __post_init__(self) -> None:
        for name in ("n1", "n2"):
            n = getattr(self, name)
            if int(n) != n or n < 8 or n % 2:
                raise FieldError(f"{name} must be an even integer >= 8, got {n}", code="GRID_SIZE")
            object.__setattr__(self, name, int(n))

    @property
    def shape(self) -> tuple[int, int]:
        return self.n1, self.n2

    @cached_property
    def st(self) -> tuple[RealArray, RealArray]:
        """Lattice coordinates (s, t) in [0, 1)^2, indexed (j, k)."""
        s = np.arange(self.n1) / self.n1
        t = np.arange(self.n2) / self.n2
        return np.meshgrid(s, t, indexing="ij")

    @cached_property
    def points(self) -> ComplexArray:
        s, t = self.st
        g1, g2 = self.lattice.generators
        return s * g1 + t * g2

    def with_lattice(self, lattice: Lattice) -> FundamentalGrid:
        return FundamentalGrid(lattice, self.n1, self.n2)


# =============================================================================
# Spectral calculus on raw samples
# =============================================================================


def _wavenumbers(n: int, shift: complex) -> ComplexArray:
    m = sfft.fftfreq(n, d=1.0 / n)
    k = 2j * np.pi * (m + shift)
    if shift == 0:
        k[n // 2] = 0.0
    return k


def spectral_partials(
    grid: FundamentalGrid,
    values: ArrayLike,
    shifts: tuple[complex, complex] = (0.0, 0.0),
) -> tuple[ComplexArray, ComplexArray]:
    """d/ds and d/dt of samples over the last two axes.

    ``shifts`` are the frequency offsets along each generator: 0 for periodic,
    1/2 for antiperiodic, log(mu)/(2 pi i) for a Bloch multiplier mu.
    """
    workers = get_settings().threads
    g = np.asarray(values, dtype=complex)
    phase: ComplexArray | None = None
    if shifts[0] != 0 or shifts[1] != 0:
        s, t = grid.st
        phase = np.exp(2j * np.pi * (shifts[0] * s + shifts[1] * t))
        g = g / phase
    spectrum = sfft.fft2(g, axes=(-2, -1), workers=workers)
    k1 = _wavenumbers(grid.n1, shifts[0])[:, None]
    k2 = _wavenumbers(grid.n2, shifts[1])[None, :]
    d_s = sfft.ifft2(spectrum * k1, axes=(-2, -1), workers=workers)
    d_t = sfft.ifft2(spectrum * k2, axes=(-2, -1), workers=workers)
    if phase is not None:
        d_s = d_s * phase
        d_t = d_t * phase
    return d_s, d_t


def wirtinger(
    grid: FundamentalGrid,
    values: ArrayLike,
    shifts: tuple[complex, complex] = (0.0, 0.0),
) -> tuple[ComplexArray, ComplexArray]:
    """(d/dz, d/dzbar) of samples over the last two axes."""
    d_s, d_t = spectral_partials(grid, values, shifts)
    cs, ct = grid.lattice.wirtinger_coefficients
    return cs * d_s + ct * d_t, np.conj(cs) * d_s + np.conj(ct) * d_t


def domain_integral(grid: FundamentalGrid, values: ArrayLike) -> Any:
    """Periodic trapezoid rule over the last two axes."""
    return grid.lattice.area * np.mean(np.asarray(values), axis=(-2, -1))


def integrate_wirtinger(grid: FundamentalGrid, g: ArrayLike) -> tuple[RealArray, RealArray]:
    """Recover a real map F = P + s tau1 + t tau2 from g = dF/dz.

    Returns the periodic part P (zero mean, same leading shape as ``g``) and the
    translation periods tau, shape ``(2,) + leading``. Nyquist modes are dropped.
    """
    workers = get_settings().threads
    g = np.asarray(g, dtype=complex)
    g1, g2 = grid.lattice.generators
    mean = np.mean(g, axis=(-2, -1))
    periods = np.stack([2.0 * (mean * g1).real, 2.0 * (mean * g2).real])

    cs, ct = grid.lattice.wirtinger_coefficients
    symbol = cs * _wavenumbers(grid.n1, 0.0)[:, None] + ct * _wavenumbers(grid.n2, 0.0)[None, :]
    spectrum = sfft.fft2(g, axes=(-2, -1), workers=workers)
    inverse = np.zeros_like(symbol)
    nonzero = symbol != 0
    inverse[nonzero] = 1.0 / symbol[nonzero]
    periodic = sfft.ifft2(spectrum * inverse, axes=(-2, -1), workers=workers).real
    return periodic, periods


def spectral_diff_matrix(n: int, period: float = 1.0) -> RealArray:
    """Dense first-derivative matrix on n periodic samples (even n, Nyquist dropped)."""
    if n % 2:
        raise FieldError(f"dense differentiation matrix needs even n, got {n}", code="GRID_SIZE")
    h = 2.0 * np.pi / n
    kk = np.arange(1, n)
    topc = 1.0 / np.tan(np.arange(1, n // 2 + 1) * h / 2.0)
    temp = np.concatenate((topc, -np.flip(topc[: n // 2 - 1])))
    col = np.concatenate(([0.0], 0.5 * ((-1.0) ** kk) * temp))
    return 2.0 * np.pi / period * toeplitz(col, r=-col)


# =============================================================================
# Sampled fields
# =============================================================================


def _frozen(values: ArrayLike, grid: FundamentalGrid) -> ComplexArray:
    arr = np.array(values, dtype=complex)
    if arr.shape != grid.shape:
        raise FieldError(f"field shape {arr.shape} does not match grid {grid.shape}", code="SHAPE_MISMATCH")
    if not np.all(np.isfinite(arr)):
        bad = np.argwhere(~np.isfinite(arr))[0]
        raise FieldError(f"non-finite sample at index {tuple(int(i) for i in bad)}", code="NON_FINITE_VALUES")
    arr.setflags(write=False)
    return arr


def _check_character(character: Sequence[int]) -> Character:
    e1, e2 = (int(e) for e in character)
    if e1 not in (1, -1) or e2 not in (1, -1):
        raise FieldError(f"character entries must be +1 or -1, got {tuple(character)}", code="BAD_CHARACTER")
    return e1, e2


Scalar = Union[complex, float, int, np.number]  # noqa: UP007


@dataclass(frozen=True, eq=False)
class PeriodicField:
    """Samples of f with f(z + gamma_j) = eps_j f(z)."""

    grid: FundamentalGrid
    values: ComplexArray
    character: Character = (1, 1)

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", _frozen(self.values, self.grid))
        object.__setattr__(self, "character", _check_character(self.character))

    @classmethod
    def constant(cls, grid: FundamentalGrid, value: complex) -> PeriodicField:
        return cls(grid, np.full(grid.shape, value, dtype=complex))

    @classmethod
    def from_function(
        cls,
        grid: FundamentalGrid,
        fn: Callable[[ComplexArray], ArrayLike],
        character: Character = (1, 1),
    ) -> PeriodicField:
        """Sample ``fn(z)`` at the grid points."""
        return cls(grid, np.broadcast_to(fn(grid.points), grid.shape), character)

    @property
    def shifts(self) -> tuple[complex, complex]:
        e1, e2 = self.character
        return (0.0 if e1 == 1 else 0.5), (0.0 if e2 == 1 else 0.5)

    @property
    def real(self) -> RealArray:
        return self.values.real

    def with_values(self, values: ArrayLike, character: Character | None = None) -> PeriodicField:
        return PeriodicField(self.grid, values, self.character if character is None else character)

    def conj(self) -> PeriodicField:
        return self.with_values(np.conj(self.values))

    def abs2(self) -> PeriodicField:
        return PeriodicField(self.grid, np.abs(self.values) ** 2)

    def _combine(self, other: PeriodicField) -> None:
        if other.grid != self.grid:
            raise FieldError("fields live on different grids", code="GRID_MISMATCH")

    def __add__(self, other: PeriodicField) -> PeriodicField:
        self._combine(other)
        if other.character != self.character:
            raise FieldError(
                f"cannot add fields with characters {self.character} and {other.character}",
                code="CHARACTER_MISMATCH",
            )
        return self.with_values(self.values + other.values)

    def __sub__(self, other: PeriodicField) -> PeriodicField:
        return self + (-other)

    def __neg__(self) -> PeriodicField:
        return self.with_values(-self.values)

    def __mul__(self, other: PeriodicField | Scalar) -> PeriodicField:
        if isinstance(other, PeriodicField):
            self._combine(other)
            character = (
                self.character[0] * other.character[0],
                self.character[1] * other.character[1],
            )
            return PeriodicField(self.grid, self.values * other.values, character)
        return self.with_values(self.values * other)

    __rmul__ = __mul__


@dataclass(frozen=True, eq=False)
class BlochField:
    """Samples of a Floquet function, psi(z + gamma_j) = mu_j psi(z).

    ``exponents`` are the chosen logarithms p_j of the multipliers; the product
    psi * exp(-p1 s - p2 t) is periodic and is what gets differentiated.
    """

    grid: FundamentalGrid
    values: ComplexArray
    exponents: tuple[complex, complex] = (0j, 0j)
    components: int = field(default=1, init=False)

    def __post_init__(self) -> None:
        arr = np.array(self.values, dtype=complex)
        if arr.shape[-2:] != self.grid.shape:
            raise FieldError(f"field shape {arr.shape} does not match grid {self.grid.shape}", code="SHAPE_MISMATCH")
        if not np.all(np.isfinite(arr)):
            raise FieldError("non-finite samples in Bloch field", code="NON_FINITE_VALUES")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)
        object.__setattr__(self, "exponents", (complex(self.exponents[0]), complex(self.exponents[1])))
        object.__setattr__(self, "components", int(np.prod(arr.shape[:-2], dtype=int)))

    @classmethod
    def from_multipliers(
        cls, grid: FundamentalGrid, values: ArrayLike, multipliers: tuple[complex, complex]
    ) -> BlochField:
        """Use principal logarithms of the multipliers as exponents."""
        return cls(grid, np.asarray(values), (np.log(complex(multipliers[0])), np.log(complex(multipliers[1]))))

    @property
    def multipliers(self) -> tuple[complex, complex]:
        return complex(np.exp(self.exponents[0])), complex(np.exp(self.exponents[1]))

    @property
    def shifts(self) -> tuple[complex, complex]:
        return self.exponents[0] / (2j * np.pi), self.exponents[1] / (2j * np.pi)


AnyField = Union[PeriodicField, BlochField]  # noqa: UP007


# =============================================================================
# Field operations
# =============================================================================


def dz(f: AnyField) -> AnyField:
    """Wirtinger derivative d/dz, computed spectrally; character preserved."""
    d, _ = wirtinger(f.grid, f.values, f.shifts)
    if isinstance(f, PeriodicField):
        return f.with_values(d)
    return BlochField(f.grid, d, f.exponents)


def dzbar(f: AnyField) -> AnyField:
    """Wirtinger derivative d/dzbar, computed spectrally; character preserved."""
    _, d = wirtinger(f.grid, f.values, f.shifts)
    if isinstance(f, PeriodicField):
        return f.with_values(d)
    return BlochField(f.grid, d, f.exponents)


def integrate_over_domain(f: PeriodicField) -> complex:
    """Integral over the fundamental parallelogram (area times sample mean)."""
    if f.character != (1, 1):
        raise FieldError(
            f"a field with character {f.character} changes sign under a period, "
            "so its integral depends on the choice of fundamental domain",
            code="ANTIPERIODIC_INTEGRAND",
        )
    return complex(domain_integral(f.grid, f.values))


def fourier_coefficients(f: PeriodicField) -> ComplexArray:
    """Normalized coefficients of the demodulated samples (values = sum c e^{2 pi i ...})."""
    g = f.values
    if f.character != (1, 1):
        s, t = f.grid.st
        sh1, sh2 = f.shifts
        g = g * np.exp(-2j * np.pi * (sh1 * s + sh2 * t))
    return sfft.fft2(g, workers=get_settings().threads) / (f.grid.n1 * f.grid.n2)


def change_basis(lattice: Lattice, m: ArrayLike) -> Lattice:
    """Functional alias of :meth:`Lattice.change_basis`."""
    return lattice.change_basis(m)


def field_to_dict(f: PeriodicField) -> dict[str, Any]:
    """Flat JSON form, values row-major as [re, im] pairs."""
    flat = f.values.ravel()
    return {
        "lattice": f.grid.lattice.to_dict(),
        "n1": f.grid.n1,
        "n2": f.grid.n2,
        "character": list(f.character),
        "values": [[float(v.real), float(v.imag)] for v in flat],
    }


def field_from_dict(data: dict[str, Any]) -> PeriodicField:
    try:
        grid = FundamentalGrid(Lattice.from_dict(data["lattice"]), int(data["n1"]), int(data["n2"]))
        pairs = np.asarray(data["values"], dtype=float)
        values = (pairs[:, 0] + 1j * pairs[:, 1]).reshape(grid.shape)
        character = (int(data["character"][0]), int(data["character"][1]))
    except (KeyError, IndexError, TypeError, ValueError) as exc:
        raise FieldError(f"malformed field document: {exc}", code="BAD_FIELD_DOCUMENT") from exc
    return PeriodicField(grid, values, character)
