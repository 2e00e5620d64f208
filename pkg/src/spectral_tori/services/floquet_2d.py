"""Floquet spectrum of the two-dimensional Dirac operator D = [[U, d], [-dbar, U]].

Floquet functions psi = e^{2 pi i <k, x>} phi with phi periodic turn D into the
twisted operator D_k acting on Fourier modes kappa in the dual lattice, where d
and dbar become a(kappa) = pi(kappa2 + i kappa1) and -b(kappa) = -pi(kappa2 - i kappa1).
The spectral variety is {k : ker D_k != 0}, sampled here through truncations to
|m|, |n| <= M and a smallest-singular-value witness. With l = a(k), W = -b(k)
the multipliers are mu(gamma) = exp(l gamma + W conj(gamma)).

Complex potentials V are allowed; the lower diagonal block then uses conj(V),
which is the operator D^S of surfaces in S3.
"""
from __future__ import annotations

from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import linalg, optimize

from ..config import get_settings
from ..core.fields import (
    FundamentalGrid,
    Lattice,
    PeriodicField,
    as_unimodular,
    fourier_coefficients,
)
from ..errors import ConfigError, NumericalError
from ..logging import get_logger

logger = get_logger(__name__)

ComplexArray = NDArray[np.complex128]
RealArray = NDArray[np.float64]

WITNESSES = ("smallest", "resonance")


def symbol_a(k1: complex, k2: complex) -> complex:
    """a(k) = pi (k2 + i k1), the symbol of d on e^{2 pi i <k, x>}."""
    return complex(np.pi * (k2 + 1j * k1))


def symbol_b(k1: complex, k2: complex) -> complex:
    """b(k) = pi (k2 - i k1); dbar acts as -b(k)."""
    return complex(np.pi * (k2 - 1j * k1))


# =============================================================================
# Quasimomenta
# =============================================================================


@dataclass(frozen=True)
class QuasimomentumPoint:
    """k = (k1, k2) in C^2."""

    k1: complex
    k2: complex

    def __post_init__(self) -> None:
        object.__setattr__(self, "k1", complex(self.k1))
        object.__setattr__(self, "k2", complex(self.k2))

    @classmethod
    def from_lambda_w(cls, lam: complex, w: complex) -> QuasimomentumPoint:
        """The point with a(k) = l and -b(k) = W."""
        return cls((lam + w) / (2j * np.pi), (lam - w) / (2.0 * np.pi))

    @property
    def lam(self) -> complex:
        return symbol_a(self.k1, self.k2)

    @property
    def w(self) -> complex:
        return -symbol_b(self.k1, self.k2)

    def multipliers(self, lattice: Lattice) -> tuple[complex, complex]:
        """exp(2 pi i <k, gamma_j>) for the current basis of the lattice."""
        return tuple(  # type: ignore[return-value]
            complex(np.exp(2j * np.pi * lattice.pairing(self.k1, self.k2, g))) for g in lattice.generators
        )

    def shifted(self, kappa: complex) -> QuasimomentumPoint:
        """k + kappa for a real vector kappa written as a complex number."""
        return QuasimomentumPoint(self.k1 + kappa.real, self.k2 + kappa.imag)

    def reduced(self, lattice: Lattice) -> QuasimomentumPoint:
        return QuasimomentumPoint(*lattice.reduce_quasimomentum(self.k1, self.k2))

    def as_tuple(self) -> tuple[complex, complex]:
        return self.k1, self.k2


@dataclass(frozen=True)
class SpectrumSample:
    """Witness value and multipliers at one quasimomentum."""

    k: QuasimomentumPoint
    witness: float
    multipliers: tuple[complex, complex]
    flagged: bool = False
    resonance_witness: float | None = None
    parameter: complex | None = None


# =============================================================================
# Truncated pencil
# =============================================================================


@dataclass(frozen=True, eq=False)
class TruncatedPencil:
    """D_k restricted to Fourier modes |m|, |n| <= cutoff; the potential part does not depend on k.

    The unknown vector is (phi1 modes, phi2 modes); mode (m, n) is the dual vector
    m gamma1* + n gamma2*.
    """

    lattice: Lattice
    cutoff: int
    top: ComplexArray
    bottom: ComplexArray
    constant: bool
    tail: float
    k: QuasimomentumPoint | None = None

    @classmethod
    def from_potential(cls, potential: PeriodicField, cutoff: int | None = None) -> TruncatedPencil:
        """Convolution blocks from the Fourier coefficients of V and conj(V).

        Raises:
            ConfigError: the cutoff is below 1 or the grid cannot resolve 2 M modes
        """
        m = get_settings().fourier_cutoff if cutoff is None else cutoff
        if m < 1:
            raise ConfigError(f"Fourier cutoff must be at least 1, got {m}")
        grid = potential.grid
        if 4 * m >= min(grid.n1, grid.n2):
            raise ConfigError(f"grid {grid.shape} too coarse for Fourier cutoff {m}")
        if potential.character != (1, 1):
            raise ConfigError("the potential must be periodic")
        values = potential.values
        coeff = fourier_coefficients(potential)
        coeff_conj = fourier_coefficients(potential.conj())

        modes = np.arange(-m, m + 1)
        mm, nn = np.meshgrid(modes, modes, indexing="ij")
        mi, ni = mm.ravel(), nn.ravel()
        dm = (mi[:, None] - mi[None, :]) % grid.n1
        dn = (ni[:, None] - ni[None, :]) % grid.n2
        top = coeff[dm, dn]
        bottom = coeff_conj[dm, dn]

        inside = np.zeros(grid.shape, dtype=bool)
        inside[np.ix_(modes % grid.n1, modes % grid.n2)] = True
        total = float(np.sum(np.abs(coeff) ** 2))
        tail = float(np.sum(np.abs(coeff[~inside]) ** 2)) / total if total > 0 else 0.0
        if tail > get_settings().truncation_tail_tolerance:
            logger.warning("fourier_truncation_inadequate", cutoff=m, tail_fraction=tail)
        constant = bool(np.all(values == values.flat[0]))
        return cls(grid.lattice, m, top, bottom, constant, tail)

    @cached_property
    def modes(self) -> tuple[ComplexArray, ComplexArray]:
        """(a(kappa), b(kappa)) for every mode, row-major in (m, n)."""
        d1, d2 = self.lattice.dual_generators
        r = np.arange(-self.cutoff, self.cutoff + 1)
        mm, nn = np.meshgrid(r, r, indexing="ij")
        kappa = mm.ravel() * d1 + nn.ravel() * d2
        return np.pi * (kappa.imag + 1j * kappa.real), np.pi * (kappa.imag - 1j * kappa.real)

    @property
    def size(self) -> int:
        return (2 * self.cutoff + 1) ** 2

    @property
    def adequate(self) -> bool:
        return self.tail <= get_settings().truncation_tail_tolerance

    def with_k(self, k: QuasimomentumPoint) -> TruncatedPencil:
        return TruncatedPencil(self.lattice, self.cutoff, self.top, self.bottom, self.constant, self.tail, k)

    def _reduced(self, k: QuasimomentumPoint | None) -> QuasimomentumPoint:
        k = self.k if k is None else k
        if k is None:
            raise ConfigError("no quasimomentum given")
        return k.reduced(self.lattice)

    def matrix(self, k: QuasimomentumPoint | None = None) -> ComplexArray:
        """Dense D_k, size 2 (2M + 1)^2."""
        kr = self._reduced(k)
        a, b = self.modes
        n = self.size
        out = np.zeros((2 * n, 2 * n), dtype=complex)
        out[:n, :n] = self.top
        out[n:, n:] = self.bottom
        out[:n, n:] = np.diag(a + kr.lam)
        out[n:, :n] = np.diag(b + symbol_b(kr.k1, kr.k2))
        return out

    def blocks(self, k: QuasimomentumPoint | None = None) -> ComplexArray:
        """Per-mode 2x2 blocks [[c, a + l], [b - W, conj c]] of a constant potential, shape (N, 2, 2)."""
        if not self.constant:
            raise ConfigError("mode blocks exist only for constant potentials")
        kr = self._reduced(k)
        a, b = self.modes
        out = np.empty((self.size, 2, 2), dtype=complex)
        out[:, 0, 0] = self.top[0, 0]
        out[:, 1, 1] = self.bottom[0, 0]
        out[:, 0, 1] = a + kr.lam
        out[:, 1, 0] = b + symbol_b(kr.k1, kr.k2)
        return out

    def singular_values(self, k: QuasimomentumPoint | None = None) -> RealArray:
        """All singular values of D_k in ascending order."""
        if self.constant:
            values = np.linalg.svd(self.blocks(k), compute_uv=False).ravel()
        else:
            values = linalg.svdvals(self.matrix(k))
        return np.sort(values)

    def witness(self, k: QuasimomentumPoint | None = None) -> float:
        return float(self.singular_values(k)[0])

    def resonance_witness(self, k: QuasimomentumPoint | None = None) -> float:
        """Second smallest singular value; vanishes where the kernel is at least two-dimensional."""
        return float(self.singular_values(k)[1])

    def schur_values(self, lam: complex) -> ComplexArray:
        """All W with det D = 0 at a(k) = l: eigenvalues of diag(b) - C_bottom diag(a + l)^{-1} C_top."""
        a, b = self.modes
        q = a + lam
        if np.min(np.abs(q)) < 1e-12:
            raise NumericalError(f"l = {lam} lies on a pole of the Schur reduction", code="SCHUR_POLE")
        if self.constant:
            result: ComplexArray = b - self.top[0, 0] * self.bottom[0, 0] / q
            return result
        reduced = np.diag(b) - self.bottom @ (self.top / q[:, None])
        return np.linalg.eigvals(reduced)


def build_twisted_dirac(potential: PeriodicField, k: QuasimomentumPoint, cutoff: int | None = None) -> TruncatedPencil:
    """The truncated twisted operator at a quasimomentum; ``.matrix()`` assembles it."""
    return TruncatedPencil.from_potential(potential, cutoff).with_k(k)


# =============================================================================
# Slices and scans
# =============================================================================


@dataclass(frozen=True)
class KSlice:
    """k(zeta) = k0 + zeta v over zeta in [-a, a] x [-b, b] on an n x n grid."""

    origin: QuasimomentumPoint
    direction: tuple[complex, complex]
    half_widths: tuple[float, float] = (1.0, 1.0)
    points: int = 41

    def __post_init__(self) -> None:
        if self.points < 3:
            raise ConfigError(f"a slice needs at least 3 points per side, got {self.points}")
        if min(self.half_widths) <= 0:
            raise ConfigError("slice half widths must be positive")

    @classmethod
    def lambda_plane(
        cls, w: complex, center: complex = 0j, half_widths: tuple[float, float] = (1.0, 1.0), points: int = 41
    ) -> KSlice:
        """Fixed W, l = center + zeta."""
        return cls(QuasimomentumPoint.from_lambda_w(center, w), (1.0 / (2j * np.pi), 1.0 / (2.0 * np.pi)), half_widths, points)

    @classmethod
    def w_plane(
        cls, lam: complex, center: complex = 0j, half_widths: tuple[float, float] = (1.0, 1.0), points: int = 41
    ) -> KSlice:
        """Fixed l, W = center + zeta."""
        return cls(QuasimomentumPoint.from_lambda_w(lam, center), (1.0 / (2j * np.pi), -1.0 / (2.0 * np.pi)), half_widths, points)

    @cached_property
    def zeta(self) -> ComplexArray:
        re = np.linspace(-self.half_widths[0], self.half_widths[0], self.points)
        im = np.linspace(-self.half_widths[1], self.half_widths[1], self.points)
        rr, ii = np.meshgrid(re, im, indexing="ij")
        result: ComplexArray = rr + 1j * ii
        return result

    @property
    def cell(self) -> float:
        return 2.0 * max(self.half_widths) / (self.points - 1)

    def at(self, zeta: complex) -> QuasimomentumPoint:
        return QuasimomentumPoint(self.origin.k1 + zeta * self.direction[0], self.origin.k2 + zeta * self.direction[1])

    def contains(self, zeta: complex, margin: float = 0.0) -> bool:
        return abs(zeta.real) <= self.half_widths[0] + margin and abs(zeta.imag) <= self.half_widths[1] + margin


@dataclass
class ScanResult:
    """Grid witnesses, polished zeros and the flagging threshold of one slice."""

    kslice: KSlice
    samples: list[SpectrumSample]
    zeros: list[SpectrumSample] = field(default_factory=list)
    median: float = 0.0
    threshold: float = 0.0
    witness: str = "smallest"
    truncation_adequate: bool = True

    def zero_parameters(self) -> list[complex]:
        return [z.parameter for z in self.zeros if z.parameter is not None]

    def symmetry_residuals(self) -> tuple[float, float]:
        """Distances from the zero set to its images under zeta -> -zeta and zeta -> -conj(zeta).

        For a real potential and a slice through k = 0 with real direction these
        are the involutions k -> -k and k -> -conj(k). Images leaving the slice are ignored.
        """
        zeros = self.zero_parameters()
        if not zeros:
            return 0.0, 0.0
        arr = np.asarray(zeros)
        worst = [0.0, 0.0]
        for i, image in enumerate((-arr, -np.conj(arr))):
            for z in image:
                if self.kslice.contains(complex(z), -self.kslice.cell):
                    worst[i] = max(worst[i], float(np.min(np.abs(arr - z))))
        return worst[0], worst[1]


def _local_minima(values: RealArray) -> list[tuple[int, int]]:
    n1, n2 = values.shape
    out = []
    for i in range(n1):
        for j in range(n2):
            window = values[max(i - 1, 0) : i + 2, max(j - 1, 0) : j + 2]
            if values[i, j] <= np.min(window):
                out.append((i, j))
    return out


def spectrum_scan(
    potential: PeriodicField,
    kslice: KSlice,
    cutoff: int | None = None,
    zero_factor: float | None = None,
    witness: str = "smallest",
) -> ScanResult:
    """Witness on the slice grid; local minima are polished and kept as zeros below the threshold.

    The threshold is ``zero_factor`` times the median grid witness.
    """
    if witness not in WITNESSES:
        raise ConfigError(f"unknown witness {witness!r}; expected one of {WITNESSES}")
    settings = get_settings()
    factor = settings.zero_flag_factor if zero_factor is None else zero_factor
    pencil = TruncatedPencil.from_potential(potential, cutoff)
    lattice = potential.grid.lattice
    zeta = kslice.zeta
    points = [kslice.at(complex(z)) for z in zeta.ravel()]

    def evaluate(k: QuasimomentumPoint) -> RealArray:
        return pencil.singular_values(k)[:2]

    with ThreadPoolExecutor(max_workers=settings.threads) as pool:
        values = np.array(list(pool.map(evaluate, points)))
    smallest = values[:, 0]
    target = (smallest if witness == "smallest" else values[:, 1]).reshape(zeta.shape)
    samples = [
        SpectrumSample(k, float(values[i, 0]), k.multipliers(lattice), False, float(values[i, 1]), complex(zeta.flat[i]))
        for i, k in enumerate(points)
    ]
    median = float(np.median(target))
    threshold = factor * median

    zeros: list[SpectrumSample] = []
    for i, j in _local_minima(target):
        start = complex(zeta[i, j])
        polished = _polish(pencil, kslice, start, witness)
        k = kslice.at(polished)
        sv = pencil.singular_values(k)
        value = float(sv[0] if witness == "smallest" else sv[1])
        if value > threshold or not kslice.contains(polished, kslice.cell):
            continue
        if any(abs(polished - z.parameter) <= 1e-8 * (1.0 + abs(polished)) for z in zeros if z.parameter is not None):
            continue
        zeros.append(SpectrumSample(k, float(sv[0]), k.multipliers(lattice), True, float(sv[1]), polished))

    logger.info(
        "spectrum_scan",
        points=len(samples),
        zeros=len(zeros),
        median=median,
        witness=witness,
        cutoff=pencil.cutoff,
    )
    return ScanResult(kslice, samples, zeros, median, threshold, witness, pencil.adequate)


def _polish(pencil: TruncatedPencil, kslice: KSlice, start: complex, witness: str) -> complex:
    if pencil.constant:
        return _polish_constant(pencil, kslice, start, witness)
    if witness == "smallest":
        return _polish_eigenvalue(pencil, kslice, start)
    return _polish_simplex(pencil, kslice, start)


def _slice_rates(kslice: KSlice) -> tuple[complex, complex]:
    """(d l / d zeta, d b(k) / d zeta) along the slice."""
    v1, v2 = kslice.direction
    return symbol_a(v1, v2), symbol_b(v1, v2)


def _mode_roots(pencil: TruncatedPencil, kslice: KSlice) -> ComplexArray:
    """Every zeta where some mode block of a constant potential is singular."""
    a, b = pencil.modes
    da, db = _slice_rates(kslice)
    p = a + kslice.origin.lam
    q = b + symbol_b(kslice.origin.k1, kslice.origin.k2)
    cc = pencil.top[0, 0] * pencil.bottom[0, 0]
    roots: list[complex] = []
    for idx in range(pencil.size):
        coeffs = np.array([da * db, da * q[idx] + db * p[idx], p[idx] * q[idx] - cc])
        nonzero = np.flatnonzero(np.abs(coeffs) > 0)
        if nonzero.size and nonzero[0] < 2:
            roots.extend(complex(r) for r in np.roots(coeffs[nonzero[0] :]))
    return np.asarray(roots, dtype=complex)


def _polish_constant(pencil: TruncatedPencil, kslice: KSlice, start: complex, witness: str) -> complex:
    roots = _mode_roots(pencil, kslice)
    if roots.size == 0:
        return start
    distance = np.abs(roots - start)
    if witness == "smallest":
        return complex(roots[int(np.argmin(distance))])
    order = np.argsort(distance)
    for i in order[: min(order.size, 32)]:
        twins = np.abs(roots - roots[i]) <= 1e-9 * (1.0 + abs(roots[i]))
        if np.count_nonzero(twins) >= 2:
            return complex(roots[i])
    return complex(roots[order[0]])


def _polish_eigenvalue(pencil: TruncatedPencil, kslice: KSlice, start: complex) -> complex:
    """Newton on the eigenvalue of D_k(zeta) nearest zero."""
    settings = get_settings()
    da, db = _slice_rates(kslice)
    n = pencil.size
    derivative = np.zeros((2 * n, 2 * n), dtype=complex)
    derivative[:n, n:] = da * np.eye(n)
    derivative[n:, :n] = db * np.eye(n)
    zeta = complex(start)
    for _ in range(settings.newton_max_iterations):
        values, left, right = linalg.eig(pencil.matrix(kslice.at(zeta)), left=True, right=True)
        i = int(np.argmin(np.abs(values)))
        y, x = left[:, i], right[:, i]
        slope = np.vdot(y, derivative @ x) / np.vdot(y, x)
        if slope == 0:
            break
        step = values[i] / slope
        zeta -= step
        if abs(step) <= settings.newton_tolerance * (1.0 + abs(zeta)):
            break
    return zeta


def _polish_simplex(pencil: TruncatedPencil, kslice: KSlice, start: complex) -> complex:
    def objective(p: RealArray) -> float:
        return pencil.resonance_witness(kslice.at(complex(p[0], p[1])))

    cell = kslice.cell
    simplex = np.array([[start.real, start.imag], [start.real + cell, start.imag], [start.real, start.imag + cell]])
    res = optimize.minimize(
        objective,
        np.array([start.real, start.imag]),
        method="Nelder-Mead",
        options={"initial_simplex": simplex, "xatol": 1e-12, "fatol": 1e-14, "maxiter": 2000},
    )
    return complex(res.x[0], res.x[1])


# =============================================================================
# Analytic spectra
# =============================================================================


def zero_potential_planes(lattice: Lattice, max_index: int) -> tuple[list[complex], list[complex]]:
    """For V = 0 the spectrum is the union of the planes l = -a(kappa) and W = b(kappa)."""
    d1, d2 = lattice.dual_generators
    lams: list[complex] = []
    ws: list[complex] = []
    for m in range(-max_index, max_index + 1):
        for n in range(-max_index, max_index + 1):
            kappa = m * d1 + n * d2
            lams.append(-symbol_a(kappa.real, kappa.imag))
            ws.append(symbol_b(kappa.real, kappa.imag))
    return lams, ws


def zero_potential_resonances(lattice: Lattice, max_index: int) -> list[tuple[complex, complex]]:
    """Pairs (l+, l-) = (a(kappa), b(kappa)), kappa != 0, where the two V = 0 sheets share multipliers.

    The point k with (l, W) = (l+, 0) and the point with (l, W) = (0, l-) carry
    the same multipliers; on Z + iZ the pairs are pi (n + i m), pi (n - i m).
    """
    d1, d2 = lattice.dual_generators
    pairs = []
    for m in range(-max_index, max_index + 1):
        for n in range(-max_index, max_index + 1):
            if m == 0 and n == 0:
                continue
            kappa = m * d1 + n * d2
            pairs.append((symbol_a(kappa.real, kappa.imag), symbol_b(kappa.real, kappa.imag)))
    return pairs


def constant_potential_branch(c: complex, lam: ArrayLike) -> ComplexArray:
    """W(l) = -|c|^2 / l on the kappa = 0 sheet of a constant potential."""
    result: ComplexArray = -abs(c) ** 2 / np.asarray(lam, dtype=complex)
    return result


# =============================================================================
# Branch tracing and the asymptotic coefficient C1
# =============================================================================


@dataclass
class BranchResult:
    samples: list[SpectrumSample]
    partial: bool = False


def trace_branch(
    potential: PeriodicField,
    lams: Sequence[complex],
    seed_w: complex | None = None,
    cutoff: int | None = None,
    jump_tolerance: float | None = None,
) -> BranchResult:
    """Follow W(l) along the given l values by continuation of the Schur eigenvalues.

    The branch starts at the eigenvalue nearest ``seed_w`` (default -mean(V conj V) / l)
    and continues with the eigenvalue nearest the linear prediction. A jump larger
    than ``jump_tolerance`` times the local scale ends the branch as partial.
    """
    settings = get_settings()
    tol = settings.branch_jump_tolerance if jump_tolerance is None else jump_tolerance
    pencil = TruncatedPencil.from_potential(potential, cutoff)
    lattice = potential.grid.lattice
    lam_list = [complex(v) for v in lams]
    if not lam_list:
        raise ConfigError("branch tracing needs at least one parameter value")
    mean_square = complex(pencil.top[0, 0] * pencil.bottom[0, 0]) if pencil.constant else complex(
        np.sum(np.abs(pencil.top[:, pencil.size // 2]) ** 2)
    )
    guess = -mean_square / lam_list[0] if seed_w is None else complex(seed_w)

    samples: list[SpectrumSample] = []
    history: list[complex] = []
    partial = False
    for lam in lam_list:
        candidates = pencil.schur_values(lam)
        if len(history) >= 2:
            prediction = 2.0 * history[-1] - history[-2]
        elif history:
            prediction = history[-1]
        else:
            prediction = guess
        i = int(np.argmin(np.abs(candidates - prediction)))
        w = complex(candidates[i])
        if history:
            scale = abs(prediction - history[-1]) + 1e-3 * (1.0 + abs(history[-1]))
            if abs(w - prediction) > tol * scale and abs(w - prediction) > 1e-10 * (1.0 + abs(w)):
                ordered = np.sort(np.abs(candidates - prediction))
                ambiguous = ordered.size > 1 and ordered[1] < 2.0 * ordered[0]
                if ambiguous or abs(w - prediction) > 10.0 * tol * scale:
                    logger.warning("branch_lost", lam=str(lam), jump=abs(w - prediction))
                    partial = True
                    break
        history.append(w)
        k = QuasimomentumPoint.from_lambda_w(lam, w)
        samples.append(SpectrumSample(k, pencil.witness(k), k.multipliers(lattice), True, None, lam))
    return BranchResult(samples, partial)


@dataclass(frozen=True)
class AsymptoticFit:
    """l W = C1 + C3 / l^2 + C5 / l^4 fitted on the kappa = 0 sheet."""

    c1: complex
    c3: complex
    c5: complex
    residual: float
    reliable: bool
    area: float

    @property
    def willmore(self) -> float:
        """-4 C1 times the area of the fundamental domain."""
        return float((-4.0 * self.c1 * self.area).real)


def extract_c1(
    potential: PeriodicField,
    radii: Sequence[float] = (20.0, 30.0, 40.0),
    angles: Sequence[float] = (0.2, 0.2 + np.pi / 2.0, 0.2 + np.pi, 0.2 + 1.5 * np.pi),
    cutoff: int | None = None,
) -> AsymptoticFit:
    """Least-squares fit of the large-l behaviour of W on the sheet W -> 0."""
    settings = get_settings()
    pencil = TruncatedPencil.from_potential(potential, cutoff)
    mean_square = float(np.sum(np.abs(pencil.top[:, pencil.size // 2]) ** 2))
    lams: list[complex] = []
    products: list[complex] = []
    for r in radii:
        for theta in angles:
            lam = complex(r * np.exp(1j * theta))
            candidates = pencil.schur_values(lam)
            w = complex(candidates[int(np.argmin(np.abs(candidates + mean_square / lam)))])
            lams.append(lam)
            products.append(lam * w)
    lam_arr = np.asarray(lams)
    y = np.asarray(products)
    design = np.stack([np.ones_like(lam_arr), lam_arr**-2, lam_arr**-4], axis=1)
    coeffs, *_ = np.linalg.lstsq(design, y, rcond=None)
    residual = float(np.linalg.norm(design @ coeffs - y) / max(np.linalg.norm(y), 1e-300))
    reliable = residual <= settings.fit_residual_threshold
    if not reliable:
        logger.warning("c1_fit_unreliable", residual=residual)
    return AsymptoticFit(
        complex(coeffs[0]), complex(coeffs[1]), complex(coeffs[2]), residual, reliable, potential.grid.lattice.area
    )


# =============================================================================
# Lattice bases
# =============================================================================


def multiplier_basis_change(samples: Sequence[SpectrumSample], m: ArrayLike) -> list[SpectrumSample]:
    """Multipliers for the basis (a gamma1 + b gamma2, c gamma1 + d gamma2)."""
    (a, b), (c, d) = as_unimodular(m)
    out = []
    for sample in samples:
        mu1, mu2 = sample.multipliers
        new = (complex(mu1**a * mu2**b), complex(mu1**c * mu2**d))
        out.append(SpectrumSample(sample.k, sample.witness, new, sample.flagged, sample.resonance_witness, sample.parameter))
    return out


def regrid(potential: PeriodicField, m: ArrayLike) -> PeriodicField:
    """The same samples seen from the lattice basis (a gamma1 + b gamma2, c gamma1 + d gamma2).

    The new grid point (j', k') is the old point (a j' + c k' n1 / n2, b j' n2 / n1 + d k'),
    wrapped into the fundamental domain with the spin character. Grid sizes must make
    this an index map.

    Raises:
        NumericalError: the sheared grid does not land on old grid points
    """
    (a, b), (c, d) = as_unimodular(m)
    n1, n2 = potential.grid.shape
    if (c * n1) % n2 or (b * n2) % n1:
        raise NumericalError(
            f"basis {((a, b), (c, d))} does not map the {n1} x {n2} grid onto itself", code="GRID_INCOMPATIBLE"
        )
    j, k = np.meshgrid(np.arange(n1), np.arange(n2), indexing="ij")
    wraps1, old_j = np.divmod(a * j + (c * n1 // n2) * k, n1)
    wraps2, old_k = np.divmod((b * n2 // n1) * j + d * k, n2)
    e1, e2 = potential.character
    sign = np.where(wraps1 % 2, e1, 1) * np.where(wraps2 % 2, e2, 1)
    character = (
        e1 ** (a % 2) * e2 ** (b % 2),
        e1 ** (c % 2) * e2 ** (d % 2),
    )
    grid = FundamentalGrid(potential.grid.lattice.change_basis(((a, b), (c, d))), n1, n2)
    return PeriodicField(grid, sign * potential.values[old_j, old_k], character)
