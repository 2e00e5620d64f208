"""Floquet theory of the one-dimensional Dirac operator d/dx - [[-i l, 2U], [-2U, i l]].

Monodromy matrices over one period, their traces and trace derivatives, the
branch and double points of the spectral curve Tr^2 = 4, the Miura map to a
Schrodinger potential and the Kruskal integrals of the associated KdV flow.
"""
from __future__ import annotations

from collections.abc import Callable, Iterable, Sequence
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import fft as sfft
from scipy import linalg, optimize, signal

from ..config import get_settings
from ..core.transfer import (
    half_step_samples,
    refined_path_transfer,
    refined_transfer_matrix,
    unimodular_multipliers,
)
from ..errors import ConfigError, NumericalError
from ..logging import get_logger

logger = get_logger(__name__)

ComplexArray = NDArray[np.complex128]
RealArray = NDArray[np.float64]
Region = tuple[float, float, float, float]

MIURA_CONVENTIONS = ("4U2", "U2")
LAMBDA_CHUNK = 16


# =============================================================================
# Potentials
# =============================================================================


@dataclass(frozen=True, eq=False)
class Potential1D:
    """Periodic samples U(x_j), x_j = j T / n, optionally backed by an exact function."""

    samples: ComplexArray
    period: float
    function: Callable[[RealArray], ArrayLike] | None = None

    def __post_init__(self) -> None:
        arr = np.array(self.samples, dtype=complex).ravel()
        if arr.size < 4 or arr.size % 2:
            raise ConfigError(f"a potential needs an even number >= 4 of samples, got {arr.size}")
        if not np.all(np.isfinite(arr)):
            raise NumericalError("potential samples must be finite", code="NON_FINITE_VALUES")
        if not (np.isfinite(self.period) and self.period > 0):
            raise ConfigError(f"period must be positive and finite, got {self.period}")
        arr.setflags(write=False)
        object.__setattr__(self, "samples", arr)
        object.__setattr__(self, "period", float(self.period))

    @classmethod
    def from_function(cls, fn: Callable[[RealArray], ArrayLike], period: float, n: int = 64) -> Potential1D:
        x = np.arange(n) * period / n
        return cls(np.broadcast_to(fn(x), x.shape), period, fn)

    @classmethod
    def constant(cls, value: complex, period: float, n: int = 16) -> Potential1D:
        return cls(np.full(n, value, dtype=complex), period)

    @classmethod
    def from_surface(cls, values: ArrayLike, period: float, tolerance: float = 1e-8) -> Potential1D:
        """Average over the second grid axis of a potential that depends on x only.

        Raises:
            NumericalError: the values vary along the second axis
        """
        arr = np.asarray(values, dtype=complex)
        mean = arr.mean(axis=1)
        variation = float(np.max(np.abs(arr - mean[:, None])))
        if variation > tolerance * (1.0 + float(np.max(np.abs(arr)))):
            raise NumericalError(
                f"potential varies along the rotation direction by {variation:.3e}",
                code="NOT_REVOLUTION",
            )
        return cls(mean, period)

    @property
    def size(self) -> int:
        return int(self.samples.size)

    @property
    def x(self) -> RealArray:
        return np.arange(self.size) * self.period / self.size

    @property
    def is_constant(self) -> bool:
        return bool(np.all(self.samples == self.samples[0]))

    @property
    def is_real(self) -> bool:
        return bool(np.all(self.samples.imag == 0))

    def half_step_values(self, steps: int) -> ComplexArray:
        """U at x = j T / (2 steps), j = 0..2 steps."""
        if self.function is not None:
            x = np.arange(2 * steps + 1) * self.period / (2 * steps)
            return np.asarray(np.broadcast_to(self.function(x), x.shape), dtype=complex)
        return half_step_samples(self.samples, steps)

    def derivative(self, order: int = 1) -> ComplexArray:
        """Spectral derivative of the samples, Nyquist mode dropped."""
        k = 2j * np.pi * sfft.fftfreq(self.size, d=self.period / self.size)
        k[self.size // 2] = 0.0
        result: ComplexArray = sfft.ifft(sfft.fft(self.samples) * k**order)
        return result

    def upsampled(self, factor: int) -> Potential1D:
        if factor == 1:
            return self
        if self.function is not None:
            return Potential1D.from_function(self.function, self.period, self.size * factor)
        return Potential1D(signal.resample(self.samples, self.size * factor), self.period)

    def integral(self, values: ArrayLike | None = None) -> complex:
        arr = self.samples if values is None else np.asarray(values)
        return complex(self.period * np.mean(arr))

    def negated(self) -> Potential1D:
        fn = self.function
        return Potential1D(-self.samples, self.period, None if fn is None else (lambda x: -np.asarray(fn(x))))


# =============================================================================
# Monodromy
# =============================================================================


def _zs_symbol(u: ComplexArray, lam: ComplexArray, period: float) -> ComplexArray:
    """T [[-i l, 2U], [-2U, i l]] for every l and every sample of U, shape (L, S, 2, 2)."""
    lam = lam[:, None]
    out = np.empty((lam.shape[0], u.shape[-1], 2, 2), dtype=complex)
    out[..., 0, 0] = -1j * lam
    out[..., 0, 1] = 2.0 * u
    out[..., 1, 0] = -2.0 * u
    out[..., 1, 1] = 1j * lam
    result: ComplexArray = period * out
    return result


def _with_lambda_derivative(a: ComplexArray, period: float) -> ComplexArray:
    """[[A, 0], [dA/dl, A]]; its transfer matrix carries dM/dl in the lower-left block."""
    out = np.zeros(a.shape[:-2] + (4, 4), dtype=complex)
    out[..., :2, :2] = a
    out[..., 2:, 2:] = a
    out[..., 2, 0] = -1j * period
    out[..., 3, 1] = 1j * period
    return out


def _chunks(lam: ComplexArray) -> Iterable[ComplexArray]:
    for start in range(0, lam.size, LAMBDA_CHUNK):
        yield lam[start : start + LAMBDA_CHUNK]


def _monodromy(potential: Potential1D, lam: ArrayLike, with_derivative: bool, tolerance: float | None) -> ComplexArray:
    lam_arr = np.atleast_1d(np.asarray(lam, dtype=complex)).ravel()
    d = 4 if with_derivative else 2
    out = np.empty((lam_arr.size, d, d), dtype=complex)
    offset = 0
    for chunk in _chunks(lam_arr):
        if potential.is_constant and potential.function is None:
            a = _zs_symbol(potential.samples[:1], chunk, potential.period)[:, 0]
            if with_derivative:
                a = _with_lambda_derivative(a, potential.period)
            block = linalg.expm(a)
        else:
            def sampler(steps: int, chunk: ComplexArray = chunk) -> ComplexArray:
                a = _zs_symbol(potential.half_step_values(steps), chunk, potential.period)
                return _with_lambda_derivative(a, potential.period) if with_derivative else a

            block = refined_transfer_matrix(sampler, tolerance).matrix
        out[offset : offset + chunk.size] = block
        offset += chunk.size
    shape = np.shape(lam)
    result: ComplexArray = out.reshape(shape + (d, d))
    return result


def zs_monodromy(potential: Potential1D, lam: ArrayLike, tolerance: float | None = None) -> ComplexArray:
    """Monodromy over one period for each spectral parameter; shape lam.shape + (2, 2).

    Constant potentials use the matrix exponential.
    """
    return _monodromy(potential, lam, False, tolerance)


def zs_trace(potential: Potential1D, lam: ArrayLike, tolerance: float | None = None) -> ComplexArray:
    return np.trace(zs_monodromy(potential, lam, tolerance), axis1=-2, axis2=-1)


def zs_trace_with_derivative(
    potential: Potential1D, lam: ArrayLike, tolerance: float | None = None
) -> tuple[ComplexArray, ComplexArray]:
    """(Tr M, d Tr M / d l) from the variational system."""
    m = _monodromy(potential, lam, True, tolerance)
    return (
        np.trace(m[..., :2, :2], axis1=-2, axis2=-1),
        np.trace(m[..., 2:, :2], axis1=-2, axis2=-1),
    )


def floquet_multipliers(potential: Potential1D, lam: ArrayLike) -> tuple[ComplexArray, ComplexArray]:
    """(k, 1/k) with |k| >= 1."""
    return unimodular_multipliers(zs_trace(potential, lam))


def multiplier_table(potential: Potential1D, lams: Sequence[complex]) -> list[dict[str, complex]]:
    """Rows of l, Tr M, k1, k2."""
    lam = np.asarray(lams, dtype=complex)
    tr = zs_trace(potential, lam)
    k1, k2 = unimodular_multipliers(tr)
    return [
        {"lambda": complex(lam[i]), "trace": complex(tr[i]), "k1": complex(k1[i]), "k2": complex(k2[i])}
        for i in range(lam.size)
    ]


# =============================================================================
# Spectral curve
# =============================================================================


@dataclass
class SpectralCurve1D:
    """Zeros of Tr^2 - 4 inside a rectangle of the l-plane."""

    region: Region
    branch_points: list[complex] = field(default_factory=list)
    resonance_points: list[complex] = field(default_factory=list)
    incomplete: bool = False
    boxes_examined: int = 0

    @property
    def genus_estimate(self) -> int | None:
        """Genus of a hyperelliptic curve with the found branch points, if the search completed."""
        if self.incomplete:
            return None
        return max(len(self.branch_points) // 2 - 1, 0)


class _Discriminant:
    """Tr^2 - 4 and its derivative, counting evaluations."""

    def __init__(self, potential: Potential1D):
        self.potential = potential
        self.evaluations = 0

    def __call__(self, lam: ComplexArray) -> ComplexArray:
        self.evaluations += int(np.size(lam))
        tr = zs_trace(self.potential, lam)
        result: ComplexArray = tr**2 - 4.0
        return result

    def with_derivative(self, lam: complex) -> tuple[complex, complex, complex]:
        """(Delta, Delta', Tr) at one point."""
        self.evaluations += 1
        tr, dtr = zs_trace_with_derivative(self.potential, np.array([lam]))
        return complex(tr[0] ** 2 - 4.0), complex(2.0 * tr[0] * dtr[0]), complex(tr[0])


_SPLITS = (0.5, 0.4713, 0.5329, 0.4421, 0.5617)
_MAX_ARG_STEP = np.pi / 3.0


def _winding_number(f: _Discriminant, box: Region, edge_points: int = 16, max_rounds: int = 14) -> int | None:
    """Zeros of f inside the box by the argument principle; None if a zero is on the boundary."""
    x0, x1, y0, y1 = box
    corners = np.array([complex(x0, y0), complex(x1, y0), complex(x1, y1), complex(x0, y1)])

    def position(p: RealArray) -> ComplexArray:
        edge = np.minimum(np.floor(p).astype(int), 3)
        frac = p - edge
        result: ComplexArray = corners[edge] + frac * (corners[(edge + 1) % 4] - corners[edge])
        return result

    params = np.arange(4 * edge_points) / edge_points
    values = f(position(params))
    for _ in range(max_rounds):
        scale = float(np.median(np.abs(values)))
        if np.min(np.abs(values)) <= 1e-12 * max(scale, 1e-300):
            return None
        nxt = np.roll(values, -1)
        steps = np.angle(nxt / values)
        bad = np.abs(steps) > _MAX_ARG_STEP
        if not np.any(bad):
            return int(round(float(np.sum(steps)) / (2.0 * np.pi)))
        gaps = np.diff(np.append(params, 4.0))
        mids = params[bad] + 0.5 * gaps[bad]
        params = np.concatenate([params, mids])
        values = np.concatenate([values, f(position(mids))])
        order = np.argsort(params)
        params, values = params[order], values[order]
    return None


def _split(f: _Discriminant, box: Region) -> list[tuple[Region, int]] | None:
    x0, x1, y0, y1 = box
    for frac in _SPLITS:
        xm = x0 + frac * (x1 - x0)
        ym = y0 + frac * (y1 - y0)
        children = [(x0, xm, y0, ym), (xm, x1, y0, ym), (x0, xm, ym, y1), (xm, x1, ym, y1)]
        counts = [_winding_number(f, child) for child in children]
        if all(c is not None for c in counts):
            return [(child, int(c)) for child, c in zip(children, counts, strict=True) if c]
    return None


def _newton(f: _Discriminant, start: complex, max_iterations: int, tolerance: float) -> tuple[complex, bool]:
    lam = complex(start)
    for _ in range(max_iterations):
        value, slope, _ = f.with_derivative(lam)
        if slope == 0:
            return lam, False
        step = value / slope
        lam -= step
        if abs(step) <= tolerance * (1.0 + abs(lam)):
            return lam, True
    return lam, False


def _secant_on_derivative(
    f: _Discriminant, start: complex, width: float, max_iterations: int, tolerance: float
) -> tuple[complex, bool]:
    a, b = complex(start), complex(start) + 0.25 * width
    ga, gb = f.with_derivative(a)[1], f.with_derivative(b)[1]
    for _ in range(max_iterations):
        if gb == ga:
            return b, abs(gb) == 0
        c = b - gb * (b - a) / (gb - ga)
        a, ga = b, gb
        b, gb = c, f.with_derivative(c)[1]
        if abs(b - a) <= tolerance * (1.0 + abs(b)):
            return b, True
    return b, False


def _inside(lam: complex, box: Region, margin: float) -> bool:
    x0, x1, y0, y1 = box
    return x0 - margin <= lam.real <= x1 + margin and y0 - margin <= lam.imag <= y1 + margin


def branch_points(
    potential: Potential1D,
    region: Region,
    box_width: float | None = None,
    budget: int | None = None,
) -> SpectralCurve1D:
    """Simple zeros (branch points) and double zeros (resonance points) of Tr^2 - 4 in a rectangle.

    Boxes are counted by the argument principle and subdivided until each holds
    one simple zero, which Newton polishes, or until they reach ``box_width``,
    where a double zero is located by the secant method on the derivative.
    """
    settings = get_settings()
    width_min = settings.root_box_width if box_width is None else box_width
    limit = settings.root_search_budget if budget is None else budget
    x0, x1, y0, y1 = region
    if not (x1 > x0 and y1 > y0):
        logger.debug("branch_search_empty_region", region=list(region))
        return SpectralCurve1D(region=region)

    f = _Discriminant(potential)
    curve = SpectralCurve1D(region=region)
    total = _winding_number(f, region)
    if total is None:
        raise NumericalError(
            f"Tr^2 - 4 vanishes on the boundary of the search region {region}", code="ROOT_ON_BOUNDARY"
        )
    stack: list[tuple[Region, int]] = [(region, total)] if total else []
    newton_width = 64.0 * width_min
    simple: list[complex] = []
    double: list[complex] = []

    while stack:
        if curve.boxes_examined >= limit:
            curve.incomplete = True
            logger.warning("root_search_budget_exhausted", boxes=curve.boxes_examined, pending=len(stack))
            break
        box, count = stack.pop()
        curve.boxes_examined += 1
        bx0, bx1, by0, by1 = box
        width = max(bx1 - bx0, by1 - by0)
        center = complex(0.5 * (bx0 + bx1), 0.5 * (by0 + by1))

        if count == 1 and width <= newton_width:
            root, ok = _newton(f, center, settings.newton_max_iterations, settings.newton_tolerance)
            if ok and _inside(root, box, 1e-9):
                simple.append(root)
                continue
        if width <= width_min:
            _resolve_cluster(f, box, count, simple, double, settings.double_root_threshold)
            continue
        children = _split(f, box)
        if children is None:
            logger.warning("root_on_split_line", box=box)
            curve.incomplete = True
            continue
        stack.extend(children)

    curve.branch_points = _dedupe(simple)
    curve.resonance_points = _dedupe(double)
    logger.info(
        "branch_points_found",
        branch_points=len(curve.branch_points),
        resonance_points=len(curve.resonance_points),
        evaluations=f.evaluations,
        incomplete=curve.incomplete,
    )
    return curve


def _resolve_cluster(
    f: _Discriminant,
    box: Region,
    count: int,
    simple: list[complex],
    double: list[complex],
    threshold: float,
) -> None:
    settings = get_settings()
    bx0, bx1, by0, by1 = box
    width = max(bx1 - bx0, by1 - by0)
    center = complex(0.5 * (bx0 + bx1), 0.5 * (by0 + by1))
    period = f.potential.period
    point, ok = _secant_on_derivative(f, center, width, settings.newton_max_iterations, settings.newton_tolerance)
    if ok and _inside(point, box, width):
        value, slope, tr = f.with_derivative(point)
        scale = period * (1.0 + abs(tr))
        if abs(slope) <= threshold * scale and abs(value) <= threshold * scale:
            double.extend([point] * (count // 2))
            if count % 2:
                simple.append(point)
            return
    corners = [complex(bx0, by0), complex(bx1, by0), complex(bx1, by1), complex(bx0, by1)]
    for corner in corners[:count]:
        root, converged = _newton(f, corner, settings.newton_max_iterations, settings.newton_tolerance)
        if converged:
            simple.append(root)


def _dedupe(points: list[complex], tolerance: float = 1e-9) -> list[complex]:
    out: list[complex] = []
    for p in sorted(points, key=lambda c: (round(c.real, 9), round(c.imag, 9))):
        if all(abs(p - q) > tolerance * (1.0 + abs(p)) for q in out):
            out.append(p)
    return out


def match_points(first: Sequence[complex], second: Sequence[complex]) -> float:
    """Largest distance in an optimal pairing of two point multisets; inf when counts differ."""
    if len(first) != len(second):
        return float("inf")
    if len(first) == 0:
        return 0.0
    cost = np.abs(np.subtract.outer(np.asarray(first, dtype=complex), np.asarray(second, dtype=complex)))
    rows, cols = optimize.linear_sum_assignment(cost)
    return float(np.max(cost[rows, cols]))


# =============================================================================
# Miura map, Schrodinger operator and Kruskal integrals
# =============================================================================


def miura(potential: Potential1D, convention: str = "4U2") -> Potential1D:
    """q = 2i U_x - 4 U^2 (``4U2``) or q = 2i U_x - U^2 (``U2``)."""
    if convention not in MIURA_CONVENTIONS:
        raise ConfigError(
            f"unknown Miura convention {convention!r}; expected one of {MIURA_CONVENTIONS}",
            code="UNKNOWN_CONVENTION",
        )
    factor = 4.0 if convention == "4U2" else 1.0
    u = potential.samples
    return Potential1D(2j * potential.derivative() - factor * u**2, potential.period)


def _bloch_second_derivative(values: ComplexArray, exponent: complex, period: float) -> ComplexArray:
    n = values.size
    x = np.arange(n) / n
    phase = np.exp(exponent * x)
    k = 2j * np.pi * sfft.fftfreq(n, d=1.0 / n)
    spectrum = sfft.fft(values / phase)
    spectrum[n // 2] = 0.0
    result: ComplexArray = sfft.ifft(spectrum * ((k + exponent) / period) ** 2) * phase
    return result


def schrodinger_residual(potential: Potential1D, lam: complex, convention: str = "4U2") -> float:
    """Relative residual of -f'' + q f = l^2 f for f = phi1 - i phi2, phi a Floquet solution."""
    lam = complex(lam)
    fine = potential.upsampled(2)
    n = fine.size

    def sampler(steps: int) -> ComplexArray:
        return _zs_symbol(fine.half_step_values(steps), np.array([lam]), fine.period)[0]

    fundamental = refined_path_transfer(sampler, n).matrix
    values, vectors = np.linalg.eig(fundamental[n])
    pick = int(np.argmax(np.abs(values)))
    phi = fundamental[:n] @ vectors[:, pick]
    eta = phi[:, 0] - 1j * phi[:, 1]
    second = _bloch_second_derivative(eta, complex(np.log(values[pick])), fine.period)
    q = miura(fine, convention).samples
    residual = -second + q * eta - lam**2 * eta
    return float(np.max(np.abs(residual)) / (np.max(np.abs(eta)) * (1.0 + abs(lam) ** 2)))


def _recursion_densities(q: Potential1D, count: int) -> list[ComplexArray]:
    """R_1 = -q, R_{n+1} = -R_n' - sum_{k=1}^{n-1} R_k R_{n-k}, on 2 count-fold upsampled samples."""
    fine = q.upsampled(2 * count)
    k = 2j * np.pi * sfft.fftfreq(fine.size, d=fine.period / fine.size)
    k[fine.size // 2] = 0.0
    r: list[ComplexArray] = [-fine.samples]
    for n in range(1, 2 * count - 1):
        derivative = sfft.ifft(sfft.fft(r[n - 1]) * k)
        products = sum((r[j] * r[n - 2 - j] for j in range(n - 1)), np.zeros(fine.size, dtype=complex))
        r.append(-derivative - products)
    return r


def hamiltonians(q: Potential1D, count: int = 3) -> list[complex]:
    """H_n = -integral of R_{2n-1}; H1 = int q, H2 = int q^2, H3 = int (2 q^3 - q_x^2)."""
    if count < 1:
        raise ConfigError(f"need at least one integral, got {count}")
    r = _recursion_densities(q, count)
    values = [-complex(q.period * np.mean(r[2 * n])) for n in range(count)]
    _check_closed_forms(q, values)
    return values


def _check_closed_forms(q: Potential1D, values: list[complex]) -> None:
    fine = q.upsampled(6)
    qs, qx = fine.samples, fine.derivative()
    closed = [fine.integral(qs), fine.integral(qs**2), fine.integral(2.0 * qs**3 - qx**2)]
    for n, (got, want) in enumerate(zip(values, closed, strict=False), start=1):
        if abs(got - want) > 1e-8 * (1.0 + abs(want)):
            logger.warning("kruskal_closed_form_mismatch", index=n, recursion=str(got), closed_form=str(want))


def kruskal_invariants(q: Potential1D, count: int = 3, transverse_period: float = 2.0 * np.pi) -> list[complex]:
    """K_l = -(transverse period) H_l; for a torus of revolution K_1 is the Willmore energy."""
    return [-transverse_period * h for h in hamiltonians(q, count)]


@dataclass(frozen=True)
class KruskalComparison:
    first: list[complex]
    second: list[complex]

    @property
    def relative_differences(self) -> list[float]:
        return [abs(a - b) / (1.0 + abs(a)) for a, b in zip(self.first, self.second, strict=True)]

    @property
    def max_relative_difference(self) -> float:
        return max(self.relative_differences)


def compare_kruskal(q1: Potential1D, q2: Potential1D, count: int = 3) -> KruskalComparison:
    return KruskalComparison(kruskal_invariants(q1, count), kruskal_invariants(q2, count))
