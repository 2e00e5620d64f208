"""Builtin surfaces with closed-form geometry.

Tori of revolution in their conformal parameter, the plane, the Clifford torus
and the flat tori of S3. Closed forms serve as oracles for the numerical modules.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import integrate

from ..core.fields import FundamentalGrid, Lattice
from ..errors import ConfigError
from .sphere import SU2Immersion
from .surface_r3 import ImmersionR3, WeierstrassSpinor

RealArray = NDArray[np.float64]


@dataclass(frozen=True)
class TorusOfRevolution:
    """Circle of radius r at distance R from the z-axis, rotated about it.

    Conformal parameter z = x + i y with y the rotation angle and x the
    conformal arc parameter along the profile, x in [0, T), T = 2 pi r / sqrt(R^2 - r^2).
    The normal F_x x F_y points into the tube.
    """

    R: float = 2.0
    r: float = 1.0

    def __post_init__(self) -> None:
        if not (self.r > 0 and self.R > self.r):
            raise ConfigError(f"torus of revolution needs R > r > 0, got R={self.R}, r={self.r}")

    @property
    def period(self) -> float:
        return 2.0 * np.pi * self.r / np.sqrt(self.R**2 - self.r**2)

    @property
    def lattice(self) -> Lattice:
        return Lattice(complex(self.period), 2j * np.pi)

    def grid(self, n1: int = 64, n2: int = 64) -> FundamentalGrid:
        return FundamentalGrid(self.lattice, n1, n2)

    def profile_angle(self, x: ArrayLike) -> RealArray:
        """Angle t along the profile circle at conformal coordinate x."""
        x = np.asarray(x, dtype=float)
        theta = x * np.sqrt(self.R**2 - self.r**2) / (2.0 * self.r)
        ratio = np.sqrt((self.R + self.r) / (self.R - self.r))
        return 2.0 * np.arctan2(ratio * np.sin(theta), np.cos(theta))

    def exp_alpha(self, x: ArrayLike) -> RealArray:
        return self.R + self.r * np.cos(self.profile_angle(x))

    def mean_curvature(self, x: ArrayLike) -> RealArray:
        t = self.profile_angle(x)
        rho = self.R + self.r * np.cos(t)
        return (self.R + 2.0 * self.r * np.cos(t)) / (2.0 * self.r * rho)

    def line_curvatures(self, x: ArrayLike) -> tuple[RealArray, RealArray]:
        """(k1, k2) = (1 / r, cos t / rho) along the profile and the parallel circles."""
        t = self.profile_angle(x)
        rho = self.R + self.r * np.cos(t)
        return np.full_like(t, 1.0 / self.r), np.cos(t) / rho

    def potential(self, x: ArrayLike) -> RealArray:
        return (self.R + 2.0 * self.r * np.cos(self.profile_angle(x))) / (4.0 * self.r)

    @property
    def dual_potential(self) -> float:
        return -self.R / (4.0 * self.r)

    @property
    def willmore(self) -> float:
        return float(np.pi**2 * self.R**2 / (self.r * np.sqrt(self.R**2 - self.r**2)))

    def willmore_quadrature(self) -> float:
        """One-dimensional integral of the revolution closed form over the profile angle."""
        value, _ = integrate.quad(
            lambda t: (self.R + 2.0 * self.r * np.cos(t)) ** 2 / (self.R + self.r * np.cos(t)),
            0.0,
            2.0 * np.pi,
            epsabs=1e-13,
            epsrel=1e-13,
            limit=200,
        )
        return float(2.0 * np.pi / (4.0 * self.r) * value)

    def points(self, grid: FundamentalGrid) -> RealArray:
        z = grid.points
        t = self.profile_angle(z.real)
        rho = self.R + self.r * np.cos(t)
        return np.stack([rho * np.cos(z.imag), rho * np.sin(z.imag), self.r * np.sin(t)])

    def immersion(self, grid: FundamentalGrid | None = None) -> ImmersionR3:
        grid = self.grid() if grid is None else grid
        return ImmersionR3.from_points(grid, self.points(grid))


def clifford_revolution() -> TorusOfRevolution:
    """The stereographic image of the Clifford torus, R / r = sqrt(2)."""
    return TorusOfRevolution(R=float(np.sqrt(2.0)), r=1.0)


def plane(lattice: Lattice | None = None, n1: int = 16, n2: int = 16) -> ImmersionR3:
    """F = (x, y, 0) over one fundamental domain; translation periods are the generators."""
    lattice = Lattice.square() if lattice is None else lattice
    grid = FundamentalGrid(lattice, n1, n2)
    periods = np.array([[g.real, g.imag, 0.0] for g in lattice.generators])
    return ImmersionR3(grid, np.zeros((3,) + grid.shape), periods)


def constant_spinor(grid: FundamentalGrid, psi1: complex = 1.0, psi2: complex = 0.0) -> WeierstrassSpinor:
    """Constant spinor with zero potential; represents an affine plane."""
    return WeierstrassSpinor.from_arrays(
        grid,
        np.full(grid.shape, psi1, dtype=complex),
        np.full(grid.shape, psi2, dtype=complex),
        0.0,
    )


def clifford_torus(n1: int = 64, n2: int = 64) -> SU2Immersion:
    """f = (1/sqrt 2) [[e^{ix}, e^{iy}], [-e^{-iy}, e^{-ix}]] on 2 pi (Z + iZ)."""
    return flat_torus_s3(np.pi / 4.0, n1, n2)


def flat_torus_s3(angle: float, n1: int = 64, n2: int = 64) -> SU2Immersion:
    """Flat torus with radii cos(angle), sin(angle), parametrized with e^alpha = 1/sqrt 2.

    The lattice is 2 pi sqrt2 (cos(angle) Z + i sin(angle) Z); angle = pi/4 is the
    Clifford torus, other angles give constant mean curvature cot(2 angle).
    """
    if not 0.0 < angle < np.pi / 2.0:
        raise ConfigError(f"flat torus angle must lie in (0, pi/2), got {angle}")
    c, s = np.cos(angle), np.sin(angle)
    root2 = np.sqrt(2.0)
    grid = FundamentalGrid(Lattice(2.0 * np.pi * root2 * c, 2j * np.pi * root2 * s), n1, n2)
    z = grid.points
    u = z.real / (root2 * c)
    v = z.imag / (root2 * s)
    f = np.empty(grid.shape + (2, 2), dtype=complex)
    f[..., 0, 0] = c * np.exp(1j * u)
    f[..., 0, 1] = s * np.exp(1j * v)
    f[..., 1, 0] = -s * np.exp(-1j * v)
    f[..., 1, 1] = c * np.exp(-1j * u)
    return SU2Immersion(grid, f)


def clifford_spinor_closed_form(grid: FundamentalGrid) -> tuple[NDArray[np.complex128], NDArray[np.complex128]]:
    """psi1 = sqrt((1-i)/2) sin(w), psi2 = sqrt((1+i)/2) cos(w), w = (y - x)/2 + pi/4.

    This is the spinor of :func:`clifford_torus` up to a global sign, with
    V = -i / (2 sqrt 2) and A = -1/4.
    """
    z = grid.points
    w = (z.imag - z.real) / 2.0 + np.pi / 4.0
    return np.sqrt((1 - 1j) / 2) * np.sin(w), np.sqrt((1 + 1j) / 2) * np.cos(w)
