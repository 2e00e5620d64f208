"""Conformal transformations of R3 and their action on immersed tori.

A Moebius map is a finite sequence of isometries, homotheties and inversions,
applied in order. Inversions are only applied to closed tori; affine maps
transform the translation periods of open surfaces as well.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

import numpy as np
from numpy.typing import ArrayLike, NDArray

from ..config import get_settings
from ..errors import ConfigError, NumericalError
from ..logging import get_logger
from .surface_r3 import ImmersionR3, fundamental_forms

logger = get_logger(__name__)

RealArray = NDArray[np.float64]


class MoebiusError(NumericalError):
    """A Moebius map cannot be applied to the given surface."""

    def __init__(self, message: str, code: str = "MOEBIUS_ERROR"):
        super().__init__(message, code=code)


@dataclass(frozen=True)
class Isometry:
    """x -> R x + b with R a rotation."""

    rotation: tuple[tuple[float, float, float], ...] = ((1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (0.0, 0.0, 1.0))
    translation: tuple[float, float, float] = (0.0, 0.0, 0.0)

    def __post_init__(self) -> None:
        r = np.asarray(self.rotation, dtype=float)
        if r.shape != (3, 3) or np.max(np.abs(r @ r.T - np.eye(3))) > 1e-10 or np.linalg.det(r) < 0:
            raise ConfigError("isometry needs a 3x3 rotation matrix")
        if len(self.translation) != 3:
            raise ConfigError("isometry translation must have three components")

    @classmethod
    def about_axis(cls, axis: ArrayLike, angle: float, translation: ArrayLike = (0.0, 0.0, 0.0)) -> Isometry:
        """Rotation by ``angle`` about ``axis`` (Rodrigues), then translation."""
        k = np.asarray(axis, dtype=float)
        k = k / np.linalg.norm(k)
        cross = np.array([[0.0, -k[2], k[1]], [k[2], 0.0, -k[0]], [-k[1], k[0], 0.0]])
        r = np.eye(3) + np.sin(angle) * cross + (1.0 - np.cos(angle)) * cross @ cross
        return cls(tuple(tuple(float(v) for v in row) for row in r), tuple(float(v) for v in np.asarray(translation)))

    def apply(self, points: RealArray) -> RealArray:
        r = np.asarray(self.rotation)
        result: RealArray = np.tensordot(r, points, axes=(1, 0)) + self._column(self.translation, points)
        return result

    def apply_vectors(self, vectors: RealArray) -> RealArray:
        result: RealArray = vectors @ np.asarray(self.rotation).T
        return result

    @staticmethod
    def _column(v: ArrayLike, points: RealArray) -> RealArray:
        return np.asarray(v, dtype=float).reshape((3,) + (1,) * (points.ndim - 1))


@dataclass(frozen=True)
class Homothety:
    """x -> c x."""

    factor: float

    def __post_init__(self) -> None:
        if not np.isfinite(self.factor) or self.factor == 0:
            raise ConfigError(f"homothety factor must be finite and nonzero, got {self.factor}")

    def apply(self, points: RealArray) -> RealArray:
        return self.factor * points

    def apply_vectors(self, vectors: RealArray) -> RealArray:
        return self.factor * vectors


@dataclass(frozen=True)
class Inversion:
    """x -> c + r^2 (x - c) / |x - c|^2; the center goes to infinity."""

    center: tuple[float, float, float] = (0.0, 0.0, 0.0)
    radius: float = 1.0

    def __post_init__(self) -> None:
        if len(self.center) != 3:
            raise ConfigError("inversion center must have three components")
        if not self.radius > 0:
            raise ConfigError(f"inversion radius must be positive, got {self.radius}")

    def distance(self, points: RealArray) -> RealArray:
        c = Isometry._column(self.center, points)
        result: RealArray = np.linalg.norm(points - c, axis=0)
        return result

    def apply(self, points: RealArray) -> RealArray:
        c = Isometry._column(self.center, points)
        offset = points - c
        norm2 = np.sum(offset**2, axis=0)
        with np.errstate(divide="ignore", invalid="ignore"):
            image = c + self.radius**2 * offset / norm2
        result: RealArray = np.where(norm2 == 0, np.inf, image)
        return result


Primitive = Union[Isometry, Homothety, Inversion]  # noqa: UP007


@dataclass(frozen=True)
class MoebiusMap:
    """Primitives applied first to last."""

    primitives: tuple[Primitive, ...] = field(default_factory=tuple)

    @property
    def has_inversion(self) -> bool:
        return any(isinstance(p, Inversion) for p in self.primitives)

    def apply(self, points: ArrayLike) -> RealArray:
        pts = np.asarray(points, dtype=float)
        for primitive in self.primitives:
            pts = primitive.apply(pts)
        return pts


@dataclass(frozen=True, eq=False)
class MoebiusResult:
    immersion: ImmersionR3
    conformal_factor: RealArray
    closest_approach: float


def apply_moebius(
    moebius: MoebiusMap,
    immersion: ImmersionR3,
    min_distance: float | None = None,
) -> MoebiusResult:
    """Transformed torus and the factor e^{alpha'} / e^alpha of its metric.

    Raises:
        MoebiusError: an inversion center comes within ``min_distance`` of the
            surface, or an inversion is applied to a torus that does not close up
    """
    limit = get_settings().moebius_min_distance if min_distance is None else min_distance
    if moebius.has_inversion and not immersion.is_closed():
        raise MoebiusError("inversions need a closed torus", code="NOT_CLOSED")

    periodic = np.array(immersion.periodic)
    periods = np.array(immersion.periods)
    closest = float("inf")
    for primitive in moebius.primitives:
        if isinstance(primitive, Inversion):
            distance = float(np.min(primitive.distance(periodic)))
            closest = min(closest, distance)
            if distance < limit:
                raise MoebiusError(
                    f"inversion center {primitive.center} is {distance:.3e} from the surface",
                    code="INVERSION_CENTER_TOO_CLOSE",
                )
            periodic = primitive.apply(periodic)
        else:
            periodic = primitive.apply(periodic)
            periods = primitive.apply_vectors(periods)

    transformed = ImmersionR3(immersion.grid, periodic, periods)
    before = fundamental_forms(immersion)
    after = fundamental_forms(transformed)
    logger.debug("moebius_applied", primitives=len(moebius.primitives), closest_approach=closest)
    return MoebiusResult(transformed, after.exp_alpha / before.exp_alpha, closest)
