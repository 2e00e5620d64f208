"""Isospectrality checks between the potential of a torus and that of its dual.

For a torus of revolution the potentials U and U* of the torus and of its
dual isothermic surface have the same Kruskal integrals. For a conformal image
of an isothermic torus, the dual potential -Re(A') e^{-alpha'} of the image
agrees with U* up to sign, because 16 |A|^2 e^{-2 alpha} is Moebius invariant.
"""
from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from ..errors import NumericalError
from ..logging import get_logger
from .floquet_1d import (
    KruskalComparison,
    Potential1D,
    branch_points,
    compare_kruskal,
    match_points,
    miura,
)
from .moebius import MoebiusMap, apply_moebius
from .surface_r3 import (
    ImmersionR3,
    dual_isothermic,
    fundamental_forms,
    willmore_direct,
)

logger = get_logger(__name__)

RealArray = NDArray[np.float64]
Region = tuple[float, float, float, float]


def axial_period(immersion: ImmersionR3) -> float:
    g1 = immersion.grid.lattice.gamma1
    if abs(g1.imag) > 1e-12 * abs(g1):
        raise NumericalError("the first period must be real for a profile potential", code="NOT_REVOLUTION")
    return float(g1.real)


@dataclass(frozen=True)
class DualPotentialReport:
    """Kruskal integrals of U and U* for a torus of revolution."""

    potential: Potential1D
    dual_potential: Potential1D
    kruskal: KruskalComparison
    branch_point_distance: float | None

    @property
    def max_relative_difference(self) -> float:
        return self.kruskal.max_relative_difference


def dual_isospectrality(
    immersion: ImmersionR3,
    count: int = 3,
    region: Region | None = None,
) -> DualPotentialReport:
    """Compare the spectral data of U and of the potential of the dual torus.

    Both potentials are read off their surfaces numerically; the dual surface is
    built by integrating e^{-2 alpha} F_zbar.
    """
    period = axial_period(immersion)
    data = fundamental_forms(immersion)
    dual = fundamental_forms(dual_isothermic(immersion))
    u = Potential1D.from_surface(data.potential(), period)
    u_star = Potential1D.from_surface(dual.potential(), period)
    comparison = compare_kruskal(miura(u), miura(u_star), count)
    distance = None
    if region is not None:
        distance = match_points(branch_points(u, region).branch_points, branch_points(u_star, region).branch_points)
    logger.info(
        "dual_isospectrality",
        kruskal_difference=comparison.max_relative_difference,
        branch_point_distance=distance,
    )
    return DualPotentialReport(u, u_star, comparison, distance)


@dataclass(frozen=True)
class ConformalImageReport:
    """Dual potential of a torus against that of its conformal image."""

    sign: int
    dual_potential_defect: float
    blaschke_defect: float
    isothermic_defect: float
    willmore_before: float
    willmore_after: float
    closest_approach: float
    kruskal: KruskalComparison | None
    branch_point_distance: float | None = None

    def as_dict(self) -> dict[str, object]:
        out: dict[str, object] = {
            "sign": self.sign,
            "dual_potential_defect": self.dual_potential_defect,
            "blaschke_defect": self.blaschke_defect,
            "isothermic_defect": self.isothermic_defect,
            "willmore_before": self.willmore_before,
            "willmore_after": self.willmore_after,
            "closest_approach": self.closest_approach,
        }
        if self.kruskal is not None:
            out["kruskal_difference"] = self.kruskal.max_relative_difference
        if self.branch_point_distance is not None:
            out["branch_point_distance"] = self.branch_point_distance
        return out


def conformal_image_check(
    immersion: ImmersionR3,
    moebius: MoebiusMap,
    count: int = 3,
    region: Region | None = None,
) -> ConformalImageReport:
    """V = -Re(A') e^{-alpha'} of the transformed torus against U* of the original.

    The sign is decided by majority over the samples; the defect is the largest
    pointwise distance to the nearer of U* and -U*.
    """
    before = fundamental_forms(immersion)
    result = apply_moebius(moebius, immersion)
    after = fundamental_forms(result.immersion)
    u_star = before.dual_potential()
    v = after.dual_potential()

    plus = np.abs(v - u_star)
    minus = np.abs(v + u_star)
    sign = 1 if np.count_nonzero(plus <= minus) * 2 >= plus.size else -1
    defect = float(np.max(np.minimum(plus, minus)))
    blaschke = float(np.max(np.abs(after.blaschke_density() - before.blaschke_density())))

    kruskal = None
    distance = None
    if _depends_on_x_only(u_star) and _depends_on_x_only(v):
        period = axial_period(immersion)
        first = Potential1D.from_surface(u_star, period)
        second = Potential1D.from_surface(v, period)
        kruskal = compare_kruskal(miura(first), miura(second), count)
        if region is not None:
            distance = match_points(
                branch_points(first, region).branch_points, branch_points(second, region).branch_points
            )
    report = ConformalImageReport(
        sign=sign,
        dual_potential_defect=defect,
        blaschke_defect=blaschke,
        isothermic_defect=after.isothermic_defect(),
        willmore_before=willmore_direct(before),
        willmore_after=willmore_direct(after),
        closest_approach=result.closest_approach,
        kruskal=kruskal,
        branch_point_distance=distance,
    )
    logger.info("conformal_image_check", **report.as_dict())
    return report


def _depends_on_x_only(values: RealArray, tolerance: float = 1e-8) -> bool:
    spread = np.max(np.abs(values - values.mean(axis=1, keepdims=True)))
    return bool(spread <= tolerance * (1.0 + np.max(np.abs(values))))


def kruskal_table(comparison: KruskalComparison) -> Sequence[dict[str, object]]:
    """Rows l, K_l(first), K_l(second), relative difference."""
    return [
        {"l": i + 1, "first": a, "second": b, "relative_difference": d}
        for i, (a, b, d) in enumerate(
            zip(comparison.first, comparison.second, comparison.relative_differences, strict=True)
        )
    ]
