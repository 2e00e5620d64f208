"""Tests for the isospectrality of a torus, its dual and its conformal images."""
import numpy as np
import pytest

from spectral_tori.core.fields import Lattice
from spectral_tori.errors import NumericalError
from spectral_tori.services.catalog import plane
from spectral_tori.services.floquet_1d import KruskalComparison
from spectral_tori.services.isospectral import (
    axial_period,
    conformal_image_check,
    dual_isospectrality,
    kruskal_table,
)
from spectral_tori.services.moebius import Homothety, Inversion, MoebiusMap


@pytest.fixture(scope="module")
def inverted(torus_immersion):
    return conformal_image_check(torus_immersion, MoebiusMap((Inversion((0.0, 0.0, 3.0), 1.0),)))


class TestAxialPeriod:
    """Tests for the period along the profile."""

    def test_torus_period(self, torus, torus_immersion):
        """Should return the real first generator."""
        assert axial_period(torus_immersion) == pytest.approx(torus.period)

    def test_skew_lattice(self):
        """Should refuse a first generator off the real axis."""
        with pytest.raises(NumericalError) as exc_info:
            axial_period(plane(Lattice(1.0 + 0.5j, 1.0j)))
        assert exc_info.value.code == "NOT_REVOLUTION"


class TestDualIsospectrality:
    """Tests for U against the potential of the dual torus."""

    def test_kruskal_integrals_agree(self, torus, torus_immersion):
        """Should give U and U* the same Kruskal integrals."""
        report = dual_isospectrality(torus_immersion)
        assert report.max_relative_difference < 1e-6
        np.testing.assert_allclose(np.abs(report.dual_potential.samples), abs(torus.dual_potential), atol=1e-6)
        assert report.branch_point_distance is None


class TestConformalImage:
    """Tests for the dual potential of a Moebius image."""

    def test_dual_potential_up_to_sign(self, inverted):
        """Should reproduce U* of the original torus up to sign."""
        assert inverted.sign in (1, -1)
        assert inverted.dual_potential_defect < 1e-6

    def test_conformal_invariants(self, inverted):
        """Should keep the Blaschke density and the Willmore energy."""
        assert inverted.blaschke_defect < 1e-6
        assert inverted.willmore_after == pytest.approx(inverted.willmore_before, rel=1e-5)
        assert inverted.isothermic_defect < 1e-6

    def test_image_of_revolution_is_isospectral(self, inverted):
        """Should compare Kruskal integrals when an axial inversion keeps the rotation symmetry."""
        assert inverted.kruskal is not None
        assert inverted.kruskal.max_relative_difference < 1e-5

    def test_homothety_keeps_sign(self, torus_immersion):
        """Should leave U* unchanged under a homothety."""
        report = conformal_image_check(torus_immersion, MoebiusMap((Homothety(2.5),)))
        assert report.sign == 1
        assert report.dual_potential_defect < 1e-8

    def test_report_dict(self, inverted):
        """Should list the defects, energies and Kruskal difference."""
        data = inverted.as_dict()
        assert data["sign"] == inverted.sign
        assert "kruskal_difference" in data
        assert "branch_point_distance" not in data


class TestKruskalTable:
    """Tests for the tabular form of a comparison."""

    def test_rows(self):
        """Should number the integrals from 1 and carry the relative difference."""
        rows = kruskal_table(KruskalComparison([1.0, 2.0], [1.0, 3.0]))
        assert [r["l"] for r in rows] == [1, 2]
        assert rows[1]["relative_difference"] == pytest.approx(1.0 / 3.0)
