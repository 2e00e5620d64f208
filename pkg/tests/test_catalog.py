"""Tests for the builtin surfaces and their closed forms."""
import numpy as np
import pytest

from spectral_tori.core.fields import FundamentalGrid, Lattice
from spectral_tori.errors import ConfigError
from spectral_tori.services.catalog import (
    TorusOfRevolution,
    clifford_revolution,
    clifford_torus,
    constant_spinor,
    flat_torus_s3,
)


class TestTorusOfRevolution:
    """Tests for tori of revolution in their conformal parameter."""

    @pytest.mark.parametrize("radii", [(1.0, 1.0), (1.0, 2.0), (2.0, 0.0)])
    def test_invalid_radii(self, radii):
        """Should require R > r > 0."""
        with pytest.raises(ConfigError):
            TorusOfRevolution(*radii)

    def test_period(self, torus):
        """Should give T = 2 pi r / sqrt(R^2 - r^2)."""
        assert torus.period == pytest.approx(2.0 * np.pi / np.sqrt(3.0))
        assert torus.lattice.gamma2 == pytest.approx(2j * np.pi)

    def test_profile_is_a_circle(self, torus):
        """Should place every point at distance r from the center circle."""
        points = torus.points(torus.grid(16, 16))
        rho = np.hypot(points[0], points[1])
        np.testing.assert_allclose(np.hypot(rho - torus.R, points[2]), torus.r, atol=1e-12)

    def test_profile_angle_starts_outside(self, torus):
        """Should start on the outer equator and reach the inner one at half period."""
        t = torus.profile_angle(np.array([0.0, torus.period / 2.0]))
        assert t[0] == pytest.approx(0.0)
        assert abs(t[1]) == pytest.approx(np.pi)

    def test_willmore_closed_form(self, torus):
        """Should agree with the profile quadrature."""
        assert torus.willmore == pytest.approx(4.0 * np.pi**2 / np.sqrt(3.0), rel=1e-14)
        assert torus.willmore_quadrature() == pytest.approx(torus.willmore, rel=1e-10)

    def test_clifford_ratio_minimizes(self):
        """Should give 2 pi^2 for R / r = sqrt 2 and more for other ratios."""
        assert clifford_revolution().willmore == pytest.approx(2.0 * np.pi**2)
        assert TorusOfRevolution(3.0, 1.0).willmore > 2.0 * np.pi**2

    def test_potential_is_half_mean_curvature_times_metric(self, torus):
        """Should satisfy U = H e^alpha / 2."""
        x = np.linspace(0.0, torus.period, 11)
        np.testing.assert_allclose(torus.potential(x), torus.mean_curvature(x) * torus.exp_alpha(x) / 2.0)


class TestBuiltinSpinorsAndSphereTori:
    """Tests for the constant spinor and the flat tori of S3."""

    def test_constant_spinor(self):
        """Should carry zero potential and the trivial character."""
        psi = constant_spinor(FundamentalGrid(Lattice.square(), 8, 8), 0.5, 0.5j)
        np.testing.assert_allclose(psi.potential.values, 0.0)
        assert psi.dirac_residual() == pytest.approx(0.0, abs=1e-14)

    def test_clifford_is_quarter_angle(self):
        """Should build the Clifford torus as the flat torus at angle pi / 4."""
        np.testing.assert_allclose(clifford_torus(8, 8).samples, flat_torus_s3(np.pi / 4.0, 8, 8).samples)

    def test_clifford_lattice(self):
        """Should use the lattice 2 pi (Z + iZ)."""
        lattice = clifford_torus(8, 8).grid.lattice
        assert lattice.gamma1 == pytest.approx(2.0 * np.pi)
        assert lattice.gamma2 == pytest.approx(2j * np.pi)
