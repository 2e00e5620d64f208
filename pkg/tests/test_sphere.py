"""Tests for tori in S3: spinors, the Hitchin family and stereographic projection."""
import numpy as np
import pytest

from spectral_tori.core.fields import FundamentalGrid, Lattice
from spectral_tori.errors import ConfigError
from spectral_tori.services.catalog import clifford_spinor_closed_form, clifford_torus, flat_torus_s3
from spectral_tori.services.sphere import (
    CLIFFORD_POTENTIAL,
    HitchinFamily,
    SphereError,
    SU2Immersion,
    clifford_floquet_function,
    clifford_harmonic_residual,
    clifford_spectrum_map,
    eigenfunction_from_hitchin,
    gauge_residuals,
    harmonic_residuals,
    hitchin_coefficients,
    lift_to_s3,
    project_to_r3,
    quaternion_coordinates,
    quaternion_matrix,
    sphere_dirac_residual,
    spinor_from_s3,
    stereographic,
    stereographic_inverse,
    willmore_s3,
)
from spectral_tori.services.surface_r3 import fundamental_forms, willmore_direct


class TestSU2Immersion:
    """Tests for samples in SU(2)."""

    def test_rejects_non_unitary(self):
        """Should refuse samples that are not special unitary."""
        grid = FundamentalGrid(Lattice.square(), 8, 8)
        samples = np.broadcast_to(2.0 * np.eye(2), (8, 8, 2, 2))
        with pytest.raises(SphereError) as exc_info:
            SU2Immersion(grid, samples)
        assert exc_info.value.code == "NOT_SPECIAL_UNITARY"

    def test_quaternion_coordinates_round_trip(self):
        """Should map R4 to quaternion matrices and back."""
        x = np.array([0.1, -0.2, 0.3, 0.9])
        np.testing.assert_allclose(quaternion_coordinates(quaternion_matrix(x)), x)

    def test_clifford_is_minimal(self, clifford):
        """Should satisfy both the integrability and the harmonic map equation."""
        integrability, minimal = harmonic_residuals(clifford)
        assert integrability < 1e-10
        assert minimal < 1e-10


class TestSphereSpinor:
    """Tests for the spinor of a torus in S3."""

    def test_clifford_potential(self, clifford_spinor):
        """Should find the constant potential -i / (2 sqrt 2) and e^alpha = 1 / sqrt 2."""
        np.testing.assert_allclose(clifford_spinor.potential, CLIFFORD_POTENTIAL, atol=1e-10)
        np.testing.assert_allclose(clifford_spinor.exp_alpha, 1.0 / np.sqrt(2.0), atol=1e-10)
        np.testing.assert_allclose(clifford_spinor.mean_curvature, 0.0, atol=1e-10)

    def test_clifford_hopf(self, clifford_spinor):
        """Should find a Hopf differential of modulus 1/4."""
        np.testing.assert_allclose(np.abs(clifford_spinor.hopf()), 0.25, atol=1e-10)

    def test_clifford_character(self, clifford_spinor):
        """Should give the Clifford spinor the character (-1, -1)."""
        assert clifford_spinor.character == (-1, -1)

    def test_dirac_and_constraint(self, clifford_spinor):
        """Should solve the S3 Dirac equation with conj(V) - V = i e^alpha."""
        assert clifford_spinor.dirac_residual() < 1e-8
        assert clifford_spinor.constraint_defect() < 1e-10
        assert clifford_spinor.conjugate().dirac_residual() < 1e-8

    def test_gauss_codazzi(self, clifford_spinor):
        """Should satisfy the Gauss and Codazzi equations in S3."""
        gauss, codazzi = clifford_spinor.codazzi_residuals()
        assert gauss < 1e-7
        assert codazzi < 1e-7

    def test_closed_form(self, clifford, clifford_spinor):
        """Should match the closed-form Clifford spinor up to sign."""
        closed1, closed2 = clifford_spinor_closed_form(clifford.grid)
        a = np.stack([clifford_spinor.psi1.values, clifford_spinor.psi2.values])
        b = np.stack([closed1, closed2])
        assert min(np.max(np.abs(a - b)), np.max(np.abs(a + b))) < 1e-8

    def test_willmore(self, clifford_spinor):
        """Should give the Clifford torus the energy 2 pi^2."""
        assert willmore_s3(clifford_spinor) == pytest.approx(2.0 * np.pi**2, rel=1e-8)

    def test_flat_torus_mean_curvature(self):
        """Should find H = cot(2 a) on the flat torus with radii cos a, sin a."""
        angle = np.pi / 6.0
        spinor = spinor_from_s3(flat_torus_s3(angle, 32, 32))
        np.testing.assert_allclose(np.abs(spinor.mean_curvature), 1.0 / np.tan(2.0 * angle), atol=1e-8)

    def test_flat_torus_angle_range(self):
        """Should refuse angles outside (0, pi/2)."""
        with pytest.raises(ConfigError):
            flat_torus_s3(np.pi / 2.0)


class TestCliffordSpectrum:
    """Tests for the explicit Floquet functions of the Clifford torus."""

    def test_spectrum_map_zero(self):
        """Should refuse the spectral parameter 0."""
        with pytest.raises(ConfigError):
            clifford_spectrum_map(0.0)

    def test_floquet_function(self, clifford):
        """Should give a harmonic Floquet function with the mapped multipliers."""
        lam = 0.4 + 0.3j
        psi = clifford_floquet_function(clifford.grid, lam)
        assert clifford_harmonic_residual(psi) < 1e-8
        assert psi.multipliers[0] == pytest.approx(clifford_spectrum_map(lam)[0], rel=1e-10)
        assert psi.multipliers[1] == pytest.approx(clifford_spectrum_map(lam)[1], rel=1e-10)

    def test_floquet_function_solves_dirac(self, clifford):
        """Should solve D^S psi = 0 for the Clifford potential and not for its conjugate."""
        psi = clifford_floquet_function(clifford.grid, 0.7 - 0.2j)
        assert sphere_dirac_residual(psi.grid, psi.values, psi.shifts, CLIFFORD_POTENTIAL) < 1e-8
        assert sphere_dirac_residual(psi.grid, psi.values, psi.shifts, np.conj(CLIFFORD_POTENTIAL)) > 1e-2


class TestHitchinFamily:
    """Tests for the Hitchin family of a harmonic map."""

    def test_flat_connections(self, clifford):
        """Should be flat for every nonzero spectral parameter and both placements."""
        family = HitchinFamily.from_immersion(clifford)
        for lam in (0.5, 1.0 + 1.0j, -2.0):
            assert family.flatness_residual(lam) < 1e-8
            assert family.flatness_residual(lam, "eigenfunction") < 1e-8

    def test_non_harmonic_rejected(self):
        """Should refuse a flat torus that is not minimal."""
        with pytest.raises(SphereError) as exc_info:
            HitchinFamily.from_immersion(flat_torus_s3(np.pi / 6.0, 32, 32))
        assert exc_info.value.code == "NOT_HARMONIC"

    def test_unknown_placement(self):
        """Should refuse an unknown coefficient placement."""
        with pytest.raises(ConfigError):
            hitchin_coefficients(1.0, "sideways")

    def test_gauge_conjugation(self, clifford, clifford_spinor):
        """Should conjugate Psi and Psi* to nilpotent form."""
        first, second = gauge_residuals(clifford_spinor, clifford)
        assert first < 1e-8
        assert second < 1e-8

    def test_hitchin_multipliers(self, clifford, clifford_spinor):
        """Should return multipliers that solve mu^2 - Tr H mu + 1 = 0."""
        family = HitchinFamily.from_immersion(clifford)
        gauged = eigenfunction_from_hitchin(family, clifford_spinor, 0.5)
        for generator, mu in enumerate(gauged.hitchin_multipliers):
            trace = np.trace(family.monodromy(0.5, generator, "eigenfunction").matrix)
            assert abs(mu**2 - trace * mu + 1.0) < 1e-7 * (1.0 + abs(mu) ** 2)


class TestStereographic:
    """Tests for stereographic projection between S3 and R3."""

    def test_round_trip(self):
        """Should invert the projection."""
        points = np.array([[0.3, -1.2, 0.5], [2.0, 0.0, 0.0]])
        np.testing.assert_allclose(stereographic(stereographic_inverse(points)), points, atol=1e-12)

    def test_identity_maps_to_infinity(self):
        """Should send the identity to infinity."""
        assert np.all(np.isinf(stereographic(np.eye(2))))

    def test_clifford_projection(self):
        """Should project to a closed torus of energy 2 pi^2 and lift back."""
        clifford = clifford_torus(64, 64)
        projected = project_to_r3(clifford)
        assert projected.is_closed()
        assert willmore_direct(fundamental_forms(projected)) == pytest.approx(2.0 * np.pi**2, rel=1e-6)
        np.testing.assert_allclose(lift_to_s3(projected).samples, clifford.samples, atol=1e-10)
