"""Tests for lattices, grids and spectral calculus on flat tori."""
import numpy as np
import pytest

from spectral_tori.core.fields import (
    BlochField,
    FieldError,
    FundamentalGrid,
    Lattice,
    PeriodicField,
    as_unimodular,
    dz,
    dzbar,
    field_from_dict,
    field_to_dict,
    integrate_over_domain,
    integrate_wirtinger,
    invert_unimodular,
    spectral_diff_matrix,
)


@pytest.fixture
def square_grid() -> FundamentalGrid:
    return FundamentalGrid(Lattice.square(2.0 * np.pi), 32, 32)


class TestUnimodular:
    """Tests for integer basis changes."""

    def test_rejects_determinant_two(self):
        """Should reject a matrix whose determinant is not 1."""
        with pytest.raises(FieldError) as exc_info:
            as_unimodular([[2, 0], [0, 1]])
        assert exc_info.value.code == "NOT_UNIMODULAR"

    def test_rejects_fractional_entries(self):
        """Should reject non-integer entries."""
        with pytest.raises(FieldError):
            as_unimodular([[1, 0.5], [0, 1]])

    def test_inverse(self):
        """Should invert an SL(2,Z) matrix."""
        assert invert_unimodular([[1, 1], [0, 1]]) == ((1, -1), (0, 1))


class TestLattice:
    """Tests for the period lattice."""

    def test_degenerate_generators(self):
        """Should refuse generators that are real multiples of each other."""
        with pytest.raises(FieldError) as exc_info:
            Lattice(1.0, 2.0)
        assert exc_info.value.code == "DEGENERATE_LATTICE"

    def test_change_basis_round_trip_is_exact(self):
        """Should restore the generators exactly after a change and its inverse."""
        lattice = Lattice.hexagonal(1.3)
        m = ((2, 1), (1, 1))
        back = lattice.change_basis(m).change_basis(invert_unimodular(m))
        assert back.generators == lattice.generators

    def test_change_basis_preserves_area(self):
        """Should keep the cell area under a unimodular change."""
        lattice = Lattice(1.0 + 0.2j, 0.3 + 1.1j)
        assert lattice.change_basis(((1, 1), (0, 1))).area == pytest.approx(lattice.area)

    def test_dual_generators_pair_to_identity(self):
        """Should produce dual generators with <gamma_j*, gamma_k> = delta_jk."""
        lattice = Lattice(1.0 + 0.2j, 0.3 + 1.1j)
        duals = lattice.dual_generators
        for j, d in enumerate(duals):
            for k, g in enumerate(lattice.generators):
                expected = 1.0 if j == k else 0.0
                assert lattice.pairing(d.real, d.imag, g).real == pytest.approx(expected, abs=1e-12)

    def test_reduce_quasimomentum(self):
        """Should shift a quasimomentum by a dual vector into the reduced cell."""
        lattice = Lattice.square(1.0)
        k1, k2 = lattice.reduce_quasimomentum(1.25 + 0.1j, -0.75)
        assert k1 == pytest.approx(0.25 + 0.1j)
        assert k2 == pytest.approx(0.25)

    def test_dict_round_trip(self):
        """Should serialize generators as [re, im] pairs."""
        lattice = Lattice.hexagonal()
        assert Lattice.from_dict(lattice.to_dict()).generators == pytest.approx(lattice.generators)


class TestFundamentalGrid:
    """Tests for grid validation."""

    @pytest.mark.parametrize("n", [7, 9, 6])
    def test_rejects_bad_sizes(self, n):
        """Should require an even number of samples of at least 8."""
        with pytest.raises(FieldError) as exc_info:
            FundamentalGrid(Lattice.square(), n, 8)
        assert exc_info.value.code == "GRID_SIZE"

    def test_points_span_the_cell(self, square_grid):
        """Should sample the parallelogram with endpoints excluded."""
        pts = square_grid.points
        assert pts[0, 0] == 0
        assert pts[1, 0] == pytest.approx(2.0 * np.pi / 32)
        assert pts[0, 1] == pytest.approx(2.0j * np.pi / 32)


class TestDerivatives:
    """Tests for spectral Wirtinger derivatives."""

    def test_plane_wave(self, square_grid):
        """Should differentiate exp(i x) exactly."""
        f = PeriodicField.from_function(square_grid, lambda z: np.exp(1j * z.real))
        expected = 0.5j * f.values
        np.testing.assert_allclose(dz(f).values, expected, atol=1e-12)
        np.testing.assert_allclose(dzbar(f).values, expected, atol=1e-12)

    def test_antiperiodic_field(self, square_grid):
        """Should differentiate exp(i x / 2) with character (-1, 1)."""
        f = PeriodicField.from_function(square_grid, lambda z: np.exp(0.5j * z.real), (-1, 1))
        np.testing.assert_allclose(dz(f).values, 0.25j * f.values, atol=1e-12)
        assert dz(f).character == (-1, 1)

    def test_bloch_field(self, square_grid):
        """Should differentiate a Bloch wave with arbitrary multiplier."""
        a = 0.3
        f = BlochField(square_grid, np.exp(1j * a * square_grid.points.real), (2j * np.pi * a, 0j))
        np.testing.assert_allclose(dz(f).values, 0.5j * a * f.values, atol=1e-12)
        assert f.multipliers[0] == pytest.approx(np.exp(2j * np.pi * a))

    def test_second_harmonic(self, square_grid):
        """Should differentiate exp(2 i x) to i exp(2 i x)."""
        f = PeriodicField.from_function(square_grid, lambda z: np.exp(2j * z.real))
        np.testing.assert_allclose(dz(f).values, 1j * f.values, atol=1e-11)

    def test_dense_matrix(self):
        """Should differentiate sin on a 16-point periodic grid."""
        x = 2.0 * np.pi * np.arange(16) / 16
        d = spectral_diff_matrix(16, 2.0 * np.pi)
        np.testing.assert_allclose(d @ np.sin(x), np.cos(x), atol=1e-12)

    def test_dense_matrix_odd_size(self):
        """Should reject an odd number of samples."""
        with pytest.raises(FieldError):
            spectral_diff_matrix(15)


class TestIntegration:
    """Tests for domain integrals and inverse Wirtinger derivatives."""

    def test_constant_integral_is_area(self, square_grid):
        """Should integrate 1 to the cell area."""
        one = PeriodicField.constant(square_grid, 1.0)
        assert integrate_over_domain(one) == pytest.approx(4.0 * np.pi**2)

    def test_antiperiodic_integral_rejected(self, square_grid):
        """Should refuse to integrate a field with non-trivial character."""
        f = PeriodicField(square_grid, np.ones(square_grid.shape), (1, -1))
        with pytest.raises(FieldError) as exc_info:
            integrate_over_domain(f)
        assert exc_info.value.code == "ANTIPERIODIC_INTEGRAND"

    def test_linear_map_periods(self, square_grid):
        """Should recover F = x from dF/dz = 1/2 as pure translation."""
        periodic, periods = integrate_wirtinger(square_grid, np.full(square_grid.shape, 0.5))
        np.testing.assert_allclose(periodic, 0.0, atol=1e-12)
        assert periods[0] == pytest.approx(2.0 * np.pi)
        assert periods[1] == pytest.approx(0.0, abs=1e-12)

    def test_periodic_part(self, square_grid):
        """Should recover sin x up to its mean from its z-derivative."""
        x = square_grid.points.real
        periodic, _ = integrate_wirtinger(square_grid, 0.5 * np.cos(x))
        np.testing.assert_allclose(periodic, np.sin(x), atol=1e-11)


class TestPeriodicField:
    """Tests for field validation and arithmetic."""

    def test_character_mismatch(self, square_grid):
        """Should refuse to add fields with different characters."""
        a = PeriodicField(square_grid, np.ones(square_grid.shape), (1, 1))
        b = PeriodicField(square_grid, np.ones(square_grid.shape), (-1, 1))
        with pytest.raises(FieldError) as exc_info:
            a + b
        assert exc_info.value.code == "CHARACTER_MISMATCH"

    def test_product_multiplies_characters(self, square_grid):
        """Should multiply characters in a product."""
        a = PeriodicField(square_grid, np.ones(square_grid.shape), (-1, 1))
        assert (a * a).character == (1, 1)

    def test_non_finite_rejected(self, square_grid):
        """Should reject NaN samples."""
        values = np.ones(square_grid.shape)
        values[3, 4] = np.nan
        with pytest.raises(FieldError) as exc_info:
            PeriodicField(square_grid, values)
        assert exc_info.value.code == "NON_FINITE_VALUES"

    def test_bad_character(self, square_grid):
        """Should accept only +1 or -1 character entries."""
        with pytest.raises(FieldError):
            PeriodicField(square_grid, np.ones(square_grid.shape), (2, 1))

    def test_dict_form(self, square_grid):
        """Should serialize and restore a field."""
        f = PeriodicField.from_function(square_grid, lambda z: np.exp(1j * z.real))
        back = field_from_dict(field_to_dict(f))
        np.testing.assert_allclose(back.values, f.values)

    def test_malformed_document(self):
        """Should report a malformed field document."""
        with pytest.raises(FieldError) as exc_info:
            field_from_dict({"n1": 8})
        assert exc_info.value.code == "BAD_FIELD_DOCUMENT"
