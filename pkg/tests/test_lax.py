"""Tests for sinh-Gordon fields, CMC and isothermic Lax pencils."""
import numpy as np
import pytest

from spectral_tori.core.fields import FundamentalGrid, Lattice
from spectral_tori.errors import ConfigError
from spectral_tori.services.floquet_1d import match_points
from spectral_tori.services.lax import (
    LaxConnection,
    LaxError,
    SinhGordonField,
    cmc_monodromy,
    cmc_prop_map,
    extract_dirac_pair,
    grid_floquet_functions,
    involution_check,
    isothermic_codazzi_residuals,
    isothermic_pencil,
    lax_monodromy,
    liouville_residual,
    sinh_gordon_solution,
    system_residual,
    vacuum_monodromy_eigenvalues,
    zero_curvature_residual,
)


@pytest.fixture(scope="module")
def sinh_gordon() -> SinhGordonField:
    return sinh_gordon_solution(0.5, 64, 8)


@pytest.fixture(scope="module")
def vacuum() -> SinhGordonField:
    return SinhGordonField.vacuum(FundamentalGrid(Lattice(1.5, 2j * np.pi), 16, 8))


@pytest.fixture(scope="module")
def torus_pencil(torus) -> LaxConnection:
    grid = torus.grid(64, 8)
    x = grid.points.real
    k1, k2 = torus.line_curvatures(x)
    return isothermic_pencil(grid, np.log(torus.exp_alpha(x)), k1, k2)


class TestSinhGordon:
    """Tests for solutions of u_zzbar + sinh u = 0."""

    def test_solution_residual(self, sinh_gordon):
        """Should solve the sinh-Gordon equation on its period lattice."""
        assert sinh_gordon.residual < 1e-6
        assert sinh_gordon.depends_on_x_only

    def test_amplitude_must_be_positive(self):
        """Should refuse a non-positive amplitude."""
        with pytest.raises(ConfigError):
            sinh_gordon_solution(0.0)

    def test_perturbation_breaks_equation(self, sinh_gordon):
        """Should leave the solution set under random noise."""
        noisy = sinh_gordon.perturbed(1e-2, seed=3)
        assert noisy.residual > 1e-4
        assert not noisy.depends_on_x_only

    def test_vacuum(self, vacuum):
        """Should accept u = 0 with zero residual."""
        assert vacuum.residual == 0.0


class TestCmcPencils:
    """Tests for the two CMC commutation representations."""

    def test_unknown_tag(self, vacuum):
        """Should refuse an unknown pencil name."""
        with pytest.raises(ConfigError):
            LaxConnection("cmc-other", vacuum.grid, vacuum.alpha)

    @pytest.mark.parametrize("tag", ["cmc-geom", "cmc-zcc"])
    def test_zero_curvature(self, sinh_gordon, tag):
        """Should be flat on a sinh-Gordon solution for both representations."""
        connection = LaxConnection.cmc(sinh_gordon, tag)
        for lam in (0.7, 1.3 + 0.4j):
            assert zero_curvature_residual(connection, lam) < 1e-7

    def test_pole_at_zero(self, vacuum):
        """Should refuse l = 0 for pencils with a pole there."""
        connection = LaxConnection.cmc(vacuum, "cmc-geom")
        with pytest.raises(LaxError) as exc_info:
            connection.matrices(0.0)
        assert exc_info.value.code == "POLE_OF_PENCIL"

    def test_vacuum_monodromy(self, vacuum):
        """Should give exp(+-T (1/l - l) / 2) on u = 0."""
        lam = 0.8
        monodromy = cmc_monodromy(vacuum, lam)
        expected = vacuum_monodromy_eigenvalues(lam, 1.5)
        assert match_points(list(monodromy.eigenvalues), list(expected)) < 1e-9

    def test_involution(self, sinh_gordon):
        """Should conjugate M(l) to M(-l) by diag(1, -1)."""
        check = involution_check(LaxConnection.cmc(sinh_gordon, "cmc-zcc"), 0.9)
        assert check.conjugation_residual < 1e-9
        assert check.eigenvalue_distance < 1e-8

    def test_liouville(self, sinh_gordon):
        """Should give the traceless pencil a unimodular monodromy."""
        connection = LaxConnection.cmc(sinh_gordon, "cmc-zcc")
        assert liouville_residual(connection, lax_monodromy(connection, 1.1)) < 1e-9

    def test_non_rectangular_lattice(self):
        """Should refuse a monodromy on a skew lattice."""
        field = SinhGordonField.vacuum(FundamentalGrid(Lattice(1.0, 0.3 + 1.0j), 8, 8))
        with pytest.raises(LaxError) as exc_info:
            cmc_monodromy(field, 0.5)
        assert exc_info.value.code == "NOT_RECTANGULAR"

    def test_y_dependent_data(self, sinh_gordon):
        """Should refuse a monodromy along x for data that depend on y."""
        with pytest.raises(LaxError) as exc_info:
            cmc_monodromy(sinh_gordon.perturbed(1e-3), 0.5)
        assert exc_info.value.code == "NOT_Y_INDEPENDENT"


class TestGridFloquetFunctions:
    """Tests for common eigenfunctions of both translations."""

    def test_vacuum_functions_solve_the_system(self, vacuum):
        """Should produce Floquet functions solving both equations."""
        connection = LaxConnection.cmc(vacuum, "cmc-zcc")
        functions = grid_floquet_functions(connection, 0.8)
        assert len(functions) == 2
        for phi in functions:
            assert system_residual(connection, 0.8, phi) < 1e-8

    def test_propagation_to_geometric_pencil(self, vacuum):
        """Should map a zero-curvature solution to a geometric one."""
        connection = LaxConnection.cmc(vacuum, "cmc-zcc")
        phi = grid_floquet_functions(connection, 0.8)[0]
        propagated = cmc_prop_map(phi, vacuum.alpha, 0.8)
        assert not propagated.degenerate
        assert propagated.residual is not None and propagated.residual < 1e-7

    def test_propagation_at_zero_is_degenerate(self, vacuum):
        """Should flag the propagation at l = 0."""
        connection = LaxConnection.cmc(vacuum, "cmc-zcc")
        phi = grid_floquet_functions(connection, 0.8)[0]
        propagated = cmc_prop_map(phi, vacuum.alpha, 0.0)
        assert propagated.degenerate
        assert propagated.residual is None


class TestIsothermicPencil:
    """Tests for the 4x4 pencil of isothermic data."""

    def test_torus_compatibility(self, torus):
        """Should find the closed-form torus data compatible."""
        grid = torus.grid(64, 8)
        x = grid.points.real
        k1, k2 = torus.line_curvatures(x)
        residuals = isothermic_codazzi_residuals(grid, np.log(torus.exp_alpha(x)), k1, k2)
        assert max(residuals) < 1e-6

    def test_incompatible_data(self):
        """Should refuse data that violate the Gauss equation."""
        grid = FundamentalGrid(Lattice(1.0, 1.0j), 8, 8)
        ones = np.ones(grid.shape)
        with pytest.raises(LaxError) as exc_info:
            isothermic_pencil(grid, np.zeros(grid.shape), ones, ones)
        assert exc_info.value.code == "CODAZZI_RESIDUAL"

    def test_flat_for_every_lambda(self, torus_pencil):
        """Should be flat including at l = 0."""
        for lam in (0.0, 0.6, 1.0 + 0.5j):
            assert zero_curvature_residual(torus_pencil, lam) < 1e-7

    def test_liouville(self, torus_pencil):
        """Should match det M with the exponential of the integrated trace."""
        assert liouville_residual(torus_pencil, lax_monodromy(torus_pencil, 0.6)) < 1e-8

    def test_extraction_at_zero(self, torus_pencil):
        """Should extract Dirac solutions for U and U* at l = 0."""
        pairs = [extract_dirac_pair(phi, torus_pencil) for phi in grid_floquet_functions(torus_pencil, 0.0)]
        best = min(pairs, key=lambda p: p.residual + p.residual_star)
        assert best.residual < 1e-6
        assert best.residual_star < 1e-6

    def test_extraction_needs_isothermic_pencil(self, vacuum):
        """Should refuse to extract from a CMC pencil."""
        connection = LaxConnection.cmc(vacuum, "cmc-zcc")
        phi = grid_floquet_functions(connection, 0.8)[0]
        with pytest.raises(LaxError) as exc_info:
            extract_dirac_pair(phi, connection)
        assert exc_info.value.code == "NOT_ISOTHERMIC"
