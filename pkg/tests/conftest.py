"""Pytest fixtures and configuration for spectral-tori tests."""
import os

os.environ.setdefault("SPECTRAL_TORI_DEBUG", "true")
os.environ.setdefault("SPECTRAL_TORI_THREADS", "2")

import pytest

from spectral_tori.services.catalog import TorusOfRevolution, clifford_torus
from spectral_tori.services.sphere import SphereSpinor, SU2Immersion, spinor_from_s3
from spectral_tori.services.surface_r3 import (
    ImmersionR3,
    SurfaceData,
    WeierstrassSpinor,
    fundamental_forms,
    spinor_from_surface,
)


@pytest.fixture(scope="session")
def torus() -> TorusOfRevolution:
    """Torus of revolution with R = 2, r = 1."""
    return TorusOfRevolution(2.0, 1.0)


@pytest.fixture(scope="session")
def torus_immersion(torus: TorusOfRevolution) -> ImmersionR3:
    """The R = 2, r = 1 torus on a 64 x 64 grid."""
    return torus.immersion(torus.grid(64, 64))


@pytest.fixture(scope="session")
def torus_data(torus_immersion: ImmersionR3) -> SurfaceData:
    return fundamental_forms(torus_immersion)


@pytest.fixture(scope="session")
def torus_spinor(torus_immersion: ImmersionR3) -> WeierstrassSpinor:
    return spinor_from_surface(torus_immersion)


@pytest.fixture(scope="session")
def clifford() -> SU2Immersion:
    """Clifford torus in S3 on a 32 x 32 grid."""
    return clifford_torus(32, 32)


@pytest.fixture(scope="session")
def clifford_spinor(clifford: SU2Immersion) -> SphereSpinor:
    return spinor_from_s3(clifford)
