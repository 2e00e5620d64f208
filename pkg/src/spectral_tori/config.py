"""Configuration management for spectral-tori."""
from functools import lru_cache

from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Numerical tolerances and runtime knobs loaded from environment variables."""

    model_config = SettingsConfigDict(
        env_prefix="SPECTRAL_TORI_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )

    # Runtime
    debug: bool = Field(default=False, description="Enable debug mode (console logs)")
    threads: int = Field(default=1, description="Cap on worker threads for FFTs and parameter maps")
    package_version: str = Field(default="0.1.0", description="Version reported in logs and reports")

    # Surfaces
    conformality_tolerance: float = Field(
        default=1e-8,
        description="Allowed |<F_z,F_z>| relative to mean(e^{2 alpha})",
    )
    character_tolerance: float = Field(
        default=0.5,
        description="Minimum |cos| of the wrap-around sign test for spin characters",
    )
    degenerate_spinor_tolerance: float = Field(
        default=1e-12,
        description="Relative size below which both spinor squares count as vanishing",
    )
    isothermic_tolerance: float = Field(
        default=1e-8,
        description="Allowed max|Im A| relative to max|A| for isothermic parameters",
    )

    # One-dimensional monodromy
    monodromy_tolerance: float = Field(
        default=1e-11,
        description="Richardson difference accepted for transfer matrices",
    )
    determinant_tolerance: float = Field(
        default=1e-10,
        description="Allowed |det T - 1| for unimodular transfer matrices",
    )
    monodromy_initial_steps: int = Field(default=256, description="RK4 steps of the first pass")
    monodromy_max_refinements: int = Field(default=7, description="Step-halving passes before failure")

    # Root search
    root_box_width: float = Field(default=1e-3, description="Subdivision width for argument-principle boxes")
    double_root_threshold: float = Field(
        default=1e-6,
        description="Relative |d(Tr^2-4)/d lambda| below which a root is double",
    )
    root_search_budget: int = Field(default=4000, description="Maximum boxes examined per search")
    newton_max_iterations: int = Field(default=60, description="Newton and secant iteration cap")
    newton_tolerance: float = Field(default=1e-13, description="Newton step size accepted as converged")

    # Two-dimensional spectrum
    fourier_cutoff: int = Field(default=4, description="Default Fourier cutoff M of the truncated pencil")
    zero_flag_factor: float = Field(
        default=1e-6,
        description="Witness below factor * median(witness) flags a zero",
    )
    truncation_tail_tolerance: float = Field(
        default=1e-10,
        description="Fourier mass of the potential outside the cutoff that triggers a warning",
    )
    fit_residual_threshold: float = Field(
        default=1e-6,
        description="Relative least-squares residual above which an asymptotic fit is unreliable",
    )
    branch_jump_tolerance: float = Field(
        default=0.25,
        description="Relative jump of a traced branch that counts as branch loss",
    )

    # Lax pencils
    lax_tolerance: float = Field(default=1e-8, description="Zero-curvature residual accepted for Lax data")
    codazzi_tolerance: float = Field(default=1e-6, description="Isothermic Codazzi residual accepted")

    # S3 and Moebius
    su2_tolerance: float = Field(default=1e-12, description="Allowed deviation of f f^dagger from 1")
    harmonic_tolerance: float = Field(default=1e-8, description="Harmonic-map residual accepted")
    moebius_min_distance: float = Field(
        default=1e-3,
        description="Closest allowed approach of the surface to an inversion center",
    )

    @field_validator("threads", "monodromy_initial_steps", "root_search_budget")
    @classmethod
    def validate_positive(cls, v: int) -> int:
        """Validate counts are positive."""
        if v < 1:
            raise ValueError(f"value must be at least 1, got {v}")
        return v

    @field_validator("fourier_cutoff")
    @classmethod
    def validate_cutoff(cls, v: int) -> int:
        """Validate the Fourier cutoff."""
        if v < 1:
            raise ValueError(f"fourier_cutoff must be >= 1, got {v}")
        return v


@lru_cache()
def get_settings() -> Settings:
    """Get cached settings instance."""
    return Settings()
