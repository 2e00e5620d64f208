"""Exception hierarchy shared by all modules.

The exit code of an error is the CLI exit status it maps to.
"""


class SpectralToriError(Exception):
    """Base error for spectral-tori operations."""

    def __init__(self, message: str, exit_code: int = 2, code: str = "SPECTRAL_TORI_ERROR"):
        self.message = message
        self.exit_code = exit_code
        self.code = code
        super().__init__(message)

    def to_dict(self) -> dict[str, str]:
        """Machine-readable form printed by the CLI."""
        return {"code": self.code, "message": self.message}


class ConfigError(SpectralToriError):
    """Invalid experiment configuration or command-line input."""

    def __init__(self, message: str, code: str = "CONFIG_ERROR"):
        super().__init__(message, exit_code=1, code=code)


class NumericalError(SpectralToriError):
    """A computation could not be carried out on the given data."""

    def __init__(self, message: str, code: str = "NUMERICAL_ERROR"):
        super().__init__(message, exit_code=2, code=code)


class CheckFailure(SpectralToriError):
    """One or more hard checks of a run failed."""

    def __init__(self, failed: list[str]):
        self.failed = failed
        super().__init__(
            f"{len(failed)} hard check(s) failed: {', '.join(failed)}",
            exit_code=3,
            code="CHECK_FAILED",
        )
