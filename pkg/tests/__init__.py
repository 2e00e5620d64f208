"""spectral-tori test suite."""
