"""spectral-tori - Weierstrass spinors and Floquet spectra of tori in R3 and S3."""
__version__ = "0.1.0"
