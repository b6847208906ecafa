"""Certified convexity-defect bounds and zero-existence certificates for operators on R^d."""

__version__ = "0.1.0"
