"""Local Gowers norms on quadratic varieties over F_p."""

__version__ = "0.1.0"
