"""Field-normalized research productivity and cross-field scaling diagnostics."""

__version__ = "0.1.0"
