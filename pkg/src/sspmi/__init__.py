"""Squashed shifted PMI: from corpus counts to embeddings, random graphs and hyperbolic geometry."""

from sspmi.errors import DivergenceError, DomainError, FitFailure

__version__ = "0.1.0"

__all__ = ["DivergenceError", "DomainError", "FitFailure", "__version__"]
