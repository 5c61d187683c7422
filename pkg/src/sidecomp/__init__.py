"""Exact strongly irreducible decompositions of discretized direct integrals."""

from .errors import SidecompError
from .field import OperatorField, SpectralCell
from .linalg import ExactMatrix, GaussianRational

__version__ = "0.1.0"

__all__ = ["ExactMatrix", "GaussianRational", "OperatorField", "SidecompError", "SpectralCell", "__version__"]
