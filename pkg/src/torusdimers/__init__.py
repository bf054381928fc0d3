"""Dimer matchings on the discrete torus and their bead-model scaling limit."""

from ._backend import BACKEND
from .errors import (
    CoincidentSitesError,
    DomainError,
    IllConditionedWarning,
    InconsistentConfigurationError,
    PoleError,
    QuadratureError,
    ShapeTooLargeError,
    SingularMatrixError,
    TriangleInequalityError,
    ZeroPartitionError,
)
from .logcomplex import LogComplex
from .torus import Matching, MatchingType, Move, Site, TorusShape

__version__ = "0.1.0"
