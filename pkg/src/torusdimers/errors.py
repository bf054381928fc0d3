"""Exception types raised across the package."""

import numpy as np


class ShapeTooLargeError(ValueError):
    """Exhaustive enumeration requested on a torus above the site cap."""


class SingularMatrixError(np.linalg.LinAlgError):
    """A Kasteleyn operator could not be inverted."""


class PoleError(ZeroDivisionError):
    """A Fourier denominator or kernel factor vanished.

    ``mode`` names the offending Fourier index when one exists.
    """

    def __init__(self, message, mode=None):
        super().__init__(message)
        self.mode = mode


class TriangleInequalityError(ValueError):
    """Constant weights violate alpha <= beta+gamma and its permutations."""


class DomainError(ValueError):
    """Argument outside the domain on which a limit formula is valid."""


class QuadratureError(RuntimeError):
    """Adaptive quadrature did not reach the requested tolerance."""


class ZeroPartitionError(ZeroDivisionError):
    """Normalisation by a vanishing partition function."""


class InconsistentConfigurationError(ValueError):
    """Bead positions do not form a valid configuration."""


class CoincidentSitesError(ValueError):
    """Two continuum query points landed on the same lattice site."""


class IllConditionedWarning(RuntimeWarning):
    """Condition-number estimate of an inverted operator exceeds the threshold."""
