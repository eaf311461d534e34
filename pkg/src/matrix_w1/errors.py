"""
Exception types raised by the matricial W1 library
"""

from typing import List, Optional


class MatrixW1Error(Exception):
    """Base class for all library errors"""


class StructureViolation(MatrixW1Error):
    """Input matrix is not Hermitian / skew-Hermitian / PSD as required"""


class ShapeMismatch(MatrixW1Error):
    """Dimensions of the arguments do not agree"""


class TraceMismatch(MatrixW1Error):
    """Balanced problem with marginals of unequal total mass"""


class KernelViolation(MatrixW1Error):
    """The L family has a kernel larger than the identity and the data sees it"""


class SingularConstraint(MatrixW1Error):
    """The affine projection could not be solved (stalled CG or incompatible rhs)"""


class NotConverged(MatrixW1Error):
    """An operation needs a converged certificate"""


class ParameterError(MatrixW1Error, ValueError):
    """Invalid scalar parameter (alpha, beta, grid size, ...)"""


class ProblemFileError(MatrixW1Error):
    """Problem file failed schema validation"""

    def __init__(self, message: str, paths: Optional[List[str]] = None):
        super().__init__(message)
        self.paths = paths or []
