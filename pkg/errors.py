"""
LSBuck - Error Types

Every failure raised by the solver library derives from LSBuckError so the
CLI can map it to an exit code:
- ConfigValidationError -> exit code 2
- any other LSBuckError -> exit code 3
"""

from typing import List, Tuple


class LSBuckError(Exception):
    """Base class for all solver errors"""


# Geometry
class DomainError(LSBuckError):
    """Parameter value outside the knot range"""


class NumericalDegeneracyError(LSBuckError):
    """Zero-length knot span or similar degenerate numerical input"""


class InvertedElementError(LSBuckError):
    """Non-positive Jacobian determinant of the geometric map"""


class GeometryError(LSBuckError):
    """Point cannot be located on the plate patch"""


# Materials
class MaterialInstabilityError(LSBuckError):
    """Ply constants violate 1 - nu_LT * nu_TL > 0"""


class LaminateError(LSBuckError):
    """Invalid laminate stack"""


# Level set / quadrature
class ClassificationInconsistencyError(LSBuckError):
    """Element tagged enriched but no interface crossing was found"""


class QuadratureError(LSBuckError):
    """Invalid triangulation or quadrature input"""


# Stiffeners
class SizingError(LSBuckError):
    """No positive stiffener section satisfies the gamma/delta ratios"""


class StiffenerConfigurationError(LSBuckError):
    """Stiffener path is degenerate or runs through a cutout"""


# Assembly and solvers
class AssemblyError(LSBuckError):
    """Dimension mismatch during global assembly"""


class BoundaryConditionError(LSBuckError):
    """Constraint references a DOF that does not exist"""


class SolverError(LSBuckError):
    """Linear or eigen solver failure"""


class ConfigValidationError(LSBuckError):
    """
    Model description failed validation.

    Carries every problem found, not just the first one.
    """

    def __init__(self, problems: List[Tuple[str, str]]):
        self.problems = list(problems)
        lines = [f"{path}: {message}" for path, message in self.problems]
        super().__init__(
            f"{len(self.problems)} validation error(s):\n  " + "\n  ".join(lines)
        )


EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_ANALYSIS_FAILURE = 3


def exit_code(exc: BaseException) -> int:
    """CLI exit code for an exception raised during a run"""
    if isinstance(exc, ConfigValidationError):
        return EXIT_VALIDATION
    if isinstance(exc, LSBuckError):
        return EXIT_ANALYSIS_FAILURE
    raise exc
