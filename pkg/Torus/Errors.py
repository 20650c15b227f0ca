"""
Exception hierarchy. Every error carries a machine-readable code and the
exit status the command line reports for it.
"""

EXIT_VALIDATION = 2
EXIT_SOLVER = 3
EXIT_CHECK = 4


class CirclePatternError(Exception):
    code = "ERROR"
    exit_code = 1

    def __init__(self, message, **details):
        super().__init__(message)
        self.details = details


# ---------------------------------------------------------------------- #
#  VALIDATION
# ---------------------------------------------------------------------- #

class ValidationError(CirclePatternError):
    code = "INVALID_INPUT"
    exit_code = EXIT_VALIDATION


class InvalidMesh(ValidationError):
    code = "INVALID_MESH"


class InvalidAngles(ValidationError):
    code = "INVALID_ANGLES"


class InvalidArgument(ValidationError):
    code = "INVALID_ARGUMENT"


class NotInW(ValidationError):
    code = "NOT_IN_W"


# ---------------------------------------------------------------------- #
#  SOLVER / GEOMETRY
# ---------------------------------------------------------------------- #

class SolverError(CirclePatternError):
    code = "SOLVER_FAILURE"
    exit_code = EXIT_SOLVER


class NonConvergence(SolverError):
    code = "NON_CONVERGENCE"


class InconsistentZeroAngle(SolverError):
    code = "INCONSISTENT_ZERO_ANGLE"


class DegenerateLayout(SolverError):
    code = "DEGENERATE_LAYOUT"


class DegenerateCrossRatio(SolverError):
    code = "DEGENERATE_CROSS_RATIO"


class SingularLaplacian(SolverError):
    code = "SINGULAR_LAPLACIAN"


class UnwrapFailure(SolverError):
    code = "UNWRAP_FAILURE"


# ---------------------------------------------------------------------- #
#  NUMERICAL CHECKS
# ---------------------------------------------------------------------- #

class NumericalCheckFailure(CirclePatternError):
    code = "NUMERICAL_CHECK_FAILURE"
    exit_code = EXIT_CHECK


class BranchError(NumericalCheckFailure):
    code = "BRANCH_ERROR"


class EuclideanDegenerate(NumericalCheckFailure):
    code = "EUCLIDEAN_DEGENERATE"


class EuclideanPoint(NumericalCheckFailure):
    code = "EUCLIDEAN_POINT"
