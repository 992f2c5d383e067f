"""Error codes and exceptions raised by the web analysis modules.

Every failure carries a ``WebErrorCode``. The CLI maps the code family to a
process exit code, so callers never need to inspect exception classes.
"""

from enum import Enum
from typing import Any, Dict, Optional


class WebErrorCode(Enum):
    """Error codes for web analysis operations."""
    # Parse errors
    SYNTAX_ERROR = 10
    UNKNOWN_VARIABLE = 11
    NON_INTEGER_EXPONENT = 12
    ARITY_ERROR = 13

    # Degenerate geometry
    SINGULAR_EVALUATION = 20
    SINGULAR_MATRIX = 21
    NOT_A_WEB_AT_POINT = 22
    DISTRIBUTION_UNDEFINED = 23
    DEGENERATE_FRAME_CHANGE = 24
    PRECONDITION_NOT_MET = 25

    # Internal consistency of the structure equations
    CHERN_INCONSISTENCY = 30
    CURVATURE_PURE_PART_NONZERO = 31

    # Usage
    UNKNOWN_SCENARIO = 40
    USAGE_ERROR = 41
    CONFIG_ERROR = 42


_EXIT_CODES = {
    WebErrorCode.SYNTAX_ERROR: 3,
    WebErrorCode.UNKNOWN_VARIABLE: 3,
    WebErrorCode.NON_INTEGER_EXPONENT: 3,
    WebErrorCode.ARITY_ERROR: 3,
    WebErrorCode.SINGULAR_EVALUATION: 2,
    WebErrorCode.SINGULAR_MATRIX: 2,
    WebErrorCode.NOT_A_WEB_AT_POINT: 2,
    WebErrorCode.DISTRIBUTION_UNDEFINED: 2,
    WebErrorCode.DEGENERATE_FRAME_CHANGE: 2,
    WebErrorCode.PRECONDITION_NOT_MET: 2,
    WebErrorCode.CHERN_INCONSISTENCY: 1,
    WebErrorCode.CURVATURE_PURE_PART_NONZERO: 1,
    WebErrorCode.UNKNOWN_SCENARIO: 64,
    WebErrorCode.USAGE_ERROR: 64,
    WebErrorCode.CONFIG_ERROR: 64,
}


def exit_code_for(code: WebErrorCode) -> int:
    """Get the CLI exit code for an error code.

    Args:
        code: Error code

    Returns:
        Process exit code
    """
    return _EXIT_CODES.get(code, 1)


class WebGeometryError(Exception):
    """Exception raised by web analysis operations.

    Attributes:
        code: Error code from WebErrorCode
        message: Human-readable error message
        details: Optional additional error details
    """

    code: WebErrorCode = WebErrorCode.USAGE_ERROR

    def __init__(
        self,
        message: str,
        details: Optional[Dict[str, Any]] = None,
        code: Optional[WebErrorCode] = None
    ):
        if code is not None:
            self.code = code
        self.message = message
        self.details = details or {}
        super().__init__(f"[{self.code.name}] {message}")

    @property
    def exit_code(self) -> int:
        """Exit code the CLI uses for this error."""
        return exit_code_for(self.code)


class ExprSyntaxError(WebGeometryError):
    """Malformed definition text; details carry line, column and expected token."""
    code = WebErrorCode.SYNTAX_ERROR


class UnknownVariableError(WebGeometryError):
    code = WebErrorCode.UNKNOWN_VARIABLE


class NonIntegerExponentError(WebGeometryError):
    code = WebErrorCode.NON_INTEGER_EXPONENT


class ArityError(WebGeometryError):
    code = WebErrorCode.ARITY_ERROR


class SingularEvaluationError(WebGeometryError):
    """Division by ~0 or log of a non-positive value during jet evaluation."""
    code = WebErrorCode.SINGULAR_EVALUATION


class SingularMatrixError(WebGeometryError):
    code = WebErrorCode.SINGULAR_MATRIX


class NotAWebAtPointError(WebGeometryError):
    """The three foliations are not in general position at the point."""
    code = WebErrorCode.NOT_A_WEB_AT_POINT


class ChernInconsistencyError(WebGeometryError):
    code = WebErrorCode.CHERN_INCONSISTENCY


class CurvaturePurePartNonzeroError(WebGeometryError):
    code = WebErrorCode.CURVATURE_PURE_PART_NONZERO


class DistributionUndefinedError(WebGeometryError):
    """The torsion covector vanishes, so the a-distribution does not exist."""
    code = WebErrorCode.DISTRIBUTION_UNDEFINED


class DegenerateFrameChangeError(WebGeometryError):
    code = WebErrorCode.DEGENERATE_FRAME_CHANGE


class PreconditionNotMetError(WebGeometryError):
    code = WebErrorCode.PRECONDITION_NOT_MET


class UnknownScenarioError(WebGeometryError):
    code = WebErrorCode.UNKNOWN_SCENARIO


class UsageError(WebGeometryError):
    code = WebErrorCode.USAGE_ERROR


class ConfigError(WebGeometryError):
    code = WebErrorCode.CONFIG_ERROR
