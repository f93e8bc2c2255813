"""Exception hierarchy.

Every error carries a stable machine-readable ``code`` and the CLI exit
status it maps to.
"""


class TruncboundError(Exception):
    code = "ERROR"
    exit_code = 1

    def __init__(self, message="", **details):
        super().__init__(message)
        self.details = details

    def to_dict(self):
        out = {"error": self.code, "message": str(self)}
        out.update({k: v for k, v in self.details.items() if _jsonable(v)})
        return out


def _jsonable(v):
    return isinstance(v, (str, int, float, bool, type(None), list, tuple))


class ConfigError(TruncboundError):
    code = "CONFIG_INVALID"
    exit_code = 2


class ConfigSNotInA(ConfigError):
    code = "CONFIG_S_NOT_IN_A"


class ValidationError(TruncboundError):
    code = "VALIDATION_FAILED"
    exit_code = 2


class NegativeEntry(ValidationError):
    code = "NEGATIVE_ENTRY"


class RowSumExceedsOne(ValidationError):
    code = "ROW_SUM_EXCEEDS_ONE"


class RowSumNotOne(ValidationError):
    code = "ROW_SUM_NOT_ONE"


class DimensionMismatch(ValidationError):
    code = "DIMENSION_MISMATCH"


class IndexOutOfRange(ValidationError):
    code = "INDEX_OUT_OF_RANGE"


class NegativeReward(ValidationError):
    code = "NEGATIVE_REWARD"


class NotStationary(ValidationError):
    code = "NOT_STATIONARY"


class NotDominating(ValidationError):
    code = "NOT_DOMINATING"


class InvalidState(ValidationError):
    code = "INVALID_STATE"


class InvalidModel(ConfigError):
    code = "CONFIG_INVALID_MODEL"


class Unstable(ConfigError):
    code = "MODEL_UNSTABLE"


class Unavailable(TruncboundError):
    code = "CLOSED_FORM_UNAVAILABLE"
    exit_code = 2


class ParseError(TruncboundError):
    code = "PARSE_ERROR"
    exit_code = 2

    def __init__(self, message="", line=None, **details):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message, line=line, **details)
        self.line = line


class NumericalError(TruncboundError):
    code = "NUMERIC_ERROR"
    exit_code = 3


class SingularInterior(NumericalError):
    """The boundary layer traps mass forever: ``I - P22`` is singular."""

    code = "NUMERIC_SINGULAR_INTERIOR"


class FundamentalDiverges(NumericalError):
    """``sum_n G^n`` is infinite from some state of the inner set."""

    code = "NUMERIC_FUNDAMENTAL_DIVERGES"


class NotConverged(NumericalError):
    code = "NUMERIC_NOT_CONVERGED"


class ResidualTooLarge(NumericalError):
    code = "NUMERIC_RESIDUAL"


class NotUniqueStationary(NumericalError):
    code = "NUMERIC_NOT_UNIQUE_STATIONARY"


class ZeroMass(NumericalError):
    code = "NUMERIC_ZERO_MASS"


class ZeroRow(NumericalError):
    code = "NUMERIC_ZERO_ROW"


class BudgetExhausted(TruncboundError):
    """Raised by the adaptive driver; ``report`` holds the trajectory so far."""

    code = "BUDGET_EXHAUSTED"
    exit_code = 5

    def __init__(self, message="", report=None):
        super().__init__(message)
        self.report = report


class PropertyFailure(TruncboundError):
    code = "PROPERTY_FAILURE"
    exit_code = 4
