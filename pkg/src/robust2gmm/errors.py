"""Exception hierarchy.

Everything derives from :class:`EstimationError` (a ``ValueError``) so the CLI
can map any validation failure to exit code 1 with a single ``except``.
"""


class EstimationError(ValueError):
    pass


class WeightOrderViolation(EstimationError):
    pass


class WeightSumViolation(EstimationError):
    pass


class NonPositiveDefiniteCovariance(EstimationError):
    pass


class DimensionMismatch(EstimationError):
    pass


class InvalidConfig(EstimationError):
    pass


class EmptyInput(EstimationError):
    pass


class FractionOutOfRange(EstimationError):
    pass


class TooFewSamples(EstimationError):
    pass


class DegenerateCovariance(EstimationError):
    pass


class SingularCovariance(EstimationError):
    pass


class NotSpherical(EstimationError):
    pass


class DegenerateComponent(EstimationError):
    pass


class NonFiniteLikelihood(EstimationError):
    pass


class ParseError(EstimationError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)
