"""Exception hierarchy.

Every error raised on purpose by the package derives from
:class:`QuantumLikeError`, which is itself a ``ValueError`` so callers that
only care about "bad input" can catch the builtin.
"""


class QuantumLikeError(ValueError):
    """Base class for all package errors."""


class NonFiniteError(QuantumLikeError):
    pass


class DegenerateStateError(QuantumLikeError):
    pass


class DimensionError(QuantumLikeError):
    pass


class NotHermitianError(QuantumLikeError):
    pass


class DensityValidationError(QuantumLikeError):
    """A matrix failed one or more density-operator conditions.

    ``violations`` holds one ``(condition, value)`` pair per failed check,
    where condition is ``"hermiticity"``, ``"positivity"`` or ``"trace"``.
    """

    def __init__(self, message, violations=()):
        super().__init__(message)
        self.violations = list(violations)


class HermiticityViolation(DensityValidationError, NotHermitianError):
    pass


class PositivityViolation(DensityValidationError):
    pass


class TraceViolation(DensityValidationError):
    pass


class NotProjectorError(QuantumLikeError):
    pass


class NotUnitaryError(QuantumLikeError):
    pass


class CompletenessError(QuantumLikeError):
    def __init__(self, message, deviation=float("nan")):
        super().__init__(message)
        self.deviation = deviation


class UnknownOutcomeError(QuantumLikeError, KeyError):
    def __str__(self):
        return ValueError.__str__(self)


class NullEventError(QuantumLikeError):
    pass


class IntegrationError(QuantumLikeError):
    pass


class StationaryStateError(QuantumLikeError):
    pass


class DecoherenceError(QuantumLikeError):
    pass


class ScenarioError(QuantumLikeError):
    """Invalid scenario document; ``problems`` lists ``(path, message)``."""

    def __init__(self, problems):
        self.problems = list(problems)
        lines = [f"{path or '<root>'}: {msg}" for path, msg in self.problems]
        super().__init__("invalid scenario:\n  " + "\n  ".join(lines))
