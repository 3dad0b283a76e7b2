class SubweylError(Exception):
    pass


class DomainError(SubweylError, ValueError):
    """Argument outside the domain of a function (log/sqrt of a non-positive value, h <= 1, ...)."""


class PrecisionExhausted(SubweylError, ArithmeticError):
    """An enclosure is too wide to decide a sign, a quotient or an integer part."""


class InvariantViolation(SubweylError, ValueError):
    pass


class PreconditionFailed(SubweylError, ValueError):
    pass


class AdmissibilityError(SubweylError, ValueError):
    """A parameter set violates one of the admissibility predicates.

    ``predicate`` holds the human-readable name of the first violated condition.
    """

    def __init__(self, predicate, detail=""):
        self.predicate = predicate
        msg = f"inadmissible parameters: {predicate}"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)


class NoAdmissiblePoint(SubweylError, RuntimeError):
    def __init__(self, message, interval=None):
        self.interval = interval
        super().__init__(message)


class NoCrossover(SubweylError, ValueError):
    pass


class SchemeValidationError(SubweylError, ValueError):
    pass


class SizeExceeded(SubweylError, ValueError):
    pass


class EnvelopeMissing(SubweylError, KeyError):
    pass


class MonotonicityViolation(SubweylError, ValueError):
    pass


class ConvergenceFailure(SubweylError, RuntimeError):
    pass
