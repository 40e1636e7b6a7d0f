"""
Exceptions and warnings raised by the solvers.

Every error carries a short machine-readable ``code`` so the command
line can emit it as JSON and choose an exit status.
"""
from django.core.exceptions import ImproperlyConfigured


class StochflowError(Exception):
    code = "error"

    def __init__(self, message, **detail):
        super(StochflowError, self).__init__(message)
        self.message = message
        self.detail = detail

    def as_dict(self):
        return {"code": self.code, "message": self.message,
                "detail": self.detail}


class ConfigurationError(StochflowError, ImproperlyConfigured):
    code = "configuration"


class DimensionError(StochflowError, ValueError):
    code = "dimension"


class UnsupportedDomainError(StochflowError, ValueError):
    code = "unsupported-domain"


class UnsupportedDriftError(StochflowError, ValueError):
    code = "unsupported-drift"


class NumericalError(StochflowError, ArithmeticError):
    code = "numerical"


class InvalidPathsError(NumericalError):
    code = "invalid-paths"


class StepSizeError(NumericalError):
    code = "step-size"


class ResolutionError(NumericalError):
    code = "resolution"


class IndeterminateRateError(NumericalError):
    code = "indeterminate-rate"


class QuadratureWarning(UserWarning):
    pass


class ResolutionWarning(UserWarning):
    pass
