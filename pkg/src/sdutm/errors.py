"""Error types with machine-readable codes."""


class SdutmError(Exception):
    """Base error carrying a short machine-readable ``code``."""

    code = "error"

    def __init__(self, message, code=None, **details):
        super().__init__(message)
        if code is not None:
            self.code = code
        self.details = details

    def to_dict(self):
        out = {"code": self.code, "message": str(self)}
        out.update({k: v for k, v in self.details.items()})
        return out


class InvalidArgument(SdutmError):
    code = "invalid-argument"


class UnsupportedDiscretization(SdutmError):
    code = "unsupported-discretization"


class InvalidProblem(SdutmError):
    code = "invalid-problem"


class AccuracyFailure(SdutmError):
    code = "accuracy-failure"


class NumericalFailure(SdutmError):
    code = "numerical-failure"


class ResourceLimit(SdutmError):
    code = "resource-limit"


class UnsupportedOracle(SdutmError):
    code = "unsupported-oracle"


class ConfigError(SdutmError):
    code = "config-error"
