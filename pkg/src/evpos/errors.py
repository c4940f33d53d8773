"""Exception types shared by all modules."""


class NumericalFailure(RuntimeError):
    """A numerical kernel could not deliver a result within tolerance.

    Parameters
    ----------
    message : str
        Human readable description.
    **diagnostics
        Values describing the failure (residuals, scaling exponents,
        offending indices). Stored on ``self.diagnostics``.
    """

    def __init__(self, message, **diagnostics):
        super().__init__(message)
        self.diagnostics = diagnostics

    def to_dict(self):
        return {"error": str(self), "diagnostics": dict(self.diagnostics)}


class ModelError(ValueError):
    """Invalid model name or parameters."""
