"""Exception types shared across the library."""


class ImvermaError(Exception):
    """Base class for all domain errors raised by this library."""


class CartanMatrixError(ImvermaError):
    pass


class ContextMismatchError(ImvermaError):
    """Two operands belong to different algebra contexts."""


class NotARootError(ImvermaError):
    pass


class AutomorphismError(ImvermaError):
    pass


class WindowOverflowError(ImvermaError):
    """An exact result does not fit the requested truncation window.

    required: the smallest cap that would have fit.
    """

    def __init__(self, message, required=None):
        super().__init__(message)
        self.required = required


class ModuleDataError(ImvermaError):
    """Invalid explicit-module data (bad tables, non-torsion input, ...)."""


class AuditError(ImvermaError):
    """A decomposition dimension audit failed; never silently accepted."""
