"""Exception hierarchy shared by all dlorder modules."""


class DlorderError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(DlorderError):
    """Malformed program text. Carries the 1-based source position."""

    def __init__(self, message, line, col):
        super().__init__(f"{line}:{col}: {message}")
        self.line = line
        self.col = col


class ProgramError(DlorderError):
    """A structurally invalid program, or one outside an operation's domain."""


class ModelError(DlorderError):
    """Bad model spec, element outside the domain, or unbound constant."""


class SaturationLimitError(DlorderError):
    """The saturation insertion cap was exceeded before a fixpoint."""
