#
# Error hierarchy shared by all components.
#


class StrewError(Exception):
    """Base class of all errors raised by the engine"""


class SortError(StrewError):
    """Ill-sorted term or unsatisfiable operator application"""


class ParseError(StrewError):
    """Syntax or static error in the surface language"""

    def __init__(self, message, line=None, column=None):
        if line is not None:
            message = f'{line}:{column}: {message}'
        super().__init__(message)
        self.line = line
        self.column = column


class NonTerminationError(StrewError):
    """Equational normalization exceeded its step budget"""


class SearchLimitError(StrewError):
    """Strategy search exceeded its state or depth budget"""


class InstantiationError(StrewError):
    """Rule applied with unbound right-hand side variables"""


class TransformError(StrewError):
    """A module transformation cannot be applied"""


class PropositionError(StrewError):
    """An atomic proposition did not reduce to a Boolean value"""


class CheckError(StrewError):
    """Model-checking request that cannot be served"""
