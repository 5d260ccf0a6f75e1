class RasScopfError(Exception):
    """Base class for every error raised by the toolkit."""


class CaseFormatError(RasScopfError):
    """A case file could not be parsed.

    Attributes:
        path (str): The file being parsed.
        line_no (int): 1-based line number of the offending record (0 if unknown).
        field (str): Name of the field that failed to parse.
    """

    def __init__(self, path, line_no, field, message):
        self.path = str(path)
        self.line_no = line_no
        self.field = field
        super().__init__(f"{self.path}:{line_no}: field '{field}': {message}")


class NetworkValidationError(RasScopfError):
    """A Network violates one of its invariants."""


class ModelError(RasScopfError):
    """A MipModel is malformed (duplicate names, unknown variables, non-convex objective)."""


class ImbalanceError(RasScopfError):
    """Injections handed to a DC power flow do not sum to zero over the island."""


class SingularNetworkError(RasScopfError):
    """The reduced susceptance matrix of an island could not be factorized."""


class ConsistencyError(RasScopfError):
    """An extracted optimizer solution disagrees with a DC power flow re-solve."""


class CascadeError(RasScopfError):
    """Illegal transition requested from the cascading failure simulator."""


class ConfigError(RasScopfError):
    """Configuration file or option values are invalid."""


class SolverFailedError(RasScopfError):
    """A solve that had to succeed ended with a non-optimal status."""

    def __init__(self, what, status):
        self.status = status
        super().__init__(f"{what} ended with status {getattr(status, 'value', status)}")
