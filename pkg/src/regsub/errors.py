"""Exception hierarchy shared by every module.

Each class carries the CLI exit code it maps to.
"""


class RegsubError(Exception):
    exit_code = 1


class MalformedInputError(RegsubError, ValueError):
    """Loops, duplicate edges, unparsable edge-list files."""

    exit_code = 4


class VertexRangeError(RegsubError, IndexError):
    exit_code = 4


class ContractError(RegsubError, ValueError):
    """A documented precondition of an estimate or switching was violated."""

    exit_code = 4


class ModelError(RegsubError, ValueError):
    """Parameters for which the random graph model is undefined (e.g. dn odd)."""

    exit_code = 4


class CapabilityError(RegsubError):
    """Request exceeds a hard budget (enumeration size, pattern size)."""

    exit_code = 3


class RetryLimitError(RegsubError, RuntimeError):
    exit_code = 3


class ConstructionError(RegsubError, RuntimeError):
    """No graph satisfying the conditioning constraints could be built."""

    exit_code = 3


class UndefinedProbabilityError(RegsubError, ZeroDivisionError):
    """The conditioning class is empty."""

    exit_code = 3
