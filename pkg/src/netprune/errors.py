"""Exception hierarchy shared by the library and the command line."""


class NetPruneError(Exception):
    """Base class for every error raised by this package."""

    exit_code = 1


class InputError(NetPruneError, ValueError):
    """Malformed or out-of-range input data or parameters."""

    exit_code = 3


class EmptyGridError(InputError):
    """A grid was requested over an empty point list."""


class UndefinedDistanceError(InputError):
    """A nearest-neighbor distance was requested where none exists."""


class InfeasibleError(NetPruneError):
    """The problem parameters admit no solution (or the context ran out)."""

    exit_code = 4


class ContractError(NetPruneError, RuntimeError):
    """An internal contract was broken, e.g. an inconsistent decider answer."""

    exit_code = 5


class RetrySignal(ContractError):
    """A randomized subroutine hit an unlikely bad event and asks for a re-run."""
