"""Exception types shared across the package.

Each exception carries an ``exit_code`` used by the command line harness:
2 for configuration problems, 3 for caps and overflows, 4 for invariant
violations.
"""


class WreathWalkError(Exception):
    exit_code = 1


class ConfigError(WreathWalkError, ValueError):
    exit_code = 2


class GroupMismatch(ConfigError):
    pass


class NoProjection(ConfigError):
    pass


class MetricUnavailable(ConfigError):
    pass


class ValidationFailed(ConfigError):
    def __init__(self, msg, index=None):
        super().__init__(msg)
        self.index = index


class CapError(WreathWalkError):
    exit_code = 3


class ClosureOverflow(CapError):
    pass


class MemoryCap(CapError):
    pass


class SupportOverflow(CapError):
    def __init__(self, msg, n_reached=None, mass=None):
        super().__init__(msg)
        self.n_reached = n_reached
        self.mass = mass


class CapExceeded(CapError):
    pass


class InfiniteClassSuspected(CapError):
    pass


class SupportEscapesWindow(CapError):
    pass


class SolverDiverged(WreathWalkError):
    exit_code = 3


class InvariantViolation(WreathWalkError):
    exit_code = 4

    def __init__(self, msg, step=None):
        super().__init__(msg)
        self.step = step


class BoundaryTouched(InvariantViolation):
    pass


class RecurrentRegime(ConfigError):
    """Simple random walk on Z^d with d <= 2 is recurrent; no unit flow of finite energy."""
