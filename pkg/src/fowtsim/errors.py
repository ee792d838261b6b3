"""Exception hierarchy shared by the simulator modules."""


class FowtError(Exception):
    """Base class for all simulator errors."""


class SingularAttitude(FowtError):
    """Platform pitch is too close to +/-90 deg for the Euler-rate map."""


class DegenerateAttitude(FowtError):
    """Platform is tilted so far that wetted lengths are undefined."""


class InvalidParameters(FowtError):
    pass


class NotPositiveDefinite(FowtError):
    pass


class OutOfRange(FowtError):
    """Query outside the coverage of a tabulated series."""


class RoleMismatch(FowtError):
    pass


class SimulationDiverged(FowtError):
    pass


class NoConvergence(FowtError):
    def __init__(self, message, residual=None, failing_rows=()):
        super().__init__(message)
        self.residual = residual
        self.failing_rows = tuple(failing_rows)


class EmptySeries(FowtError):
    pass


class ZeroBaseline(FowtError):
    pass


class ScenarioMismatch(FowtError):
    pass


class ConfigError(FowtError):
    pass


class ParseError(ConfigError):
    pass


class UnknownKey(ConfigError):
    def __init__(self, key, where=""):
        self.key = key
        loc = f" in '{where}'" if where else ""
        super().__init__(f"unknown key '{key}'{loc}")


class MissingFile(ConfigError):
    pass
