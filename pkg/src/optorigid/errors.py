"""Exception types shared by the library and the command line."""


class ConfigError(ValueError):
    """Invalid or inconsistent parameters (command-line exit status 2)."""


class DomainError(ValueError):
    """Operation evaluated outside the region where it is defined."""


class NoSolutionError(ValueError):
    """A design target cannot be met."""


class ConvergenceError(RuntimeError):
    """Numerical procedure failed to converge (command-line exit status 3)."""
