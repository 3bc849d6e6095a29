"""
Routing Errors - 錯誤類型

Every failure raised by the library derives from RoutingError so the CLI and
the MCP tools can catch one type and report it.
"""


class RoutingError(Exception):
    """Base class for all hyperroute failures."""


class ParameterError(RoutingError, ValueError):
    """Inputs violate an operation's preconditions."""


class DomainError(ParameterError):
    """A closed-form bound was evaluated where it is vacuous (beta >= 1)."""


class DisconnectedGraphError(ParameterError):
    """Shortest-path routing was requested on a disconnected host."""


class UnknownExperimentError(ParameterError):
    """The harness was asked for an experiment id it does not know."""


class ConstructionError(RoutingError, RuntimeError):
    """A randomized construction exhausted its retry budget."""

    def __init__(self, message: str, attempts: int = 0):
        super().__init__(message)
        self.attempts = attempts


class ResourceError(RoutingError, MemoryError):
    """A dense computation would exceed the configured size budget."""


class ConfigError(RoutingError, ValueError):
    """A configuration file could not be parsed."""
