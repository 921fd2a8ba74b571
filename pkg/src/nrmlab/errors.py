"""Exception types with stable machine-readable codes.

Every error raised by this package carries a ``code`` string (kebab-case)
that callers and the CLI can match on without parsing messages.
"""


class NrmlabError(Exception):
    """Base class; ``code`` identifies the first violated contract."""

    def __init__(self, code: str, message: str):
        super().__init__(f"{code}: {message}")
        self.code = code


class InstanceError(NrmlabError):
    """Invalid problem instance (validation failure)."""


class WindowError(NrmlabError):
    """Bad period window, e.g. t1 > t2 or out of range."""


class LpError(NrmlabError):
    """LP solver failure or bad solver input."""


class PolicyError(NrmlabError):
    """Policy cannot be configured or run on the given inputs."""


class ConfigError(NrmlabError):
    """Experiment configuration rejected (fail-closed parsing)."""
