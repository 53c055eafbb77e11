"""Exception hierarchy shared by every arena module.

Errors carry a stable ``code`` so the HTTP layer and the CLI can map them
to wire-level error payloads without string matching on messages.
"""

from __future__ import annotations


class ArenaError(Exception):
    """Base class for all arena errors."""

    code = "error"


class InvalidArgumentError(ArenaError):
    code = "invalid_argument"


class ConfigurationError(ArenaError):
    code = "configuration_error"


class RegistryError(ArenaError):
    """A referenced CRS is not present in the registry."""

    code = "registry_error"


class StateError(ArenaError):
    """Operation attempted in a session phase that does not allow it."""

    code = "state_error"


class ConversationClosedError(StateError):
    code = "conversation_closed"


class AlreadyVotedError(StateError):
    code = "already_voted"


class MinTurnsError(StateError):
    """Conversation ended before reaching the configured user-turn minimum."""

    code = "min_turns"

    def __init__(self, required: int, actual: int):
        super().__init__(
            f"at least {required} user turns required before ending, got {actual}"
        )
        self.required = required
        self.actual = actual


class GatewayError(ArenaError):
    """Base for failures while talking to a CRS backend."""

    code = "gateway_error"


class BackendTimeoutError(GatewayError):
    code = "timeout"


class BackendUnavailableError(GatewayError):
    code = "backend_unavailable"


class ProtocolError(GatewayError):
    """Backend answered, but not in the expected wire format."""

    code = "protocol_error"


class UnknownIdError(ArenaError):
    """No session or battle with the given identifier."""

    code = "unknown_id"


class StorageError(ArenaError):
    code = "storage_error"


class DegenerateInputError(InvalidArgumentError):
    """Statistic undefined for the given input (e.g. zero variance)."""

    code = "degenerate_input"


class FormatError(ArenaError):
    """A data file failed to parse; carries the offending line number."""

    code = "format_error"

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
