"""Error types shared across the package.

Every raised error carries a stable machine-readable ``code`` so callers
(CLI, HTTP layer, tests) can branch without string-matching messages.
"""

from __future__ import annotations


class AddflowError(Exception):
    """Base class for all package errors."""

    code = "ERROR"

    def __init__(self, message: str, *, code: str | None = None):
        super().__init__(message)
        if code is not None:
            self.code = code

    def __str__(self) -> str:  # pragma: no cover - cosmetic
        base = super().__str__()
        return f"{self.code}: {base}" if self.code not in base else base


class ParseError(AddflowError):
    """Hard parse failure for artifact text.

    Codes: DUPLICATE_DRIVER_ID, MALFORMED_PRIORITY_VALUE,
    NONMONOTONIC_ITERATIONS, EMPTY_GOAL.
    """

    code = "PARSE_ERROR"


class PromptError(AddflowError):
    """Codes: MISSING_BINDING, BUDGET_TOO_SMALL, UNKNOWN_TEMPLATE."""

    code = "PROMPT_ERROR"


class GatewayError(AddflowError):
    """Codes: TRANSPORT_ERROR, REPLAY_MISS, REPLAY_ORDER."""

    code = "GATEWAY_ERROR"


class EngineError(AddflowError):
    """Codes: NO_DRIVERS_DOCUMENT, AWAITING_GATE, NOT_AWAITING_GATE,
    NO_EDITS_FOUND, MALFORMED_STEP_OUTPUT, FINISH_NOT_LEGAL_HERE,
    SESSION_FINISHED, NO_PROMPT_PENDING, REJECT_REQUIRES_COMMENT,
    PLAN_REQUIRED.
    """

    code = "ENGINE_ERROR"


class StoreError(AddflowError):
    """Codes: ILLEGAL_PATH, UNKNOWN_STAGING, UNKNOWN_SNAPSHOT."""

    code = "STORE_ERROR"


class ConfigError(AddflowError):
    code = "CONFIG_ERROR"
