"""Engine exceptions with stable machine-readable codes.

Every error that can cross the CLI or stream boundary carries a ``code``
string; those codes are part of the wire contract and must not change.
"""

from __future__ import annotations


class EngineError(Exception):
    """Base class for all engine errors."""

    code = "ENGINE_ERROR"

    def __init__(self, message: str):
        super().__init__(message)
        self.message = message


class InvalidCriterionError(EngineError):
    code = "INVALID_CRITERION"


class EmbeddingMissError(EngineError):
    """A precomputed store has no vector for the requested text."""

    code = "EMBEDDING_MISS"


class EmbeddingUnavailableError(EngineError):
    """A remote embedding service failed; the caller decides whether to retry."""

    code = "EMBEDDING_UNAVAILABLE"


class ZeroNormError(EngineError):
    """Cosine similarity is undefined for zero-norm vectors."""

    code = "ZERO_NORM"


class EmptyPoolError(EngineError):
    code = "EMPTY_POOL"


class PoolValidationError(EngineError):
    """A sample pool failed load-time validation (defective sample, bad grid)."""

    code = "BAD_POOL"


class EmptyEvalSetError(EngineError):
    code = "EMPTY_EVAL_SET"


class MissingBackwardError(EngineError):
    code = "MISSING_BACKWARD"


class BadCriteriaCountError(EngineError):
    code = "BAD_CRITERIA_COUNT"


class ConfigError(EngineError):
    code = "BAD_CONFIG"


class BadRequestError(EngineError):
    """Malformed stream request; the stream stays up."""

    code = "BAD_REQUEST"
