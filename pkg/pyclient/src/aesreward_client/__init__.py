"""Thin client for the aesreward engine's stream protocol."""

from .client import (
    DEFAULT_ENGINE_CMD,
    EngineClientError,
    EngineHandle,
    StartupError,
    TransportError,
    start,
)

__version__ = "0.1.0"
