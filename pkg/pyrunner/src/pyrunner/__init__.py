"""Sandboxed stdio worker for untrusted Python candidate functions."""

from .sandbox import format_exception, run_one, sanitize
from .worker import PROTOCOL_VERSION, serve

__version__ = "0.1.0"

__all__ = ["run_one", "sanitize", "format_exception", "serve", "PROTOCOL_VERSION", "__version__"]
