"""Exception hierarchy shared by every module.

ValidationError subclasses ValueError so plain `except ValueError` callers
keep working; the CLI maps ValidationError -> exit 1, CheckFailure -> exit 2.
"""

from __future__ import annotations


class DySPNError(Exception):
    """Base class for all library errors."""


class ValidationError(DySPNError, ValueError):
    """Shape, range or precondition violation on an input."""


class FormatError(ValidationError):
    """Malformed tensor, PGM or config file."""


class CheckFailure(DySPNError):
    """An oracle or gradient check exceeded its tolerance."""
