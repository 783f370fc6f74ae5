"""Exception types shared across the toolkit.

The CLI maps these onto process exit codes, so modules should raise the
most specific type that applies rather than a bare ValueError.
"""


class CitevalError(Exception):
    """Base class for all toolkit errors."""


class ValidationError(CitevalError):
    """Malformed or inconsistent input data (bad rows, duplicate ids, policy violations)."""


class DegenerateDataError(CitevalError):
    """Data is structurally valid but too empty or too uniform to compute on."""
