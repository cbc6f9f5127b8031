"""Exception hierarchy shared across the pipeline."""


class AbsaugError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(AbsaugError):
    """Structurally malformed input (XML syntax, broken JSON lines)."""


class DataError(AbsaugError):
    """Well-formed input with invalid content (bad labels, id mismatches)."""


class GatewayError(AbsaugError):
    """LLM backend failure: transport error, non-2xx response, bad mock script."""


class FitError(AbsaugError):
    """Topic model cannot be fitted on the given corpus."""
