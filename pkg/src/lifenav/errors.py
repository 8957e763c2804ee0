"""Shared exception types."""


class LifenavError(Exception):
    """Base class for package errors."""


class ValidationError(LifenavError):
    """An input value violates a documented invariant or precondition."""


class ParseError(LifenavError):
    """A file could not be parsed; message names the offending field/line."""


class GenerationError(LifenavError):
    """Procedural generation failed (e.g. connectivity retries exhausted)."""


class ExplorationExhausted(LifenavError):
    """No frontier remains to explore."""
