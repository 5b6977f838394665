"""Exception hierarchy shared by all pickline modules."""
from __future__ import annotations


class PicklineError(Exception):
    """Base class for all errors raised by this package."""


class InvalidInputError(PicklineError):
    """An argument violates a function precondition."""


class RecordValidationError(PicklineError):
    """A coil record failed validation; carries one entry per violated field."""

    def __init__(self, violations):
        self.violations = list(violations)
        lines = "; ".join(str(v) for v in self.violations)
        super().__init__(f"record rejected: {lines}")


class SchemaError(PicklineError):
    """A CSV file does not match the expected column schema."""


class SaturatedBathError(PicklineError):
    """Every tank term of the dissolution rate is zero (iron-saturated baths)."""


class GenerationBudgetError(PicklineError):
    """Dataset generation exhausted its sampling budget."""

    def __init__(self, message, achieved_fraction, draws):
        self.achieved_fraction = achieved_fraction
        self.draws = draws
        super().__init__(message)


class InvalidSplitError(InvalidInputError):
    """A candidate split leaves one side empty or lies outside the feature range."""


class SplitSizeError(PicklineError):
    """A stratified split would leave a class with fewer than two records on one side."""


class NotFittedError(PicklineError):
    """A scaler or model is used before it has been fitted."""


class ModelFormatError(PicklineError):
    """A serialized model file cannot be parsed."""


class ConfigurationError(PicklineError):
    """Configuration values or model/feature combinations are inconsistent."""
