"""Exception hierarchy.

Every error raised by the package derives from :class:`GoodsetError` so
callers (and the CLI) can catch a single base class.
"""


class GoodsetError(Exception):
    """Base class for all package errors."""


class SchemaError(GoodsetError):
    """A referenced column is missing or the column-role mapping is invalid."""


class DomainError(GoodsetError, ValueError):
    """A value lies outside its admissible range."""


class ConsistencyError(GoodsetError):
    """Rows violate the selective-label contract (e.g. funded row without outcome)."""


class SizeError(GoodsetError):
    """Too few rows for the requested operation."""


class ZeroVarianceError(GoodsetError):
    """A column is constant but standardization was requested."""


class PositivityError(GoodsetError):
    """A decision probability is zero for some row."""


class MissingLabelError(GoodsetError):
    """Outcomes are required but absent (selective data without pseudo-labels)."""


class EmptyGroupError(GoodsetError):
    """A conditioning event with nonzero coefficient has no (weighted) mass."""


class EmptySelectionError(GoodsetError):
    """No funded (d=1) rows are available."""


class SingularSystemError(GoodsetError):
    """Normal equations are singular; use a positive ridge."""


class UnidentifiedMeasureError(GoodsetError):
    """The requested metric is not identified from the available labels."""
