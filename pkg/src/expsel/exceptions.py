"""Exception hierarchy shared across the package.

Two broad families matter for the CLI exit-code contract: ``DataError``
(bad or unusable input, exit code 2) and ``ComputationError`` (a requested
computation cannot be carried out, exit code 3).
"""


class ExpselError(Exception):
    """Base class for all package-specific errors."""


class DataError(ExpselError):
    """Input data is missing, malformed or unusable."""


class ComputationError(ExpselError):
    """A computation cannot be carried out on otherwise valid input."""


class NonFinite(DataError):
    """NaN or infinite values where finite reals are required."""


class ShapeMismatch(DataError):
    """Array dimensions are inconsistent with the requested operation."""


class ParseError(DataError):
    """A CSV cell could not be parsed as a number.

    Carries 1-based ``row`` and ``col`` positions of the offending cell.
    """

    def __init__(self, row, col, message):
        super().__init__(f"row {row}, column {col}: {message}")
        self.row = row
        self.col = col


class MissingColumn(DataError):
    """A named or indexed column is absent from the input file."""


class EmptyData(DataError):
    """The input file holds no usable data rows."""


class RankDeficient(ComputationError):
    """The design matrix of a submodel is numerically singular."""


class DegenerateSplit(ComputationError):
    """A train/validation split would leave one side empty."""


class TooManySubsets(ComputationError):
    """Exhaustive enumeration was requested beyond the configured cap."""


class AllSubsetsFailed(ComputationError):
    """Every candidate submodel failed to fit."""


class DegenerateResiduals(ComputationError):
    """Residuals carry no sign information (all exactly zero)."""


class AllReplicationsFailed(ComputationError):
    """Every Monte Carlo replication of an experiment failed."""
