"""Exception and warning types.

Domain errors derive from :class:`TableError`; malformed input files raise
:class:`ParseError`. The command-line front end maps the former to exit
status 1 and the latter to exit status 2.
"""

from __future__ import annotations


class TableError(Exception):
    """Base class for domain errors."""


class ParseError(ValueError):
    """Input could not be parsed into the expected structure."""


class DimensionMismatch(TableError):
    pass


class EntryOutOfRange(TableError):
    def __init__(self, i: int, j: int, value):
        self.i, self.j, self.value = i, j, value
        super().__init__(f"entry ({i}, {j}) = {value} is outside [0, 1]")


class ColumnNotNormalized(TableError):
    def __init__(self, k: str, j: str, total):
        self.k, self.j, self.total = k, j, total
        super().__init__(
            f"results of intervention {k!r} sum to {total} for preparation {j!r}, not 1"
        )


class EmptyCell(TableError):
    def __init__(self, k: str, j: str):
        self.k, self.j = k, j
        super().__init__(f"no trials recorded for intervention {k!r} on preparation {j!r}")


class DegenerateTable(TableError):
    pass


class SingularBasisMatrix(TableError):
    pass


class ResultsNotSameIntervention(TableError):
    pass


class SameIntervention(TableError):
    pass


class WeightsNotNormalized(TableError):
    pass


class ZeroEvidence(TableError):
    pass


class InsufficientCoverage(TableError):
    pass


class NotHermitian(TableError):
    pass


class PurityOutOfRange(TableError):
    pass


class InvalidQuantumModel(TableError):
    pass


class LowCountWarning(UserWarning):
    pass


class DimensionTooHigh(UserWarning):
    """Point set spans more than three affine dimensions; no hull is computed."""


class RankWouldGrow(UserWarning):
    """A new preparation's frequencies do not fit the table's rank."""
