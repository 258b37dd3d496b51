"""Probability tables: preparations as columns, intervention results as rows."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from ._linalg import to_fraction_array
from .exceptions import (
    ColumnNotNormalized,
    DimensionMismatch,
    EmptyCell,
    EntryOutOfRange,
    LowCountWarning,
)

EXACT = "exact"
FLOAT = "float"
MODES = (EXACT, FLOAT)

DEFAULT_TOL_NORM = 1e-9
DEFAULT_MIN_COUNT = 10


@dataclass(frozen=True)
class InterventionSpec:
    name: str
    results: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "results", tuple(self.results))
        if not self.results:
            raise DimensionMismatch(f"intervention {self.name!r} has no results")
        if len(set(self.results)) != len(self.results):
            raise DimensionMismatch(f"intervention {self.name!r} has repeated result names")


def _as_spec(obj) -> InterventionSpec:
    if isinstance(obj, InterventionSpec):
        return obj
    if isinstance(obj, dict):
        return InterventionSpec(obj["name"], obj["results"])
    name, results = obj
    return InterventionSpec(name, results)


@dataclass(frozen=True)
class ProbabilityTable:
    """An L x M table of result probabilities.

    Rows run over the results of every intervention, grouped in intervention
    order; columns run over preparations. ``entries`` is an object array of
    ``Fraction`` in exact mode and a float64 array otherwise. Instances are
    treated as immutable: the entry array is flagged read-only.

    Constructing the dataclass directly skips validation; use
    :func:`build_table` for a checked table.
    """

    preparations: tuple[str, ...]
    interventions: tuple[InterventionSpec, ...]
    entries: np.ndarray
    mode: str = EXACT
    tol: float = DEFAULT_TOL_NORM

    def __post_init__(self):
        object.__setattr__(self, "preparations", tuple(self.preparations))
        object.__setattr__(self, "interventions", tuple(_as_spec(s) for s in self.interventions))
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        entries = to_fraction_array(self.entries) if self.mode == EXACT else np.array(self.entries, dtype=float)
        entries.setflags(write=False)
        object.__setattr__(self, "entries", entries)

    @property
    def L(self) -> int:
        return sum(len(s.results) for s in self.interventions)

    @property
    def M(self) -> int:
        return len(self.preparations)

    @property
    def exact(self) -> bool:
        return self.mode == EXACT

    @property
    def row_labels(self) -> list[tuple[str, str]]:
        return [(s.name, r) for s in self.interventions for r in s.results]

    def intervention_rows(self, k: int) -> range:
        """Row indices belonging to intervention ``k``."""
        start = sum(len(s.results) for s in self.interventions[:k])
        return range(start, start + len(self.interventions[k].results))

    def row_index(self, k: int, i: int) -> int:
        rows = self.intervention_rows(k)
        if not 0 <= i < len(rows):
            raise IndexError(f"intervention {k} has no result {i}")
        return rows[i]

    def intervention_index(self, name: str) -> int:
        for k, spec in enumerate(self.interventions):
            if spec.name == name:
                return k
        raise KeyError(f"unknown intervention {name!r}")

    def preparation_index(self, label: str) -> int:
        try:
            return self.preparations.index(label)
        except ValueError:
            raise KeyError(f"unknown preparation {label!r}") from None

    def column(self, j: int) -> np.ndarray:
        return self.entries[:, j]

    def with_entries(self, entries, mode: str | None = None) -> "ProbabilityTable":
        return ProbabilityTable(
            self.preparations, self.interventions, entries, mode or self.mode, self.tol
        )

    def as_float(self) -> "ProbabilityTable":
        if not self.exact:
            return self
        return self.with_entries(self.entries.astype(float), FLOAT)

    def __eq__(self, other):
        if not isinstance(other, ProbabilityTable):
            return NotImplemented
        return (
            self.preparations == other.preparations
            and self.interventions == other.interventions
            and self.mode == other.mode
            and self.entries.shape == other.entries.shape
            and bool(np.all(self.entries == other.entries))
        )

    __hash__ = None


@dataclass(frozen=True)
class Finding:
    kind: str
    message: str
    indices: tuple = ()
    value: object = None


@dataclass
class ValidationReport:
    """Violated invariants; a table is valid iff ``errors`` is empty.

    ``warnings`` carries advisory findings (e.g. low trial counts) that do
    not make a table invalid.
    """

    errors: list[Finding] = field(default_factory=list)
    warnings: list[Finding] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.errors

    def __bool__(self) -> bool:
        return bool(self.errors)

    def __len__(self) -> int:
        return len(self.errors)

    def lines(self) -> list[str]:
        return [f"error: {f.kind}: {f.message}" for f in self.errors] + [
            f"warning: {f.kind}: {f.message}" for f in self.warnings
        ]


def validate(table: ProbabilityTable) -> ValidationReport:
    """Check every table invariant and report all violations."""
    report = ValidationReport()
    p = table.entries
    L, M = table.L, table.M
    if p.ndim != 2 or p.shape != (L, M):
        report.errors.append(
            Finding("DimensionMismatch", f"entries have shape {p.shape}, expected {(L, M)}")
        )
        return report
    if M < 1:
        report.errors.append(Finding("DimensionMismatch", "table has no preparations"))
    if len(set(table.preparations)) != M:
        report.errors.append(Finding("DimensionMismatch", "preparation labels are not unique"))
    if len({s.name for s in table.interventions}) != len(table.interventions):
        report.errors.append(Finding("DimensionMismatch", "intervention names are not unique"))

    slack = 0 if table.exact else table.tol
    for (i, j), v in np.ndenumerate(p):
        if not table.exact and not np.isfinite(v):
            report.errors.append(Finding("EntryOutOfRange", f"entry ({i}, {j}) is not finite", (i, j), v))
        elif v < -slack or v > 1 + slack:
            report.errors.append(
                Finding("EntryOutOfRange", f"entry ({i}, {j}) = {v} is outside [0, 1]", (i, j), v)
            )

    for k, spec in enumerate(table.interventions):
        rows = table.intervention_rows(k)
        sums = p[rows.start : rows.stop].sum(axis=0)
        for j in range(M):
            total = sums[j]
            bad = total != 1 if table.exact else not abs(total - 1) <= table.tol
            if bad:
                report.errors.append(
                    Finding(
                        "ColumnNotNormalized",
                        f"intervention {spec.name!r}, preparation {table.preparations[j]!r}: sum = {total}",
                        (k, j),
                        total,
                    )
                )
    return report


def _raise_first(report: ValidationReport, table: ProbabilityTable) -> None:
    if report.ok:
        return
    f = report.errors[0]
    if f.kind == "EntryOutOfRange":
        raise EntryOutOfRange(*f.indices, f.value)
    if f.kind == "ColumnNotNormalized":
        k, j = f.indices
        raise ColumnNotNormalized(table.interventions[k].name, table.preparations[j], f.value)
    raise DimensionMismatch(f.message)


def build_table(
    preparations: Sequence[str],
    interventions: Iterable,
    entries,
    mode: str = EXACT,
    tol: float = DEFAULT_TOL_NORM,
) -> ProbabilityTable:
    """Build a validated table, raising on the first violated invariant.

    ``interventions`` items may be :class:`InterventionSpec`, ``(name,
    results)`` pairs or ``{"name": ..., "results": [...]}`` dicts.
    """
    specs = tuple(_as_spec(s) for s in interventions)
    L = sum(len(s.results) for s in specs)
    arr = np.asarray(entries, dtype=object)
    if arr.ndim != 2 or arr.shape != (L, len(preparations)):
        raise DimensionMismatch(
            f"entries have shape {arr.shape}, expected {(L, len(preparations))}"
        )
    table = ProbabilityTable(tuple(preparations), specs, arr, mode, tol)
    _raise_first(validate(table), table)
    return table


def check_counts(count_grid, interventions, preparations, min_count: int = DEFAULT_MIN_COUNT) -> ValidationReport:
    """Flag (intervention, preparation) cells with fewer than ``min_count`` trials."""
    specs = tuple(_as_spec(s) for s in interventions)
    counts = np.asarray(count_grid, dtype=object)
    report = ValidationReport()
    start = 0
    for k, spec in enumerate(specs):
        stop = start + len(spec.results)
        for j, prep in enumerate(preparations):
            total = sum(int(c) for c in counts[start:stop, j])
            if total == 0:
                report.errors.append(
                    Finding("EmptyCell", f"intervention {spec.name!r}, preparation {prep!r}: no trials", (k, j), 0)
                )
            elif total < min_count:
                report.warnings.append(
                    Finding("LowCount", f"intervention {spec.name!r}, preparation {prep!r}: {total} trials", (k, j), total)
                )
        start = stop
    return report


def table_from_counts(
    count_grid,
    preparations: Sequence[str],
    interventions: Iterable,
    mode: str = EXACT,
    min_count: int = DEFAULT_MIN_COUNT,
) -> ProbabilityTable:
    """Table of relative frequencies from an L x M grid of trial counts.

    Cells with fewer than ``min_count`` trials trigger a
    :class:`~ptables.exceptions.LowCountWarning`; cells with none raise
    :class:`~ptables.exceptions.EmptyCell`.
    """
    specs = tuple(_as_spec(s) for s in interventions)
    counts = np.asarray(count_grid, dtype=object)
    L = sum(len(s.results) for s in specs)
    if counts.ndim != 2 or counts.shape != (L, len(preparations)):
        raise DimensionMismatch(f"count grid has shape {counts.shape}, expected {(L, len(preparations))}")
    for (i, j), c in np.ndenumerate(counts):
        if int(c) != c or c < 0:
            raise DimensionMismatch(f"count ({i}, {j}) = {c} is not a nonnegative integer")

    report = check_counts(counts, specs, preparations, min_count)
    for f in report.errors:
        k, j = f.indices
        raise EmptyCell(specs[k].name, preparations[j])
    for f in report.warnings:
        warnings.warn(f.message, LowCountWarning, stacklevel=2)

    entries = np.empty(counts.shape, dtype=object)
    start = 0
    for spec in specs:
        stop = start + len(spec.results)
        for j in range(counts.shape[1]):
            total = sum(int(c) for c in counts[start:stop, j])
            for i in range(start, stop):
                entries[i, j] = Fraction(int(counts[i, j]), total)
        start = stop
    if mode == FLOAT:
        entries = entries.astype(float)
    return build_table(preparations, specs, entries, mode)
