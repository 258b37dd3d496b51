"""JSON and CSV formats for tables, decompositions, observations and models.

Exact values are written as canonical ``"n/d"`` strings (``"1"`` for
integers); floats use Python's shortest round-trip repr. Key order is fixed
by construction, so equal inputs serialize to byte-identical text.
"""

from __future__ import annotations

import csv
import json
import math
from fractions import Fraction
from pathlib import Path

import numpy as np

from .decompose import BlockForm, Decomposition
from .exceptions import ParseError
from .inference import ObservationSet, PosteriorReport
from .quantum import QuantumModel
from .table import EXACT, FLOAT, MODES, InterventionSpec, ProbabilityTable, build_table


def _reject_constant(name):
    raise ParseError(f"non-finite number {name} is not allowed")


def loads(text: str, source: str = "<string>"):
    try:
        return json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{source}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc


def load_json(path):
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}") from exc
    return loads(text, str(path))


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, ensure_ascii=False) + "\n"


def write_json(obj, path) -> None:
    Path(path).write_text(dumps(obj))


# -- scalar values ----------------------------------------------------------

def format_value(v):
    if isinstance(v, Fraction):
        return str(v)
    return float(v)


def parse_value(v, mode: str):
    """Number or ``"n/d"`` string to a Fraction (exact) or float."""
    if isinstance(v, bool) or not isinstance(v, (int, float, str)):
        raise ParseError(f"expected a number or rational string, got {v!r}")
    try:
        if mode == EXACT:
            if isinstance(v, float) and not math.isfinite(v):
                raise ValueError
            return Fraction(v) if not isinstance(v, float) else Fraction(repr(v))
        out = float(Fraction(v)) if isinstance(v, str) else float(v)
    except (ValueError, ZeroDivisionError):
        raise ParseError(f"cannot parse {v!r} as a {mode} value") from None
    if not math.isfinite(out):
        raise ParseError(f"non-finite value {v!r}")
    return out


def _matrix(rows, mode: str) -> np.ndarray:
    if not isinstance(rows, list) or not all(isinstance(r, list) for r in rows):
        raise ParseError("expected a list of rows")
    widths = {len(r) for r in rows}
    if len(widths) > 1:
        raise ParseError(f"rows have differing lengths {sorted(widths)}")
    vals = [[parse_value(v, mode) for v in r] for r in rows]
    if mode == EXACT:
        arr = np.empty((len(vals), widths.pop() if widths else 0), dtype=object)
        for i, r in enumerate(vals):
            for j, v in enumerate(r):
                arr[i, j] = v
        return arr
    return np.array(vals, dtype=float).reshape(len(vals), -1)


def _format_matrix(m: np.ndarray) -> list:
    return [[format_value(v) for v in row] for row in m]


def _format_vector(v: np.ndarray) -> list:
    return [format_value(c) for c in v]


def _mode_of(doc: dict, override: str | None) -> str:
    mode = override or doc.get("mode", EXACT)
    if mode not in MODES:
        raise ParseError(f"mode must be one of {MODES}, got {mode!r}")
    return mode


def _require(doc, *keys):
    if not isinstance(doc, dict):
        raise ParseError("expected a JSON object at top level")
    missing = [k for k in keys if k not in doc]
    if missing:
        raise ParseError(f"missing field(s): {', '.join(missing)}")


def _specs(doc) -> list[InterventionSpec]:
    try:
        return [InterventionSpec(str(s["name"]), [str(r) for r in s["results"]]) for s in doc["interventions"]]
    except (KeyError, TypeError) as exc:
        raise ParseError(f"malformed interventions list: {exc}") from None


# -- tables -----------------------------------------------------------------

def table_to_dict(table: ProbabilityTable) -> dict:
    return {
        "mode": table.mode,
        "preparations": list(table.preparations),
        "interventions": [{"name": s.name, "results": list(s.results)} for s in table.interventions],
        "entries": _format_matrix(table.entries),
    }


def table_from_dict(doc: dict, mode: str | None = None, tol: float | None = None) -> ProbabilityTable:
    """Parse and validate; domain violations raise the :func:`build_table` errors."""
    _require(doc, "preparations", "interventions", "entries")
    mode = _mode_of(doc, mode)
    entries = _matrix(doc["entries"], mode)
    kwargs = {} if tol is None else {"tol": tol}
    return build_table([str(p) for p in doc["preparations"]], _specs(doc), entries, mode, **kwargs)


def load_table(path, mode: str | None = None, tol: float | None = None) -> ProbabilityTable:
    path = Path(path)
    if path.suffix.lower() == ".csv":
        return read_table_csv(path, mode or EXACT, tol)
    return table_from_dict(load_json(path), mode, tol)


def save_table(table: ProbabilityTable, path) -> None:
    write_json(table_to_dict(table), path)


def _read_grid_csv(path) -> tuple[list[str], list[InterventionSpec], list[list[str]]]:
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if any(c.strip() for c in r)]
    if len(rows) < 2:
        raise ParseError(f"{path}: need a header row and at least one data row")
    preparations = [c.strip() for c in rows[0][2:]]
    specs: list[tuple[str, list[str]]] = []
    grid = []
    for n, row in enumerate(rows[1:], start=2):
        if len(row) != len(preparations) + 2:
            raise ParseError(f"{path}: line {n} has {len(row)} cells, expected {len(preparations) + 2}")
        name, result = row[0].strip(), row[1].strip()
        if specs and specs[-1][0] == name:
            specs[-1][1].append(result)
        elif any(s[0] == name for s in specs):
            raise ParseError(f"{path}: line {n}: rows of intervention {name!r} are not contiguous")
        else:
            specs.append((name, [result]))
        grid.append([c.strip() for c in row[2:]])
    return preparations, [InterventionSpec(n, r) for n, r in specs], grid


def read_table_csv(path, mode: str = EXACT, tol: float | None = None) -> ProbabilityTable:
    """CSV layout: header of preparation labels after two leading cells; each
    data row starts with intervention name and result name."""
    preparations, specs, grid = _read_grid_csv(path)
    entries = _matrix([[_csv_number(c) for c in r] for r in grid], mode)
    kwargs = {} if tol is None else {"tol": tol}
    return build_table(preparations, specs, entries, mode, **kwargs)


def _csv_number(cell: str):
    try:
        return int(cell)
    except ValueError:
        pass
    if "/" in cell:
        return cell
    try:
        return float(cell)
    except ValueError:
        raise ParseError(f"cannot parse CSV cell {cell!r}") from None


def load_counts(path) -> tuple[list[str], list[InterventionSpec], list[list[int]]]:
    """Count grid from JSON (``counts`` instead of ``entries``) or CSV."""
    path = Path(path)
    if path.suffix.lower() == ".csv":
        preparations, specs, grid = _read_grid_csv(path)
    else:
        doc = load_json(path)
        _require(doc, "preparations", "interventions", "counts")
        preparations, specs, grid = [str(p) for p in doc["preparations"]], _specs(doc), doc["counts"]
    try:
        counts = [[int(c) if not isinstance(c, float) or c.is_integer() else _bad_count(c) for c in r] for r in grid]
    except (TypeError, ValueError):
        raise ParseError(f"{path}: counts must be integers") from None
    return preparations, specs, counts


def _bad_count(c):
    raise ValueError(c)


# -- decompositions ---------------------------------------------------------

def decomposition_to_dict(dec: Decomposition, tolerances: dict | None = None) -> dict:
    table = dec.table
    doc = {
        "mode": table.mode,
        "K": dec.K,
        "x": _format_matrix(dec.x),
        "preparation_vectors": {
            label: _format_vector(vec) for label, vec in zip(table.preparations, dec.preparation_vectors)
        },
        "result_vectors": [
            {"intervention": k, "result": r, "vector": _format_vector(vec)}
            for (k, r), vec in zip(table.row_labels, dec.result_vectors)
        ],
        "row_perm": list(dec.block_form.row_perm),
        "col_perm": list(dec.block_form.col_perm),
    }
    if tolerances:
        doc["tolerances"] = tolerances
    return doc


def decomposition_from_dict(doc: dict) -> Decomposition:
    """Rebuild a decomposition; the table is recomputed as ``r_i . s_j``."""
    _require(doc, "K", "x", "preparation_vectors", "result_vectors", "row_perm", "col_perm")
    mode = _mode_of(doc, None)
    K = int(doc["K"])
    preps = list(doc["preparation_vectors"].keys())
    s = _matrix(list(doc["preparation_vectors"].values()), mode)
    specs: list[tuple[str, list[str]]] = []
    r_rows = []
    for item in doc["result_vectors"]:
        _require(item, "intervention", "result", "vector")
        name = str(item["intervention"])
        if specs and specs[-1][0] == name:
            specs[-1][1].append(str(item["result"]))
        else:
            specs.append((name, [str(item["result"])]))
        r_rows.append(item["vector"])
    r = _matrix(r_rows, mode)
    x = _matrix(doc["x"], mode)
    if s.shape[1:] != (K,) or r.shape[1:] != (K,) or x.shape != (K, K):
        raise ParseError(f"vector lengths do not match K = {K}")
    row_perm, col_perm = tuple(doc["row_perm"]), tuple(doc["col_perm"])
    if sorted(row_perm) != list(range(len(r))) or sorted(col_perm) != list(range(len(s))):
        raise ParseError("row_perm/col_perm are not permutations of the table indices")
    table = ProbabilityTable(preps, [InterventionSpec(n, rs) for n, rs in specs], r.dot(s.T), mode)
    q = table.entries[np.ix_(row_perm, col_perm)]
    bf = BlockForm(row_perm, col_perm, q[:K, :K], q[:K, K:], q[K:, :K], q[K:, K:])
    t = r[list(row_perm)]
    u = s[list(col_perm)].T
    return Decomposition(table, K, x, s, r, bf, t[:K], t[K:], u[:, K:])


def load_decomposition(path) -> Decomposition:
    return decomposition_from_dict(load_json(path))


# -- observations and posteriors --------------------------------------------

def observations_to_dict(obs: ObservationSet, table: ProbabilityTable) -> dict:
    doc: dict = {
        "counts": [
            {"intervention": table.interventions[k].name, "result": table.interventions[k].results[i], "n": n}
            for (k, i), n in obs.counts.items()
        ]
    }
    if obs.seed is not None:
        doc["seed"] = obs.seed
    if obs.rng is not None:
        doc["rng"] = obs.rng
    if obs.true_prep is not None:
        doc["true_prep"] = obs.true_prep
    return doc


def observations_from_dict(doc: dict, table: ProbabilityTable) -> ObservationSet:
    _require(doc, "counts")
    try:
        items = [(str(c["intervention"]), str(c["result"]), c["n"]) for c in doc["counts"]]
    except (KeyError, TypeError) as exc:
        raise ParseError(f"malformed counts list: {exc}") from None
    for *_, n in items:
        if isinstance(n, bool) or not isinstance(n, int) or n < 0:
            raise ParseError(f"count {n!r} is not a nonnegative integer")
    return ObservationSet.from_labels(
        table, items, seed=doc.get("seed"), rng=doc.get("rng"), true_prep=doc.get("true_prep")
    )


def posterior_to_dict(report: PosteriorReport, table: ProbabilityTable, predictions: dict | None = None) -> dict:
    doc: dict = {
        "posterior": {label: format_value(w) for label, w in zip(table.preparations, report.posterior)},
        "log_evidence": float(report.log_evidence),
    }
    if report.effective_vector is not None:
        doc["s_new"] = _format_vector(report.effective_vector)
    if predictions is not None:
        doc["predictions"] = predictions
    return doc


# -- quantum models ---------------------------------------------------------

def _complex_to_dict(m: np.ndarray) -> dict:
    return {"re": m.real.tolist(), "im": m.imag.tolist()}


def _complex_from_dict(d) -> np.ndarray:
    _require(d, "re")
    re = _matrix(d["re"], FLOAT)
    im = _matrix(d["im"], FLOAT) if "im" in d else np.zeros_like(re)
    if re.shape != im.shape:
        raise ParseError("real and imaginary parts differ in shape")
    return re + 1j * im


def quantum_model_to_dict(model: QuantumModel) -> dict:
    return {
        "dimension": model.dimension,
        "states": [{"label": l, **_complex_to_dict(s)} for l, s in zip(model.state_labels, model.states)],
        "povms": [
            {
                "name": name,
                "elements": [{"result": r, **_complex_to_dict(e)} for r, e in zip(results, povm)],
            }
            for name, results, povm in zip(model.povm_labels, model.result_labels, model.povms)
        ],
    }


def quantum_model_from_dict(doc: dict) -> QuantumModel:
    _require(doc, "dimension", "states", "povms")
    try:
        states = [_complex_from_dict(s) for s in doc["states"]]
        state_labels = [str(s.get("label", f"S_{j + 1}")) for j, s in enumerate(doc["states"])]
        povms, names, results = [], [], []
        for k, p in enumerate(doc["povms"]):
            _require(p, "elements")
            povms.append([_complex_from_dict(e) for e in p["elements"]])
            names.append(str(p.get("name", f"M_{k + 1}")))
            results.append([str(e.get("result", f"R_{i + 1}")) for i, e in enumerate(p["elements"])])
    except (AttributeError, TypeError) as exc:
        raise ParseError(f"malformed quantum model: {exc}") from None
    return QuantumModel(int(doc["dimension"]), states, povms, state_labels, names, results)
