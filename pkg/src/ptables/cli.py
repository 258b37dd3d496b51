"""Command-line front end.

Exit status: 0 on success, 1 for a domain error (invalid table, singular
basis, impossible data...), 2 for unreadable or malformed input.
"""

from __future__ import annotations

import argparse
import sys
import warnings
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import io
from .decompose import (
    DEFAULT_TOL_REC,
    compression_stats,
    decompose,
    max_reconstruction_error,
    numerical_rank,
    reconstruct,
    verify_redundant_block,
)
from .exceptions import ParseError, TableError
from .geometry import DEFAULT_TOL_GEO, export_hulls, geometry_report
from .inference import ObservationSet, posterior, predict, simulate_observations
from .quantum import (
    informationally_complete_model,
    qubit_polarization_preset,
    quantum_table,
)
from .table import EXACT, FLOAT, ProbabilityTable, table_from_counts, validate

EXIT_OK, EXIT_DOMAIN, EXIT_INPUT = 0, 1, 2


def _fmt(v) -> str:
    if isinstance(v, Fraction) and v.denominator < 10**6:
        return str(v)
    return f"{float(v):.6g}"


def _fmt_vec(v) -> str:
    return "(" + ",".join(_fmt(c) for c in v) + ")"


def _emit(args, doc: dict) -> None:
    if args.out:
        io.write_json(doc, args.out)
    if args.json:
        sys.stdout.write(io.dumps(doc))


def _tolerances(args) -> dict:
    return {"rank": args.tol_rank, "rec": args.tol_rec}


def _load_table(args, path) -> ProbabilityTable:
    return io.load_table(path, args.mode)


def _basis_arg(value: str):
    if value in ("identity", "paper-example"):
        return value
    doc = io.load_json(value)
    matrix = doc["x"] if isinstance(doc, dict) and "x" in doc else doc
    if not isinstance(matrix, list):
        raise ParseError(f"{value}: expected a matrix or an object with an 'x' matrix")
    return [[io.parse_value(c, EXACT) for c in row] for row in matrix]


def _geometry_summary(dec) -> list[str]:
    rep = geometry_report(dec)
    common = _fmt_vec(rep.common_sum) if rep.common_sum is not None else "none"
    return [f"common sum = {common}; prep affine dim = {rep.prep_affine_dim}"]


# -- subcommands ------------------------------------------------------------

def cmd_validate(args) -> int:
    path = Path(args.table)
    doc = io.load_json(path) if path.suffix.lower() != ".csv" else None
    table = _unchecked_table(path, doc, args.mode)
    report = validate(table)
    for line in report.lines():
        print(line)
    print("valid" if report.ok else f"invalid: {len(report.errors)} violation(s)")
    if args.json:
        sys.stdout.write(
            io.dumps(
                {
                    "valid": report.ok,
                    "errors": [
                        {"kind": f.kind, "indices": list(f.indices), "message": f.message} for f in report.errors
                    ],
                }
            )
        )
    return EXIT_OK if report.ok else EXIT_DOMAIN


def _unchecked_table(path: Path, doc, mode) -> ProbabilityTable:
    """Parse a table without raising on domain violations, so all can be reported."""
    if doc is None:
        preparations, specs, grid = io._read_grid_csv(path)
        mode = mode or EXACT
        entries = io._matrix([[io._csv_number(c) for c in r] for r in grid], mode)
    else:
        io._require(doc, "preparations", "interventions", "entries")
        mode = io._mode_of(doc, mode)
        preparations, specs = [str(p) for p in doc["preparations"]], io._specs(doc)
        entries = io._matrix(doc["entries"], mode)
    L = sum(len(s.results) for s in specs)
    if entries.shape != (L, len(preparations)):
        raise ParseError(f"entries have shape {entries.shape}, expected {(L, len(preparations))}")
    return ProbabilityTable(preparations, specs, entries, mode)


def cmd_decompose(args) -> int:
    table = _load_table(args, args.table)
    dec = decompose(table, _basis_arg(args.basis), tol_rank=args.tol_rank)
    stats = compression_stats(table.L, table.M, dec.K)
    err = max_reconstruction_error(dec)
    ok = err == 0 if table.exact else err <= args.tol_rec
    print(f"K = {dec.K}")
    print(f"compression: {stats['compressed']} of {stats['original']} values (saving {stats['saving']})")
    print(f"max reconstruction error = {_fmt(err)}")
    print(f"redundant block d = c a^-1 b: {verify_redundant_block(dec.block_form, args.tol_rec)}")
    for line in _geometry_summary(dec):
        print(line)
    _emit(args, io.decomposition_to_dict(dec, _tolerances(args)))
    if not ok:
        print(f"reconstruction error exceeds {args.tol_rec}", file=sys.stderr)
        return EXIT_DOMAIN
    return EXIT_OK


def cmd_reconstruct(args) -> int:
    dec = io.load_decomposition(args.decomposition)
    table = reconstruct(dec)
    report = validate(table)
    print(f"reconstructed {table.L} x {table.M} table; {'valid' if report.ok else 'INVALID'}")
    _emit(args, io.table_to_dict(table))
    return EXIT_OK if report.ok else EXIT_DOMAIN


def cmd_geometry(args) -> int:
    dec = io.load_decomposition(args.decomposition)
    for line in _geometry_summary(dec):
        print(line)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        doc = export_hulls(dec, args.out, args.tol_geo) if args.out else None
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    if doc is not None:
        stem = Path(args.out).with_suffix("")
        print(f"wrote {stem}.json and {stem}.off ({len(doc['points'])} points, {len(doc['facets'])} facets)")
    if args.json and doc is not None:
        sys.stdout.write(io.dumps(doc))
    return EXIT_OK


def _parse_schedule(spec: str, table: ProbabilityTable) -> list[tuple[str, int]]:
    try:
        if "=" not in spec:
            n = int(spec)
            return [(s.name, n) for s in table.interventions]
        out = []
        for part in spec.split(","):
            name, n = part.split("=")
            out.append((name.strip(), int(n)))
        return out
    except ValueError:
        raise ParseError(f"bad --schedule {spec!r}; use N or NAME=N,NAME=N") from None


def _parse_prior(spec: str | None, table: ProbabilityTable):
    if spec is None or spec == "uniform":
        return None
    if spec.startswith("point:"):
        label = spec.split(":", 1)[1]
        j = table.preparation_index(label)
        return [Fraction(int(i == j)) for i in range(table.M)]
    doc = io.load_json(spec)
    if not isinstance(doc, dict):
        raise ParseError(f"{spec}: prior must be an object mapping preparation labels to weights")
    mode = EXACT if table.exact else FLOAT
    return {str(k): io.parse_value(v, mode) for k, v in doc.items()}


def cmd_tomography(args) -> int:
    table = _load_table(args, args.table)
    if args.truth:
        schedule = _parse_schedule(args.schedule, table)
        obs = simulate_observations(table, args.truth, schedule, args.seed)
    elif args.observations:
        obs = io.observations_from_dict(io.load_json(args.observations), table)
    else:
        obs = ObservationSet({})
    prior = _parse_prior(args.prior, table)
    dec = decompose(table, tol_rank=args.tol_rank)
    report = posterior(table, prior, obs, dec)
    predictions = {
        spec.name: dict(zip(spec.results, (io.format_value(p) for p in predict(dec, report, k))))
        for k, spec in enumerate(table.interventions)
    }
    mode_j = int(np.argmax([float(w) for w in report.posterior]))
    print(f"posterior mode = {table.preparations[mode_j]} (weight {_fmt(report.posterior[mode_j])})")
    print(f"log evidence = {report.log_evidence:.6g}")
    print(f"s_new = {_fmt_vec(report.effective_vector)}")
    doc = io.posterior_to_dict(report, table, predictions)
    doc["observations"] = io.observations_to_dict(obs, table)
    _emit(args, doc)
    return EXIT_OK


def _float_list(text: str) -> list:
    out = []
    for item in text.split(","):
        item = item.strip()
        out.append(item if item.upper() in ("R", "L") else float(item))
    return out


def cmd_quantum(args) -> int:
    if args.model:
        model = io.quantum_model_from_dict(io.load_json(args.model))
    elif args.preset == "qubit-polarization":
        preps = _float_list(args.prep_angles)
        purities = [float(q) for q in args.purities.split(",")] if args.purities else None
        model = qubit_polarization_preset(preps, purities, _float_list(args.filter_angles), not args.no_mixed)
    elif args.dim:
        model = informationally_complete_model(args.dim)
    else:
        raise ParseError("give --preset, --model or --dim")
    table = quantum_table(model)
    print(f"{table.L} x {table.M} table, rank {numerical_rank(table, args.tol_rank)}")
    _spot_checks(table)
    _emit(args, io.table_to_dict(table))
    return EXIT_OK


def _spot_checks(table: ProbabilityTable) -> None:
    pairs = [("S_0", "M_45"), ("S_0", "M_60"), ("S_45", "M_60")]
    for prep, filt in pairs:
        if prep in table.preparations and filt in [s.name for s in table.interventions]:
            j = table.preparation_index(prep)
            rows = table.intervention_rows(table.intervention_index(filt))
            vals = [table.entries[r, j] for r in rows]
            print(f"{prep} under {filt}: ({', '.join(f'{v:.3f}' for v in vals)})")


def cmd_from_counts(args) -> int:
    preparations, specs, counts = io.load_counts(args.counts)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        table = table_from_counts(counts, preparations, specs, args.mode or EXACT, args.min_count)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    print(f"{table.L} x {table.M} table from counts")
    _emit(args, io.table_to_dict(table))
    return EXIT_OK


# -- parser -----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--mode", choices=[EXACT, FLOAT], default=None, help="arithmetic mode (default: from file)")
    common.add_argument("--tol-rank", type=float, default=None, help="singular-value cutoff for float rank")
    common.add_argument("--tol-rec", type=float, default=DEFAULT_TOL_REC, help="reconstruction tolerance")
    common.add_argument("--tol-geo", type=float, default=DEFAULT_TOL_GEO, help="geometry tolerance")
    common.add_argument("--seed", type=int, default=0, help="random seed for simulations")
    common.add_argument("--json", action="store_true", help="also print the JSON result on stdout")
    common.add_argument("--out", default=None, help="output path")

    parser = argparse.ArgumentParser(prog="ptables", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", parents=[common], help="check a table's invariants")
    p.add_argument("table")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("decompose", parents=[common], help="factor a table into vectors")
    p.add_argument("table")
    p.add_argument("--basis", default="identity", help="identity, paper-example, or a JSON matrix file")
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("reconstruct", parents=[common], help="rebuild a table from a decomposition file")
    p.add_argument("decomposition")
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("geometry", parents=[common], help="sum vectors, hyperplane and hull export")
    p.add_argument("decomposition")
    p.set_defaults(func=cmd_geometry)

    p = sub.add_parser("tomography", parents=[common], help="posterior over preparations")
    p.add_argument("table")
    src = p.add_mutually_exclusive_group()
    src.add_argument("--truth", help="simulate data from this preparation label")
    src.add_argument("--observations", help="observation JSON file")
    p.add_argument("--schedule", default="1000", help="trials: N per intervention, or NAME=N,...")
    p.add_argument("--prior", default=None, help="uniform, point:LABEL, or a JSON {label: weight} file")
    p.set_defaults(func=cmd_tomography)

    p = sub.add_parser("quantum", parents=[common], help="table from a quantum model")
    p.add_argument("--preset", choices=["qubit-polarization"])
    p.add_argument("--model", help="quantum model JSON file")
    p.add_argument("--dim", type=int, help="informationally complete model of this dimension")
    p.add_argument("--prep-angles", default="0,45,90,135,R")
    p.add_argument("--purities", default=None, help="comma list, one per prep angle (default all 1)")
    p.add_argument("--filter-angles", default="0,30,45,60,R")
    p.add_argument("--no-mixed", action="store_true", help="omit the unpolarized preparation")
    p.set_defaults(func=cmd_quantum)

    p = sub.add_parser("from-counts", parents=[common], help="frequency table from trial counts")
    p.add_argument("counts")
    p.add_argument("--min-count", type=int, default=10)
    p.set_defaults(func=cmd_from_counts)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except TableError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except (ValueError, KeyError, IndexError) as exc:
        # ParseError, unknown labels, malformed option values
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
