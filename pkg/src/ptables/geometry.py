"""Geometric structure of the vector families produced by a decomposition.

The results of one intervention are exhaustive, so their vectors sum to a
common vector ``e`` shared by every intervention. Then ``e . s_j = 1`` for
every preparation, which puts all preparation vectors on one affine
hyperplane. This module checks those facts and exports the points plus
their convex hulls (for affine dimension at most 3) as plottable data.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.spatial import ConvexHull

from ._linalg import bareiss_rank, fraction_zeros
from .decompose import Decomposition
from .exceptions import DimensionTooHigh

DEFAULT_TOL_GEO = 1e-8


@dataclass
class GeometryReport:
    sum_vectors: list[np.ndarray]
    common_sum: np.ndarray | None
    prep_affine_dim: int | None = None
    hulls: dict[str, "Hull"] = field(default_factory=dict)


@dataclass
class Hull:
    """Convex hull of one family of points.

    ``facets`` index into the family's own point list. In one dimension the
    single facet is the segment's two end points; in two dimensions it is the
    polygon's vertex cycle; in three dimensions each facet is a triangle.
    ``coords`` are the points in an orthonormal frame of their affine hull.
    """

    dim: int
    vertices: list[int]
    facets: list[list[int]]
    coords: np.ndarray
    origin: np.ndarray
    frame: np.ndarray


def _equal(u: np.ndarray, v: np.ndarray, exact: bool, tol: float) -> bool:
    if exact:
        return bool(np.all(u == v))
    return bool(np.max(np.abs(np.asarray(u, float) - np.asarray(v, float))) <= tol)


def intervention_sum_vectors(decomposition: Decomposition, tol: float = DEFAULT_TOL_GEO) -> GeometryReport:
    """Sum the result vectors of each intervention; set ``common_sum`` if they agree."""
    table = decomposition.table
    r = decomposition.result_vectors
    sums = []
    for k in range(len(table.interventions)):
        rows = table.intervention_rows(k)
        total = fraction_zeros(decomposition.K) if table.exact else np.zeros(decomposition.K)
        for i in rows:
            total = total + r[i]
        sums.append(total)
    common = sums[0]
    if not all(_equal(s, common, table.exact, tol) for s in sums[1:]):
        common = None
    return GeometryReport(sum_vectors=sums, common_sum=common)


def normalization_residuals(decomposition: Decomposition, tol: float = DEFAULT_TOL_GEO) -> np.ndarray | None:
    """``e . s_j - 1`` for every preparation, or None without a common sum."""
    e = intervention_sum_vectors(decomposition, tol).common_sum
    if e is None:
        return None
    return decomposition.preparation_vectors.dot(e) - 1


def affine_dimension(points: np.ndarray, exact: bool = False, tol: float = DEFAULT_TOL_GEO) -> int:
    """Dimension of the affine hull of the rows of ``points``."""
    if len(points) <= 1:
        return 0
    diffs = points[1:] - points[0]
    if exact:
        return bareiss_rank(diffs)
    diffs = np.asarray(diffs, dtype=float)
    sv = np.linalg.svd(diffs, compute_uv=False)
    scale = max(1.0, float(np.max(np.abs(points.astype(float)))))
    return int(np.count_nonzero(sv > tol * scale))


def prep_affine_dimension(decomposition: Decomposition, tol: float = DEFAULT_TOL_GEO) -> int:
    return affine_dimension(decomposition.preparation_vectors, decomposition.exact, tol)


def _affine_frame(points: np.ndarray, dim: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    origin = points.mean(axis=0)
    centred = points - origin
    if dim == 0:
        return origin, np.zeros((0, points.shape[1])), np.zeros((len(points), 0))
    _, _, vt = np.linalg.svd(centred, full_matrices=False)
    frame = vt[:dim]
    return origin, frame, centred @ frame.T


def convex_hull(points, tol: float = DEFAULT_TOL_GEO) -> Hull | None:
    """Hull of a point family in its own affine frame.

    Returns None (after a :class:`DimensionTooHigh` warning) when the points
    span more than three affine dimensions.
    """
    pts = np.asarray(points, dtype=float)
    dim = affine_dimension(pts, tol=tol)
    if dim > 3:
        warnings.warn(
            f"points span {dim} affine dimensions; exporting points without facets",
            DimensionTooHigh,
            stacklevel=2,
        )
        return None
    origin, frame, coords = _affine_frame(pts, dim)
    if dim == 0:
        vertices = [0]
        facets = [[0]]
    elif dim == 1:
        lo, hi = int(np.argmin(coords[:, 0])), int(np.argmax(coords[:, 0]))
        vertices = sorted({lo, hi})
        facets = [[lo, hi]]
    else:
        qh = ConvexHull(coords)
        vertices = sorted(int(v) for v in qh.vertices)
        if dim == 2:
            # qhull lists 2-D hull vertices counter-clockwise
            facets = [[int(v) for v in qh.vertices]]
        else:
            facets = [[int(v) for v in simplex] for simplex in qh.simplices]
    return Hull(dim, vertices, facets, coords, origin, frame)


def geometry_report(decomposition: Decomposition, tol: float = DEFAULT_TOL_GEO) -> GeometryReport:
    report = intervention_sum_vectors(decomposition, tol)
    report.prep_affine_dim = prep_affine_dimension(decomposition, tol)
    with warnings.catch_warnings():
        warnings.simplefilter("always")
        for kind, pts in (("prep", decomposition.preparation_vectors), ("result", decomposition.result_vectors)):
            hull = convex_hull(pts, tol)
            if hull is not None:
                report.hulls[kind] = hull
    return report


def _float_list(v) -> list[float]:
    return [float(c) for c in v]


def geometry_document(decomposition: Decomposition, tol: float = DEFAULT_TOL_GEO) -> dict:
    """JSON-ready description of both vector families and their hulls.

    Points are listed preparations first, then results. ``coords`` are the raw
    K-dimensional vectors; ``intrinsic`` are coordinates in the family's own
    affine frame whenever a hull was computed, so K = 4 qubit preparations can
    still be drawn in 3-D. ``facets`` index into ``points``.
    """
    table = decomposition.table
    points = []
    facets: list[list[int]] = []
    hyperplane = None
    e = intervention_sum_vectors(decomposition, tol).common_sum
    if e is not None:
        hyperplane = {"normal": _float_list(e), "offset": 1.0}

    families = [
        ("prep", list(table.preparations), decomposition.preparation_vectors),
        ("result", [f"{k}:{r}" for k, r in table.row_labels], decomposition.result_vectors),
    ]
    warned = []
    for kind, labels, vecs in families:
        base = len(points)
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            hull = convex_hull(vecs, tol)
        warned.extend(caught)
        for n, (label, vec) in enumerate(zip(labels, vecs)):
            point = {"label": label, "kind": kind, "coords": _float_list(vec)}
            if hull is not None:
                point["intrinsic"] = _float_list(hull.coords[n])
            points.append(point)
        if hull is not None:
            facets.extend([[base + i for i in f] for f in hull.facets])
    for w in warned:
        warnings.warn(w.message, w.category, stacklevel=2)
    doc = {"K": decomposition.K, "points": points, "facets": facets}
    if hyperplane is not None:
        doc["hyperplane"] = hyperplane
    return doc


def _off_coords(doc: dict, kind: str) -> list[list[float]]:
    pts = [p for p in doc["points"] if p["kind"] == kind]
    K = doc["K"]
    out = []
    for p in pts:
        c = p["coords"] if K <= 3 else p.get("intrinsic", p["coords"][:3])
        out.append((list(c) + [0.0, 0.0, 0.0])[:3])
    return out


def off_text(doc: dict) -> str:
    """Object File Format text holding every point and hull facet.

    Tables of rank at most 3 use the raw vectors; higher ranks use each
    family's intrinsic frame, padded to three coordinates.
    """
    verts = _off_coords(doc, "prep") + _off_coords(doc, "result")
    lines = ["OFF", f"{len(verts)} {len(doc['facets'])} 0"]
    lines += [" ".join(repr(float(c)) for c in v) for v in verts]
    lines += [" ".join(str(i) for i in [len(f), *f]) for f in doc["facets"]]
    return "\n".join(lines) + "\n"


def export_hulls(decomposition: Decomposition, target_path, tol: float = DEFAULT_TOL_GEO) -> dict:
    """Write ``<target>.json`` and ``<target>.off``; return the JSON document."""
    target = Path(target_path)
    stem = target.with_suffix("") if target.suffix in (".json", ".off") else target
    doc = geometry_document(decomposition, tol)
    stem.with_suffix(".json").write_text(json.dumps(doc, indent=2) + "\n")
    stem.with_suffix(".off").write_text(off_text(doc))
    return doc
