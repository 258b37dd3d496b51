"""
Preparation and result sets
===========================

Result vectors of each intervention sum to the same covector e, and every
preparation vector lies on the plane e . s = 1. Hull data is written as
JSON plus OFF for any mesh viewer.
"""

import sys
import tempfile
from pathlib import Path

from ptables import decompose, example_table
from ptables.geometry import export_hulls, geometry_report

dec = decompose(example_table(), "paper-example")
rep = geometry_report(dec)
print("sum vectors", [[str(v) for v in s] for s in rep.sum_vectors])
print("prep affine dim", rep.prep_affine_dim)
for kind, hull in rep.hulls.items():
    print(kind, "hull: dim", hull.dim, "vertices", hull.vertices, "facets", len(hull.facets))

out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(tempfile.mkdtemp()) / "worked_example"
doc = export_hulls(dec, out)
print(f"wrote {out}.json and {out}.off: {len(doc['points'])} points")
