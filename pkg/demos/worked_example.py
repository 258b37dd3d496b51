"""
A 6 x 7 table of rank 3
=======================

Seven preparations, three two-outcome interventions. The table is stored
exactly as rationals, factored into preparation and result vectors, and
rebuilt from them.
"""

import numpy as np

from ptables import compression_stats, decompose, numerical_rank, example_table, reconstruct

table = example_table()
print(f"{table.L} results x {table.M} preparations, rank {numerical_rank(table)}")

# %%
# Factor with the identity basis: the first three preparations become unit vectors.
dec = decompose(table)
for label, s in zip(table.preparations, dec.preparation_vectors):
    print(label, [str(v) for v in s])

# %%
# A different basis matrix moves every vector but leaves p_ij = r_i . s_j alone.
dec2 = decompose(table, "paper-example")
for label, s in zip(table.preparations, dec2.preparation_vectors):
    print(label, [str(v) for v in s])
for (k, r), vec in zip(table.row_labels, dec2.result_vectors):
    print(f"{k}/{r}", [str(v) for v in vec])

assert reconstruct(dec) == table == reconstruct(dec2)

# %%
# 13 vectors of length 3 against 42 table entries, minus the K*K free basis.
print(compression_stats(table.L, table.M, dec.K))

# Float mode picks its own pivots but rebuilds the same numbers.
dec_f = decompose(example_table("float"))
print("float pivots", dec_f.block_form.col_perm[:3])
print("max error", np.max(np.abs(reconstruct(dec_f).entries - table.as_float().entries)))
