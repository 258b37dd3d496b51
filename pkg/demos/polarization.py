"""
Photon polarization as a probability table
==========================================

Density matrices and filters give a table through tr(Pi rho). Linear
polarizers alone stop at rank 3; a circular state and filter bring in the
imaginary part of the density matrix and the rank reaches 4.
"""

import numpy as np

from ptables import decompose, numerical_rank
from ptables.geometry import prep_affine_dimension
from ptables.quantum import (
    bloch_vector,
    hermitian_basis,
    quantum_table,
    qubit_polarization_preset,
    scalar_product_check,
)

linear = quantum_table(qubit_polarization_preset([0, 45, 90, 135], [1] * 4, [0, 30, 45, 60]))
full = quantum_table(qubit_polarization_preset())
print("linear only:", numerical_rank(linear), " with circular:", numerical_rank(full))

# a few entries: Malus's law cos^2(theta - phi)
for prep, filt in [("S_0", "M_45"), ("S_0", "M_60"), ("S_45", "M_60"), ("S_R", "M_0")]:
    rows = full.intervention_rows(full.intervention_index(filt))
    print(prep, filt, np.round(full.entries[rows, full.preparation_index(prep)], 4))

# %%
# The pure states sit on the Bloch sphere, so the preparation set spans 3 dimensions.
model = qubit_polarization_preset()
for label, rho in zip(model.state_labels, model.states):
    print(label, np.round(bloch_vector(rho), 3))
print("prep affine dim", prep_affine_dimension(decompose(full)))

# %%
# The trace rule is a dot product once both operators are written on a
# trace-orthonormal Hermitian basis.
basis = hermitian_basis(2)
check = scalar_product_check(model.povms[3][0], model.states[1], basis)
print(check)
