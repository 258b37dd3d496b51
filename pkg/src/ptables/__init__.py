"""Probability tables, their rank decomposition into preparation and result
vectors, and Bayesian inference of unknown preparations."""

from .decompose import (
    EXAMPLE_BASIS,
    BlockForm,
    Decomposition,
    compression_stats,
    decompose,
    numerical_rank,
    pivot_block_form,
    reconstruct,
    verify_redundant_block,
)
from .geometry import (
    GeometryReport,
    export_hulls,
    geometry_report,
    intervention_sum_vectors,
    prep_affine_dimension,
)
from .inference import (
    ObservationSet,
    PosteriorReport,
    disjunction_across,
    disjunction_within,
    effective_vector,
    embed_new_preparation,
    likelihood,
    posterior,
    predict,
    simulate_observations,
)
from .quantum import (
    QuantumModel,
    expand,
    hermitian_basis,
    quantum_table,
    qubit_polarization_preset,
    scalar_product_check,
    trace_probability,
)
from .table import (
    InterventionSpec,
    ProbabilityTable,
    ValidationReport,
    build_table,
    table_from_counts,
    validate,
)
from .data import example_table

__version__ = "0.1.0"
