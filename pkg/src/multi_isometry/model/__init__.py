from multi_isometry.model.equivalence import (
    EQUIVALENT,
    INEQUIVALENT,
    UNDECIDED,
    EquivalenceResult,
    commutant_dimension,
    equivalent,
    intertwiner_space,
)
from multi_isometry.model.model_tuple import (
    ModelTuple,
    ValidationReport,
    complete_tuple,
    compose,
    doubly_commuting,
    doubly_commuting_tuple,
    rank_accounting,
    resolution_sum,
    validate_model,
)
