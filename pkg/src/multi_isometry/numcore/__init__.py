from multi_isometry.numcore.predicates import (
    is_isometry,
    is_projection,
    is_unitary,
    loewner_leq,
    projection_residual,
    rank,
    spectral_radius,
    unitary_residual,
)
from multi_isometry.numcore.subspace import (
    Subspace,
    compress,
    distance_outside,
    invariance_residual,
    invariant_closure,
    is_invariant,
    kernel,
    krylov_span,
    largest_invariant_inside,
    span,
    subspace_complement,
    subspace_contains,
    subspace_intersect,
    subspace_sum,
    subspaces_equal,
)
