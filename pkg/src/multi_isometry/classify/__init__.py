from multi_isometry.classify.blaschke import (
    BlaschkeModel,
    BlaschkeProduct,
    NonBlaschkeReport,
    blaschke_taylor,
    circle_residual,
    column_norm_defect,
    model_from_blaschke,
    nonblaschke_example,
    phi_of_shift,
)
from multi_isometry.classify.canonical import (
    Canonical2,
    Canonical3,
    Canonical3Build,
    ObstructionReport,
    canonical2_build,
    canonical2_extract,
    canonical3_build,
    mobius_of_unitary,
    normality_obstruction,
)
from multi_isometry.classify.invariants import (
    MultiplicityReport,
    is_irreducible,
    is_pure,
    multiplicity_one,
    purity_and_multiplicity,
)
