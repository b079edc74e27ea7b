from multi_isometry.structure.contraction import (
    ContractionData,
    ContractionParts,
    contraction_parts,
    defect,
    is_c_dot_zero,
    julia_halmos,
    julia_halmos_of,
)
from multi_isometry.structure.nonet import Nonet, nonet_build, nonet_extract, nonet_feasible
from multi_isometry.structure.triple import (
    ModelTriple,
    TZExtraction,
    WoldReport,
    adjoint_power_norms,
    extract_TZ,
    pivotal_from_bi_isometry,
    triple_from_TZ,
    wold_reduction_check,
)
