from multi_isometry.research.sweeps import (
    SWEEPS,
    completion_sweep,
    divisor_sweep,
    pivotal_sweep,
    structure_sweep,
    summarize,
    wold_sweep,
)
