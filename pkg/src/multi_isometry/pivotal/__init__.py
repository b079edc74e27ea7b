from multi_isometry.pivotal.pivotal import (
    LatticeResult,
    P2ConditionReport,
    P2Decision,
    PivotalData,
    SEED_P1,
    SEED_P2,
    WIsometry,
    build_3isometry,
    check_p2_conditions,
    exists_p2,
    is_unitary_component,
    p2_lattice,
    pivotal_data,
    pivotal_is_isometry,
    pivotal_operator,
    q_max,
    q_min,
    w_invariant,
    w_isometry,
)
