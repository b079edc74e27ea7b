from multi_isometry.hardy.symbol import (
    LinearSymbol,
    OperatorPolynomial,
    divisor_pair,
    product_of,
    symbol_of_model,
    symbol_product,
)
from multi_isometry.hardy.truncation import (
    TruncatedOperator,
    adjoint,
    backward_formula,
    commutator_defect,
    constants,
    exact_columns,
    kernel_of_adjoint,
    spread,
    to_window,
    truncate,
    truncated_commutator,
    unitary_part_truncated,
)
