"""tracepoly: exact verification toolkit for trace coefficients of
matrix pencil powers.

S(p,q) is the coefficient of t^q in (A+tB)^(p+q).  The package computes
it by five independent exact engines, scans PSD pairs for negative
trace coefficients, reports the diagonal-A asymptotics, and evaluates
the closed-form singular 3x3 family.
"""
from .scalars import (
    GaussianScalar,
    Rational,
    approx_decimal,
    format_rational,
    gaussian,
    parse_rational,
    rational,
)
from .matrices import (
    DenseMatrix,
    HermitianMatrix,
    MatrixFormatError,
    conj_transpose,
    failing_minor,
    is_hermitian,
    is_psd,
    matrix_from_obj,
    matrix_to_obj,
    principal_minor,
    random_gaussian_matrix,
    random_psd,
    require_psd,
)
from .engines import (
    ENGINES,
    BlockToeplitz,
    CoeffTable,
    ConsistencyError,
    MatrixSeries,
    OracleTooLargeError,
    build_toeplitz,
    real_trace,
    resolvent_series,
    s_from_toeplitz,
    s_matrix,
    s_table_recursive,
    s_table_recursive_right,
    s_words,
    stream_traces,
    trace_coeff,
    words_table,
)
from .asymptotics import (
    AsymptoticReport,
    DiagonalPair,
    TraceClassification,
    ZeroProductReport,
    asymptotic_limit,
    asymptotic_report,
    diagonalize_float,
    estimate_N,
    leading_block,
    leading_eigenvalue_float,
    leading_index,
    ratio_sequence,
    zero_product_check,
)
from .scan import (
    AggregateScanReport,
    CellRecord,
    ScanReport,
    scan_pair,
    scan_random,
)
from .case3 import (
    Case3Params,
    Case3Report,
    PoleTerm,
    build_case3_pair,
    case3_scan,
    case3_series,
    parse_grid,
    pole_coefficient,
    pole_terms,
    solve_for_z,
)

__version__ = "0.1.0"
