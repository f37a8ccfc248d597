"""Numerical laboratory for Toeplitz operators on weighted ball spaces.

The package assembles truncated Toeplitz matrices over weighted Bergman
spaces on the complex unit ball, decomposes them along quasi-homogeneous
levels, and probes quantization and Fredholm behaviour numerically.
"""

from .berezin import (
    DecayTable,
    FredholmReport,
    MatrixSymbol,
    MinSingularTable,
    SpectrumSample,
    berezin_of_operator,
    berezin_of_symbol,
    boundary_vanishing_probe,
    default_radius_schedule,
    essential_spectrum_sample,
    fredholm_index_report,
    kernel_coefficients,
    min_singular_probe,
    mobius,
    quantization_probe,
    truncate_symbol_cs,
)
from .core import (
    BallGeometry,
    TruncatedBasis,
    WeightedSpace,
    basis_norm_constant,
    count_basis,
    dim_level,
    enumerate_basis,
    level_of,
    levels_up_to,
    monomial_moment,
)
from .errors import DomainError, InvarianceError
from .levels import (
    FactorizationReport,
    LevelBlock,
    LevelIndexMap,
    RecoveredSymbol,
    RecoveryReport,
    block_norms,
    extract_level_block,
    level_block_direct,
    level_count_identity,
    off_block_mass,
    reassemble_from_levels,
    recover_symbol_and_remainder,
    u_rho_index_map,
    verify_tensor_factorization,
)
from .quadrature import (
    GAUSS_JACOBI,
    MONTE_CARLO,
    BallRule,
    QuadratureSpec,
    ball_rule,
    gauss_jacobi_rule,
    integrate_ball,
    monte_carlo_integral,
    monte_carlo_points,
)
from .suites import (
    ExperimentConfig,
    SuiteResult,
    default_config,
    load_config,
    parse_config_text,
    run_all,
    summary_lines,
    write_outputs,
)
from .symbols import (
    ProductSymbol,
    SymbolExpr,
    SymbolSyntaxError,
    classify_symbol,
    eval_on_points,
    eval_symbol,
    parse_symbol,
    rebase_inner,
    symbol_to_text,
)
from .toeplitz import (
    GammaSequence,
    OperatorMatrix,
    export_matrix_csv,
    gamma_quasi_radial,
    gamma_sequence,
    operator_norm,
    radial_eigenvalue,
    radial_toeplitz_diagonal,
    semicommutator,
    toeplitz_matrix,
    toeplitz_matrix_with_stderr,
)

__version__ = "0.1.0"

__all__ = [
    "BallGeometry",
    "BallRule",
    "DecayTable",
    "DomainError",
    "ExperimentConfig",
    "FactorizationReport",
    "FredholmReport",
    "GAUSS_JACOBI",
    "GammaSequence",
    "InvarianceError",
    "LevelBlock",
    "LevelIndexMap",
    "MONTE_CARLO",
    "MatrixSymbol",
    "MinSingularTable",
    "OperatorMatrix",
    "ProductSymbol",
    "QuadratureSpec",
    "RecoveredSymbol",
    "RecoveryReport",
    "SpectrumSample",
    "SuiteResult",
    "SymbolExpr",
    "SymbolSyntaxError",
    "TruncatedBasis",
    "WeightedSpace",
    "ball_rule",
    "basis_norm_constant",
    "berezin_of_operator",
    "berezin_of_symbol",
    "block_norms",
    "boundary_vanishing_probe",
    "classify_symbol",
    "count_basis",
    "default_config",
    "default_radius_schedule",
    "enumerate_basis",
    "essential_spectrum_sample",
    "eval_on_points",
    "eval_symbol",
    "export_matrix_csv",
    "extract_level_block",
    "fredholm_index_report",
    "gamma_quasi_radial",
    "gamma_sequence",
    "gauss_jacobi_rule",
    "integrate_ball",
    "kernel_coefficients",
    "level_block_direct",
    "level_count_identity",
    "level_of",
    "levels_up_to",
    "load_config",
    "dim_level",
    "min_singular_probe",
    "mobius",
    "monomial_moment",
    "monte_carlo_integral",
    "monte_carlo_points",
    "off_block_mass",
    "operator_norm",
    "parse_config_text",
    "parse_symbol",
    "quantization_probe",
    "radial_eigenvalue",
    "radial_toeplitz_diagonal",
    "reassemble_from_levels",
    "rebase_inner",
    "recover_symbol_and_remainder",
    "run_all",
    "semicommutator",
    "summary_lines",
    "symbol_to_text",
    "toeplitz_matrix",
    "toeplitz_matrix_with_stderr",
    "truncate_symbol_cs",
    "u_rho_index_map",
    "verify_tensor_factorization",
    "write_outputs",
]
