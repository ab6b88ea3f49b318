"""dirac-spectra: eigenvalues, root functions and basis diagnostics for Dirac-type systems."""

__version__ = "0.1.0"

from .cauchy import FundamentalSolution, solve_fundamental, solve_fundamental_batch, validate_growth, wronskian
from .charfn import (
    CharContext,
    char_asymptote,
    check_conditions,
    check_theorem1_conditions,
    check_theorem2_conditions,
    eval_char,
    eval_char_linear,
    eval_char_quadratic,
    eval_char_separated,
    minors,
)
from .config import RunConfig, load_config
from .eigensystem import (
    RootFunction,
    bc_residual,
    build_root_functions,
    build_root_functions_linear,
    build_root_functions_quadratic,
    normalize,
)
from .errors import (
    ConfigError,
    DiracSpectraError,
    DynamicRangeError,
    SpecValidationError,
    ZeroOnContourError,
)
from .model import (
    GridConfig,
    KernelFunction,
    LinearBC,
    QuadraticBC,
    ScalarFunction,
    SeparableTerm,
    SeparatedBC,
    SystemSpec,
    check_rank2,
    validate_spec,
)
from .polynomial import ComplexPolynomial
from .report import emit_plotdata
from .riesz import (
    build_riesz_report,
    completeness_residual,
    gram_condition,
    operator_A,
    reference_basis,
    select_exclusion,
    tail_sum,
)
from .spectrum import Rect, SpectralPoint, Spectrum, count_zeros_rect, locate_spectrum, model_roots, verify_asymptotics

__all__ = [
    "ComplexPolynomial",
    "ScalarFunction",
    "SeparableTerm",
    "KernelFunction",
    "SystemSpec",
    "LinearBC",
    "QuadraticBC",
    "SeparatedBC",
    "GridConfig",
    "validate_spec",
    "check_rank2",
    "FundamentalSolution",
    "solve_fundamental",
    "solve_fundamental_batch",
    "wronskian",
    "validate_growth",
    "CharContext",
    "minors",
    "eval_char",
    "eval_char_linear",
    "eval_char_quadratic",
    "eval_char_separated",
    "char_asymptote",
    "check_conditions",
    "check_theorem1_conditions",
    "check_theorem2_conditions",
    "Rect",
    "SpectralPoint",
    "Spectrum",
    "model_roots",
    "count_zeros_rect",
    "locate_spectrum",
    "verify_asymptotics",
    "RootFunction",
    "build_root_functions",
    "build_root_functions_linear",
    "build_root_functions_quadratic",
    "bc_residual",
    "normalize",
    "select_exclusion",
    "operator_A",
    "reference_basis",
    "tail_sum",
    "gram_condition",
    "completeness_residual",
    "build_riesz_report",
    "RunConfig",
    "load_config",
    "emit_plotdata",
    "DiracSpectraError",
    "SpecValidationError",
    "ConfigError",
    "DynamicRangeError",
    "ZeroOnContourError",
]
