"""Design and analysis of erasure-channel LDPC degree distributions.

The package models iterative decoding on the binary erasure channel as a
staircase bouncing between the variable-side polynomial lam(x) and the
check-side transfer curve psi(x).  On top of that picture it provides:

* `de_engine` - the erasure recursion, psi and its inverse/derivative,
  success checks, and the area identity linking the enclosed gap to rate;
* `estimators` - exact staircase iteration counts, a smooth quadrature
  approximation, the matching lower bound, and the bottleneck utility;
* `series` - polynomial expansions of psi (closed form for single-degree
  check sides, series reversion otherwise);
* `sip_compile` - compilation of the step-size constraint into a single
  even polynomial plus nonnegativity certificates (Sturm count or Gram
  factorization);
* `solve` - rate-maximal, utility-maximal, and iteration-minimal designers;
* `cli` - the `ldpc-forge` command with embedded published designs and a
  dataset reproduction harness.
"""

from ._kernels import HAS_NUMBA, USING_NUMBA
from .de_engine import (AreaGap, DEContext, DecodingTrace, MaxIterations,
                        ReachedTarget, Stalled, SuccessCheck, area_gap,
                        check_successful, de_trace, psi, psi_deriv, psi_extended,
                        psi_inverse, tanh_sinh_integral)
from .ensemble import (DegreeDistribution, Ensemble, graphical_complexity, rate,
                       validate)
from .errors import (DegenerateGap, DerivativeSingular, DomainError,
                     LdpcForgeError, NegativeCoefficient, NonConvergent,
                     NumericalFailure, OrderTooSmall, RateOutOfRange,
                     ReversionSingular, SumNotOne, ZetaTildeZero)
from .estimators import (CurvePair, EqualStepCurve, UtilityResult,
                         approx_iterations, code_curves, exact_iterations,
                         jensen_bound, local_step_count, lower_bound,
                         optimal_f1, utility)
from .series import (DEFAULT_ORDER, TaylorSeries, binom_frac, order_for_tolerance,
                     taylor_for, taylor_general, taylor_regular)
from .sip_compile import (ConstraintPolynomial, NonnegCertificate,
                          binomial_tables, certify, compile_constraint,
                          gap_coefficients, gram_matrix, gram_residual,
                          mobius_x_of_u, mobius_x_of_y, mobius_y_of_x,
                          nonneg_on_halfline)
from .solve import (DesignSpec, LPResult, SolveReport, design_min_iterations,
                    design_rate, design_utility, lp_solve, refine_exchange)

__version__ = "0.1.0"

__all__ = [
    "AreaGap", "ConstraintPolynomial", "CurvePair", "DEContext",
    "DecodingTrace", "DegenerateGap", "DegreeDistribution", "DerivativeSingular",
    "DesignSpec", "DomainError", "Ensemble", "EqualStepCurve", "HAS_NUMBA",
    "LPResult", "LdpcForgeError", "MaxIterations", "NegativeCoefficient",
    "NonConvergent", "NonnegCertificate", "NumericalFailure", "OrderTooSmall",
    "RateOutOfRange", "ReachedTarget", "ReversionSingular", "SolveReport",
    "Stalled", "SuccessCheck", "SumNotOne", "TaylorSeries", "USING_NUMBA",
    "UtilityResult", "ZetaTildeZero", "DEFAULT_ORDER",
    "approx_iterations", "area_gap", "binom_frac", "binomial_tables", "certify",
    "check_successful", "code_curves", "compile_constraint", "de_trace",
    "design_min_iterations", "design_rate", "design_utility", "exact_iterations",
    "gap_coefficients", "gram_matrix", "gram_residual", "graphical_complexity",
    "jensen_bound", "local_step_count", "lower_bound", "lp_solve", "mobius_x_of_u",
    "mobius_x_of_y", "mobius_y_of_x", "nonneg_on_halfline", "optimal_f1",
    "order_for_tolerance", "psi", "psi_deriv", "psi_extended", "psi_inverse", "rate",
    "refine_exchange", "tanh_sinh_integral", "taylor_for", "taylor_general",
    "taylor_regular",
    "utility", "validate",
]
