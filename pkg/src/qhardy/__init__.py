"""Lattice q-calculus and numerical checks of q-Hardy type inequalities."""

__version__ = "0.1.0"

from .errors import (DivisionByZero, DomainError, EvaluationError, NonConvergent,
                     ParameterError, PoleError, QHardyError)
from .params import QParams, SeriesResult
from .qcore import (q_beta, q_gamma, q_number, q_pochhammer_finite, q_pochhammer_infinite,
                    q_pochhammer_real, q_pow, q_power)
from .qintegral import (ExtremalFamily, LatticeFunction, improper_integral,
                        interval_integral, jackson_integral, make_extremal)
from .qoperators import (OperatorParams, hardy_lhs, hardy_transform, pnorm_p, rl_lhs,
                         rl_transform)
from .verify import (InequalityCase, SharpnessSweep, VerificationReport, classical_constant,
                     classical_limit_scan, remark_2_2_check, sharp_constant,
                     sharpness_sweep, verify_case)

__all__ = [
    "__version__",
    "QHardyError", "ParameterError", "DomainError", "PoleError", "DivisionByZero",
    "EvaluationError", "NonConvergent",
    "QParams", "SeriesResult",
    "q_number", "q_pow", "q_pochhammer_finite", "q_pochhammer_infinite",
    "q_pochhammer_real", "q_gamma", "q_beta", "q_power",
    "LatticeFunction", "ExtremalFamily", "make_extremal",
    "jackson_integral", "improper_integral", "interval_integral",
    "OperatorParams", "hardy_transform", "hardy_lhs", "rl_transform", "rl_lhs", "pnorm_p",
    "InequalityCase", "VerificationReport", "SharpnessSweep",
    "sharp_constant", "classical_constant", "verify_case", "sharpness_sweep",
    "remark_2_2_check", "classical_limit_scan",
]
