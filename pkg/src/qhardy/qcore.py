"""Scalar q-special functions.

q-numbers, q-Pochhammer symbols of finite, infinite and real order, the
q-gamma and q-beta functions and the q-power ``(x - t)_q^alpha``.  Every
function is a pure function of its arguments and a :class:`QParams`.
"""

from __future__ import annotations

import math

import numpy as np

from . import _series
from .errors import DivisionByZero, DomainError, NonConvergent, PoleError
from .params import QParams, SeriesResult

__all__ = [
    "QParams",
    "SeriesResult",
    "q_number",
    "q_pow",
    "q_pochhammer_finite",
    "q_pochhammer_infinite",
    "q_pochhammer_real",
    "log_q_gamma",
    "q_gamma",
    "q_beta",
    "q_power",
    "log_pochhammer_lattice",
]

# products with more factors than this are accumulated as sums of logs
DIRECT_FACTORS = 50
POLE_WINDOW = 1e-12


def q_pow(alpha: float, params: QParams) -> float:
    """``q**alpha`` evaluated as ``exp(alpha * ln q)``."""
    return math.exp(alpha * params.log_q)


def q_number(alpha: float, params: QParams) -> float:
    """The q-analogue ``[alpha]_q = (1 - q^alpha) / (1 - q)``.

    >>> q_number(2, QParams(0.5))
    1.5
    """
    return -math.expm1(alpha * params.log_q) / (1.0 - params.q)


def q_pochhammer_finite(a: float, k: int, params: QParams) -> float:
    """``(a; q)_k``, the product of ``1 - a q^i`` for ``i < k``."""
    if k < 0:
        raise DomainError("k must be non-negative")
    out = 1.0
    qi = 1.0
    for _ in range(int(k)):
        out *= 1.0 - a * qi
        qi *= params.q
    return out


def _log_factor(x):
    # log|1 - x|
    if abs(x) < 0.5:
        return math.log1p(-x)
    return math.log(abs(1.0 - x))


def _log_poch_inf(a: float, params: QParams):
    """``(log|(a;q)_inf|, sign, relative error bound, factors used)``."""
    if a == 0:
        return 0.0, 1.0, 0.0, 0
    lq = params.log_q
    # first index where |a| q^n drops below eps_tail
    n0 = max(0, math.ceil((math.log(params.eps_tail) - math.log(abs(a))) / lq))
    while n0 > 0 and abs(a) * math.exp((n0 - 1) * lq) < params.eps_tail:
        n0 -= 1
    while abs(a) * math.exp(n0 * lq) >= params.eps_tail:
        n0 += 1
    count = n0 + params.consecutive_small
    if count > params.n_max_product:
        raise NonConvergent(
            f"(a;q)_inf needs {count} factors, more than n_max_product={params.n_max_product}")
    xs = [a * math.exp(i * lq) for i in range(count)]
    if any(x == 1.0 for x in xs):
        return -math.inf, 0.0, 0.0, count
    sign = -1.0 if sum(1 for x in xs if x > 1.0) % 2 else 1.0
    if count <= DIRECT_FACTORS:
        prod = 1.0
        for x in xs:
            prod *= 1.0 - x
        log_abs = math.log(abs(prod))
    else:
        log_abs = math.fsum(_log_factor(x) for x in xs)
    t = abs(a) * math.exp(count * lq)
    delta = t / ((1.0 - params.q) * (1.0 - t))
    return log_abs, sign, -math.expm1(-delta), count


def q_pochhammer_infinite(a: float, params: QParams) -> SeriesResult:
    """``(a; q)_inf`` with a bound on the dropped geometric tail.

    Factors are taken until ``|a| q^N < eps_tail`` for ``consecutive_small``
    successive ``N``; the remainder is bounded with
    ``log(1 - t) >= -t / (1 - t)``.
    """
    log_abs, sign, rel, n = _log_poch_inf(a, params)
    value = sign * math.exp(log_abs) if sign else 0.0
    return SeriesResult(value, abs(value) * rel, n, True)


def _check_real_order(a, alpha, params):
    if a > 1.0 or a * q_pow(alpha, params) > 1.0:
        raise DomainError(
            "real-order Pochhammer symbol is only defined here for positive factors "
            f"(a={a!r}, alpha={alpha!r})")


def q_pochhammer_real(a: float, alpha: float, params: QParams) -> float:
    """``(a; q)_alpha = (a; q)_inf / (a q^alpha; q)_inf``.

    Restricted to arguments for which every factor ``1 - a q^i`` of both
    products is non-negative.
    """
    if alpha == 0:
        return 1.0
    _check_real_order(a, alpha, params)
    b = a * q_pow(alpha, params)
    ln, sn, _, _ = _log_poch_inf(a, params)
    ld, sd, _, _ = _log_poch_inf(b, params)
    if sd == 0:
        raise DivisionByZero(f"(a q^alpha; q)_inf vanishes for a={a!r}, alpha={alpha!r}")
    if sn == 0:
        return 0.0
    return math.exp(ln - ld)


def _check_pole(x):
    if x <= POLE_WINDOW and abs(x - round(x)) < POLE_WINDOW:
        raise PoleError(f"q-gamma has a pole at x={x!r}")


def log_q_gamma(x: float, params: QParams):
    """``(log|Gamma_q(x)|, sign)``, finite even where ``Gamma_q`` over- or
    underflows (e.g. q close to 1)."""
    _check_pole(x)
    ln, _, _, _ = _log_poch_inf(params.q, params)
    ld, sd, _, _ = _log_poch_inf(q_pow(x, params), params)
    if sd == 0:
        raise PoleError(f"q-gamma has a pole at x={x!r}")
    return ln - ld + (1.0 - x) * math.log1p(-params.q), sd


def q_gamma(x: float, params: QParams) -> float:
    """``Gamma_q(x) = (q;q)_inf / (q^x;q)_inf * (1-q)^(1-x)``.

    >>> round(q_gamma(3, QParams(0.5)), 12)
    1.5
    """
    la, s = log_q_gamma(x, params)
    return s * math.exp(la)


def log_pochhammer_lattice(shift: float, start: int, count: int,
                           params: QParams) -> np.ndarray:
    """``log (q^(shift+j); q)_inf`` for ``j = start, ..., start+count-1``.

    Requires ``shift + start > 0``.  The values are suffix sums of
    ``log(1 - q^(shift+j))`` seeded with the product beyond the block.
    """
    if shift + start <= 0:
        raise DomainError("lattice Pochhammer needs q^(shift+start) < 1")
    j = np.arange(start, start + count, dtype=float)
    x = np.exp((shift + j) * params.log_q)
    seed, _, _, _ = _log_poch_inf(math.exp((shift + start + count) * params.log_q), params)
    return _series.suffix_sums(np.log1p(-x), seed)


def q_beta(a: float, b: float, params: QParams) -> float:
    """``B_q(a, b) = (1-q) sum_i q^(i a) (q^(i+1); q)_(b-1)``.

    >>> round(q_beta(2, 1, QParams(0.5)), 12)
    0.666666666667
    """
    if not a > 0:
        raise DomainError("q-beta needs a > 0")
    if not b > 0:
        raise DomainError("q-beta needs b > 0 so that every factor is positive")
    lq = params.log_q

    def block(ks):
        la = ks * a * lq
        if b != 1:
            n, m = int(ks[0]), ks.size
            la = (la + log_pochhammer_lattice(1.0, n, m, params)
                  - log_pochhammer_lattice(b, n, m, params))
        return la, None

    res = _series.scan(block, params, label="q-beta series")
    return (1.0 - params.q) * res.value()


def q_power(x: float, t: float, alpha: float, params: QParams) -> float:
    """The q-power ``(x - t)_q^alpha = x^alpha (t/x; q)_alpha``.

    Integer ``alpha >= 0`` uses the finite product of ``x - q^i t``.
    """
    if not x > 0:
        raise DomainError("q-power needs x > 0")
    if t == 0:
        return x ** alpha
    if float(alpha).is_integer() and alpha >= 0:
        out = 1.0
        qi = 1.0
        for _ in range(int(alpha)):
            out *= x - qi * t
            qi *= params.q
        return out
    return x ** alpha * q_pochhammer_real(t / x, alpha, params)
