"""Discrete Hardy and Copson type sums with geometric and matrix weights.

Sequences live on a finite window of indices and are zero outside it, so
every inner sum is finite.  Outer sums over an infinite index range reduce
outside the window to geometric series, which are added in closed form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.signal import lfilter

from . import _series
from .errors import DivisionByZero, DomainError, ParameterError
from .params import QParams
from .qcore import log_pochhammer_lattice, q_pochhammer_real
from .qoperators import rl_kernel

__all__ = [
    "DiscreteSequence",
    "DiscreteCase",
    "MatrixWeight",
    "INDEX_DOMAINS",
    "reflect",
    "copson_lhs",
    "hardy_discrete_lhs",
    "power_sum",
    "weighted_mean_lhs",
    "matrix_weight",
    "matrix_row_sum",
    "matrix_normalizer",
    "matrix_constant",
    "matrix_lhs",
    "ReversePair",
    "reverse_discrete_check",
    "cass_kratz_constant",
    "classical_discrete_check",
    "geometric_extremal_sweep",
]

INDEX_DOMAINS = ("bilateral", "one-sided")
EPS = _series.EPS


@dataclass(frozen=True)
class DiscreteSequence:
    """Values ``a_n`` for ``n = n_lo, ..., n_lo + len(values) - 1``; zero elsewhere."""

    values: np.ndarray
    n_lo: int = 0
    positivity: str = "nonneg"

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim != 1 or v.size == 0:
            raise ParameterError("a sequence needs a non-empty 1-d window")
        if not np.all(np.isfinite(v)):
            raise ParameterError("sequence entries must be finite")
        if self.positivity in ("nonneg", "positive") and np.any(v < 0):
            raise DomainError("a non-negative sequence has a negative entry")
        if self.positivity == "positive" and np.any(v == 0):
            raise DomainError("a strictly positive sequence has a zero entry")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "n_lo", int(self.n_lo))

    @property
    def n_hi(self) -> int:
        return self.n_lo + self.values.size - 1

    @property
    def indices(self) -> np.ndarray:
        return np.arange(self.n_lo, self.n_hi + 1)


@dataclass(frozen=True)
class DiscreteCase:
    """Exponent ``lam > 0`` of the geometric weights, power ``p`` and base ``q``."""

    lam: float
    p: float
    q: float
    index_domain: str = "bilateral"

    def __post_init__(self):
        if not self.lam > 0:
            raise ParameterError("lambda must be positive")
        if self.p == 0:
            raise ParameterError("p must be non-zero")
        if not 0 < self.q < 1:
            raise ParameterError("q must lie in (0,1)")
        if self.index_domain not in INDEX_DOMAINS:
            raise ParameterError(f"index_domain must be one of {INDEX_DOMAINS}")

    @property
    def ratio(self) -> float:
        """``q^lam``, the step of the geometric weights."""
        return self.q ** self.lam

    @property
    def constant(self) -> float:
        """``(1 - q^lam)^-p``."""
        return (1.0 - self.ratio) ** -self.p


@dataclass(frozen=True)
class MatrixWeight:
    """Entries ``q^((k-n)/p') (q^(k-n+1); q)_(alpha-1)`` for ``k >= n``."""

    alpha: float
    p_conj: float
    q: float

    def __post_init__(self):
        if not self.alpha > 0:
            raise ParameterError("matrix weights need alpha > 0")
        if not self.p_conj > 1:
            raise ParameterError("matrix weights need p' > 1")
        if not 0 < self.q < 1:
            raise ParameterError("q must lie in (0,1)")

    @property
    def p(self) -> float:
        return self.p_conj / (self.p_conj - 1)


def reflect(a: DiscreteSequence) -> DiscreteSequence:
    """The sequence ``n -> a_(-n)``."""
    return DiscreteSequence(a.values[::-1], -a.n_hi, a.positivity)


def _check(a: DiscreteSequence, p: float, index_domain: str):
    if index_domain not in INDEX_DOMAINS:
        raise ParameterError(f"index_domain must be one of {INDEX_DOMAINS}")
    if p < 0:
        raise DomainError("p < 0 needs a_n > 0 on the whole index range, which a "
                          "zero-extended window cannot provide")
    if np.any(a.values < 0):
        raise DomainError("discrete sums need a_n >= 0")
    if index_domain == "one-sided" and a.n_lo < 0:
        raise DomainError("one-sided sums need the window inside n >= 0")


def _geometric_powers(r, count=None):
    """``sum_{m=1}^{count} r^m`` (``count=None`` for the infinite series)."""
    if r == 0 or count == 0:
        return 0.0
    if count is None:
        return r / (1.0 - r)
    return r * -math.expm1(count * math.log(r)) / (1.0 - r)


def _powered_sum(x, p):
    with np.errstate(divide="ignore"):
        return math.fsum(np.power(x, p))


def copson_lhs(a: DiscreteSequence, case: DiscreteCase) -> float:
    """``sum_n (sum_{k>=n} q^(lam(k-n)) a_k)^p`` over the case's index domain."""
    _check(a, case.p, case.index_domain)
    r = case.ratio
    inner = lfilter([1.0], [1.0, -r], a.values[::-1])[::-1]
    total = _powered_sum(inner, case.p)
    # indices below the window see q^(lam m) times the inner sum at n_lo
    head = inner[0] ** case.p
    if case.index_domain == "bilateral":
        total += head * _geometric_powers(r ** case.p)
    else:
        total += head * _geometric_powers(r ** case.p, a.n_lo)
    return total


def hardy_discrete_lhs(a: DiscreteSequence, case: DiscreteCase) -> float:
    """``sum_n (sum_{k<=n} q^(lam(n-k)) a_k)^p`` over the case's index domain."""
    _check(a, case.p, case.index_domain)
    r = case.ratio
    inner = lfilter([1.0], [1.0, -r], a.values)
    return _powered_sum(inner, case.p) + inner[-1] ** case.p * _geometric_powers(r ** case.p)


def power_sum(a: DiscreteSequence, p: float) -> float:
    """``sum_n a_n^p``."""
    return _powered_sum(a.values, p)


def weighted_mean_lhs(a: DiscreteSequence, weights: DiscreteSequence, direction: str,
                      index_domain: str, p: float, log_weights: bool = False) -> float:
    """``sum_n ((sum_{k in dir(n)} lam_k a_k) / (sum_{k in dir(n)} lam_k))^p``.

    ``direction`` is ``"hardy"`` (``k <= n``) or ``"copson"`` (``k >= n``).
    Sums run over the window of ``weights`` (finite section); ``a`` is
    zero-extended onto it.  Partial sums are carried in log form; with
    ``log_weights=True`` the weight window holds ``log lam_k``, so geometric
    weights far outside the floating-point range are fine.
    """
    if direction not in ("hardy", "copson"):
        raise ParameterError("direction must be 'hardy' or 'copson'")
    _check(a, p, index_domain)
    if index_domain == "one-sided" and weights.n_lo < 0:
        raise DomainError("one-sided sums need the weight window inside n >= 0")
    w = weights.values
    if log_weights:
        lw = w
    elif np.any(w <= 0):
        raise DomainError("weights must be positive on their window")
    else:
        lw = np.log(w)
    av = np.zeros(w.size)
    lo = max(a.n_lo, weights.n_lo)
    hi = min(a.n_hi, weights.n_hi)
    if lo <= hi:
        av[lo - weights.n_lo: hi - weights.n_lo + 1] = a.values[lo - a.n_lo: hi - a.n_lo + 1]
    with np.errstate(divide="ignore"):
        ln = lw + np.log(av)
    if direction == "hardy":
        lden = _series.suffix_log_sums(lw[::-1])[::-1]
        lnum = _series.suffix_log_sums(ln[::-1])[::-1]
    else:
        lden = _series.suffix_log_sums(lw)
        lnum = _series.suffix_log_sums(ln)
    if np.any(np.isneginf(lden)):
        raise DivisionByZero("a partial weight sum underflowed to zero")
    with np.errstate(invalid="ignore"):
        lr = p * (lnum - lden)
    lr = np.where(np.isneginf(lnum), -np.inf, lr)
    return math.fsum(np.exp(lr))


def _kernel(alpha, q, count):
    """``c_m = (q^(m+1); q)_(alpha-1)`` for ``m < count``."""
    d = rl_kernel(float(alpha), float(q))
    c = np.ones(count)
    m = min(count, d.size)
    c[:m] += d[:m]
    return c


def matrix_weight(n: int, k: int, w: MatrixWeight, params: QParams) -> float:
    """``lambda_(n,k) = q^((k-n)/p') (q^(k-n+1); q)_(alpha-1)``, zero for ``k < n``."""
    if k < n:
        return 0.0
    m = k - n
    return params.q ** (m / w.p_conj) * q_pochhammer_real(params.q ** (m + 1), w.alpha - 1, params)


def matrix_row_sum(w: MatrixWeight, exponent: float) -> float:
    """``sum_{m>=0} q^(m exponent) (q^(m+1); q)_(alpha-1)``.

    With ``exponent = 1/p'`` this is ``Qbar_n q^(-n/p')``; with
    ``exponent = 1/p`` it is the dual normalizer ``Q_n q^(n/p)``.
    """
    params = QParams(w.q)
    lq = params.log_q
    a = w.alpha

    def block(ks):
        n, m = int(ks[0]), ks.size
        lc = log_pochhammer_lattice(1.0, n, m, params) - log_pochhammer_lattice(a, n, m, params)
        return ks * exponent * lq + lc, None

    return _series.scan(block, params, label="matrix row sum").value()


def matrix_normalizer(n: int, w: MatrixWeight, direction: str = "copson") -> float:
    """``Qbar_n = sum_{k>=n} q^(k/p') c_(k-n)`` or, for the dual direction,
    ``Q_n = sum_{k<=n} c_(n-k) q^(-k/p)``."""
    if direction == "copson":
        return w.q ** (n / w.p_conj) * matrix_row_sum(w, 1 / w.p_conj)
    return w.q ** (-n / w.p) * matrix_row_sum(w, 1 / w.p)


def matrix_constant(w: MatrixWeight, direction: str = "copson") -> float:
    """``E = (sum_n q^(n/p') c_n)^p``, and its dual with ``1/p`` in place of ``1/p'``."""
    e = 1 / w.p_conj if direction == "copson" else 1 / w.p
    return matrix_row_sum(w, e) ** w.p


def matrix_lhs(a: DiscreteSequence, w: MatrixWeight, index_domain: str,
               normalized: bool, params: QParams, direction: str = "copson") -> float:
    """``sum_n (sum_k lambda_(n,k) a_k)^p``, optionally divided row-wise by the
    full row sum.

    ``direction="copson"`` uses ``lambda_(n,k) = q^((k-n)/p') c_(k-n)`` for
    ``k >= n``; ``"hardy"`` uses ``q^((n-k)/p) c_(n-k)`` for ``k <= n``.
    Rows outside the window decay geometrically and are added in closed form.
    """
    if direction not in ("hardy", "copson"):
        raise ParameterError("direction must be 'hardy' or 'copson'")
    if not math.isclose(params.q, w.q):
        raise ParameterError("MatrixWeight.q and params.q differ")
    p = w.p
    _check(a, p, index_domain)
    e = 1 / w.p_conj if direction == "copson" else 1 / p
    r = w.q ** e
    N = a.values.size
    d = rl_kernel(float(w.alpha), float(w.q))
    # Toeplitz weights r^m c_m, exact beyond the kernel horizon
    span = N + d.size
    t = r ** np.arange(span) * _kernel(w.alpha, w.q, span)
    av = a.values if direction == "hardy" else a.values[::-1]
    # rows inside the window, then d more rows; only these need kernel
    # weights other than 1, and the convolution is exact for them
    inner = np.convolve(av, t)[:span]
    body = inner[:N] if direction == "hardy" else inner[:N][::-1]
    beyond = inner[N:]
    last = inner[-1]
    total = _powered_sum(body, p)
    if direction == "copson" and index_domain == "one-sided":
        # rows 0 .. n_lo-1 only
        k = min(a.n_lo, beyond.size)
        total += _powered_sum(beyond[:k], p)
        total += last ** p * _geometric_powers(r ** p, max(0, a.n_lo - beyond.size))
    else:
        # each further row is r times the previous one
        total += _powered_sum(beyond, p) + last ** p * _geometric_powers(r ** p)
    if normalized:
        total /= matrix_row_sum(w, e) ** p
    return total


@dataclass(frozen=True)
class ReversePair:
    """Both sides of a reverse inequality that should read ``lhs > rhs``."""

    lhs: float
    rhs: float

    @property
    def strict(self) -> bool:
        return self.lhs > self.rhs


def reverse_discrete_check(a: DiscreteSequence, case: DiscreteCase):
    """Sides of the two reverse Copson inequalities for ``0 < p < 1``.

    Returns ``(first, second)``: the Copson sum against the constant times
    ``sum (1 - q^(lam n)) a_n^p``, and the Copson sum plus the boundary term
    ``(sum q^(lam n) a_n)^p / (1 - q^lam)`` against the constant times
    ``sum a_n^p``.
    """
    if not 0 < case.p < 1:
        raise ParameterError("reverse inequalities need 0 < p < 1")
    if case.index_domain != "one-sided":
        raise ParameterError("reverse inequalities are one-sided")
    lhs = copson_lhs(a, case)
    n = a.indices
    r = case.ratio
    ap = np.power(a.values, case.p)
    g = -np.expm1(n * math.log(r))
    first = ReversePair(lhs, case.constant * math.fsum(g * ap))
    boundary = math.fsum(np.exp(n * math.log(r)) * a.values) ** case.p / (1 - r)
    second = ReversePair(lhs + boundary, case.constant * math.fsum(ap))
    return first, second


def cass_kratz_constant(alpha: float, p: float) -> float:
    """``((1 - alpha) p / (p - alpha p - 1))^p``."""
    return ((1 - alpha) * p / (p - alpha * p - 1)) ** p


def _power_increments(k, e):
    """``k^e - (k-1)^e`` without cancellation for large ``k``."""
    k = np.asarray(k, dtype=float)
    out = np.empty_like(k)
    one = k == 1
    out[one] = 1.0
    kk = k[~one]
    out[~one] = kk ** e * -np.expm1(e * np.log1p(-1.0 / kk))
    return out


def classical_discrete_check(a: DiscreteSequence, alpha: float, p: float, form: str):
    """Both sides of the sampled classical discrete Hardy inequality.

    ``form="weights-3.21"`` averages with ``k^(1-alpha) - (k-1)^(1-alpha)``
    against ``n^(1-alpha)``; ``form="weights-3.22"`` averages with
    ``k^-alpha``.  The window must start at ``n = 1``; the outer sum runs
    over the window.
    """
    if not p > 1:
        raise ParameterError("classical discrete checks need p > 1")
    if not alpha < 1 - 1 / p:
        raise ParameterError("classical discrete checks need alpha < 1 - 1/p")
    if a.n_lo != 1:
        raise ParameterError("classical discrete checks index from n = 1")
    if np.any(a.values < 0):
        raise DomainError("classical discrete checks need a_n >= 0")
    n = a.indices.astype(float)
    if form == "weights-3.21":
        num = _series.compensated_cumsum(_power_increments(n, 1 - alpha) * a.values)
        mean = num * n ** (alpha - 1)
    elif form == "weights-3.22":
        w = n ** -alpha
        mean = _series.compensated_cumsum(w * a.values) / _series.compensated_cumsum(w)
    else:
        raise ParameterError("form must be 'weights-3.21' or 'weights-3.22'")
    lhs = _powered_sum(mean, p)
    rhs = cass_kratz_constant(alpha, p) * power_sum(a, p)
    return lhs, rhs


def geometric_extremal_sweep(case: DiscreteCase, steps: int = 20, eps0: float = 0.5,
                             window_cap: int = 1_000_000) -> Sequence[tuple]:
    """Copson ratios for ``a_k = q^(eps k)`` as ``eps = eps0 2^-j`` shrinks.

    Windows start at 0 and hold ``ceil(50/eps)`` terms (capped).  Returns
    ``(eps, window, ratio)`` rows; the ratio approaches ``(1 - q^lam)^-p``.
    """
    rows = []
    for j in range(steps):
        eps = eps0 * 2.0 ** -j
        K = min(window_cap, math.ceil(50 / eps))
        a = DiscreteSequence(np.exp(eps * math.log(case.q) * np.arange(K)), 0)
        rows.append((eps, K, copson_lhs(a, case) / power_sum(a, case.p)))
    return rows
