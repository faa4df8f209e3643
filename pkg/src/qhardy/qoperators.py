"""Weighted Hardy and q-Riemann-Liouville operators and their functionals.

On the lattice ``x = q^j`` the weighted Hardy mean reduces to suffix sums
of ``w_i = q^(i(1-alpha)) f(q^i)``, so the functional

    L(f) = int_0^inf x^(p(alpha-1)) (int_0^x t^-alpha f(t) d_qt)^p d_qx

equals ``(1-q)^(p+1) sum_j q^(j(p(alpha-1)+1)) S_j^p`` with
``S_j = sum_{i>=j} w_i``.  Suffix sums are carried in log form so that the
outer series can run through lattice indices where ``t`` itself is not
representable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import _series
from .errors import DomainError, ParameterError
from .params import QParams, SeriesResult
from .qcore import log_pochhammer_lattice, log_q_gamma
from .qintegral import LatticeFunction

__all__ = [
    "OperatorParams",
    "DOMAINS",
    "hardy_transform",
    "hardy_lhs",
    "rl_transform",
    "rl_lhs",
    "rl_kernel",
    "pnorm_p",
]

DOMAINS = ("full-line", "unit-interval")
# kernel weights closer to 1 than this are treated as exactly 1
KERNEL_CUTOFF = 1e-17
EPS = _series.EPS


@dataclass(frozen=True)
class OperatorParams:
    """Order/weight ``alpha``, exponent ``p`` and the outer integration domain."""

    alpha: float
    p: float
    domain: str = "full-line"

    def __post_init__(self):
        if self.p == 0 or not math.isfinite(self.p):
            raise ParameterError("p must be finite and non-zero")
        if not math.isfinite(self.alpha):
            raise ParameterError("alpha must be finite")
        if self.domain not in DOMAINS:
            raise ParameterError(f"domain must be one of {DOMAINS}")

    @property
    def gamma(self) -> float:
        return (self.p - 1) / self.p - self.alpha

    @property
    def p_conj(self) -> float:
        return self.p / (self.p - 1)


def _samples(f: LatticeFunction, log_t, p=None):
    """Log-samples of a non-negative input, enforcing the zero policy for ``p``."""
    la, sg = f.log_samples(log_t)
    if np.any(sg < 0):
        raise DomainError(f"{f.name}: operators need non-negative samples")
    if p is not None and np.any(sg == 0):
        if p < 0:
            raise DomainError(f"{f.name}: a zero sample cannot be raised to p={p} < 0")
        if p < 1 and f.positivity == "positive":
            raise DomainError(f"{f.name}: zero sample of a strictly positive input (p={p})")
    return la


def _inner_tail(log_v, b, params, label):
    """``(log sum_{i>=b} v_i, relative error)`` from a fresh upward scan."""
    res = _series.scan(lambda ks: (log_v(ks), None), params, start=b,
                       label=label, tail_name="small-t")
    lv = res.log_value()
    if lv == -math.inf:
        return lv, 0.0
    return lv, res.abs_error() / res.value() if res.value() else 0.0


class _SuffixSums:
    """Log suffix sums ``log sum_{i>=j} v_i`` served block by block.

    Upward blocks are seeded with a fresh scan beyond their end; downward
    blocks extend the running sum carried from the previous block.
    """

    def __init__(self, log_v, params, label):
        self.log_v = log_v
        self.params = params
        self.label = label
        self.carry = None
        self.carry_rel = 0.0

    def up(self, js):
        n, m = int(js[0]), js.size
        seed, rel = _inner_tail(self.log_v, n + m, self.params, self.label)
        return _series.suffix_log_sums(self.log_v(js), seed), rel

    def down(self, js):
        if self.carry is None:
            self.carry, self.carry_rel = _inner_tail(self.log_v, int(js[0]) + 1,
                                                     self.params, self.label)
        lw = self.log_v(js)
        out = _series.suffix_log_sums(lw[::-1], self.carry)[::-1]
        self.carry = float(out[-1])
        return out, self.carry_rel


def _outer(log_weight, head, params, p, domain, label):
    """Sum ``exp(log_weight(j) + p log head(j))`` over the outer lattice.

    ``head(js, upward)`` returns ``(log H_j, relative error of H_j)``.
    """
    parts = []

    def block(upward):
        def fn(js):
            lh, rel = head(js, upward)
            lw = log_weight(js)
            with np.errstate(invalid="ignore"):
                la = lw + p * lh
            la = np.where(np.isneginf(lh) & (p > 0), -np.inf, la)
            err = EPS * (np.abs(lw) + abs(p) * np.abs(np.where(np.isfinite(lh), lh, 0.0)) + 8) \
                + abs(p) * rel
            return la, None, err
        return fn

    parts.append(_series.scan(block(True), params, start=0, label=label,
                              tail_name="small-t"))
    if domain == "full-line":
        parts.append(_series.scan(block(False), params, start=-1, step=-1,
                                  label=label, tail_name="large-t", growth_check=True))
    return parts


def _result(parts, log_factor) -> SeriesResult:
    vals = [p.value() for p in parts]
    errs = [p.abs_error() for p in parts]
    f = math.exp(log_factor)
    value = f * math.fsum(vals)
    err = f * math.fsum(errs) + 4 * EPS * abs(value)
    return SeriesResult(value, err, sum(p.n for p in parts), True)


def hardy_transform(f: LatticeFunction, alpha: float, x: float, params: QParams) -> float:
    """The weighted Hardy mean ``x^(alpha-1) int_0^x t^-alpha f(t) d_qt``."""
    if not x > 0:
        raise DomainError("hardy_transform needs x > 0")
    lq, lx = params.log_q, math.log(x)

    def block(ks):
        la, sg = f.log_samples(lx + ks * lq)
        return ks * lq * (1 - alpha) + la, sg

    res = _series.scan(block, params, label="hardy transform", tail_name="small-t")
    return (1 - params.q) * res.value()


def hardy_lhs(f: LatticeFunction, op: OperatorParams, params: QParams) -> SeriesResult:
    """The Hardy functional ``L(f)`` over the full line or the unit interval.

    Only the outer integral is restricted on the unit interval; inner
    integrals always run over ``(0, x]``.
    """
    p, alpha, lq = op.p, op.alpha, params.log_q

    def log_w(js):
        return js * (1 - alpha) * lq + _samples(f, js * lq, p)

    sums = _SuffixSums(log_w, params, "hardy functional inner sum")

    def head(js, upward):
        return sums.up(js) if upward else sums.down(js)

    def log_weight(js):
        return js * (p * (alpha - 1) + 1) * lq

    parts = _outer(log_weight, head, params, p, op.domain, "hardy functional")
    return _result(parts, (p + 1) * math.log1p(-params.q))


@lru_cache(maxsize=64)
def rl_kernel(alpha: float, q: float) -> np.ndarray:
    """``c_m - 1`` with ``c_m = (q^(m+1); q)_(alpha-1)``, up to the last
    ``m`` where it exceeds ``KERNEL_CUTOFF`` in magnitude.

    Beyond that horizon every kernel weight equals 1 to well below double
    precision, so ``sum_m c_m v_(j+m)`` is a plain suffix sum plus a short
    correction.
    """
    if alpha == 1:
        return np.zeros(0)
    params = QParams(q)
    size = 256
    while True:
        lc = (log_pochhammer_lattice(1.0, 0, size, params)
              - log_pochhammer_lattice(alpha, 0, size, params))
        d = np.expm1(lc)
        big = np.nonzero(np.abs(d) >= KERNEL_CUTOFF)[0]
        if big.size == 0:
            d = d[:0]
            break
        if big[-1] < size - 1:
            d = d[: big[-1] + 1]
            break
        size *= 4
    d.setflags(write=False)
    return d


def rl_transform(f: LatticeFunction, alpha: float, x: float, params: QParams) -> float:
    """``I_q^alpha f(x) = x^alpha/Gamma_q(alpha) (1-q) sum_i c_i q^i f(x q^i)``."""
    if not alpha > 0:
        raise ParameterError("Riemann-Liouville order needs alpha > 0")
    if not x > 0:
        raise DomainError("rl_transform needs x > 0")
    lq, lx = params.log_q, math.log(x)
    lg, sg_gamma = log_q_gamma(alpha, params)

    def block(ks):
        la, sg = f.log_samples(lx + ks * lq)
        n, m = int(ks[0]), ks.size
        lc = (log_pochhammer_lattice(1.0, n, m, params)
              - log_pochhammer_lattice(alpha, n, m, params))
        return ks * lq + la + lc, sg

    res = _series.scan(block, params, label="Riemann-Liouville transform",
                       tail_name="small-t")
    return sg_gamma * math.exp(alpha * lx - lg) * (1 - params.q) * res.value()


def rl_lhs(f: LatticeFunction, op: OperatorParams, params: QParams) -> SeriesResult:
    """``int (I_q^alpha f(x) / x^alpha)^p d_qx`` over ``op.domain``.

    With ``v_i = q^i f(q^i)`` the integrand at ``x = q^j`` is
    ``((1-q)/Gamma_q(alpha))^p q^(-jp) T_j^p`` where
    ``T_j = sum_m c_m v_(j+m) = R_j (1 + rho_j)``, ``R_j`` the suffix sum of
    ``v`` and ``rho_j`` the short kernel correction relative to it.
    """
    p, alpha, lq = op.p, op.alpha, params.log_q
    if not p > 1:
        raise ParameterError("the Riemann-Liouville functional needs p > 1")
    if not alpha > 0:
        raise ParameterError("the Riemann-Liouville functional needs alpha > 0")
    kern = rl_kernel(float(alpha), float(params.q))
    M = kern.size

    def log_v(js):
        return js * lq + _samples(f, js * lq, p)

    sums = _SuffixSums(log_v, params, "Riemann-Liouville inner sum")

    def head(js, upward):
        lr, rel = sums.up(js) if upward else sums.down(js)
        if M == 0:
            return lr, rel
        lo = int(js.min())
        ext = log_v(np.arange(lo, lo + js.size + M))
        pos = js - lo
        rho = np.zeros(js.size)
        with np.errstate(invalid="ignore"):
            for m in range(M):
                rho += kern[m] * np.exp(ext[pos + m] - lr)
        rho = np.where(np.isneginf(lr), 0.0, rho)
        return lr + np.log1p(rho), rel + 4 * EPS * M

    def log_weight(js):
        return js * (1 - p) * lq

    parts = _outer(log_weight, head, params, p, op.domain, "Riemann-Liouville functional")
    lg, _ = log_q_gamma(alpha, params)
    return _result(parts, (p + 1) * math.log1p(-params.q) - p * lg)


def pnorm_p(f: LatticeFunction, p: float, domain: str, params: QParams) -> SeriesResult:
    """The un-rooted ``int f^p d_qt`` over the full line or ``(0, 1]``."""
    if p == 0:
        raise ParameterError("p must be non-zero")
    if domain not in DOMAINS:
        raise ParameterError(f"domain must be one of {DOMAINS}")
    if p < 0 and (f.support == "tail" or (f.support == "unit" and domain == "full-line")):
        raise DomainError(f"{f.name}: vanishes on part of the domain, cannot raise to p={p} < 0")
    lq = params.log_q

    def block(ks):
        la = _samples(f, ks * lq, p)
        with np.errstate(invalid="ignore"):
            t = ks * lq + p * la
        t = np.where(np.isneginf(la), -np.inf, t)
        return t, None, EPS * (np.abs(p * np.where(np.isfinite(la), la, 0.0)) + 4)

    if f.support == "tail":
        # only the node t = 1 lies in (0, 1] and in the support
        parts = [_series.single_term(block, 0)]
    else:
        parts = [_series.scan(block, params, start=0, label="p-norm", tail_name="small-t")]
    if domain == "full-line" and f.support != "unit":
        parts.append(_series.scan(block, params, start=-1, step=-1, label="p-norm",
                                  tail_name="large-t", growth_check=True))
    return _result(parts, math.log1p(-params.q))
