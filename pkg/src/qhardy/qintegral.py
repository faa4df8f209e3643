"""Jackson q-integrals over lattice-evaluable functions.

Integrals over ``(0, x]``, improper integrals over ``(0, inf)`` and interval
integrals, each returned as a :class:`SeriesResult` whose error combines
the truncated geometric tails and the rounding of the compensated sums.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import _series
from .errors import DomainError, EvaluationError, NonConvergent
from .params import QParams, SeriesResult

__all__ = [
    "LatticeFunction",
    "ExtremalFamily",
    "make_extremal",
    "jackson_integral",
    "improper_integral",
    "interval_integral",
    "POSITIVITY",
    "SUPPORTS",
]

POSITIVITY = ("nonneg", "positive", "unrestricted")
SUPPORTS = ("all", "unit", "tail")
EXTREMAL_KINDS = ("power-unit", "power-tail", "power-two", "power-plain")


@dataclass(frozen=True)
class LatticeFunction:
    """An evaluation oracle for ``f`` on the q-lattice.

    Parameters
    ----------
    evaluator : callable
        Maps an array of ``t > 0`` to the values ``f(t)``; a scalar return
        is broadcast.  Must be reentrant.
    positivity : {"nonneg", "positive", "unrestricted"}
        Sign contract, checked on every sampled point.
    support : {"all", "unit", "tail"}
        ``"unit"`` promises ``f = 0`` on ``(1, inf)`` and ``"tail"``
        promises ``f = 0`` on ``(0, 1)``; integrals skip the empty tail.
    log_evaluator : callable, optional
        Maps ``log t`` to ``(log|f(t)|, sign)``.  Lets lattice points far
        outside the floating-point range of ``t`` be sampled.
    """

    evaluator: Callable
    positivity: str = "nonneg"
    support: str = "all"
    log_evaluator: Optional[Callable] = None
    name: str = field(default="f", compare=False)

    def __post_init__(self):
        if self.positivity not in POSITIVITY:
            raise ValueError(f"positivity must be one of {POSITIVITY}")
        if self.support not in SUPPORTS:
            raise ValueError(f"support must be one of {SUPPORTS}")

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        return np.broadcast_to(np.asarray(self.evaluator(t), dtype=float), t.shape).copy()

    def log_samples(self, log_t):
        """``(log|f|, sign)`` at ``t = exp(log_t)``, contract-checked."""
        log_t = np.asarray(log_t, dtype=float)
        if self.log_evaluator is not None:
            la, sg = self.log_evaluator(log_t)
            la = np.broadcast_to(np.asarray(la, dtype=float), log_t.shape)
            sg = np.broadcast_to(np.asarray(sg, dtype=float), log_t.shape)
            sg = np.where(np.isneginf(la), 0.0, sg)
        else:
            with np.errstate(over="ignore", under="ignore"):
                v = self(np.exp(log_t))
            if not np.all(np.isfinite(v)):
                raise EvaluationError(f"{self.name}: non-finite value on the lattice")
            sg = np.sign(v)
            with np.errstate(divide="ignore"):
                la = np.log(np.abs(v))
        if np.isnan(la).any() or np.isposinf(la).any():
            raise EvaluationError(f"{self.name}: non-finite value on the lattice")
        if self.positivity == "positive" and np.any(sg <= 0):
            raise EvaluationError(f"{self.name}: declared strictly positive but a sample is <= 0")
        if self.positivity == "nonneg" and np.any(sg < 0):
            raise EvaluationError(f"{self.name}: declared non-negative but a sample is < 0")
        return la, sg

    def scaled(self, c: float) -> "LatticeFunction":
        """The function ``c * f``."""
        pos = self.positivity
        if c < 0 or (c == 0 and pos == "positive"):
            pos = "unrestricted"
        log_ev = None
        if self.log_evaluator is not None and c != 0:
            lc, sc = math.log(abs(c)), math.copysign(1.0, c)

            def log_ev(lt, _f=self.log_evaluator):
                la, sg = _f(lt)
                return la + lc, sc * np.asarray(sg)
        return LatticeFunction(lambda t, _f=self: c * _f(t), pos, self.support,
                               log_ev, f"{c}*{self.name}")

    def dilated(self, ell: float) -> "LatticeFunction":
        """The function ``u -> f(ell * u)``."""
        log_ev = None
        if self.log_evaluator is not None:
            ll = math.log(ell)
            log_ev = (lambda lt, _f=self.log_evaluator: _f(np.asarray(lt) + ll))
        support = self.support if ell == 1 else "all"
        return LatticeFunction(lambda t, _f=self: _f(ell * np.asarray(t)),
                               self.positivity, support, log_ev,
                               f"{self.name}({ell}*t)")


@dataclass(frozen=True)
class ExtremalFamily:
    """Power functions with a support cutoff at ``t = 1``.

    ``power-unit`` is ``t^beta`` on ``(0, 1]``; ``power-tail`` is ``t^beta``
    on ``[1, inf)``; ``power-two`` is ``t^beta`` on ``(0, 1]`` plus
    ``t^beta2`` on ``(1, inf)``; ``power-plain`` is ``t^beta`` with no
    cutoff, meant for integrals over the unit interval.
    """

    kind: str
    beta: float
    beta2: Optional[float] = None

    def __post_init__(self):
        if self.kind not in EXTREMAL_KINDS:
            raise ValueError(f"kind must be one of {EXTREMAL_KINDS}")
        if not math.isfinite(self.beta):
            raise ValueError("beta must be finite")
        if self.kind == "power-two" and (self.beta2 is None or not math.isfinite(self.beta2)):
            raise ValueError("power-two needs a finite beta2")


def make_extremal(family: ExtremalFamily) -> LatticeFunction:
    """Lattice function for an extremal family.

    The node ``t = 1`` belongs to ``(0, 1]``, and ``power-tail`` includes it
    as its left end, matching the closed interval ``[1, inf)``.
    """
    b, b2, kind = family.beta, family.beta2, family.kind
    name = f"{kind}(beta={b}" + (f", beta2={b2})" if b2 is not None else ")")

    if kind == "power-unit":
        def ev(t):
            return np.where(t <= 1.0, _pow(t, b), 0.0)

        def log_ev(lt):
            return np.where(lt <= 0.0, b * lt, -np.inf), 1.0
        return LatticeFunction(ev, "nonneg", "unit", log_ev, name)
    if kind == "power-tail":
        def ev(t):
            return np.where(t >= 1.0, _pow(t, b), 0.0)

        def log_ev(lt):
            return np.where(lt >= 0.0, b * lt, -np.inf), 1.0
        return LatticeFunction(ev, "nonneg", "tail", log_ev, name)
    if kind == "power-two":
        def ev(t):
            return np.where(t <= 1.0, _pow(t, b), _pow(t, b2))

        def log_ev(lt):
            return np.where(lt <= 0.0, b * lt, b2 * lt), 1.0
        return LatticeFunction(ev, "positive", "all", log_ev, name)

    def ev(t):
        return _pow(t, b)

    def log_ev(lt):
        return b * np.asarray(lt), 1.0
    return LatticeFunction(ev, "positive", "all", log_ev, name)


def _pow(t, b):
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        return np.power(t, b)


def _tail_scan(f: LatticeFunction, log_x: float, params: QParams, *, upward: bool,
               start: int, label: str) -> _series.ScanResult:
    lq = params.log_q
    step = 1 if upward else -1

    def block(ks):
        la, sg = f.log_samples(log_x + ks * lq)
        return ks * lq + la, sg

    return _series.scan(block, params, start=start, step=step,
                        label=label, tail_name="small-t" if upward else "large-t",
                        growth_check=not upward)


def _combine(parts, factor, n_extra=0) -> SeriesResult:
    """Scale and add scan results computed with a common prefactor."""
    vals = [p.value() for p in parts]
    errs = [p.abs_error() for p in parts]
    value = factor * math.fsum(vals)
    err = abs(factor) * math.fsum(errs) + 2 * _series.EPS * abs(value)
    return SeriesResult(value, err, sum(p.n for p in parts) + n_extra, True)


def jackson_integral(f: LatticeFunction, x: float, params: QParams) -> SeriesResult:
    """``(1-q) x sum_{k>=0} q^k f(x q^k)``, the Jackson integral over ``(0, x]``.

    >>> jackson_integral(make_extremal(ExtremalFamily("power-unit", 2.0)), 1.0,
    ...                  QParams(0.5)).value
    0.5714285714285714
    """
    if not x > 0:
        raise DomainError("jackson_integral needs x > 0")
    log_x = math.log(x)
    if f.support == "tail" and x < 1:
        return SeriesResult(0.0, 0.0, 0, True)
    if f.support == "tail":
        # nodes x q^k >= 1 only
        k_hi = math.floor(log_x / -params.log_q + 1e-9)
        ks = np.arange(0, k_hi + 1)
        la, sg = f.log_samples(log_x + ks * params.log_q)
        terms = sg * np.exp(ks * params.log_q + la)
        value = (1 - params.q) * x * math.fsum(terms)
        err = 8 * _series.EPS * (1 - params.q) * x * float(np.abs(terms).sum())
        return SeriesResult(value, err, int(ks.size), True)
    res = _tail_scan(f, log_x, params, upward=True, start=0, label="jackson integral")
    return _combine([res], (1 - params.q) * x)


def improper_integral(f: LatticeFunction, params: QParams) -> SeriesResult:
    """``(1-q) sum_{k in Z} q^k f(q^k)``, the integral over ``(0, inf)``.

    The ``k -> +inf`` (small-t) and ``k -> -inf`` (large-t) tails are
    truncated independently; a failure names the offending tail.
    """
    parts = []
    if f.support != "tail":
        parts.append(_tail_scan(f, 0.0, params, upward=True, start=0,
                                label="improper integral"))
    else:
        # only the node t = 1 lies in (0, 1] and in the support
        la, sg = f.log_samples(np.zeros(1))
        parts.append(_Point(float(sg[0] * math.exp(la[0]))))
    if f.support != "unit":
        parts.append(_tail_scan(f, 0.0, params, upward=False, start=-1,
                                label="improper integral"))
    return _combine(parts, 1 - params.q)


class _Point:
    """A single exact lattice term, shaped like a scan result."""

    n = 1

    def __init__(self, v):
        self.v = v

    def value(self):
        return self.v

    def abs_error(self):
        return 0.0


def interval_integral(f: LatticeFunction, a: float, b: float, params: QParams) -> SeriesResult:
    """``int_a^b f d_qt = int_0^b - int_0^a``; ``b = inf`` uses the improper integral."""
    if not (0 < a < b):
        raise DomainError("interval_integral needs 0 < a < b")
    upper = improper_integral(f, params) if math.isinf(b) else jackson_integral(f, b, params)
    lower = jackson_integral(f, a, params)
    value = upper.value - lower.value
    return SeriesResult(value, upper.abs_error + lower.abs_error + 2 * _series.EPS * abs(value),
                        upper.terms_used + lower.terms_used, True)
