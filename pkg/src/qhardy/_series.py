"""Blocked summation engine for lattice series.

Terms are produced in blocks as ``(log|term|, sign)`` so that series whose
individual lattice samples over- or underflow (t = q^k with |k| ~ 10^6) can
still be summed when the terms themselves are moderate.  All accumulation
uses error-free transformations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import EvaluationError, NonConvergent
from .params import QParams, SeriesResult

EPS = float(np.finfo(float).eps)
TINY = 1e-300
MIN_TERMS = 32
FIRST_BLOCK = 64
MAX_BLOCK = 16384
# widest span of log-magnitudes summed in one linear chunk
LOG_RANGE = 600.0


def compensated_cumsum(x, start=0.0):
    """Running sums ``start + x[0] + ... + x[i]`` with TwoSum error recovery.

    ``np.cumsum`` accumulates sequentially, so the rounding error of every
    partial addition is recovered exactly and re-added in a second pass.
    """
    x = np.asarray(x, dtype=float)
    if x.size == 0:
        return x.copy()
    y = np.empty(x.size + 1)
    y[0] = start
    y[1:] = x
    s = np.cumsum(y)
    a, t = s[:-1], s[1:]
    bb = t - a
    err = (a - (t - bb)) + (x - bb)
    return t + np.cumsum(err)


def suffix_sums(x, start=0.0):
    """``out[i] = start + sum(x[i:])``, compensated."""
    x = np.asarray(x, dtype=float)
    return compensated_cumsum(x[::-1], start)[::-1]


def suffix_log_sums(log_terms, log_start=-np.inf):
    """Logarithms of suffix sums of positive terms given by their logs.

    ``out[i] = log(exp(log_start) + sum_{k >= i} exp(log_terms[k]))``.
    The array is processed from its end in chunks whose log-magnitudes span
    at most ``LOG_RANGE``, each chunk summed linearly after rescaling.
    """
    lw = np.asarray(log_terms, dtype=float)
    out = np.empty_like(lw)
    carry = float(log_start)
    hi = lw.size
    while hi > 0:
        lo = _chunk_start(lw, hi, carry)
        seg = lw[lo:hi]
        finite = seg[np.isfinite(seg)]
        ref = max(finite.max() if finite.size else -np.inf, carry)
        if not np.isfinite(ref):
            out[lo:hi] = -np.inf
            hi = lo
            continue
        m = np.exp(seg - ref)
        s = suffix_sums(m, math.exp(carry - ref))
        with np.errstate(divide="ignore"):
            out[lo:hi] = np.log(s) + ref
        carry = float(out[lo])
        hi = lo
    return out


def _chunk_start(lw, hi, carry):
    seg = lw[:hi][::-1]
    vals = np.where(np.isfinite(seg), seg, np.nan)
    if np.isfinite(carry):
        vals = np.concatenate(([carry], vals))
        offset = 1
    else:
        offset = 0
    if np.all(np.isnan(vals)):
        return 0
    vmax = np.fmax.accumulate(vals)
    vmin = np.fmin.accumulate(vals)
    bad = np.nonzero(vmax - vmin > LOG_RANGE)[0]
    if bad.size == 0:
        return 0
    n_ok = bad[0] - offset  # elements of seg that fit
    return hi - max(n_ok, 1)


@dataclass
class ScanResult:
    """Terms of a truncated series, stored as ``exp(scale) * terms``."""

    terms: np.ndarray
    scale: float
    tail: float
    abs_sum: float
    extra: float = 0.0

    @property
    def n(self) -> int:
        return int(self.terms.size)

    def total(self) -> float:
        return math.fsum(self.terms)

    def value(self) -> float:
        return _scaled(self.total(), self.scale)

    def log_value(self) -> float:
        s = self.total()
        if s <= 0:
            return -math.inf
        return math.log(s) + self.scale

    def abs_error(self) -> float:
        return _scaled(self.tail + 8 * EPS * self.abs_sum + self.extra, self.scale)

    def as_result(self) -> SeriesResult:
        return SeriesResult(self.value(), self.abs_error(), self.n, True)


def _scaled(x, scale):
    if x == 0:
        return 0.0
    return math.copysign(math.exp(math.log(abs(x)) + scale), x)


def _run_lengths(flags, run_in):
    pos = np.arange(flags.size)
    last_false = np.where(flags, -1 - run_in, pos)
    last_false = np.maximum.accumulate(last_false)
    return pos - last_false


def scan(block_fn, params: QParams, *, start=0, step=1, limit=None,
         label="series", tail_name=None, growth_check=False,
         min_terms=MIN_TERMS) -> ScanResult:
    """Sum ``block_fn`` terms over ``k = start, start+step, ...`` until the
    stopping rule fires.

    ``block_fn(ks)`` returns ``(log|t_k|, sign_k)`` for an index array; the
    sign may be ``None`` for non-negative series.  An optional third entry
    gives a per-term relative error that is carried into ``abs_error``.  Stops once
    ``consecutive_small`` successive terms are below ``eps_tail`` times the
    running partial sum (never before ``min_terms`` terms), then bounds the
    remainder by geometric extrapolation of the last observed ratio.
    """
    if limit is None:
        limit = params.k_max + 1
    c = params.consecutive_small
    chunks = []
    scale = None
    partial = 0.0
    extra = 0.0
    run = 0
    grow_run = 0
    prev_la = math.nan
    prev_d = math.nan
    n = 0
    size = FIRST_BLOCK
    while n < limit:
        m = min(size, limit - n)
        idx = np.arange(n, n + m)
        ks = start + step * idx
        out = block_fn(ks)
        la, sg = out[0], out[1]
        rel = out[2] if len(out) > 2 else None
        la = np.asarray(la, dtype=float)
        if np.isnan(la).any():
            raise EvaluationError(f"{label}: non-finite lattice term")
        if np.isposinf(la).any():
            raise NonConvergent(f"{label}: terms overflow ({tail_name or 'tail'} diverges)",
                                tail_name)
        finite = la[np.isfinite(la)]
        if finite.size:
            bmax = float(finite.max())
            if scale is None:
                scale = bmax
            elif bmax > scale + LOG_RANGE:
                f = math.exp(scale - bmax)
                chunks = [ch * f for ch in chunks]
                partial *= f
                extra *= f
                scale = bmax
        ref = 0.0 if scale is None else scale
        x = np.exp(la - ref)
        if sg is not None:
            x = x * sg
        cs = partial + np.cumsum(x)
        small = np.abs(x) < params.eps_tail * np.maximum(np.abs(cs), TINY)
        runs = _run_lengths(small, run)
        ok = (runs >= c) & (idx >= min_terms - 1)
        stop = int(np.argmax(ok)) if ok.any() else -1

        if growth_check:
            with np.errstate(invalid="ignore"):
                d = np.diff(np.concatenate(([prev_la], la)))
                dprev = np.concatenate(([prev_d], d[:-1]))
                rising = np.isfinite(d) & (d >= 0) & ~(d < dprev - 1e-12)
            gruns = _run_lengths(rising, grow_run)
            bad = (gruns >= c) & (idx >= min_terms - 1)
            if bad.any() and (stop < 0 or int(np.argmax(bad)) < stop):
                raise NonConvergent(
                    f"{label}: {tail_name or 'tail'} terms are non-decreasing; series diverges",
                    tail_name)
            grow_run = int(gruns[-1])
            prev_d = float(d[-1])
            prev_la = float(la[-1])

        if stop >= 0:
            x = x[: stop + 1]
            if rel is not None:
                extra += float(np.sum(np.abs(x) * np.asarray(rel)[: stop + 1]))
            chunks.append(x)
            terms = np.concatenate(chunks)
            return ScanResult(terms, ref, _tail_estimate(terms, c),
                              float(np.abs(terms).sum()), extra)
        if rel is not None:
            extra += float(np.sum(np.abs(x) * rel))
        chunks.append(x)
        partial = float(cs[-1])
        run = int(runs[-1])
        n += m
        size = min(2 * size, MAX_BLOCK)
    raise NonConvergent(f"{label}: no convergence within {limit} terms"
                        + (f" ({tail_name} tail)" if tail_name else ""), tail_name)


def single_term(block_fn, k) -> ScanResult:
    """A one-term "series" at index ``k``, for sums known to stop there."""
    out = block_fn(np.array([k]))
    la = float(np.asarray(out[0])[0])
    sg = 1.0 if out[1] is None else float(np.asarray(out[1])[0])
    rel = float(np.asarray(out[2])[0]) if len(out) > 2 else 0.0
    if la == -math.inf:
        return ScanResult(np.zeros(1), 0.0, 0.0, 0.0)
    return ScanResult(np.array([sg]), la, 0.0, 1.0, rel)


def _tail_estimate(terms, c):
    last = np.abs(terms[-c:])
    if not last.any():
        return 0.0
    a, b = last[0], last[-1]
    if a > 0 and b > 0 and last.size > 1:
        r = (b / a) ** (1.0 / (last.size - 1))
        if r < 1:
            return float(b * r / (1 - r))
    return float(c * last.max())
