"""Seeded test functions for the inequality checks.

Three kinds of member, each with a log-domain evaluator:

* extremal family members with the parameter kept well inside its window,
* finite mixtures of power atoms ``c t^beta`` cut off at a lattice point
  ``q^s``, either on ``(0, q^s]`` ("head" atoms) or on ``[q^s, inf)``
  ("tail" atoms), with exponents drawn from the window that keeps both sides
  of the inequality finite,
* piecewise-constant functions with random values on a window of lattice
  cells.

For ``p < 0`` every member is strictly positive: atoms come in pairs that
together cover the whole half-line.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .qintegral import ExtremalFamily, LatticeFunction, make_extremal

__all__ = ["Atom", "mixture", "windowed", "corpus_for"]


@dataclass(frozen=True)
class Atom:
    """``coef * t^beta`` on ``(0, q^s]`` (``side="head"``), ``[q^s, inf)``
    (``side="tail"``), or on the whole half-line (``side="all"``)."""

    coef: float
    beta: float
    side: str
    s: int = 0


def mixture(atoms, q: float, name: str = "mixture") -> LatticeFunction:
    """Sum of power atoms as a lattice function."""
    atoms = tuple(atoms)
    lq = math.log(q)
    coefs = np.array([math.log(a.coef) for a in atoms])
    betas = np.array([a.beta for a in atoms])
    cuts = np.array([a.s * lq for a in atoms])
    heads = np.array([a.side == "head" for a in atoms])
    tails = np.array([a.side == "tail" for a in atoms])

    def log_ev(lt):
        lt = np.asarray(lt, dtype=float)
        x = lt[..., None]
        tol = 1e-9 * np.maximum(1.0, np.abs(x))
        on = ~((heads & (x > cuts + tol)) | (tails & (x < cuts - tol)))
        terms = np.where(on, coefs + betas * x, -np.inf)
        return np.logaddexp.reduce(terms, axis=-1), 1.0

    def ev(t):
        with np.errstate(divide="ignore", over="ignore", under="ignore"):
            la, _ = log_ev(np.log(np.asarray(t, dtype=float)))
            return np.exp(la)

    if all(a.side == "head" for a in atoms) and all(a.s >= 0 for a in atoms):
        support = "unit"
    elif all(a.side == "tail" for a in atoms) and all(a.s <= 0 for a in atoms):
        support = "tail"
    else:
        support = "all"
    head_s = [a.s for a in atoms if a.side == "head"]
    tail_s = [a.s for a in atoms if a.side == "tail"]
    covered = any(a.side == "all" for a in atoms) or (
        bool(head_s) and bool(tail_s) and min(head_s) <= max(tail_s))
    return LatticeFunction(ev, "positive" if covered else "nonneg", support, log_ev, name)


def windowed(values, k0: int, q: float, name: str = "windowed") -> LatticeFunction:
    """``values[i]`` on the lattice cell ``(q^(k0+i+1), q^(k0+i)]``, zero elsewhere."""
    values = np.asarray(values, dtype=float)
    if np.any(values < 0):
        raise ValueError("windowed corpus members are non-negative")
    lq = math.log(q)
    with np.errstate(divide="ignore"):
        logs = np.log(values)

    def log_ev(lt):
        k = np.floor(np.asarray(lt, dtype=float) / lq + 1e-9).astype(np.int64) - k0
        inside = (k >= 0) & (k < values.size)
        return np.where(inside, logs[np.clip(k, 0, values.size - 1)], -np.inf), 1.0

    def ev(t):
        with np.errstate(divide="ignore", under="ignore"):
            la, _ = log_ev(np.log(np.asarray(t, dtype=float)))
            return np.exp(la)

    support = "unit" if k0 >= 0 else "all"
    return LatticeFunction(ev, "nonneg", support, log_ev, name)


def _case_rng(seed, key):
    return np.random.default_rng([int(seed)] + [int(round(x * 1000)) % (2 ** 31) for x in key])


def _uniform(rng, lo, hi):
    return float(rng.uniform(lo, hi))


def corpus_for(theorem_id: str, q: float, p: float, alpha: float, seed: int = 0,
               n_random: int = 3):
    """Corpus members for one grid cell, deterministic in ``seed`` and the cell.

    Exponent windows: a head atom needs ``1 + p beta > 0`` for a finite
    p-integral near 0, a tail atom needs ``1 + p beta < 0`` near infinity,
    and inner integrals need ``1 - alpha + beta > 0``.
    """
    rng = _case_rng(seed, (len(theorem_id), sum(map(ord, theorem_id)), q, p, alpha))
    b_star = -1.0 / p
    unit = theorem_id in ("T3.2", "T3.3-5.6", "T3.3-5.7", "C4.2")
    members = []

    if p > 0:
        head_lo, head_hi = b_star + 0.1, b_star + 2.5
        tail_lo, tail_hi = max(b_star - 2.5, alpha - 1 + 0.1), b_star - 0.1
        if theorem_id in ("T4.1", "C4.2"):
            tail_lo = b_star - 2.5
    else:
        # strictly positive inputs: head exponents below -1/p, tail above
        head_lo, head_hi = max(alpha - 1 + 0.1, b_star - 2.5), b_star - 0.1
        tail_lo, tail_hi = b_star + 0.1, b_star + 2.5

    # extremal members well inside their windows
    if p > 0 and not unit:
        members.append(make_extremal(ExtremalFamily("power-unit", head_lo + 0.4)))
        if tail_hi > tail_lo:
            members.append(make_extremal(ExtremalFamily("power-tail", 0.5 * (tail_lo + tail_hi))))
    elif p > 0:
        members.append(make_extremal(ExtremalFamily("power-plain", head_lo + 0.4)))
        members.append(make_extremal(ExtremalFamily("power-unit", head_hi)))
    elif unit:
        members.append(make_extremal(ExtremalFamily("power-plain", 0.5 * (head_lo + head_hi))))
    else:
        members.append(make_extremal(ExtremalFamily("power-two", 0.5 * (head_lo + head_hi),
                                                    0.5 * (tail_lo + tail_hi))))

    for r in range(n_random):
        atoms = []
        n_atoms = int(rng.integers(1, 4))
        for _ in range(n_atoms):
            coef = float(np.exp(rng.normal(0.0, 1.0)))
            if p < 0:
                s = int(rng.integers(-3, 4))
                atoms.append(Atom(coef, _uniform(rng, head_lo, head_hi), "head", s))
                if not unit:
                    atoms.append(Atom(coef * float(rng.uniform(0.2, 5)),
                                      _uniform(rng, tail_lo, tail_hi), "tail", s))
                else:
                    atoms[-1] = Atom(coef, atoms[-1].beta, "all", 0)
            elif unit or tail_hi <= tail_lo or rng.random() < 0.6:
                s = int(rng.integers(0, 6)) if unit else int(rng.integers(-4, 5))
                atoms.append(Atom(coef, _uniform(rng, head_lo, head_hi), "head", s))
            else:
                s = int(rng.integers(-4, 5))
                atoms.append(Atom(coef, _uniform(rng, tail_lo, tail_hi), "tail", s))
        members.append(mixture(atoms, q, name=f"mixture-{r}"))

    if p > 0:
        width = int(rng.integers(3, 40))
        k0 = int(rng.integers(0, 10)) if unit else int(rng.integers(-20, 10))
        vals = rng.exponential(1.0, size=width) * (rng.random(width) < 0.8)
        if not vals.any():
            vals[0] = 1.0
        members.append(windowed(vals, k0, q, name="windowed"))
    return members
