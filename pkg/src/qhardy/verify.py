"""Registry of the q-Hardy type inequalities and the checks run on them.

Every case is oriented so that it reads ``lhs <= rhs``:

=================  ==========================  =================================
case               lhs                         rhs
=================  ==========================  =================================
T3.1-upper/-neg    L(f) over (0, inf)          C * int_0^inf f^p
T3.1-reverse       int_0^inf f^p               [gamma]^p * L(f)
T3.2               L(f) over (0, 1]            C * int_0^1 f^p
T3.3-5.6           int_0^1 f^p (1 - t^gamma)   [gamma]^p * L(f) over (0, 1]
T3.3-5.7           int_0^1 f^p                 [gamma]^p * (L(f) over (0, 1]
                                               + (int_0^1 t^-alpha f)^p / [gamma])
T4.1 / C4.2        int (I^alpha f / x^alpha)^p C * int f^p, full line / (0, 1]
=================  ==========================  =================================

``ratio = lhs / (rhs / constant)`` never exceeds the sharp constant, and the
sweeps push it toward the constant along the extremal families.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import List, Optional

import numpy as np

from .corpus import corpus_for
from .errors import NonConvergent, ParameterError, QHardyError
from .params import QParams, SeriesResult
from .qcore import log_q_gamma, q_number
from .qintegral import ExtremalFamily, LatticeFunction, jackson_integral, make_extremal
from .qoperators import OperatorParams, hardy_lhs, pnorm_p, rl_lhs

__all__ = [
    "CASE_IDS",
    "ALIASES",
    "canonical_case_id",
    "InequalityCase",
    "VerificationReport",
    "SharpnessSweep",
    "sharp_constant",
    "classical_constant",
    "verify_case",
    "verify_corpus",
    "sharpness_sweep",
    "remark_2_2_check",
    "classical_limit_scan",
    "continuous_limit_check",
    "BUDGET_FACTOR",
]

CASE_IDS = ("T3.1-upper", "T3.1-neg", "T3.1-reverse", "T3.2",
            "T3.3-5.6", "T3.3-5.7", "T4.1", "C4.2")
ALIASES = {
    "T3.3-corrected-(5.6)": "T3.3-5.6",
    "T3.3-corrected-(5.7)": "T3.3-5.7",
    "T3.3-(5.6)": "T3.3-5.6",
    "T3.3-(5.7)": "T3.3-5.7",
}
BUDGET_FACTOR = 10.0
# sweep truncation horizons never exceed this many lattice steps
K_CAP = 4_000_000


def canonical_case_id(theorem_id: str) -> str:
    cid = ALIASES.get(theorem_id, theorem_id)
    if cid not in CASE_IDS:
        raise ParameterError(f"unknown case {theorem_id!r}; expected one of {CASE_IDS}")
    return cid


def _window_error(cid, p, alpha):
    """Reason the parameters fall outside the case's window, or ``None``."""
    if not (math.isfinite(p) and math.isfinite(alpha)) or p == 0:
        return "p and alpha must be finite with p != 0"
    hardy_bound = (p - 1) / p
    if cid in ("T4.1", "C4.2"):
        if not p > 1:
            return f"{cid} needs p > 1"
        if not alpha > 0:
            return f"{cid} needs alpha > 0"
        return None
    if cid == "T3.1-upper" and not p >= 1:
        return "T3.1-upper needs p >= 1"
    if cid == "T3.1-neg" and not p < 0:
        return "T3.1-neg needs p < 0"
    if cid in ("T3.1-reverse", "T3.3-5.6", "T3.3-5.7") and not 0 < p < 1:
        return f"{cid} needs 0 < p < 1"
    if cid == "T3.2" and not (p >= 1 or p < 0):
        return "T3.2 needs p >= 1 or p < 0"
    if not alpha < hardy_bound:
        return f"{cid} needs alpha < (p-1)/p = {hardy_bound:g}"
    return None


@dataclass(frozen=True)
class InequalityCase:
    """A registered inequality at one parameter point; the window is enforced."""

    theorem_id: str
    q: float
    p: float
    alpha: float

    def __post_init__(self):
        object.__setattr__(self, "theorem_id", canonical_case_id(self.theorem_id))
        if not 0 < self.q < 1:
            raise ParameterError(f"q must lie in (0,1), got {self.q!r}")
        why = _window_error(self.theorem_id, self.p, self.alpha)
        if why:
            raise ParameterError(why)

    @property
    def gamma(self) -> float:
        return (self.p - 1) / self.p - self.alpha

    @property
    def p_conj(self) -> float:
        return self.p / (self.p - 1)

    @property
    def domain(self) -> str:
        return "unit-interval" if self.theorem_id in ("T3.2", "T3.3-5.6", "T3.3-5.7", "C4.2") \
            else "full-line"

    def to_dict(self):
        return {"theorem_id": self.theorem_id, "q": self.q, "p": self.p, "alpha": self.alpha}


def _nan_to_none(x):
    return None if isinstance(x, float) and not math.isfinite(x) else x


@dataclass(frozen=True)
class VerificationReport:
    """Outcome of one case on one function."""

    case: InequalityCase
    lhs: float
    rhs: float
    constant: float
    ratio: float
    satisfied: bool
    margin: float
    error_budget: float
    function: str = ""
    converged: bool = True
    degenerate: bool = False
    message: str = ""

    @property
    def strict(self) -> bool:
        """Margin exceeds the error budget."""
        return self.converged and self.margin > self.error_budget

    def to_dict(self):
        d = asdict(self)
        d["case"] = self.case.to_dict()
        return {k: _nan_to_none(v) for k, v in d.items()}


@dataclass(frozen=True)
class SharpnessSweep:
    """Ratios along an extremal family approaching its singular endpoint."""

    case: InequalityCase
    schedule: List[float]
    ratios: List[float]
    sup_ratio: float
    constant: float
    relative_gap: float
    errors: List[float] = field(default_factory=list)
    family: str = ""
    beta2: Optional[float] = None
    beta2_alt: Optional[float] = None
    ratios_alt: List[float] = field(default_factory=list)
    failures: List[str] = field(default_factory=list)

    def within_bound(self, factor: float = BUDGET_FACTOR) -> bool:
        """Every finite ratio is at most the constant plus its error budget."""
        return all(not math.isfinite(r) or r <= self.constant + factor * e
                   for r, e in zip(self.ratios, self.errors))

    def to_dict(self):
        d = asdict(self)
        d["case"] = self.case.to_dict()
        for k in ("ratios", "ratios_alt", "errors"):
            d[k] = [_nan_to_none(x) for x in d[k]]
        return {k: _nan_to_none(v) if not isinstance(v, list) else v for k, v in d.items()}


def sharp_constant(case: InequalityCase, params: Optional[QParams] = None) -> float:
    """The sharp constant of ``case``.

    ``1/[gamma]_q^p`` for the Hardy upper bounds, ``[gamma]_q^p`` for the
    reverse ones, ``(Gamma_q(1-1/p) / Gamma_q(alpha+1-1/p))^p`` for the
    Riemann-Liouville ones.
    """
    params = params or QParams(case.q)
    cid, p = case.theorem_id, case.p
    if cid in ("T4.1", "C4.2"):
        la, _ = log_q_gamma(1 - 1 / p, params)
        lb, _ = log_q_gamma(case.alpha + 1 - 1 / p, params)
        return math.exp(p * (la - lb))
    g = q_number(case.gamma, params)
    if cid in ("T3.1-reverse", "T3.3-5.6", "T3.3-5.7"):
        return g ** p
    return g ** -p


def classical_constant(case: InequalityCase) -> float:
    """The q -> 1 counterpart of :func:`sharp_constant`."""
    cid, p = case.theorem_id, case.p
    if cid in ("T4.1", "C4.2"):
        return (math.gamma(1 - 1 / p) / math.gamma(case.alpha + 1 - 1 / p)) ** p
    if cid in ("T3.1-reverse", "T3.3-5.6", "T3.3-5.7"):
        return case.gamma ** p
    return case.gamma ** -p


def _gap_weighted(f: LatticeFunction, gamma: float, p: float) -> LatticeFunction:
    """``t -> f(t) (1 - t^gamma)^(1/p)``, so that its p-integral carries the
    weight ``1 - t^gamma`` (zero at the node ``t = 1``)."""

    def log_ev(lt):
        la, sg = f.log_samples(lt)
        with np.errstate(divide="ignore"):
            lw = np.log(-np.expm1(gamma * np.minimum(lt, 0.0))) / p
        return la + lw, sg

    def ev(t):
        return f(t) * np.power(np.clip(1 - np.power(t, gamma), 0, None), 1 / p)

    return LatticeFunction(ev, "nonneg", "unit", log_ev, f"{f.name}*(1-t^gamma)^(1/p)")


def _weighted_mean_integral(f: LatticeFunction, alpha: float, params: QParams) -> SeriesResult:
    """``int_0^1 t^-alpha f(t) d_qt``."""

    def log_ev(lt):
        la, sg = f.log_samples(lt)
        return la - alpha * np.asarray(lt), sg

    g = LatticeFunction(lambda t: f(t) * np.power(t, -alpha), f.positivity, f.support,
                        log_ev, f"t^-alpha*{f.name}")
    return jackson_integral(g, 1.0, params)


def _sides(case: InequalityCase, f: LatticeFunction, params: QParams, constant: float):
    """``(lhs, rhs, base, error)`` with ``rhs = constant * base``."""
    p, a, cid = case.p, case.alpha, case.theorem_id
    op = OperatorParams(a, p, case.domain)
    if cid in ("T4.1", "C4.2"):
        L = rl_lhs(f, op, params)
        N = pnorm_p(f, p, case.domain, params)
        return L.value, constant * N.value, N.value, L.abs_error + constant * N.abs_error
    if cid in ("T3.1-upper", "T3.1-neg", "T3.2"):
        L = hardy_lhs(f, op, params)
        N = pnorm_p(f, p, case.domain, params)
        return L.value, constant * N.value, N.value, L.abs_error + constant * N.abs_error
    L = hardy_lhs(f, op, params)
    if cid == "T3.1-reverse":
        N = pnorm_p(f, p, "full-line", params)
        return N.value, constant * L.value, L.value, N.abs_error + constant * L.abs_error
    if cid == "T3.3-5.6":
        N = pnorm_p(_gap_weighted(f, case.gamma, p), p, "unit-interval", params)
        return N.value, constant * L.value, L.value, N.abs_error + constant * L.abs_error
    # T3.3-5.7: boundary term on the node x = 1
    N = pnorm_p(f, p, "unit-interval", params)
    M = _weighted_mean_integral(f, a, params)
    g = q_number(case.gamma, params)
    bterm = M.value ** p / g
    berr = abs(p) * M.abs_error / M.value * bterm if M.value > 0 else 0.0
    base = L.value + bterm
    return N.value, constant * base, base, N.abs_error + constant * (L.abs_error + berr)


def verify_case(case: InequalityCase, f: LatticeFunction,
                params: Optional[QParams] = None) -> VerificationReport:
    """Evaluate both sides of ``case`` on ``f``.

    ``satisfied`` means ``lhs <= rhs + error_budget``, the budget being ten
    times the tracked truncation and rounding error.
    """
    params = params or QParams(case.q)
    if not math.isclose(params.q, case.q):
        raise ParameterError("params.q and case.q differ")
    constant = sharp_constant(case, params)
    lhs, rhs, base, err = _sides(case, f, params, constant)
    budget = BUDGET_FACTOR * err
    degenerate = lhs == 0 and rhs == 0
    ratio = lhs / base if base != 0 else math.nan
    return VerificationReport(case, lhs, rhs, constant, ratio, lhs <= rhs + budget,
                              rhs - lhs, budget, f.name, True, degenerate)


def verify_corpus(case: InequalityCase, seed: int = 0,
                  params: Optional[QParams] = None, n_random: int = 3):
    """Run ``case`` over its seeded corpus; non-convergent members are
    reported with ``converged=False`` instead of raising."""
    params = params or QParams(case.q)
    reports = []
    for f in corpus_for(case.theorem_id, case.q, case.p, case.alpha, seed, n_random):
        try:
            reports.append(verify_case(case, f, params))
        except NonConvergent as exc:
            reports.append(VerificationReport(case, math.nan, math.nan,
                                              sharp_constant(case, params), math.nan,
                                              False, math.nan, math.nan, f.name,
                                              converged=False, message=str(exc)))
    return reports


def _sweep_family(case: InequalityCase, delta: float):
    """``(kind, endpoint, signed step scale)`` of the case's extremal family."""
    cid, p, a = case.theorem_id, case.p, case.alpha
    b_star = -1.0 / p
    if cid == "T3.1-reverse":
        # beta in (alpha - 1, -1/p), from below
        return "power-tail", b_star, -min(delta, 0.5 * (b_star - (a - 1)))
    if cid == "T3.1-neg":
        return "power-two", b_star, -min(delta, 0.5 * (b_star - (a - 1)))
    if cid == "T3.2" and p < 0:
        return "power-plain", b_star, -min(delta, 0.5 * (b_star - (a - 1)))
    if cid in ("T3.2", "T3.3-5.6", "T3.3-5.7", "C4.2"):
        return "power-plain", b_star, delta
    return "power-unit", b_star, delta


def sweep_params(params: QParams, p: float, distance: float, cap: int = K_CAP) -> QParams:
    """Truncation policy for an extremal member at ``distance`` from the endpoint.

    Terms decay like ``q^(|p| distance k)``, so the horizon grows like
    ``1/distance``.
    """
    need = math.ceil(60.0 / (abs(p) * distance * -params.log_q))
    k = min(cap, max(params.k_max, need))
    return params.with_(k_max=k)


def sharpness_sweep(case: InequalityCase, params: Optional[QParams] = None, steps: int = 10,
                    delta: float = 0.5, beta2: float = 10.0,
                    beta2_alt: Optional[float] = 20.0) -> SharpnessSweep:
    """Ratios along ``beta_j = beta* +- delta 2^-j`` for ``j < steps``.

    Non-convergent members are recorded as ``nan`` with a message and do
    not abort the sweep.  For the negative-p case the two-parameter family
    uses ``beta2`` and is re-run at ``beta2_alt`` to expose its influence.
    """
    params = params or QParams(case.q)
    constant = sharp_constant(case, params)
    kind, b_star, scale = _sweep_family(case, delta)
    two = kind == "power-two"
    schedule, ratios, errors, alt, failures = [], [], [], [], []
    for j in range(steps):
        dist = abs(scale) * 2.0 ** -j
        beta = b_star + math.copysign(dist, scale)
        sp = sweep_params(params, case.p, dist)
        schedule.append(beta)
        for b2, out in ((beta2, ratios), (beta2_alt, alt)):
            if b2 is None or (out is alt and not two):
                continue
            fam = ExtremalFamily(kind, beta, b2 if two else None)
            try:
                rep = verify_case(case, make_extremal(fam), sp)
                out.append(rep.ratio)
                if out is ratios:
                    base = rep.rhs / constant
                    errors.append(rep.error_budget / BUDGET_FACTOR / base if base else math.nan)
            except QHardyError as exc:
                out.append(math.nan)
                if out is ratios:
                    errors.append(math.nan)
                failures.append(f"beta={beta!r}: {exc}")
    finite = [r for r in ratios if math.isfinite(r)]
    sup = max(finite) if finite else math.nan
    return SharpnessSweep(case, schedule, ratios, sup, constant,
                          (constant - sup) / constant, errors, kind,
                          beta2 if two else None, beta2_alt if two else None, alt, failures)


def remark_2_2_check(p: float, alpha: float, q: float, tol: float = 1e-12) -> str:
    """Order ``1/[gamma]_q`` against ``p/(p - alpha p - 1)``.

    Returns ``"q-smaller"``, ``"q-larger"`` or ``"equal"`` (within ``tol``
    relative).
    """
    if not (p >= 1 or p < 0):
        raise ParameterError("the ordering is stated for p >= 1 or p < 0")
    if not alpha < 1 - 1 / p:
        raise ParameterError("the ordering needs alpha < 1 - 1/p")
    params = QParams(q)
    qc = 1.0 / q_number((p - 1) / p - alpha, params)
    cc = p / (p - alpha * p - 1)
    if abs(qc - cc) <= tol * max(abs(qc), abs(cc)):
        return "equal"
    return "q-smaller" if qc < cc else "q-larger"


def classical_limit_scan(case: InequalityCase, q_list):
    """Rows ``(q, q-constant, classical constant, relative gap)``.

    ``case.q`` is ignored; each row uses its own ``q``.
    """
    q_list = list(q_list)
    if any(not 0 < q < 1 for q in q_list):
        raise ParameterError("every q must lie in (0,1)")
    if any(b <= a for a, b in zip(q_list, q_list[1:])):
        raise ParameterError("q_list must be increasing")
    classical = classical_constant(case)
    rows = []
    for q in q_list:
        c = sharp_constant(InequalityCase(case.theorem_id, q, case.p, case.alpha))
        rows.append((q, c, classical, abs(c - classical) / classical))
    return rows


def continuous_limit_check(p: float, alpha: float, q: float = 0.999, n: int = 200_000):
    """Classical inequality for ``f = 1`` on ``[0, 1]`` against its lattice form.

    Returns a dict with midpoint-rule values of
    ``int_0^1 (1 - t^gamma) dt`` and
    ``gamma^p int_0^1 x^(p(alpha-1)) (int_0^x t^-alpha dt)^p dx``, and the
    matching sides of the lattice report for the weighted reverse case at
    ``q``.
    """
    case = InequalityCase("T3.3-5.6", q, p, alpha)
    g = case.gamma
    t = (np.arange(n) + 0.5) / n
    lhs_c = math.fsum(1 - t ** g) / n
    inner = t ** (1 - alpha) / (1 - alpha)
    rhs_c = g ** p * math.fsum(t ** (p * (alpha - 1)) * inner ** p) / n
    f = make_extremal(ExtremalFamily("power-unit", 0.0))
    rep = verify_case(case, f)
    return {
        "classical_lhs": lhs_c,
        "classical_rhs": rhs_c,
        "lattice_lhs": rep.lhs,
        "lattice_rhs": rep.rhs,
        "lhs_rel_diff": abs(rep.lhs - lhs_c) / lhs_c,
        "rhs_rel_diff": abs(rep.rhs - rhs_c) / rhs_c,
        "classical_holds": lhs_c <= rhs_c,
    }
