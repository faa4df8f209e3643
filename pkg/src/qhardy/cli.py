"""Command-line interface: ``qhardy constants | verify | sweep | discrete``.

Exit codes: 0 ok, 1 inequality violated, 2 configuration error,
3 numerical non-convergence.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields
from typing import List, Optional

import numpy as np

from . import __version__
from . import qdiscrete as qd
from .errors import NonConvergent, ParameterError, QHardyError
from .params import QParams
from .qoperators import rl_kernel
from .verify import (BUDGET_FACTOR, CASE_IDS, InequalityCase, canonical_case_id,
                     classical_constant, remark_2_2_check, sharp_constant,
                     sharpness_sweep, verify_corpus)

EXIT_OK, EXIT_VIOLATION, EXIT_CONFIG, EXIT_NONCONVERGENT = 0, 1, 2, 3

DEFAULT_Q = (0.3, 0.5, 0.8)
DEFAULT_P = (0.5, 1.0, 2.0, 3.0, -2.0)
DEFAULT_ALPHA = {
    "T3.1-upper": (0.0, -1.0, 0.2),
    "T3.1-neg": (-2.0, 0.0),
    "T3.1-reverse": (-2.0, -3.0),
    "T3.2": (0.0, -1.0),
    "T3.3-5.6": (-2.0,),
    "T3.3-5.7": (-2.0,),
    "T4.1": (0.5, 1.0, 2.0),
    "C4.2": (0.5, 1.0, 2.0),
}
DISCRETE_FORMS = ("3.23", "3.24", "3.25", "3.26", "w1", "w2",
                  "4.12", "4.13", "4.15", "reverse", "3.21", "3.22")
DEFAULT_LAMBDA = (0.5, 1.0)
DEFAULT_MATRIX_ALPHA = (0.5, 1.0, 2.0)
DEFAULT_CLASSICAL_ALPHA = (0.0, 0.25)


class ConfigError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    cases: List[str] = field(default_factory=list)
    q: Optional[List[float]] = None
    p: Optional[List[float]] = None
    alpha: Optional[List[float]] = None
    lam: Optional[List[float]] = None
    forms: List[str] = field(default_factory=list)
    seed: int = 0
    steps: int = 10
    n: Optional[int] = None
    epsilon_sweep: bool = False
    eps_tail: float = 1e-14
    k_max: int = 100_000
    format: Optional[str] = None
    out: Optional[str] = None
    wall_time: bool = False

    def echo(self):
        return {f.name: getattr(self, f.name) for f in fields(self)
                if f.name not in ("out", "wall_time")}


CONFIG_KEYS = {f.name for f in fields(RunConfig)} - {"command"}
CONFIG_ALIASES = {"case": "cases", "lambda": "lam", "form": "forms"}


def _floats(values, name):
    try:
        out = [float(v) for v in values]
    except (TypeError, ValueError):
        raise ConfigError(f"{name} must be a list of numbers")
    if not all(math.isfinite(v) for v in out):
        raise ConfigError(f"{name} values must be finite")
    return out


def _as_list(v):
    return list(v) if isinstance(v, (list, tuple)) else [v]


def build_config(args) -> RunConfig:
    """Merge the config file (if any) with command-line flags, flags winning."""
    raw = {}
    if args.config:
        try:
            with open(args.config) as fh:
                raw = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}")
        if not isinstance(raw, dict):
            raise ConfigError("config must be a flat JSON object")
        raw = {CONFIG_ALIASES.get(k, k): v for k, v in raw.items()}
        unknown = set(raw) - CONFIG_KEYS
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    for key in ("cases", "q", "p", "alpha", "lam", "forms", "seed", "steps", "n",
                "eps_tail", "k_max", "format", "out"):
        v = getattr(args, key, None)
        if v is not None:
            raw[key] = v
    for key in ("epsilon_sweep", "wall_time"):
        if getattr(args, key, False):
            raw[key] = True

    cfg = RunConfig(args.command)
    cases = [c for v in _as_list(raw.get("cases", [])) for c in str(v).split(",") if c]
    try:
        cfg.cases = sorted({canonical_case_id(c) for c in cases}, key=CASE_IDS.index)
    except ParameterError as exc:
        raise ConfigError(str(exc))
    for key in ("q", "p", "alpha", "lam"):
        if key in raw:
            setattr(cfg, key, _floats(_as_list(raw[key]), key))
    if cfg.q is not None:
        for q in cfg.q:
            if not 0 < q < 1:
                raise ConfigError(f"q must lie in (0,1), got {q!r}")
    if cfg.lam is not None and any(v <= 0 for v in cfg.lam):
        raise ConfigError("lambda must be positive")
    forms = [f for v in _as_list(raw.get("forms", [])) for f in str(v).split(",") if f]
    forms = [f.removeprefix("weights-") for f in forms]
    bad = [f for f in forms if f not in DISCRETE_FORMS]
    if bad:
        raise ConfigError(f"unknown discrete form(s) {bad}; expected {DISCRETE_FORMS}")
    cfg.forms = [f for f in DISCRETE_FORMS if f in forms]
    try:
        cfg.seed = int(raw.get("seed", 0))
        cfg.steps = int(raw.get("steps", 10))
        cfg.n = None if raw.get("n") is None else int(raw["n"])
        cfg.eps_tail = float(raw.get("eps_tail", cfg.eps_tail))
        cfg.k_max = int(raw.get("k_max", cfg.k_max))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad numeric setting: {exc}")
    if cfg.steps < 1:
        raise ConfigError("steps must be at least 1")
    if cfg.n is not None and cfg.n < 1:
        raise ConfigError("n must be at least 1")
    cfg.epsilon_sweep = bool(raw.get("epsilon_sweep", False))
    cfg.wall_time = bool(raw.get("wall_time", False))
    cfg.format = raw.get("format")
    if cfg.format not in (None, "json", "csv"):
        raise ConfigError("format must be json or csv")
    cfg.out = raw.get("out")
    try:
        QParams(0.5, eps_tail=cfg.eps_tail, k_max=cfg.k_max)
    except ParameterError as exc:
        raise ConfigError(str(exc))
    return cfg


def _params(cfg, q):
    return QParams(q, eps_tail=cfg.eps_tail, k_max=cfg.k_max)


def _grid(cfg):
    """Ordered ``(case, q, p, alpha)`` cells and the skipped ones with reasons."""
    cells, skipped = [], []
    for cid in cfg.cases or CASE_IDS:
        for q in sorted(cfg.q or DEFAULT_Q):
            for p in sorted(cfg.p or DEFAULT_P):
                for a in sorted(cfg.alpha or DEFAULT_ALPHA[cid]):
                    try:
                        cells.append(InequalityCase(cid, q, p, a))
                    except ParameterError as exc:
                        skipped.append({"theorem_id": cid, "q": q, "p": p, "alpha": a,
                                        "reason": str(exc)})
    return cells, skipped


def _threads():
    try:
        return max(1, int(os.environ.get("QHARDY_NUM_THREADS", "1")))
    except ValueError:
        return 1


def _run_cells(fn, cells):
    """Apply ``fn`` to every cell; results come back in cell order."""
    for c in cells:
        # warm the shared kernel cache before any concurrency
        if isinstance(c, InequalityCase) and c.theorem_id in ("T4.1", "C4.2"):
            rl_kernel(float(c.alpha), float(c.q))
    n = min(_threads(), max(1, len(cells)))
    if n == 1:
        return [fn(c) for c in cells]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, cells))


def _jsonable(x):
    if isinstance(x, float) and not math.isfinite(x):
        return None
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.generic):
        return _jsonable(x.item())
    return x


def _emit(cfg, payload, rows, default_format="json"):
    fmt = cfg.format or default_format
    if fmt == "json":
        text = json.dumps(_jsonable(payload), indent=2) + "\n"
    else:
        buf = io.StringIO()
        if rows:
            w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
            w.writeheader()
            for r in rows:
                w.writerow({k: ("" if v is None else v) for k, v in _jsonable(r).items()})
        text = buf.getvalue()
    if cfg.out:
        with open(cfg.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _payload(cfg, started, results, skipped, errors, extra=None):
    run = {"command": cfg.command, "version": __version__, "seed": cfg.seed,
           "config": cfg.echo(),
           "wall_time": round(time.perf_counter() - started, 3) if cfg.wall_time else None}
    out = {"run": run, "results": results, "skipped": skipped, "errors": errors}
    if extra:
        out.update(extra)
    return out


def _footer(name, n_ok, n_bad, n_err, n_skip):
    print(f"qhardy {name}: {n_ok} passed, {n_bad} violated, {n_err} failed, "
          f"{n_skip} skipped", file=sys.stderr)


def cmd_constants(cfg: RunConfig) -> int:
    started = time.perf_counter()
    cells, skipped = _grid(cfg)

    def row(case):
        try:
            c = sharp_constant(case, _params(cfg, case.q))
        except NonConvergent as exc:
            return {**case.to_dict(), "error": str(exc)}
        order = None
        if case.theorem_id in ("T3.1-upper", "T3.1-neg", "T3.2"):
            order = remark_2_2_check(case.p, case.alpha, case.q)
        return {**case.to_dict(), "gamma": case.gamma, "constant": c,
                "classical": classical_constant(case), "ordering": order}

    rows = _run_cells(row, cells)
    errors = [r for r in rows if "error" in r]
    rows = [r for r in rows if "error" not in r]
    _emit(cfg, _payload(cfg, started, rows, skipped, errors), rows)
    _footer("constants", len(rows), 0, len(errors), len(skipped))
    return EXIT_NONCONVERGENT if errors else EXIT_OK


def cmd_verify(cfg: RunConfig) -> int:
    started = time.perf_counter()
    cells, skipped = _grid(cfg)

    def run(case):
        try:
            reps = verify_corpus(case, cfg.seed, _params(cfg, case.q))
        except QHardyError as exc:
            return [], {**case.to_dict(), "error": f"{type(exc).__name__}: {exc}"}
        return reps, None

    results, errors = [], []
    for reps, err in _run_cells(run, cells):
        if err:
            errors.append(err)
        for r in reps:
            d = r.to_dict()
            case = d.pop("case")
            results.append({**case, "seed": cfg.seed, **d, "strict": r.strict})
    bad = sum(1 for r in results if r["converged"] and not r["satisfied"])
    unconv = sum(1 for r in results if not r["converged"]) + len(errors)
    rows = results
    _emit(cfg, _payload(cfg, started, results, skipped, errors), rows)
    _footer("verify", len(results) - bad - unconv + len(errors), bad, unconv, len(skipped))
    if bad:
        return EXIT_VIOLATION
    return EXIT_NONCONVERGENT if unconv else EXIT_OK


def cmd_sweep(cfg: RunConfig) -> int:
    started = time.perf_counter()
    cells, skipped = _grid(cfg)

    def run(case):
        return sharpness_sweep(case, _params(cfg, case.q), steps=cfg.steps)

    sweeps = _run_cells(run, cells)
    rows, results = [], []
    for s in sweeps:
        results.append(s.to_dict())
        for j, (b, r) in enumerate(zip(s.schedule, s.ratios)):
            rows.append({**s.case.to_dict(), "family": s.family, "step": j, "beta": b,
                         "ratio": r, "constant": s.constant,
                         "relative_gap": (s.constant - r) / s.constant,
                         "beta2": s.beta2,
                         "ratio_beta2_alt": s.ratios_alt[j] if s.ratios_alt else None,
                         "beta2_alt": s.beta2_alt})
    payload = _payload(cfg, started, results, skipped, [])
    _emit(cfg, payload, rows, default_format="csv")
    bad = sum(1 for s in sweeps if not s.within_bound())
    failed = sum(1 for s in sweeps if s.failures)
    _footer("sweep", len(sweeps) - bad - failed, bad, failed, len(skipped))
    if bad:
        return EXIT_VIOLATION
    return EXIT_NONCONVERGENT if failed else EXIT_OK


# discrete suite

def _discrete_corpus(rng, n, n_lo, count=4):
    """Seeded non-negative sequences on ``[n_lo, n_lo + n)``."""
    idx = np.arange(n)
    seqs = [
        ("exponential", rng.exponential(1.0, n)),
        ("sparse", rng.exponential(1.0, n) * (rng.random(n) < 0.1)),
        ("power-decay", (1.0 + idx) ** -rng.uniform(0.3, 1.5)),
        ("bump", np.exp(-0.5 * ((idx - rng.uniform(0, n)) / max(2.0, 0.05 * n)) ** 2)),
    ][:count]
    out = []
    for name, v in seqs:
        if not v.any():
            v[0] = 1.0
        out.append((name, qd.DiscreteSequence(v, n_lo)))
    return out


def _budget(rhs, n):
    return BUDGET_FACTOR * 16 * qd.EPS * max(n, 1) * abs(rhs)


def _pad(r):
    """Extra indices past which the geometric weight ``r^k`` drops below 1e-17."""
    return int(math.ceil(math.log(1e-17) / math.log(r))) + 1


def _discrete_cells(cfg):
    """``(form, q, p, parameter)`` cells; the parameter is lambda or alpha."""
    cells, skipped = [], []
    for form in cfg.forms or DISCRETE_FORMS:
        if form in ("4.12", "4.13", "4.15"):
            pars = cfg.alpha or DEFAULT_MATRIX_ALPHA
        elif form in ("3.21", "3.22"):
            pars = cfg.alpha or DEFAULT_CLASSICAL_ALPHA
        else:
            pars = cfg.lam or DEFAULT_LAMBDA
        if form in ("3.21", "3.22"):
            qs = [None]
        else:
            qs = sorted(cfg.q or DEFAULT_Q)
        for q in qs:
            for p in sorted(cfg.p or DEFAULT_P):
                for par in sorted(pars):
                    why = _discrete_window(form, p, par)
                    cell = {"form": form, "q": q, "p": p, "param": par}
                    if why:
                        skipped.append({**cell, "reason": why})
                    else:
                        cells.append(cell)
    return cells, skipped


def _discrete_window(form, p, par):
    if form == "reverse":
        return None if 0 < p < 1 else "reverse forms need 0 < p < 1"
    if not p > 1:
        return f"form {form} is checked for p > 1"
    if form in ("4.12", "4.13", "4.15") and not par > 0:
        return "matrix forms need alpha > 0"
    if form in ("3.21", "3.22") and not par < 1 - 1 / p:
        return "classical forms need alpha < 1 - 1/p"
    return None


def _discrete_run(cfg, cell):
    form, q, p, par = cell["form"], cell["q"], cell["p"], cell["param"]
    key = [cfg.seed, DISCRETE_FORMS.index(form), int(round((q or 0) * 1000)),
           int(round(p * 1000)) % 2 ** 31, int(round(par * 1000)) % 2 ** 31]
    rng = np.random.default_rng(key)
    rows = []

    def add(name, lhs, rhs, constant, n, reverse=False):
        budget = _budget(rhs if not reverse else lhs, n)
        base = rhs / constant
        if reverse:
            ok, strict = lhs > rhs - budget, lhs > rhs
        else:
            ok, strict = lhs <= rhs + budget, lhs < rhs
        rows.append({**cell, "sample": name, "lhs": lhs, "rhs": rhs, "constant": constant,
                     "ratio": lhs / base if base else math.nan, "satisfied": bool(ok),
                     "strict": bool(strict), "error_budget": budget})

    if form in ("3.21", "3.22"):
        n = cfg.n or 10_000
        for name, a in _discrete_corpus(rng, n, 1) + [
                ("near-extremal", qd.DiscreteSequence(np.arange(1, n + 1) ** (-1 / p - 0.1), 1))]:
            lhs, rhs = qd.classical_discrete_check(a, par, p, "weights-" + form)
            add(name, lhs, rhs, qd.cass_kratz_constant(par, p), n)
        return rows

    n = cfg.n or 1000
    if form in ("3.23", "3.24", "3.25", "3.26", "reverse", "w1", "w2"):
        dom = "bilateral" if form in ("3.23", "3.25", "w2") else "one-sided"
        case = qd.DiscreteCase(par, p, q, dom)
        n_lo = -(n // 2) if dom == "bilateral" else 0
        corpus = _discrete_corpus(rng, n, n_lo)
        if cfg.epsilon_sweep and form in ("3.23", "3.24"):
            for eps, k, ratio in qd.geometric_extremal_sweep(case, steps=cfg.steps):
                rows.append({**cell, "sample": "geometric", "epsilon": eps, "window": k,
                             "ratio": ratio, "constant": case.constant,
                             "satisfied": bool(ratio <= case.constant * (1 + _budget(1, k)))})
            return rows
        for name, a in corpus:
            s = qd.power_sum(a, p)
            if form in ("3.23", "3.24"):
                add(name, qd.copson_lhs(a, case), case.constant * s, case.constant, n)
            elif form in ("3.25", "3.26"):
                add(name, qd.hardy_discrete_lhs(a, case), case.constant * s, case.constant, n)
            elif form == "reverse":
                first, second = qd.reverse_discrete_check(a, case)
                add(name + "/first", first.lhs, first.rhs, case.constant, n, reverse=True)
                add(name + "/second", second.lhs, second.rhs, case.constant, n, reverse=True)
            else:
                # log-weights padded so the finite section matches the series
                lr = par * math.log(q)
                pad = _pad(case.ratio)
                ks = np.arange(a.n_lo, a.n_hi + pad + 1)
                w = qd.DiscreteSequence(lr * ks, a.n_lo, positivity="unrestricted")
                add(name + "/copson",
                    qd.weighted_mean_lhs(a, w, "copson", dom, p, log_weights=True), s, 1.0, n)
                if form == "w2":
                    ks = np.arange(a.n_lo - pad, a.n_hi + 1)
                    w = qd.DiscreteSequence(-lr * ks, a.n_lo - pad, positivity="unrestricted")
                    add(name + "/hardy",
                        qd.weighted_mean_lhs(a, w, "hardy", dom, p, log_weights=True), s, 1.0, n)
        return rows

    # matrix forms
    w = qd.MatrixWeight(par, p / (p - 1), q)
    params = QParams(q)
    dom = "one-sided" if form == "4.13" else "bilateral"
    direction = "hardy" if form == "4.15" else "copson"
    n_lo = 0 if dom == "one-sided" else -(n // 2)
    for name, a in _discrete_corpus(rng, n, n_lo):
        s = qd.power_sum(a, p)
        add(name, qd.matrix_lhs(a, w, dom, True, params, direction), s, 1.0, n)
    return rows


def cmd_discrete(cfg: RunConfig) -> int:
    started = time.perf_counter()
    cells, skipped = _discrete_cells(cfg)

    def run(cell):
        try:
            return _discrete_run(cfg, cell), None
        except QHardyError as exc:
            return [], {**cell, "error": f"{type(exc).__name__}: {exc}"}

    results, errors = [], []
    for rows, err in _run_cells(run, cells):
        results.extend(rows)
        if err:
            errors.append(err)
    bad = sum(1 for r in results if not r["satisfied"])
    _emit(cfg, _payload(cfg, started, results, skipped, errors), results)
    _footer("discrete", len(results) - bad, bad, len(errors), len(skipped))
    if bad:
        return EXIT_VIOLATION
    return EXIT_NONCONVERGENT if errors else EXIT_OK


COMMANDS = {"constants": cmd_constants, "verify": cmd_verify,
            "sweep": cmd_sweep, "discrete": cmd_discrete}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_CONFIG)


def make_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qhardy", description="Numerical checks of q-Hardy type inequalities.")
    parser.add_argument("--version", action="version", version=f"qhardy {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--case", dest="cases", action="append", metavar="ID",
                        help=f"case id (repeatable or comma separated); one of {', '.join(CASE_IDS)}")
        sp.add_argument("--q", nargs="+", type=float)
        sp.add_argument("--p", nargs="+", type=float)
        sp.add_argument("--alpha", nargs="+", type=float)
        sp.add_argument("--lambda", dest="lam", nargs="+", type=float)
        sp.add_argument("--seed", type=int)
        sp.add_argument("--steps", type=int)
        sp.add_argument("--format", choices=("json", "csv"))
        sp.add_argument("--out", metavar="PATH")
        sp.add_argument("--config", metavar="PATH", help="flat JSON file of settings")
        sp.add_argument("--eps-tail", dest="eps_tail", type=float)
        sp.add_argument("--k-max", dest="k_max", type=int)
        sp.add_argument("--wall-time", dest="wall_time", action="store_true",
                        help="record elapsed time in the output (breaks byte-identity)")
        if name == "discrete":
            sp.add_argument("--form", dest="forms", action="append",
                            help=f"one of {', '.join(DISCRETE_FORMS)}")
            sp.add_argument("--epsilon-sweep", dest="epsilon_sweep", action="store_true")
            sp.add_argument("--n", type=int, help="window length of the random corpus")
    return parser


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    try:
        cfg = build_config(args)
    except ConfigError as exc:
        print(f"qhardy: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return COMMANDS[cfg.command](cfg)


if __name__ == "__main__":
    raise SystemExit(main())
