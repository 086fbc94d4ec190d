"""Command-line front end: ``sel-lab <subcommand> [options]``.

Every JSON document carries ``"schema": "sel-lab/1"`` and the resolved run
configuration.  Exit codes: 0 success, 2 invalid input, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import cmath
import csv
import enum
import io
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np
from scipy.linalg import LinAlgError

from sel_lab import evolve, forms, oscillate, resolvent, specfun
from sel_lab.grid import RadialGridFunction, log_grid, smooth_bump
from sel_lab.params import DomainKind, OperatorParams, classify

SCHEMA = "sel-lab/1"
EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL = 0, 2, 3
THREADS_ENV = "SEL_LAB_THREADS"

NUMERICAL_ERRORS = (
    resolvent.NumericalFailure,
    oscillate.ConstructionFailure,
    OverflowError,
    FloatingPointError,
    LinAlgError,
    ArithmeticError,
)


class InvalidInput(ValueError):
    pass


@dataclass
class RunConfig:
    subcommand: str
    N: int | None = None
    alpha: str | None = None
    b: str | None = None
    c: str | None = None
    p: list = field(default_factory=list)
    domain: str = DomainKind.WHOLE_SPACE.value
    grid_n: int | None = None
    s_min: float | None = None
    s_max: float | None = None
    lambdas: list = field(default_factory=list)
    format: str = "json"
    output: str | None = None
    seed: int = 0
    extra: dict = field(default_factory=dict)

    def params(self) -> OperatorParams:
        missing = [k for k in ("N", "alpha", "b", "c") if getattr(self, k) is None]
        if missing:
            raise InvalidInput(f"missing operator parameters: {', '.join(missing)}")
        try:
            return OperatorParams(int(self.N), self.alpha, self.b, self.c)
        except (ValueError, TypeError, ZeroDivisionError) as exc:
            raise InvalidInput(f"invalid operator parameters: {exc}") from exc

    def echo(self) -> dict:
        d = asdict(self)
        d.pop("output")
        return d


# ---------------------------------------------------------------------------
# serialization


def jsonable(x):
    if isinstance(x, enum.Enum):
        return x.value
    if isinstance(x, bool) or x is None or isinstance(x, str):
        return x
    if isinstance(x, Fraction):
        return int(x) if x.denominator == 1 else str(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else repr(x)
    if isinstance(x, (complex, np.complexfloating)):
        return {"re": jsonable(x.real), "im": jsonable(x.imag)}
    if isinstance(x, np.ndarray):
        return [jsonable(v) for v in x.tolist()]
    if isinstance(x, dict):
        return {str(k): jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    if isinstance(x, OperatorParams):
        return {"N": x.N, "alpha": jsonable(x.alpha), "b": jsonable(x.b), "c": jsonable(x.c)}
    return str(x)


def dump_json(doc: dict) -> str:
    return json.dumps(jsonable(doc), sort_keys=True, indent=2, allow_nan=False) + "\n"


def dump_csv(header: list, rows: list) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_csv_cell(v) for v in row])
    return buf.getvalue()


def _csv_cell(v):
    if v is None:
        return ""
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, complex):
        return repr(v)
    j = jsonable(v)
    return j if not isinstance(j, (dict, list)) else json.dumps(j, sort_keys=True)


def document(cfg: RunConfig, **payload) -> dict:
    return {"schema": SCHEMA, "config": cfg.echo(), **payload}


# ---------------------------------------------------------------------------
# parallel sweeps


def thread_cap() -> int:
    raw = os.environ.get(THREADS_ENV)
    if raw is None or raw.strip() == "":
        return max(1, min(8, os.cpu_count() or 1))
    try:
        n = int(raw)
    except ValueError as exc:
        raise InvalidInput(f"{THREADS_ENV} must be a positive integer, got {raw!r}") from exc
    if n < 1:
        raise InvalidInput(f"{THREADS_ENV} must be a positive integer, got {raw!r}")
    return n


def sweep(fn, items) -> list:
    """Map ``fn`` over ``items`` concurrently; results keep input order."""
    items = list(items)
    workers = min(thread_cap(), max(1, len(items)))
    if workers == 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


# ---------------------------------------------------------------------------
# helpers


def _p_values(cfg: RunConfig, default=None) -> list:
    ps = cfg.p or ([] if default is None else [default])
    if not ps:
        raise InvalidInput("at least one -p value is required")
    out = []
    for raw in ps:
        try:
            v = Fraction(str(raw))
        except (ValueError, ZeroDivisionError) as exc:
            raise InvalidInput(f"invalid p value {raw!r}") from exc
        if not v > 1:
            raise InvalidInput(f"p must lie in (1, inf), got {raw}")
        out.append(v)
    return out


def _lambda_values(cfg: RunConfig, default="1") -> list:
    raws = cfg.lambdas or [default]
    out = []
    for raw in raws:
        try:
            lam = complex(str(raw).replace(" ", ""))
        except ValueError as exc:
            raise InvalidInput(f"invalid lambda {raw!r}") from exc
        if not (math.isfinite(lam.real) and math.isfinite(lam.imag)) or lam.real <= 0:
            raise InvalidInput(f"lambda must have positive real part, got {raw}")
        out.append(lam.real if lam.imag == 0 else lam)
    return out


def _grid(cfg: RunConfig, alpha: float):
    n = cfg.grid_n or 4000
    if n < 5:
        raise InvalidInput("grid needs at least 5 nodes")
    try:
        return log_grid(alpha, n, cfg.s_min, cfg.s_max)
    except ValueError as exc:
        raise InvalidInput(str(exc)) from exc


def _bump(cfg: RunConfig):
    a, b = cfg.extra.get("bump", (1.0, 2.0))
    if not 0 < a < b:
        raise InvalidInput("bump support needs 0 < a < b")
    return a, b


# ---------------------------------------------------------------------------
# subcommands: each returns (document, csv_header, csv_rows)


def cmd_classify(cfg: RunConfig):
    params = cfg.params()
    ps = _p_values(cfg)
    try:
        kind = DomainKind(cfg.domain)
    except ValueError as exc:
        raise InvalidInput(f"unknown domain {cfg.domain!r}") from exc
    results = sweep(lambda p: classify(params, p, kind), ps)
    docs = [{"p": p, **r.to_dict()} for p, r in zip(ps, results)]
    header = [
        "p", "N_over_p", "verdict", "generates", "lo", "hi", "lo_closed", "hi_closed",
        "theta_lo", "theta_hi", "theta0", "int_eq_min", "int_eq_max", "selfadjoint",
    ]  # fmt: skip
    rows = []
    for d in docs:
        iv, th, eq = d["interval"], d["theta_interval"], d["equalities"]
        rows.append(
            [d["p"], d["N_over_p"], d["verdict"], d["generates"], iv["lo"], iv["hi"], iv["lo_closed"],
             iv["hi_closed"], None if th["empty"] else th["lo"], None if th["empty"] else th["hi"],
             d["theta0"], eq["int_eq_min"], eq["int_eq_max"], d["selfadjoint"]]
        )  # fmt: skip
    return document(cfg, params=params, results=docs), header, rows


def cmd_solve(cfg: RunConfig):
    params = cfg.params()
    N, alpha, b, c = params.as_floats()
    ps = _p_values(cfg, default="2")
    lams = _lambda_values(cfg)
    if alpha != 2 and float(params.discriminant) < 0:
        raise InvalidInput("D_c < 0: no decaying radial resolvent (see the oscillate subcommand)")
    s, r = _grid(cfg, alpha)
    a, bb = _bump(cfg)
    f = RadialGridFunction(r, smooth_bump(s, math.log(a), math.log(bb)), N, float(ps[0]))
    thetas = [float(t) for t in cfg.extra.get("theta", [])]

    def one(lam):
        if isinstance(lam, complex):
            reps = [resolvent.fd_solve(params, lam, f, thetas=thetas)]
        else:
            reps = list(resolvent.solve_both(params, lam, f, thetas))
        out = {"lambda": lam, "methods": {}}
        for rep in reps:
            u = rep.solution
            out["methods"][rep.method.value] = {
                "norms": {str(p): u.lp_norm(float(p)) for p in ps},
                "weighted_norms": {str(t): {str(p): u.lp_norm(float(p), t * (alpha - 2)) for p in ps} for t in thetas},
                "min_real": float(np.min(np.real(u.values))),
                "max_real": float(np.max(np.real(u.values))),
            }
            out["discrepancy"] = rep.discrepancy
        return out, reps[-1].solution

    res = sweep(one, lams)
    header = ["r"] + [f"u[lambda={_fmt_lam(lam)}]" for lam in lams]
    cols = [np.real(sol.values) for _, sol in res]
    rows = [[r[i]] + [col[i] for col in cols] for i in range(r.size)]
    return document(cfg, params=params, bump=[a, bb], results=[d for d, _ in res]), header, rows


def _fmt_lam(lam) -> str:
    return repr(lam) if isinstance(lam, complex) else repr(float(lam))


def cmd_evolve(cfg: RunConfig):
    params = cfg.params()
    N, alpha, b, c = params.as_floats()
    ps = _p_values(cfg, default="2")
    dt = float(cfg.extra.get("dt", 1e-3))
    T = float(cfg.extra.get("T", 1.0))
    try:
        scheme = evolve.Scheme(cfg.extra.get("scheme", evolve.Scheme.IMPLICIT_EULER.value))
    except ValueError as exc:
        raise InvalidInput(str(exc)) from exc
    s, r = _grid(cfg, alpha)
    a, bb = _bump(cfg)

    def one(p):
        init = RadialGridFunction(r, smooth_bump(s, math.log(a), math.log(bb)), N, float(p))
        try:
            return evolve.run(params, float(p), init, dt, T, scheme, record_every=int(cfg.extra.get("record_every", 1)))
        except ValueError as exc:
            raise InvalidInput(str(exc)) from exc

    runs = sweep(one, ps)
    results = []
    for p, ev in zip(ps, runs):
        results.append(
            {
                "p": p,
                "omega_p": evolve.omega_p(params, float(p)),
                "times": ev.times,
                "norm_history": ev.norm_history,
                "min_history": ev.min_history,
                "bound_history": ev.bound_history,
                "positive": ev.positive,
                "bound_ok": ev.bound_ok,
            }
        )
    header = ["p", "t", "norm", "min", "bound"]
    rows = []
    for p, ev in zip(ps, runs):
        for i, t in enumerate(ev.times):
            bound = None if ev.bound_history is None else ev.bound_history[i] * ev.norm_history[0]
            rows.append([p, t, ev.norm_history[i], ev.min_history[i], bound])
    return document(cfg, params=params, scheme=scheme, dt=dt, T=T, results=results), header, rows


def cmd_oscillate(cfg: RunConfig):
    params = cfg.params()
    lams = _lambda_values(cfg)
    if any(isinstance(x, complex) for x in lams):
        raise InvalidInput("oscillate takes real lambda > 0")

    def one(lam):
        try:
            run = oscillate.transform(params, lam)
        except ValueError as exc:
            raise InvalidInput(str(exc)) from exc
        far = cfg.extra.get("s_far")
        oscillate.integrate_homogeneous(run, None if far is None else float(far))
        oscillate.build_counterexample(run)
        return run

    runs = sweep(one, lams)
    results = []
    for lam, run in zip(lams, runs):
        a, b = run.window
        sg = np.linspace(a, b, 201)
        results.append(
            {
                "lambda": lam,
                "k": run.k,
                "m": run.m,
                "direction": run.direction,
                "sign_changes": run.sign_changes,
                "spacings": run.zero_spacings(),
                "wronskian_max_dev": float(np.abs(run.wronskian - 1).max()),
                "witness_s": run.s_star,
                "witness_value": run.witness_value,
                "witness_check": run.witness_check,
                "support_s": [a, b],
                "phi": {"r": np.exp(sg), "values": run.phi(np.exp(sg))},
            }
        )
    phi_path = cfg.extra.get("phi_csv")
    if phi_path:
        rows = []
        for lam, d in zip(lams, results):
            rows += [[lam, rr, v] for rr, v in zip(d["phi"]["r"], d["phi"]["values"])]
        _write(phi_path, dump_csv(["lambda", "r", "phi"], rows))
    header = ["lambda", "index", "s"]
    rows = [[lam, i, z] for lam, d in zip(lams, results) for i, z in enumerate(d["sign_changes"])]
    return document(cfg, params=params, results=results), header, rows


SUITES = ("dissipativity", "violation", "coercivity", "log-hardy", "interpolation")


def cmd_verify(cfg: RunConfig):
    suites = cfg.extra.get("suite") or ["dissipativity"]
    if "all" in suites:
        suites = list(SUITES)
    unknown = [x for x in suites if x not in SUITES]
    if unknown:
        raise InvalidInput(f"unknown suite(s): {', '.join(unknown)}")
    seed = int(cfg.seed)

    def one(name):
        if name == "dissipativity":
            reps = forms.dissipativity_suite(seed, int(cfg.extra.get("draws", 200)))
            im = [r.extra["im_bound_ok"] for r in reps if "im_bound_ok" in r.extra]
            return {
                "draws": len(reps),
                "passed": sum(r.passed for r in reps),
                "im_bound_checked": len(im),
                "im_bound_passed": sum(im),
                "min_relative_real": min(r.real_part / r.scale for r in reps),
            }
        if name == "violation":
            params = cfg.params() if cfg.N is not None else OperatorParams(3, 0, "-0.35", 0)
            p = float(_p_values(cfg, default="2")[0])
            delta, rep = forms.violation_search(params, p)
            return {
                "params": params,
                "p": p,
                "margin": rep.margin_used,
                "delta": delta,
                "relative_real": rep.extra["relative"],
                "found": rep.real_part <= -1e-3 * rep.scale,
            }
        if name == "coercivity":
            reps = forms.coercivity_suite(seed, int(cfg.extra.get("coercivity_draws", 20)))
            return {"draws": len(reps), "passed": sum(r.passed for r in reps), "min_ratio": min(r.extra["ratio"] for r in reps)}
        if name == "log-hardy":
            res = forms.log_hardy_suite(seed)
            return {
                str(p): {"profiles": len(v), "passed": sum(r.passed for r in v), "min_ratio": min(r.extra["ratio"] for r in v)}
                for p, v in res.items()
            }
        params = cfg.params() if cfg.N is not None else OperatorParams(3, 0, 0, 0)
        p = float(_p_values(cfg, default="2")[0])
        rep = forms.interpolation_probe(params, p, forms.interpolation_corpus(np.random.default_rng(seed)))
        return {"max_C": rep.max_C, "bounded": rep.bounded}

    cards = sweep(one, suites)
    scorecard = dict(zip(suites, cards))
    header = ["suite", "key", "value"]
    rows = []
    for name, card in scorecard.items():
        for k, v in card.items():
            rows.append([name, k, v])
    return document(cfg, scorecard=scorecard), header, rows


def cmd_bessel(cfg: RunConfig):
    nus = cfg.extra.get("nu") or [0.0]
    xs = cfg.extra.get("x") or [1.0]
    pairs = [(float(n), float(x)) for n in nus for x in xs]
    for n, x in pairs:
        if not (math.isfinite(n) and math.isfinite(x)) or n < 0 or x <= 0:
            raise InvalidInput(f"bessel needs nu >= 0 and x > 0, got nu={n}, x={x}")

    def one(pair):
        n, x = pair
        sc = specfun.bessel_scaled_all(n, x)
        d = {
            "nu": n,
            "x": x,
            "ive": sc.ive,
            "kve": sc.kve,
            "ive_d": sc.ive_d,
            "kve_d": sc.kve_d,
            "regime_i": specfun.regime_i(n, x),
            "regime_k": specfun.regime_k(n, x),
        }
        try:
            d["I"] = specfun.bessel_i(n, x)
            d["K"] = specfun.bessel_k(n, x)
        except OverflowError:
            d["I"] = d["K"] = None
        return d

    res = sweep(one, pairs)
    header = ["nu", "x", "I", "K", "ive", "kve", "ive_d", "kve_d", "regime_i", "regime_k"]
    rows = [[d[k] for k in header] for d in res]
    return document(cfg, results=res), header, rows


COMMANDS = {
    "classify": cmd_classify,
    "solve": cmd_solve,
    "evolve": cmd_evolve,
    "oscillate": cmd_oscillate,
    "verify": cmd_verify,
    "bessel": cmd_bessel,
}


# ---------------------------------------------------------------------------
# argument parsing


def _common(sp: argparse.ArgumentParser, params=True):
    if params:
        sp.add_argument("-N", type=int, help="dimension")
        sp.add_argument("-a", "--alpha", help="power of |x| in front of the Laplacian (rational or decimal)")
        sp.add_argument("-b", help="inverse-square potential coefficient")
        sp.add_argument("-c", help="drift coefficient")
        sp.add_argument("-p", nargs="+", help="one or more exponents p > 1")
        sp.add_argument("--domain", choices=[k.value for k in DomainKind])
        sp.add_argument("--lambda", dest="lambdas", nargs="+", help="spectral parameters (complex allowed, e.g. 1+1j)")
        sp.add_argument("--grid-n", type=int)
        sp.add_argument("--s-min", type=float)
        sp.add_argument("--s-max", type=float)
    sp.add_argument("--format", choices=["json", "csv"])
    sp.add_argument("--output", "-o", help="write to this file instead of stdout")
    sp.add_argument("--seed", type=int)
    sp.add_argument("--config", help="flat key=value file; command-line flags override it")


class _Parser(argparse.ArgumentParser):
    """Usage errors become InvalidInput so they share the JSON diagnostic."""

    def error(self, message):
        raise InvalidInput(f"{self.prog}: {message}")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="sel-lab", description="Generation, resolvents and forms for r^alpha-weighted operators.")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    sp = sub.add_parser("classify", help="which realization generates in L^p")
    _common(sp)

    sp = sub.add_parser("solve", help="radial resolvent lambda u - L u = bump")
    _common(sp)
    sp.add_argument("--bump", nargs=2, type=float, metavar=("A", "B"), help="support [A, B] of the smooth data")
    sp.add_argument("--theta", nargs="+", type=float, help="report || |x|^{theta(alpha-2)} u ||_p")

    sp = sub.add_parser("evolve", help="time stepping u_t = L u")
    _common(sp)
    sp.add_argument("--dt", type=float)
    sp.add_argument("-T", type=float)
    sp.add_argument("--scheme", choices=[s.value for s in evolve.Scheme])
    sp.add_argument("--bump", nargs=2, type=float, metavar=("A", "B"))
    sp.add_argument("--record-every", type=int)

    sp = sub.add_parser("oscillate", help="sign changes and the nonnegative source without positive solution")
    _common(sp)
    sp.add_argument("--s-far", type=float, help="far end of the integration window")
    sp.add_argument("--phi-csv", help="also write the source profile phi(r) as CSV here")

    sp = sub.add_parser("verify", help="form-inequality suites as a scorecard")
    _common(sp)
    sp.add_argument("--suite", nargs="+", choices=list(SUITES) + ["all"])
    sp.add_argument("--draws", type=int)

    sp = sub.add_parser("bessel", help="modified Bessel functions I_nu, K_nu")
    _common(sp, params=False)
    sp.add_argument("--nu", nargs="+", type=float)
    sp.add_argument("--x", nargs="+", type=float)
    return parser


LIST_KEYS = {"p", "lambdas", "bump", "theta", "suite", "nu", "x"}
EXTRA_KEYS = {"bump", "theta", "dt", "T", "scheme", "record_every", "s_far", "phi_csv", "suite", "draws", "nu", "x"}
FLOAT_KEYS = {"s_min", "s_max", "dt", "T", "s_far"}
INT_KEYS = {"N", "grid_n", "seed", "record_every", "draws"}


def read_config(path: str) -> dict:
    """Flat ``key = value`` lines; '#' starts a comment; lists are comma or space separated."""
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise InvalidInput(f"cannot read config file {path!r}: {exc}") from exc
    out = {}
    for num, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvalidInput(f"{path}:{num}: expected key=value")
        key, value = (t.strip() for t in line.split("=", 1))
        key = key.replace("-", "_")
        if key == "lambda":
            key = "lambdas"
        if key == "alpha" or key == "a":
            key = "alpha"
        out[key] = _convert(key, value, f"{path}:{num}")
    return out


def _convert(key, value, where):
    try:
        if key in LIST_KEYS:
            items = [t for t in value.replace(",", " ").split() if t]
            if key in {"bump", "theta", "nu", "x"}:
                return [float(t) for t in items]
            return items
        if key in INT_KEYS:
            return int(value)
        if key in FLOAT_KEYS:
            return float(value)
    except ValueError as exc:
        raise InvalidInput(f"{where}: bad value for {key}: {value!r}") from exc
    return value


def resolve_config(ns: argparse.Namespace) -> RunConfig:
    merged = read_config(ns.config) if getattr(ns, "config", None) else {}
    for k, v in vars(ns).items():
        if k in ("config", "subcommand"):
            continue
        if v is not None:
            merged[k] = v
    known = {f for f in RunConfig.__dataclass_fields__ if f not in ("subcommand", "extra")}
    cfg = RunConfig(ns.subcommand)
    extra = {}
    for k, v in merged.items():
        if k in known:
            setattr(cfg, k, v)
        elif k in EXTRA_KEYS:
            extra[k] = v
        else:
            raise InvalidInput(f"unknown configuration key {k!r}")
    if "bump" in extra:
        extra["bump"] = tuple(extra["bump"])
        if len(extra["bump"]) != 2:
            raise InvalidInput("bump needs exactly two values")
    cfg.extra = extra
    cfg.p = [str(x) for x in (cfg.p or [])]
    cfg.lambdas = [str(x) for x in (cfg.lambdas or [])]
    for k in ("alpha", "b", "c"):
        v = getattr(cfg, k)
        if v is not None:
            setattr(cfg, k, str(v))
    if cfg.format not in ("json", "csv"):
        raise InvalidInput(f"unknown format {cfg.format!r}")
    return cfg


def _write(path, text):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _error(kind: str, message: str, code: int) -> int:
    sys.stderr.write(dump_json({"schema": SCHEMA, "error": {"kind": kind, "message": message}}))
    return code


def main(argv=None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except InvalidInput as exc:
        return _error("InvalidInput", str(exc), EXIT_INVALID)
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    try:
        cfg = resolve_config(ns)
        doc, header, rows = COMMANDS[cfg.subcommand](cfg)
        text = dump_json(doc) if cfg.format == "json" else dump_csv(header, rows)
    except InvalidInput as exc:
        return _error("InvalidInput", str(exc), EXIT_INVALID)
    except NUMERICAL_ERRORS as exc:
        return _error("NumericalFailure", f"{type(exc).__name__}: {exc}", EXIT_NUMERICAL)
    except (ValueError, TypeError) as exc:
        return _error("InvalidInput", str(exc), EXIT_INVALID)
    if cfg.output:
        try:
            _write(cfg.output, text)
        except OSError as exc:
            return _error("InvalidInput", f"cannot write {cfg.output!r}: {exc}", EXIT_INVALID)
    else:
        try:
            sys.stdout.write(text)
            sys.stdout.flush()
        except BrokenPipeError:  # reader closed early, e.g. piped into head
            os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
