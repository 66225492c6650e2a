"""Batch runner: ``anisolab <command> [--config FILE] [flags]``.

Every run resolves an INI config plus flag overrides into a RunConfig,
validates it before touching the disk, and writes its reports as
``<command>-<hash>.json`` (plus CSV tables where relevant) into the output
directory.  The only time-dependent field lives in the separate
``<command>-<hash>.manifest.json``.

Exit codes: 0 all checks pass, 1 some check failed, 2 configuration error.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import dataclasses
import datetime
import hashlib
import io
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .errors import AnisolabError, InvalidInputError
from .reports import _plain, to_json

OUT_ENV = "ANISOLAB_OUT"
DEFAULT_OUT = "anisolab-out"
COMMANDS = ("exponents", "gauge-check", "residual", "supersolution", "inequalities", "minimize",
            "sweep", "liouville", "compare", "suite")


class ConfigError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    N: int = 4
    p: float = 2.0
    gamma: float = 0.75
    gammas: list | None = None
    gauge: dict = field(default_factory=lambda: {"variant": "all"})
    dims: list = field(default_factory=lambda: [2, 3, 4])
    t_min: float = 1e-6
    t_max: float = 1e6
    points: int = 1537
    seed: int = 0
    samples: int = 10_000
    out: str = ""
    jobs: int = 1
    A: float = 1.0
    alpha: float | None = None
    branch: str = "both"
    interval: list = field(default_factory=lambda: [0.1, 10.0])
    c: float = 1.0
    init: str = "talenti"
    max_iters: int = 100_000
    tolerances: dict = field(default_factory=dict)

    def hashed(self):
        """Config fields that determine the results (not where or how fast they are written)."""
        d = dataclasses.asdict(self)
        d.pop("out")
        d.pop("jobs")
        return d

    @property
    def digest(self):
        text = json.dumps(_plain(self.hashed()), sort_keys=True)
        return hashlib.sha256(text.encode()).hexdigest()[:12]

    def tol(self, name, default):
        return float(self.tolerances.get(name, default))


# --- config parsing ---------------------------------------------------------------------


def _floats(text):
    return [float(s) for s in str(text).replace(",", " ").split()]


def _matrix(text):
    rows = [r for r in str(text).split(";") if r.strip()]
    return [_floats(r) for r in rows]


_FIELDS = {
    "N": int, "p": float, "gamma": float, "gammas": _floats, "dims": lambda s: [int(x) for x in _floats(s)],
    "t_min": float, "t_max": float, "points": int, "seed": int, "samples": int, "out": str,
    "jobs": int, "A": float, "alpha": float, "branch": str, "interval": _floats, "c": float,
    "init": str, "max_iters": int,
}


def read_config_file(path):
    cp = configparser.ConfigParser()
    cp.optionxform = str
    try:
        with open(path) as fh:
            cp.read_file(fh)
    except (OSError, configparser.Error) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    values, gauge, tols = {}, {}, {}
    for section in cp.sections():
        for key, raw in cp.items(section):
            if section == "gauge":
                gauge[key] = raw
            elif section == "tolerances":
                tols[key] = raw
            elif key in _FIELDS:
                values[key] = raw
            elif key == "command":
                values["command"] = raw
            else:
                raise ConfigError(f"unknown config key [{section}] {key}")
    return values, gauge, tols


def _convert(key, raw):
    try:
        return _FIELDS[key](raw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad value for {key}: {raw!r}") from exc


def resolve_config(args) -> RunConfig:
    values, gauge, tols = ({}, {}, {})
    if args.config:
        values, gauge, tols = read_config_file(args.config)
    command = args.command
    if values.get("command") not in (None, command):
        raise ConfigError(f"config is for {values['command']!r}, not {command!r}")
    cfg = RunConfig(command)
    for key in _FIELDS:
        if key in values:
            setattr(cfg, key, _convert(key, values[key]))
        flag = getattr(args, key, None)
        if flag is not None:
            setattr(cfg, key, _convert(key, flag) if isinstance(flag, str) and _FIELDS[key] is not str
                    else flag)
    g = dict(gauge)
    for key in ("variant", "q", "matrix", "name", "dual_mode"):
        flag = getattr(args, f"gauge_{key}", None)
        if flag is not None:
            g[key] = flag
    cfg.gauge = _gauge_dict(g) if g else cfg.gauge
    for item in args.tol or []:
        if "=" not in item:
            raise ConfigError(f"--tol expects name=value, got {item!r}")
        k, v = item.split("=", 1)
        tols[k.strip()] = v
    try:
        cfg.tolerances = {k: float(v) for k, v in tols.items()}
    except ValueError as exc:
        raise ConfigError(f"bad tolerance value: {exc}") from exc
    cfg.out = cfg.out or os.environ.get(OUT_ENV, DEFAULT_OUT)
    validate(cfg)
    return cfg


def _gauge_dict(g):
    out = {"variant": g.get("variant", "euclidean")}
    if "q" in g:
        out["q"] = float(g["q"])
    if "matrix" in g:
        out["matrix"] = g["matrix"] if isinstance(g["matrix"], list) else _matrix(g["matrix"])
    if "name" in g:
        out["name"] = g["name"]
    if "dual_mode" in g:
        out["dual_mode"] = g["dual_mode"]
    return out


def build_gauge_spec(g):
    from .gauge import CUSTOM_GAUGES, GaugeSpec
    v = g.get("variant", "euclidean")
    if v == "euclidean":
        return GaugeSpec.euclidean()
    if v == "ell_q":
        return GaugeSpec.ell_q(g.get("q", 3.0))
    if v == "quadratic":
        return GaugeSpec.quadratic(g.get("matrix", [[1.0, 0.0], [0.0, 1.0]]))
    if v == "all":
        return None
    if v == "custom":
        name = g.get("name")
        if name not in CUSTOM_GAUGES:
            raise ConfigError(f"unknown custom gauge {name!r}; known: {sorted(CUSTOM_GAUGES)}")
        return GaugeSpec.custom(CUSTOM_GAUGES[name], name)
    raise ConfigError(f"unknown gauge variant {v!r}")


def validate(cfg: RunConfig):
    from .spectrum import ProblemParams
    if cfg.command not in COMMANDS:
        raise ConfigError(f"unknown command {cfg.command!r}")
    try:
        base = ProblemParams(cfg.N, cfg.p, 0.0)
        ProblemParams(cfg.N, cfg.p, cfg.gamma)
        for gm in cfg.gammas or []:
            ProblemParams(cfg.N, cfg.p, gm)
        spec = build_gauge_spec(cfg.gauge)
        if spec is not None and spec.variant == "quadratic" and cfg.command == "gauge-check":
            if any(d != len(spec.matrix) for d in cfg.dims):
                raise ConfigError("quadratic gauge: dims must match the matrix size")
    except InvalidInputError as exc:
        raise ConfigError(str(exc)) from exc
    if not (0 < cfg.t_min < cfg.t_max) or cfg.points < 16:
        raise ConfigError("grid needs 0 < t_min < t_max and points >= 16")
    if cfg.samples < 1 or cfg.jobs < 1 or cfg.max_iters < 1:
        raise ConfigError("samples, jobs and max_iters must be positive")
    if any(d < 2 for d in cfg.dims):
        raise ConfigError("dims must be >= 2")
    if cfg.branch not in ("origin", "infinity", "both", "mu1", "mu2"):
        raise ConfigError(f"unknown branch {cfg.branch!r}")
    if len(cfg.interval) != 2 or not (0 < cfg.interval[0] < cfg.interval[1]):
        raise ConfigError("interval must be two numbers 0 < a < b")
    if cfg.A <= 0 or cfg.c <= 0:
        raise ConfigError("A and c must be positive")
    if cfg.init not in ("talenti", "power-truncated"):
        raise ConfigError(f"unknown init {cfg.init!r}")
    if cfg.gammas is not None and any(g >= base.C_H for g in cfg.gammas):
        raise ConfigError("every gamma must be below the Hardy constant")


# --- commands ----------------------------------------------------------------------------
# Each returns (report dict, {check name: bool}, {suffix: text of extra files}).


def _csv_text(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


def cmd_exponents(cfg):
    from .spectrum import EXPONENT_COLUMNS, ProblemParams, exponent_row
    gammas = cfg.gammas if cfg.gammas is not None else [cfg.gamma]
    rows = [exponent_row(ProblemParams(cfg.N, cfg.p, g)) for g in gammas]
    tol = cfg.tol("residual", 1e-10)
    checks = {}
    for r in rows:
        N, p, g, C, m1, m2, r1, r2 = r
        ok = abs(r1) <= tol and abs(r2) <= tol and 0 <= m1 <= (N - p) / p <= m2 <= (N - p) / (p - 1)
        checks[f"gamma={g!r}"] = bool(ok)
    report = {"columns": list(EXPONENT_COLUMNS), "rows": [list(r) for r in rows]}
    return report, checks, {"csv": _csv_text(EXPONENT_COLUMNS, rows)}


def builtin_gauges(dim):
    """One instance of every built-in gauge family in dimension ``dim``."""
    from .gauge import CUSTOM_GAUGES, GaugeSpec
    A = 2.0 * np.eye(dim) + 0.5 * (np.eye(dim, k=1) + np.eye(dim, k=-1))
    out = [GaugeSpec.euclidean(), GaugeSpec.ell_q(3.0), GaugeSpec.quadratic(A.tolist())]
    out += [GaugeSpec.custom(f, name) for name, f in sorted(CUSTOM_GAUGES.items())]
    return out


def cmd_gauge_check(cfg):
    from .gauge import Gauge, divergence_identity_check, verify_identities, wulff_volume, wulff_volume_exact
    report, checks = {"dimensions": {}}, {}
    samples = min(cfg.samples, 1000)
    for dim in cfg.dims:
        if cfg.gauge["variant"] == "all":
            cases = [(s, None) for s in builtin_gauges(dim)] + [(builtin_gauges(dim)[0], "numerical")]
        else:
            cases = [(build_gauge_spec(cfg.gauge), cfg.gauge.get("dual_mode"))]
        for spec, mode in cases:
            gauge = Gauge.build(spec, dim, mode, seed=cfg.seed)
            key = f"N={dim} {spec.label()} dual={gauge.dual_mode}"
            ident = verify_identities(gauge, samples=samples, seed=cfg.seed)
            div = divergence_identity_check(gauge, samples=100, seed=cfg.seed)
            if spec.variant == "custom":
                # every Monte-Carlo point costs a numerical dual solve
                kappa, err = wulff_volume(gauge, budget=10_000, seed=cfg.seed)
            else:
                kappa, err = wulff_volume_exact(gauge), 0.0
            report["dimensions"][key] = {"constants": gauge.describe(), "identities": ident.to_dict(),
                                         "divergence": div.to_dict(), "wulff_volume": kappa,
                                         "wulff_stderr": err}
            checks[f"{key} identities"] = ident.passed
            checks[f"{key} divergence"] = div.max_rel <= cfg.tol("divergence", 1e-3)
    return report, checks, {}


def cmd_residual(cfg):
    from .radial import RadialProfile, log_grid, residual_report
    from .spectrum import ProblemParams, solve_exponents
    rng = np.random.default_rng(cfg.seed)
    t = log_grid(cfg.t_min, cfg.t_max, cfg.points)
    cases = [ProblemParams(cfg.N, cfg.p, cfg.gamma)]
    for _ in range(20):
        N = int(rng.integers(2, 7))
        p = float(rng.uniform(1.1, N - 0.1))
        base = ProblemParams(N, p, 0.0)
        cases.append(base.with_gamma(float(rng.uniform(0, 0.95)) * base.C_H))
    tol = cfg.tol("residual", 1e-8)
    rows, checks = [], {}
    for k, P in enumerate(cases):
        e = solve_exponents(P)
        for name, mu in (("mu1", e.mu1), ("mu2", e.mu2)):
            rep = residual_report(P, RadialProfile.power(t, mu, cfg.c), 0.0)
            rows.append((P.N, P.p, P.gamma, name, mu, rep.max_abs, rep.max_rel))
            checks[f"case{k} {name}"] = rep.max_rel <= tol
    cols = ("N", "p", "gamma", "branch", "mu", "max_abs", "max_rel")
    return {"columns": list(cols), "rows": [list(r) for r in rows]}, checks, {"csv": _csv_text(cols, rows)}


def cmd_supersolution(cfg):
    from .spectrum import ProblemParams, supersolution_params
    P = ProblemParams(cfg.N, cfg.p, cfg.gamma)
    branches = ("origin", "infinity") if cfg.branch == "both" else (
        {"mu1": "origin", "mu2": "infinity"}.get(cfg.branch, cfg.branch),)
    report, checks = {"params": P.as_dict(), "branches": {}}, {}
    for br in branches:
        alpha = cfg.alpha if cfg.alpha is not None else (P.p / 2 if br == "origin" else 2 * P.p)
        sp = supersolution_params(P, cfg.A, alpha, br)
        t = sp.check_grid()
        g = sp.g(P, t)
        margin = float(np.min(g / (cfg.A * t ** (-alpha)))) - 1.0
        report["branches"][br] = {**dataclasses.asdict(sp), "grid": [float(t[0]), float(t[-1]), len(t)],
                                  "min_relative_margin": margin}
        checks[br] = margin >= 0 and sp.delta <= 0.5 and sp.epsilon == (P.p - alpha) / 2
    return report, checks, {}


def _inequality_jobs(cfg):
    from .inequalities import default_suite
    s = default_suite()
    jobs = []
    for spec, dim, p in s["monotonicity"]:
        jobs.append(("monotonicity", spec, dim, p))
    for spec, dim, p in s["convexity_ge_2"]:
        jobs.append(("convexity_ge_2", spec, dim, p))
    for spec, dim, p in s["convexity_lt_2"]:
        jobs.append(("convexity_lt_2", spec, dim, p))
    for spec, dim, p in s["log"]:
        jobs.append(("log", spec, dim, p))
    for p, delta in s["split"]:
        jobs.append(("split", None, p, delta))
    for N, p in s["hardy"]:
        jobs.append(("hardy", None, N, p))
    return jobs


def _run_inequality(job, samples, seed):
    from . import inequalities as iq
    from .gauge import Gauge
    from .spectrum import ProblemParams
    kind, spec, a, b = job
    if kind == "split":
        r = iq.check_power_split(a, b, samples, seed, constant=iq.frozen_split_constant(a, b))
        return f"split p={a} delta={b}", r.to_dict()
    if kind == "hardy":
        r = iq.check_hardy(ProblemParams(a, b), profiles=max(samples // 10, 10), seed=seed)
        return f"hardy N={a} p={b}", r.to_dict()
    gauge = Gauge.build(spec, a)
    fn = {"monotonicity": iq.check_vector_monotonicity, "convexity_ge_2": iq.check_convexity_p_ge_2,
          "convexity_lt_2": iq.check_convexity_p_lt_2, "log": iq.check_log_pointwise}[kind]
    r = fn(gauge, b, samples, seed)
    return f"{kind} {spec.label()} N={a} p={b}", r.to_dict()


def _map(fn, items, jobs):
    if jobs <= 1:
        return [fn(*it) for it in items]
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        futs = [ex.submit(fn, *it) for it in items]
        return [f.result() for f in futs]


def cmd_inequalities(cfg):
    from .inequalities import load_manifest
    results = _map(_run_inequality, [(j, cfg.samples, cfg.seed) for j in _inequality_jobs(cfg)], cfg.jobs)
    report = {"reports": dict(results), "constants_manifest": load_manifest()["constants"]}
    checks = {name: r["passed"] for name, r in results}
    return report, checks, {}


def _setup(cfg, gamma=None):
    from .spectrum import ProblemParams
    from .variational import QuotientSetup
    P = ProblemParams(cfg.N, cfg.p, cfg.gamma if gamma is None else gamma)
    return QuotientSetup.build(P, None, cfg.t_min, cfg.t_max, cfg.points)


def cmd_minimize(cfg):
    from .variational import minimize_quotient, minimizer_decay_audit
    setup = _setup(cfg)
    res = minimize_quotient(setup, cfg.init, cfg.tol("grad", 1e-8), cfg.max_iters, cfg.seed)
    report = {"params": setup.params.as_dict(), "result": res.summary(),
              "energy_monotone": bool(np.all(np.diff(res.history) <= 1e-12 * abs(res.history[0])))}
    checks = {"converged": res.converged, "energy_monotone": report["energy_monotone"]}
    if res.converged:
        audit = minimizer_decay_audit(res, setup.params, cfg.tol("decay", 0.05))
        report["decay_audit"] = audit.to_dict()
        if setup.params.gamma > 0:
            checks["decay_audit"] = audit.passed
    prof = res.profile
    csv = _csv_text(("t", "v"), zip(prof.t, prof.v))
    return report, checks, {"profile.csv": csv}


def _sweep_one(cfg, gamma):
    from .variational import minimize_quotient
    res = minimize_quotient(_setup(cfg, gamma), cfg.init, cfg.tol("grad", 1e-8), cfg.max_iters, cfg.seed)
    return res


def cmd_sweep(cfg):
    from .spectrum import ProblemParams
    from .variational import SWEEP_COLUMNS, s_gamma_curve
    base = ProblemParams(cfg.N, cfg.p, 0.0)
    gammas = cfg.gammas if cfg.gammas is not None else list(np.linspace(0, 0.9 * base.C_H, 5))
    if cfg.jobs > 1:
        from .variational import SweepRow, _safe_fits
        results = _map(_sweep_one, [(cfg, g) for g in sorted(gammas)], cfg.jobs)
        rows = []
        for g, r in zip(sorted(gammas), results):
            fi, fo = _safe_fits(r.profile)
            rows.append(SweepRow(g, r.S_estimate, r.iterations, r.grad_norm, fi, fo, r.reason,
                                 not r.converged))
        S = np.array([r.S for r in rows])
        dec = bool(np.all(np.diff(S) < 0))
    else:
        rows, dec = s_gamma_curve(base, gammas, None, cfg.t_min, cfg.t_max, cfg.points, cfg.init,
                                  cfg.tol("grad", 1e-8), cfg.max_iters)
    table = [r.as_row() for r in rows]
    checks = {"strictly_decreasing": dec, "all_converged": all(not r.flagged for r in rows),
              "positive": all(r.S > 0 for r in rows)}
    report = {"columns": list(SWEEP_COLUMNS), "rows": [list(r) for r in table],
              "warm_start": cfg.jobs <= 1}
    return report, checks, {"csv": _csv_text(SWEEP_COLUMNS, table)}


def cmd_liouville(cfg):
    from .comparison import liouville_check
    from .spectrum import ProblemParams
    P = ProblemParams(cfg.N, cfg.p, cfg.gamma)
    branches = ("mu1", "mu2") if cfg.branch == "both" else (
        {"origin": "mu1", "infinity": "mu2"}.get(cfg.branch, cfg.branch),)
    report, checks = {"params": P.as_dict(), "branches": {}}, {}
    for br in branches:
        r = liouville_check(P, br, tuple(cfg.interval), cfg.c, tol=cfg.tol("liouville", 1e-6))
        report["branches"][br] = r.to_dict()
        checks[br] = r.ordered
    return report, checks, {}


def comparison_suite(P, seed=0):
    """Seeded (sub, super) pairs, each hypothesis-verified before its ordering is checked."""
    from .comparison import BVPSpec, bvp_solve, exterior_growth_check, verify_comparison
    from .radial import RadialProfile
    from .spectrum import solve_exponents, supersolution_params
    rng = np.random.default_rng(seed)
    e = solve_exponents(P)
    out = {}
    t = np.geomspace(0.1, 10.0, 1025)
    for k in range(5):
        c1, c2 = sorted(rng.uniform(0.2, 5.0, 2))
        mu = e.mu2 if k % 2 == 0 else e.mu1
        rep = verify_comparison(P, RadialProfile.power(t, mu, c1), RadialProfile.power(t, mu, c2), 0.0, 0.0)
        out[f"power pair {k}"] = rep.to_dict()
    if P.gamma > 0:
        A, alpha = 1.0, P.p / 2
        sp = supersolution_params(P, A, alpha, "origin")
        a, b = sp.R * 1e-3, sp.R * 0.5
        ts = np.geomspace(a, b, 1025)
        sup = RadialProfile.from_function(ts, sp.values)
        gsup = sp.g(P, ts)
        fsub = A * ts ** (-alpha)
        spec = BVPSpec(P, a, b, float(sup.v[0]), float(sup.v[-1]), "custom",
                       lambda s: A * s ** (-alpha))
        sub = bvp_solve(spec, 1025).profile
        out["supersolution vs bvp"] = verify_comparison(P, sub, sup, fsub, gsup).to_dict()
        out["scaled supersolution"] = verify_comparison(P, sub, sup.scaled(1 + 1e-3), fsub, gsup).to_dict()
    tg = np.geomspace(1.0, 1000.0, 4097)
    u = RadialProfile.power(tg, e.mu2)
    growth = exterior_growth_check(u, u, P, [10, 20, 40, 80])
    return out, growth


def cmd_compare(cfg):
    from .spectrum import ProblemParams
    P = ProblemParams(cfg.N, cfg.p, cfg.gamma)
    pairs, growth = comparison_suite(P, cfg.seed)
    checks = {name: r["ordered"] for name, r in pairs.items()}
    checks["exterior growth decreasing"] = growth.certified
    return {"params": P.as_dict(), "pairs": pairs, "exterior_growth": growth.to_dict()}, checks, {}


HANDLERS = {
    "exponents": cmd_exponents, "gauge-check": cmd_gauge_check, "residual": cmd_residual,
    "supersolution": cmd_supersolution, "inequalities": cmd_inequalities, "minimize": cmd_minimize,
    "sweep": cmd_sweep, "liouville": cmd_liouville, "compare": cmd_compare,
}


# --- driver ---------------------------------------------------------------------------------


def _write(cfg, command, report, checks, extra, out):
    out.mkdir(parents=True, exist_ok=True)
    stem = f"{command}-{cfg.digest}"
    doc = {"command": command, "config": cfg.hashed(), "config_hash": cfg.digest,
           "passed": all(checks.values()), "checks": checks, "report": report, "version": __version__}
    files = [f"{stem}.json"]
    (out / files[0]).write_text(to_json(doc) + "\n")
    for suffix, text in extra.items():
        name = f"{stem}.{suffix}" if "." in suffix else f"{stem}.{suffix}"
        (out / name).write_text(text)
        files.append(name)
    manifest = {"command": command, "config_hash": cfg.digest, "files": files,
                "created": datetime.datetime.now(datetime.timezone.utc).isoformat()}
    (out / f"{stem}.manifest.json").write_text(json.dumps(manifest, sort_keys=True, indent=2) + "\n")
    return files


def run(cfg: RunConfig, stream=None) -> int:
    stream = stream or sys.stdout
    out = Path(cfg.out)
    commands = [c for c in HANDLERS] if cfg.command == "suite" else [cfg.command]
    failed = []
    for command in commands:
        sub = dataclasses.replace(cfg, command=command)
        try:
            report, checks, extra = HANDLERS[command](sub)
        except AnisolabError as exc:
            report, checks, extra = {"error": f"{type(exc).__name__}: {exc}"}, {"ran": False}, {}
        files = _write(sub, command, report, checks, extra, out)
        bad = [k for k, v in checks.items() if not v]
        status = "PASS" if not bad else "FAIL"
        print(f"{status} {command}: {len(checks) - len(bad)}/{len(checks)} checks -> {out / files[0]}",
              file=stream)
        for k in bad:
            print(f"    failed: {k}", file=stream)
        if bad:
            failed.append(command)
    return 1 if failed else 0


CSV_HELP = """CSV columns:
  exponents  N,p,gamma,C_H,mu1,mu2,res1,res2
  residual   N,p,gamma,branch,mu,max_abs,max_rel
  sweep      gamma,S,iterations,grad_norm,inner_fit,outer_fit,reason,flagged
  minimize   t,v (minimiser profile)
Output directory: --out, else $ANISOLAB_OUT, else ./anisolab-out.
Exit codes: 0 all checks pass, 1 a check failed, 2 configuration error."""


def _options(p):
    p.add_argument("--config", help="INI config file; flags override it")
    p.add_argument("--N", type=int)
    p.add_argument("--p", type=float)
    p.add_argument("--gamma", type=float)
    p.add_argument("--gammas", help="comma-separated gamma grid")
    p.add_argument("--gauge", dest="gauge_variant",
                   choices=["all", "euclidean", "ell_q", "quadratic", "custom"],
                   help="gauge family; 'all' (gauge-check only) covers every built-in gauge")
    p.add_argument("--q", dest="gauge_q", type=float)
    p.add_argument("--matrix", dest="gauge_matrix", help="rows separated by ';', e.g. '2 0.5; 0.5 1'")
    p.add_argument("--gauge-name", dest="gauge_name")
    p.add_argument("--dual-mode", dest="gauge_dual_mode", choices=["analytic", "numerical"])
    p.add_argument("--dims", help="comma-separated dimensions for gauge-check")
    p.add_argument("--t-min", dest="t_min", type=float)
    p.add_argument("--t-max", dest="t_max", type=float)
    p.add_argument("--points", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--samples", type=int)
    p.add_argument("--out")
    p.add_argument("--jobs", type=int)
    p.add_argument("--A", type=float)
    p.add_argument("--alpha", type=float)
    p.add_argument("--branch")
    p.add_argument("--interval", help="a,b")
    p.add_argument("--c", type=float)
    p.add_argument("--init")
    p.add_argument("--max-iters", dest="max_iters", type=int)
    p.add_argument("--tol", action="append", help="tolerance override name=value (repeatable)")


def build_parser():
    parser = argparse.ArgumentParser(prog="anisolab", description=__doc__.split("\n\n")[0],
                                     epilog=CSV_HELP, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--version", action="version", version=__version__)
    subs = parser.add_subparsers(dest="command", required=True)
    helps = {
        "exponents": "decay exponents mu1, mu2 for one gamma or a gamma grid",
        "gauge-check": "gauge identities, divergence identity and Wulff volume",
        "residual": "exact power solutions against the reduced radial operator",
        "supersolution": "synthesise (delta, epsilon, R) and check g >= A t^-alpha",
        "inequalities": "seeded property suite for the gauge inequalities",
        "minimize": "minimise the discrete Hardy-Sobolev quotient",
        "sweep": "S(gamma) over a gamma grid",
        "liouville": "pure-power rigidity of the homogeneous BVP",
        "compare": "comparison-principle pairs and exterior growth",
        "suite": "run every command above",
    }
    for name in COMMANDS:
        sp = subs.add_parser(name, help=helps[name], epilog=CSV_HELP,
                             formatter_class=argparse.RawDescriptionHelpFormatter)
        _options(sp)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        cfg = resolve_config(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
