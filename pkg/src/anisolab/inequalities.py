"""Seeded property checks for the quantitative gauge inequalities.

Each check draws pairs or tuples from a heavy-tailed mixture, evaluates both
sides, and records the worst relative margin.  A sample is a violation when

    (big - small) / max(|big|, |small|, 1e-300) < -slack,

after differences smaller than 64 machine epsilons times the magnitude of
the summed terms are set to zero.  This only matters for near-equality
cases whose two sides are differences of large terms.

Constants the inequalities leave unnamed (C_p for 1 < p < 2 and C_delta) come
from brute-force oracles and are frozen in a constants manifest.
"""

from __future__ import annotations

import datetime
import functools
import json
from importlib import resources

import numpy as np
from scipy import optimize
from scipy.integrate import trapezoid

from .errors import ConsistencyError, InvalidInputError
from .gauge import Gauge, GaugeSpec
from .radial import RadialProfile
from .reports import InequalityReport, write_json
from .spectrum import ProblemParams

SLACK = 1e-12
EPS = np.finfo(float).eps
MANIFEST = "constants.json"


def _rng(seed):
    return np.random.default_rng(seed)


def heavy_vectors(rng, n, dim):
    """Isotropic mixture: unit normal with prob 1/2, scale 10^2 normal otherwise."""
    scale = np.where(rng.random(n) < 0.5, 1.0, 100.0)
    return rng.standard_normal((n, dim)) * scale[:, None]


def sample_pairs(dim, n, rng):
    """(eta, eta') pairs: independent, near-coincident, antipodal and one-zero."""
    eta = heavy_vectors(rng, n, dim)
    other = heavy_vectors(rng, n, dim)
    kind = rng.integers(0, 10, n)
    near = kind == 7
    rel = 10.0 ** rng.uniform(-6, -1, n)
    other[near] = eta[near] + rel[near, None] * np.linalg.norm(eta[near], axis=1)[:, None] \
        * rng.standard_normal((near.sum(), dim))
    anti = kind == 8
    other[anti] = -eta[anti] * rng.uniform(0.1, 10, anti.sum())[:, None]
    zero = kind == 9
    other[zero] = 0.0
    return eta, other


def _margins(big, small, terms):
    scale = np.maximum(np.maximum(np.abs(big), np.abs(small)), 1e-300)
    diff = big - small
    rounding = np.abs(diff) <= 64 * EPS * terms
    return np.where(rounding, 0.0, diff) / scale, rounding


def _report(name, big, small, terms, constant, source, slack=SLACK, **details):
    margin, rounding = _margins(big, small, terms)
    viol = margin < -slack
    k = int(np.argmin(margin))
    details = dict(details)
    details["rounding_level_samples"] = int(rounding.sum())
    return InequalityReport(name, len(margin), int(viol.sum()), float(margin[k]),
                            float(constant), source, slack, details)


# --- vector monotonicity of the flux ---------------------------------------------


def monotonicity_constant(gauge: Gauge, p):
    """((p-1) a2^{p-2} M^2 + a2^{p-1} Mbar) * max{1, 4^{2-p}, 2*4^{2-p}}."""
    a2, M, Mb = gauge.alpha2, gauge.M, gauge.Mbar
    base = (p - 1) * a2 ** (p - 2) * M**2 + a2 ** (p - 1) * Mb
    return base * max(1.0, 4.0 ** (2 - p), 2 * 4.0 ** (2 - p))


def check_vector_monotonicity(gauge: Gauge, p, samples=10_000, seed=0) -> InequalityReport:
    """|flux(eta) - flux(eta')| <= C (|eta| + |eta'|)^{p-2} |eta - eta'|."""
    if p <= 1:
        raise InvalidInputError("need p > 1")
    eta, other = sample_pairs(gauge.dim, samples, _rng(seed))
    C = monotonicity_constant(gauge, p)
    f1, f2 = gauge.flux(eta, p), gauge.flux(other, p)
    small = np.linalg.norm(f1 - f2, axis=1)
    r = np.linalg.norm(eta, axis=1) + np.linalg.norm(other, axis=1)
    big = C * r ** (p - 2) * np.linalg.norm(eta - other, axis=1)
    terms = np.linalg.norm(f1, axis=1) + np.linalg.norm(f2, axis=1)
    return _report("flux-lipschitz", big, small, terms, C, "closed-form from gauge bounds",
                   gauge=gauge.spec.label(), p=p, seed=seed)


# --- convexity of H^p ----------------------------------------------------------------


def uniform_convexity_constant(p):
    """1 / (2^{p-1} - 1), the constant used for p >= 2."""
    return 1.0 / (2.0 ** (p - 1) - 1.0)


def _tangent_parts(gauge, eta, other, p):
    hp = gauge.h(eta) ** p
    hq = gauge.h(other) ** p
    lin = p * np.einsum("ij,ij->i", gauge.flux(other, p), eta - other)
    return hp, hq, lin


def check_convexity_p_ge_2(gauge: Gauge, p, samples=10_000, seed=0) -> InequalityReport:
    """H^p(eta) >= H^p(eta') + p<flux(eta'), eta-eta'> + C H^p(eta-eta')."""
    if p < 2:
        raise InvalidInputError("this check needs p >= 2")
    eta, other = sample_pairs(gauge.dim, samples, _rng(seed))
    C = uniform_convexity_constant(p)
    hp, hq, lin = _tangent_parts(gauge, eta, other, p)
    rest = C * gauge.h(eta - other) ** p
    small = hq + lin + rest
    terms = hp + hq + np.abs(lin) + rest
    return _report("convexity-p>=2", hp, small, terms, C, "closed form 1/(2^(p-1)-1)",
                   gauge=gauge.spec.label(), p=p, seed=seed)


def _singular_ratio(gauge, eta, other, p):
    hp, hq, lin = _tangent_parts(gauge, eta, other, p)
    bracket = (gauge.h(eta) + gauge.h(other)) ** (p - 2) * gauge.h(eta - other) ** 2
    return (hp - hq - lin) / bracket


def singular_constant_oracle(gauge: Gauge, p, samples=20_000, seed=12345, polish=8):
    """Infimum of the C_p ratio over pairs, by dense sampling plus local polishing.

    The ratio is 0-homogeneous in (eta, eta') jointly, so sampling on the unit
    sphere of R^{2N} (with the same near/antipodal/zero mixture) covers it.
    Returns (infimum, argmin pair).
    """
    rng = _rng(seed)
    eta, other = sample_pairs(gauge.dim, samples, rng)
    keep = np.linalg.norm(eta - other, axis=1) > 0
    eta, other = eta[keep], other[keep]
    r = _singular_ratio(gauge, eta, other, p)
    if np.any(r <= 0):
        raise ConsistencyError("C_p ratio is nonpositive at some sample")
    n = gauge.dim

    def f(z):
        a, b = z[:n][None], z[n:][None]
        if not np.any(a - b):
            return np.inf
        return float(_singular_ratio(gauge, a, b, p)[0])

    best = float(r.min())
    arg = np.concatenate([eta[np.argmin(r)], other[np.argmin(r)]])
    for k in np.argsort(r)[:polish]:
        z0 = np.concatenate([eta[k], other[k]])
        z0 = z0 / np.linalg.norm(z0)
        res = optimize.minimize(f, z0, method="Nelder-Mead",
                                options={"xatol": 1e-10, "fatol": 1e-12, "maxiter": 4000})
        if res.fun < best:
            best, arg = float(res.fun), res.x
    if best <= 0:
        raise ConsistencyError("C_p ratio is nonpositive after polishing")
    return best, arg


def check_convexity_p_lt_2(gauge: Gauge, p, samples=10_000, seed=0, constant=None) -> InequalityReport:
    """H^p(eta) >= H^p(eta') + p<flux(eta'), eta-eta'> + C_p [H(eta)+H(eta')]^{p-2} H^2(eta-eta')."""
    if not 1 < p < 2:
        raise InvalidInputError("this check needs 1 < p < 2")
    source = "supplied"
    if constant is None:
        constant, source = frozen_singular_constant(gauge, p)
    eta, other = sample_pairs(gauge.dim, samples, _rng(seed))
    hp, hq, lin = _tangent_parts(gauge, eta, other, p)
    d = gauge.h(eta - other)
    with np.errstate(divide="ignore", invalid="ignore"):
        rest = np.where(d > 0, constant * (gauge.h(eta) + gauge.h(other)) ** (p - 2) * d**2, 0.0)
    small = hq + lin + rest
    terms = hp + hq + np.abs(lin) + rest
    return _report("convexity-1<p<2", hp, small, terms, constant, source,
                   gauge=gauge.spec.label(), p=p, seed=seed)


# --- power splitting -------------------------------------------------------------


def _split_ratio(b, p, delta):
    # C_delta must dominate [1/(1 + 2^{p+1} delta) - (1-b)^p] / b^p on a + b = 1
    return (1.0 / (1.0 + 2.0 ** (p + 1) * delta) - (1.0 - b) ** p) / b**p


def split_constant_oracle(p, delta, grid=4096):
    """sup over b in (0, 1] of the split ratio, by grid plus bounded polishing."""
    if p <= 1 or delta <= 0:
        raise InvalidInputError("need p > 1 and delta > 0")
    b = np.unique(np.concatenate([np.geomspace(1e-8, 1.0, grid), np.linspace(0, 1, grid)[1:]]))
    r = _split_ratio(b, p, delta)
    k = int(np.argmax(r))
    lo, hi = b[max(k - 1, 0)], b[min(k + 1, len(b) - 1)]
    best = float(r[k])
    if hi > lo:
        res = optimize.minimize_scalar(lambda s: -_split_ratio(s, p, delta), bounds=(lo, hi),
                                       method="bounded", options={"xatol": 1e-14})
        best = max(best, -float(res.fun))
    return best


def check_power_split(p, delta, samples=10_000, seed=0, constant=None, top=1e3) -> InequalityReport:
    """a^p >= (a+b)^p / (1 + 2^{p+1} delta) - C_delta b^p for a, b >= 0."""
    if p <= 1 or delta <= 0:
        raise InvalidInputError("need p > 1 and delta > 0")
    source = "supplied"
    if constant is None:
        constant = split_constant_oracle(p, delta) * (1 + 1e-9)
        source = "oracle: grid sup on a+b=1, frozen x(1+1e-9)"
    rng = _rng(seed)
    a = rng.uniform(0, top, samples)
    b = rng.uniform(0, top, samples)
    a[::50] = 0.0
    b[1::50] = 0.0
    big = a**p + constant * b**p
    small = (a + b) ** p / (1 + 2.0 ** (p + 1) * delta)
    return _report("power-split", big, small, big + small, constant, source, p=p, delta=delta, seed=seed)


# --- Hardy quotient --------------------------------------------------------------


def hardy_integrals(params: ProblemParams, profile: RadialProfile, kappa=1.0, tail_tol=1e-4):
    """(∫ H^p(grad u), ∫ u^p / H°^p) over R^N for u = v(H°)."""
    t, v, dv = profile.t, profile.v, profile.dv
    N, p = params.N, params.p
    x = np.log(t)
    g_num = np.abs(dv) ** p * t**N
    g_den = v**p * t ** (N - p)
    for g in (g_num, g_den):
        peak = g.max()
        if peak <= 0 or max(g[0], g[-1]) > tail_tol * peak:
            raise InvalidInputError("integrand not negligible at the grid ends (divergent tail)")
    w = N * kappa
    return w * float(trapezoid(g_num, x)), w * float(trapezoid(g_den, x))


def hardy_quotient(params: ProblemParams, profile: RadialProfile, kappa=1.0, tail_tol=1e-4) -> float:
    num, den = hardy_integrals(params, profile, kappa, tail_tol)
    return num / den


def _decades(rate, floor=1e-7):
    # decades needed for a power t^{-rate} to fall below ``floor``
    return -np.log10(floor) / rate


def near_extremal_profile(params: ProblemParams, eps, T, decay=1.0, per_decade=64):
    """t^{-(N-p)/p} smoothed at 0 and cut at T: (eps^2+t^2)^{-a/2} (1+(t/T)^2)^{-d/2}."""
    a, d = params.mid, decay
    lo = eps * 10 ** -_decades(params.N - params.p)
    hi = T * 10 ** _decades(params.p * d)
    t = np.geomspace(lo, hi, int(per_decade * np.log10(hi / lo)) + 1)

    def fn(s):
        A = (eps**2 + s**2) ** (-a / 2)
        B = (1 + (s / T) ** 2) ** (-d / 2)
        dA = -a * s * (eps**2 + s**2) ** (-a / 2 - 1)
        dB = -d * s / T**2 * (1 + (s / T) ** 2) ** (-d / 2 - 1)
        return A * B, dA * B + A * dB, np.zeros_like(s)

    return RadialProfile.from_function(t, fn)


def random_smooth_profile(params: ProblemParams, rng, per_decade=48):
    """Positive mixture of rational bumps with tails fast enough for the Hardy integrals."""
    k = int(rng.integers(1, 4))
    s = 10.0 ** rng.uniform(-1, 1, k)
    a = rng.uniform(1.0, 3.0, k)
    rate = params.mid * rng.uniform(1.3, 3.0, k)
    b = rate / a
    w = rng.uniform(0.2, 1.0, k)
    # slowest tail of v^p t^{N-p} is t^{-p (rate - mid)} at infinity, t^{N-p} at 0
    lo = s.min() * 10 ** -_decades(params.N - params.p)
    hi = s.max() * 10 ** _decades(params.p * (rate.min() - params.mid))
    t = np.geomspace(lo, hi, int(per_decade * np.log10(hi / lo)) + 1)

    def fn(r):
        v = np.zeros_like(r)
        dv = np.zeros_like(r)
        for sj, aj, bj, wj in zip(s, a, b, w):
            z = (r / sj) ** aj
            v += wj * (1 + z) ** (-bj)
            dv += -wj * bj * aj * z / r * (1 + z) ** (-bj - 1)
        return v, dv, np.zeros_like(r)

    return RadialProfile.from_function(t, fn)


def check_hardy(params: ProblemParams, profiles=1000, seed=0) -> InequalityReport:
    """Hardy quotient >= C_H over random smooth radial profiles."""
    rng = _rng(seed)
    q = np.array([hardy_quotient(params, random_smooth_profile(params, rng)) for _ in range(profiles)])
    C = params.C_H
    return _report("hardy", q, np.full_like(q, C), q + C, C, "closed form ((N-p)/p)^p",
                   N=params.N, p=params.p, seed=seed, min_quotient=float(q.min()))


# --- pointwise logarithmic estimate -------------------------------------------------


def _bregman(gauge, a, b, p):
    # H^p(a) - H^p(b) - p <flux(b), a - b>
    return gauge.h(a) ** p - gauge.h(b) ** p - p * np.einsum("ij,ij->i", gauge.flux(b, p), a - b)


def log_pairing(gauge, p, u, v, gu, gv):
    """Sum of the two flux pairings against grad(u - v^p u^{1-p}) and grad(v - u^p v^{1-p})."""
    fu, fv = gauge.flux(gu, p), gauge.flux(gv, p)
    r = (v / u)[:, None]
    s = (u / v)[:, None]
    psi1 = gu - p * r ** (p - 1) * gv + (p - 1) * r**p * gu
    psi2 = gv - p * s ** (p - 1) * gu + (p - 1) * s**p * gv
    lhs = np.einsum("ij,ij->i", fu, psi1) + np.einsum("ij,ij->i", fv, psi2)
    terms = (np.einsum("ij,ij->i", np.abs(fu), np.abs(psi1) + np.abs(gu) + np.abs(p * r ** (p - 1) * gv))
             + np.einsum("ij,ij->i", np.abs(fv), np.abs(psi2) + np.abs(gv) + np.abs(p * s ** (p - 1) * gu)))
    return lhs, terms


def log_pairing_expanded(gauge, p, u, v, gu, gv):
    """Same quantity through the logarithmic gradients: u^p B(a, b) + v^p B(b, a)."""
    a = gu / u[:, None]
    b = gv / v[:, None]
    return u**p * _bregman(gauge, a, b, p) + v**p * _bregman(gauge, b, a, p)


def sample_log_tuples(dim, n, rng):
    u = 10.0 ** rng.uniform(-2, 2, n)
    v = 10.0 ** rng.uniform(-2, 2, n)
    gu = heavy_vectors(rng, n, dim)
    gv = heavy_vectors(rng, n, dim)
    kind = rng.integers(0, 10, n)
    same = kind == 8
    gv[same] = gu[same] * (v[same] / u[same])[:, None]
    equal = kind == 9
    v[equal] = u[equal]
    gv[equal] = gu[equal]
    return u, v, gu, gv


def check_log_pointwise(gauge: Gauge, p, samples=10_000, seed=0, constant=None) -> InequalityReport:
    """Pairing >= C (u^p+v^p) H^p(grad log u - grad log v)  (p >= 2), or the
    singular form with [H(grad log u) + H(grad log v)]^{p-2} H^2(...) (1 < p < 2)."""
    u, v, gu, gv = sample_log_tuples(gauge.dim, samples, _rng(seed))
    return log_pointwise_report(gauge, p, u, v, gu, gv, constant, seed)


def log_pointwise_report(gauge, p, u, v, gu, gv, constant=None, seed=None):
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if np.any(u <= 0) or np.any(v <= 0):
        raise InvalidInputError("u and v must be strictly positive")
    source = "supplied"
    if constant is None:
        if p >= 2:
            constant, source = uniform_convexity_constant(p), "closed form 1/(2^(p-1)-1)"
        else:
            constant, source = frozen_singular_constant(gauge, p)
    lhs, terms = log_pairing(gauge, p, u, v, gu, gv)
    expanded = log_pairing_expanded(gauge, p, u, v, gu, gv)
    a = gu / u[:, None]
    b = gv / v[:, None]
    d = gauge.h(a - b)
    if p >= 2:
        rhs = constant * (u**p + v**p) * d**p
    else:
        with np.errstate(divide="ignore", invalid="ignore"):
            rhs = np.where(d > 0, constant * (u**p + v**p)
                           * (gauge.h(a) + gauge.h(b)) ** (p - 2) * d**2, 0.0)
    gap = np.abs(lhs - expanded) / np.maximum(terms, 1e-300)
    return _report("log-pointwise", lhs, rhs, terms + rhs, constant, source,
                   gauge=gauge.spec.label(), p=p, seed=seed,
                   expansion_max_rel_gap=float(gap.max()))


# --- constants manifest ----------------------------------------------------------


ORACLE_SAMPLES = 20_000
SPLIT_GRID = 4096


def singular_oracle_entry(gauge: Gauge, p, samples=ORACLE_SAMPLES, seed=12345):
    inf, _ = singular_constant_oracle(gauge, p, samples, seed)
    return {"inequality": "convexity-1<p<2", "p": p, "gauge": gauge.spec.label(),
            "dimension": gauge.dim, "oracle_infimum": inf, "constant": 0.99 * inf,
            "oracle_grid": {"samples": samples, "seed": seed, "polish": "Nelder-Mead x8"}}


def split_oracle_entry(p, delta, grid=SPLIT_GRID):
    sup = split_constant_oracle(p, delta, grid)
    return {"inequality": "power-split", "p": p, "delta": delta, "oracle_supremum": sup,
            "constant": sup * (1 + 1e-9), "oracle_grid": {"points": grid, "polish": "bounded scalar"}}


def build_manifest(entries, path=None, date=None):
    """Write the constants manifest; the date is the only non-deterministic field."""
    date = date or datetime.date.today().isoformat()
    doc = {"date": date, "constants": entries}
    if path is not None:
        write_json(path, doc)
    return doc


@functools.lru_cache(maxsize=None)
def load_manifest():
    text = resources.files("anisolab").joinpath("data", MANIFEST).read_text()
    return json.loads(text)


def _lookup(kind, **key):
    for e in load_manifest()["constants"]:
        if e["inequality"] == kind and all(e.get(k) == v for k, v in key.items()):
            return e
    return None


@functools.lru_cache(maxsize=None)
def _oracle_cached(spec: GaugeSpec, dim, p):
    gauge = Gauge.build(spec, dim)
    return singular_oracle_entry(gauge, p)["constant"]


def frozen_singular_constant(gauge: Gauge, p):
    e = _lookup("convexity-1<p<2", p=p, gauge=gauge.spec.label(), dimension=gauge.dim)
    if e is not None:
        return e["constant"], "manifest (oracle infimum x0.99)"
    if gauge.spec.variant == "custom":
        inf, _ = singular_constant_oracle(gauge, p)
        return 0.99 * inf, "oracle infimum x0.99 (computed on demand)"
    return _oracle_cached(gauge.spec, gauge.dim, p), "oracle infimum x0.99 (computed on demand)"


def frozen_split_constant(p, delta):
    e = _lookup("power-split", p=p, delta=delta)
    if e is not None:
        return e["constant"]
    return split_constant_oracle(p, delta) * (1 + 1e-9)


def default_suite():
    """(gauge spec, dim, p) combinations covered by the standard suite."""
    from .gauge import CUSTOM_GAUGES
    q3 = GaugeSpec.ell_q(3.0)
    quad = GaugeSpec.quadratic([[2.0, 0.5], [0.5, 1.0]])
    custom = GaugeSpec.custom(CUSTOM_GAUGES["euclid_plus_l4"], "euclid_plus_l4")
    return {
        "monotonicity": [(GaugeSpec.euclidean(), 2, 2.0), (q3, 2, 2.5), (q3, 3, 1.5),
                         (quad, 2, 3.0), (custom, 2, 2.0)],
        "convexity_ge_2": [(GaugeSpec.euclidean(), 3, 2.0), (GaugeSpec.euclidean(), 2, 3.0),
                           (quad, 2, 3.0), (custom, 2, 2.5)],
        "convexity_lt_2": [(GaugeSpec.euclidean(), 2, 1.5), (GaugeSpec.euclidean(), 3, 1.75),
                           (quad, 2, 1.25)],
        "split": [(2.0, 0.1), (1.5, 0.05), (3.0, 0.5)],
        "log": [(GaugeSpec.euclidean(), 2, 2.0), (GaugeSpec.euclidean(), 3, 3.0),
                (quad, 2, 2.5), (GaugeSpec.euclidean(), 2, 1.5), (quad, 2, 1.25)],
        "hardy": [(3, 2.0), (4, 2.5), (5, 1.5)],
    }
