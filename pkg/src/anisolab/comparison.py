"""Radial two-point boundary value solver and numerical comparison checks.

The BVP is discretised in flux form on a grid uniform in x = log t (see
``radial.discrete_operator``) and solved by damped Newton on the tridiagonal
system.  Because pure powers t^{-mu} are only exact for a shifted exponent
on the discrete level, ``bvp_solve`` by default solves on two nested grids
and Richardson-extrapolates, which brings the error to O(h^4).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.linalg import solve_banded

from .errors import InvalidInputError, SolverError
from .radial import GRAD_FLOOR, RadialProfile, cumulative_log, discrete_operator, _operator_terms
from .spectrum import ProblemParams, solve_exponents

log = logging.getLogger(__name__)

REACTIONS = ("zero", "hardy-only", "doubly-critical", "custom")
RESIDUAL_TOL = 1e-9
MAX_NEWTON = 200


@dataclass(frozen=True)
class BVPSpec:
    """Dirichlet problem for -Δ_p v - γ v^{p-1}/t^p = f v^{p-1} on (a, b).

    reaction: "zero" drops the Hardy term as well (pure p-Laplacian),
    "hardy-only" keeps it with f = 0, "doubly-critical" uses f = v^{p*-p},
    "custom" uses the coefficient ``f(t)``.
    """

    params: ProblemParams
    a: float
    b: float
    va: float
    vb: float
    reaction: str = "hardy-only"
    f: Callable | None = field(default=None, compare=False)

    def __post_init__(self):
        if not (0 < self.a < self.b):
            raise InvalidInputError("need 0 < a < b")
        if not (self.va > 0 and self.vb > 0):
            raise InvalidInputError("boundary values must be positive")
        if self.reaction not in REACTIONS:
            raise InvalidInputError(f"unknown reaction {self.reaction!r}")
        if self.reaction == "custom" and self.f is None:
            raise InvalidInputError("custom reaction needs a coefficient f(t)")

    @property
    def gamma(self):
        return 0.0 if self.reaction == "zero" else self.params.gamma

    def coefficient(self, t, v):
        """(f, df/dv) at the nodes."""
        if self.reaction == "doubly-critical":
            e = self.params.p_star - self.params.p
            return v**e, e * v ** (e - 1)
        if self.reaction == "custom":
            return np.broadcast_to(np.asarray(self.f(t), dtype=float), t.shape), np.zeros_like(t)
        return np.zeros_like(t), np.zeros_like(t)


@dataclass
class BVPResult:
    profile: RadialProfile
    residual: float
    iterations: int
    history: list
    floor_binds: int = 0
    extrapolated: bool = False


def _residual(spec: BVPSpec, t, v):
    """Discrete residual at interior nodes and its normalisation t^p / v^{p-1}.

    The normalised residual is dimensionless and of the size of the
    continuous equation's terms for power-like profiles.
    """
    p = spec.params.p
    params = ProblemParams(spec.params.N, p, spec.gamma)
    ti, vi = t[1:-1], v[1:-1]
    f, _ = spec.coefficient(ti, vi)
    raw = discrete_operator(params, t, v) - f * vi ** (p - 1)
    return raw, ti**p / vi ** (p - 1)


def _jacobian(spec: BVPSpec, t, v):
    N, p, g = spec.params.N, spec.params.p, spec.gamma
    x = np.log(t)
    h = np.diff(x)
    D = np.diff(v) / h
    tm = np.exp(0.5 * (x[1:] + x[:-1]))
    fl = GRAD_FLOOR * 0.5 * np.abs(v[1:] + v[:-1])
    a = np.maximum(np.abs(D), fl)
    binds = int(np.sum(np.abs(D) < fl))
    k = tm ** (N - p) * (p - 1) * a ** (p - 2) / h
    ti, vi = t[1:-1], v[1:-1]
    c = 1.0 / (0.5 * (x[2:] - x[:-2]) * ti**N)
    f, df = spec.coefficient(ti, vi)
    diag = c * (k[1:] + k[:-1]) - g * (p - 1) * vi ** (p - 2) / ti**p \
        - (f * (p - 1) * vi ** (p - 2) + df * vi ** (p - 1))
    upper = -c * k[1:]
    lower = -c * k[:-1]
    ab = np.zeros((3, len(vi)))
    ab[0, 1:] = upper[:-1]
    ab[1] = diag
    ab[2, :-1] = lower[1:]
    return ab, binds


def _newton(spec: BVPSpec, t, v0, tol=RESIDUAL_TOL, max_iter=MAX_NEWTON):
    # Iterates live in extended precision: the second difference of v loses
    # about eps/h^2 relative accuracy, which in float64 sits near 1e-9 on fine grids.
    t = np.asarray(t, dtype=np.longdouble)
    v = np.asarray(v0, dtype=np.longdouble).copy()
    v[0], v[-1] = spec.va, spec.vb
    raw, w = _residual(spec, t, v)
    res = float(np.max(np.abs(raw * w)))
    history = [res]
    binds = 0
    for it in range(1, max_iter + 1):
        if res <= tol:
            return v, res, it - 1, history, binds
        ab, b = _jacobian(spec, t, v)
        binds = max(binds, b)
        try:
            step = solve_banded((1, 1), ab.astype(float), -raw.astype(float))
        except (np.linalg.LinAlgError, ValueError) as exc:
            raise SolverError(f"singular Newton system: {exc}", history) from exc
        lam = 1.0
        while True:
            trial = v.copy()
            trial[1:-1] += lam * step.astype(np.longdouble)
            if np.all(trial[1:-1] > 0):
                traw, tw = _residual(spec, t, trial)
                tres = float(np.max(np.abs(traw * tw)))
                if np.isfinite(tres) and (tres < res or lam < 1e-3):
                    break
            lam *= 0.5
            if lam < 1e-10:
                raise SolverError("damping could not keep the iterate positive", history)
        v, raw, w, res = trial, traw, tw, tres
        history.append(res)
    if res <= tol:
        return v, res, max_iter, history, binds
    raise SolverError(f"Newton did not converge in {max_iter} iterations (residual {res:.3e})",
                      history)


def _initial_guess(spec: BVPSpec, t):
    # power law through the boundary data
    s = (np.log(t) - np.log(spec.a)) / (np.log(spec.b) - np.log(spec.a))
    return np.exp((1 - s) * np.log(spec.va) + s * np.log(spec.vb))


def bvp_solve(spec: BVPSpec, points=2049, extrapolate=True, tol=RESIDUAL_TOL, init=None) -> BVPResult:
    """Solve the Dirichlet problem on ``points`` log-spaced nodes.

    With ``extrapolate`` the problem is also solved on the grid with half the
    spacing, and the returned values are (4 v_fine - v_coarse)/3 at the coarse
    nodes.  The residual reported is the fine-grid discrete residual.
    """
    if points < 5:
        raise InvalidInputError("need at least 5 grid points")
    t = np.geomspace(spec.a, spec.b, points)
    guess = _initial_guess(spec, t) if init is None else np.asarray(init, dtype=float)
    v, res, its, hist, binds = _newton(spec, t, guess, tol)
    if not extrapolate:
        return BVPResult(RadialProfile.from_values(t, v.astype(float)), res, its, hist, binds)
    tf = np.geomspace(spec.a, spec.b, 2 * points - 1)
    gf = np.exp(np.interp(np.log(tf), np.log(t), np.log(v.astype(float))))
    vf, res_f, its_f, hist_f, binds_f = _newton(spec, tf, gf, tol)
    ve = ((4 * vf[::2] - v) / 3).astype(float)
    if np.any(ve <= 0):
        raise SolverError("extrapolated solution is not positive", hist_f)
    return BVPResult(RadialProfile.from_values(t, ve), res_f, its + its_f, hist + hist_f,
                     max(binds, binds_f), True)


# --- comparison ----------------------------------------------------------------------


@dataclass
class ComparisonReport:
    ordered: bool
    worst_location: float
    worst_violation: float
    hypotheses: dict = field(default_factory=dict)
    growth: list | None = None
    deviation: float | None = None
    details: dict = field(default_factory=dict)

    def to_dict(self):
        from .reports import _plain
        return _plain(self)


def equation_defect(params: ProblemParams, profile: RadialProfile, f):
    """(-Δ_p v - γ v^{p-1}/t^p - f v^{p-1}) / scale, pointwise, with the residual_report scale."""
    f = np.broadcast_to(np.asarray(f, dtype=float), profile.t.shape)
    t1, t2, t3, _ = _operator_terms(params, profile.t, profile.v, profile.dv, profile.d2v)
    rhs = f * profile.v ** (params.p - 1)
    scale = np.abs(t1) + np.abs(t2) + np.abs(t3) + np.abs(rhs) + np.finfo(float).tiny
    return (t1 + t2 + t3 - rhs) / scale


def verify_comparison(params: ProblemParams, sub: RadialProfile, sup: RadialProfile, fsub, fsuper,
                      tol=1e-5, order_tol=1e-10, require_hypotheses=True, edge=2) -> ComparisonReport:
    """Check sub <= sup on the grid after machine-checking the principle's hypotheses.

    Hypotheses: sub is a subsolution for ``fsub`` and sup a supersolution for
    ``fsuper`` (relative defect within ``tol``, skipping ``edge`` nodes at each
    end where one-sided stencils live), fsub <= fsuper, sub <= sup at both ends,
    and inf sup > 0.
    """
    if sub.t.shape != sup.t.shape or not np.allclose(sub.t, sup.t, rtol=1e-12, atol=0):
        raise InvalidInputError("sub and super must share a grid")
    t = sub.t
    fs = np.broadcast_to(np.asarray(fsub, dtype=float), t.shape)
    fS = np.broadcast_to(np.asarray(fsuper, dtype=float), t.shape)
    inner = slice(edge, len(t) - edge)
    d_sub = equation_defect(params, sub, fs)[inner]
    d_sup = equation_defect(params, sup, fS)[inner]
    hyp = {
        "sub_defect_max": float(d_sub.max()),
        "super_defect_min": float(d_sup.min()),
        "subsolution": bool(d_sub.max() <= tol),
        "supersolution": bool(d_sup.min() >= -tol),
        "coefficients_ordered": bool(np.all(fs <= fS)),
        "boundary_ordered": bool(sub.v[0] <= sup.v[0] and sub.v[-1] <= sup.v[-1]),
        "super_positive": bool(sup.v.min() > 0),
    }
    if require_hypotheses and not all(v for k, v in hyp.items() if isinstance(v, bool)):
        failed = [k for k, v in hyp.items() if v is False]
        raise InvalidInputError(f"comparison hypotheses not verified: {', '.join(failed)}")
    gap = (sub.v - sup.v) / sup.v
    k = int(np.argmax(gap))
    return ComparisonReport(bool(gap[k] <= order_tol), float(t[k]), float(max(gap[k], 0.0)), hyp)


# --- exterior growth -----------------------------------------------------------------


@dataclass
class GrowthReport:
    values: list
    exponent: float
    decreasing: bool
    certified: bool
    note: str = "finite-R monotone-tail heuristic on H°-annuli; the limit itself is not computed"

    def to_dict(self):
        from .reports import _plain
        return _plain(self)


def exterior_growth_check(u: RadialProfile, v: RadialProfile, params: ProblemParams, radii,
                          kappa=1.0, flat_tol=1e-3) -> GrowthReport:
    """(1/R) ∫_{B_2R \\ B_R} u^p |grad log v|^{p-1} over H°-annuli, for each R.

    |grad log v| is measured by H, which equals |v'/v| for radial profiles.
    ``certified`` needs a strictly decreasing sequence and a fitted log-log
    slope below ``-flat_tol``.
    """
    radii = np.sort(np.asarray(radii, dtype=float))
    if u.t.shape != v.t.shape or not np.allclose(u.t, v.t, rtol=1e-12, atol=0):
        raise InvalidInputError("profiles must share a grid")
    t = u.t
    if t[-1] < 4 * radii.max() or t[0] > radii.min():
        raise InvalidInputError("profile grid must cover [min R, 4 max R]")
    p, N = params.p, params.N
    f = N * kappa * u.v**p * np.abs(v.dv / v.v) ** (p - 1) * t ** (N - 1)
    cum = cumulative_log(t, f)
    x = np.log(t)
    vals = (np.interp(np.log(2 * radii), x, cum) - np.interp(np.log(radii), x, cum)) / radii
    pos = vals > 0
    exponent = float(np.polyfit(np.log(radii[pos]), np.log(vals[pos]), 1)[0]) if pos.sum() >= 2 \
        else float("-inf")
    decreasing = bool(np.all(np.diff(vals) < 0) or (vals[-1] == 0 and np.all(np.diff(vals) <= 0)))
    certified = decreasing and exponent < -flat_tol
    return GrowthReport([(float(R), float(s)) for R, s in zip(radii, vals)], exponent, decreasing,
                        certified)


# --- Liouville rigidity -----------------------------------------------------------------


def power_deviation(profile: RadialProfile, mu, c):
    exact = c * profile.t ** (-mu)
    return float(np.max(np.abs(profile.v - exact) / exact))


def _solve_power(params, mu, a, b, c, points):
    spec = BVPSpec(params, a, b, c * a ** (-mu), c * b ** (-mu), "hardy-only")
    return bvp_solve(spec, points)


def liouville_check(params: ProblemParams, branch="mu2", interval=(0.1, 10.0), c=1.0,
                    points=2049, widen=10.0, refine=4, tol=1e-6) -> ComparisonReport:
    """Homogeneous BVP with data c a^{-mu}, c b^{-mu} must return c t^{-mu}.

    Repeats on the interval widened by ``widen`` at each end (same density
    in log t) and on a grid refined ``refine`` times.
    """
    if branch not in ("mu1", "mu2"):
        raise InvalidInputError("branch must be 'mu1' or 'mu2'")
    a, b = map(float, interval)
    if not (0 < a < b) or c <= 0:
        raise InvalidInputError("need 0 < a < b and c > 0")
    e = solve_exponents(params)
    mu = e.mu1 if branch == "mu1" else e.mu2
    base = _solve_power(params, mu, a, b, c, points)
    span = np.log(b / a)
    wide_pts = int(round((points - 1) * np.log(b * widen / (a / widen)) / span)) + 1
    wide = _solve_power(params, mu, a / widen, b * widen, c, wide_pts)
    fine = _solve_power(params, mu, a, b, c, refine * (points - 1) + 1)
    devs = {"base": power_deviation(base.profile, mu, c),
            "widened": power_deviation(wide.profile, mu, c),
            "refined": power_deviation(fine.profile, mu, c)}
    worst = max(devs.values())
    details = {"mu": mu, "branch": branch, "interval": [a, b], "c": c, "points": points,
               "residuals": {"base": base.residual, "widened": wide.residual, "refined": fine.residual},
               "deviations": devs, "tolerance": tol}
    return ComparisonReport(worst <= tol, float("nan"), 0.0, {}, None, worst, details)


def mixed_data_control(params: ProblemParams, interval=(0.1, 10.0), c1=1.0, c2=2.0, points=2049):
    """BVP with data c1 a^{-mu1}, c2 b^{-mu2}: the best single power fit should NOT be exact.

    Returns the max relative deviation from the least-squares power law.
    """
    a, b = interval
    e = solve_exponents(params)
    spec = BVPSpec(params, a, b, c1 * a ** (-e.mu1), c2 * b ** (-e.mu2), "hardy-only")
    prof = bvp_solve(spec, points).profile
    slope, icpt = np.polyfit(np.log(prof.t), np.log(prof.v), 1)
    fit = np.exp(icpt) * prof.t**slope
    return float(np.max(np.abs(prof.v - fit) / fit))
