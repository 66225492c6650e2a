"""Discrete Hardy-Sobolev quotient and its minimisation over radial profiles.

The quotient is

    Q(v) = [∫ |v'|^p - γ |v|^p / t^p] / (∫ |v|^{p*})^{p/p*}

with every integral taken against N κ t^{N-1} dt and discretised on a grid
uniform in x = log t, with v = 0 at both truncation ends.  The gradient term
lives on cell midpoints, the other two use nodal trapezoid weights.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_banded

from .errors import InvalidInputError
from .radial import GRAD_FLOOR, DecayFit, RadialProfile, decay_fit, gradient_decay_fit
from .spectrum import ProblemParams, solve_exponents

log = logging.getLogger(__name__)

ARMIJO_C = 1e-4
GRAD_TOL = 1e-8
MAX_ITERS = 100_000
GRAD_CHECK_EVERY = 100


@dataclass(frozen=True, eq=False)
class QuotientSetup:
    params: ProblemParams
    kappa: float
    t: np.ndarray  # full grid including the two Dirichlet nodes

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float)
        if t.ndim != 1 or len(t) < 8 or t[0] <= 0 or np.any(np.diff(t) <= 0):
            raise InvalidInputError("grid must be increasing, positive, with >= 8 nodes")
        if not self.kappa > 0:
            raise InvalidInputError("kappa must be positive")
        dx = np.diff(np.log(t))
        if not np.allclose(dx, dx[0], rtol=1e-9, atol=0):
            raise InvalidInputError("grid must be log-spaced")
        object.__setattr__(self, "t", t)

    @classmethod
    def build(cls, params, kappa=None, t_min=1e-4, t_max=1e4, points=2048):
        if kappa is None:
            from .gauge import ell_ball_volume
            kappa = ell_ball_volume(2.0, params.N)  # Euclidean unit ball
        return cls(params, float(kappa), np.geomspace(t_min, t_max, int(points)))

    @property
    def h(self):
        return float(np.log(self.t[1] / self.t[0]))

    @property
    def nodes(self):
        """Interior nodes, where the unknowns live."""
        return self.t[1:-1]

    @property
    def mid(self):
        x = np.log(self.t)
        return np.exp(0.5 * (x[1:] + x[:-1]))

    @property
    def weights(self):
        """Nκ t_i^N h at interior nodes: ∫ f t^{N-1} dt ≈ Σ w_i f(t_i)."""
        return self.params.N * self.kappa * self.nodes**self.params.N * self.h

    def self_test(self, rtol=1e-3):
        """Trapezoid check on ∫ t^{N-1} t^{-N+1/2} dt = 2 (√b - √a)."""
        a, b = self.t[0], self.t[-1]
        exact = 2 * (np.sqrt(b) - np.sqrt(a))
        w = np.concatenate([[0.5], np.ones(len(self.t) - 2), [0.5]]) * self.t * self.h
        approx = float(np.sum(w * self.t**-0.5))
        return abs(approx - exact) / exact <= rtol, approx, exact


def _interior(setup: QuotientSetup, profile):
    if isinstance(profile, RadialProfile):
        if len(profile.t) != len(setup.nodes) or not np.allclose(profile.t, setup.nodes, rtol=1e-12):
            raise InvalidInputError("profile must live on the setup's interior nodes")
        return np.asarray(profile.v, dtype=float)
    v = np.asarray(profile, dtype=float)
    if v.shape != setup.nodes.shape:
        raise InvalidInputError("values must live on the setup's interior nodes")
    return v


def _parts(setup: QuotientSetup, v):
    N, p = setup.params.N, setup.params.p
    ps = setup.params.p_star
    h = setup.h
    c = N * setup.kappa * h
    full = np.concatenate([[0.0], v, [0.0]])
    D = np.diff(full) / h
    A = c * setup.mid ** (N - p)
    B = c * setup.nodes ** (N - p)
    C = c * setup.nodes**N
    av = np.abs(v)
    G = float(np.sum(A * np.abs(D) ** p))
    Hd = float(np.sum(B * av**p))
    Dn = float(np.sum(C * av**ps))
    return G, Hd, Dn, D, A, B, C


def functionals(setup: QuotientSetup, profile):
    """(gradient energy, Hardy energy, ∫|v|^{p*}) of the discrete profile."""
    G, Hd, Dn, *_ = _parts(setup, _interior(setup, profile))
    return G, Hd, Dn


def rayleigh_quotient(setup: QuotientSetup, profile) -> float:
    v = _interior(setup, profile)
    G, Hd, Dn, *_ = _parts(setup, v)
    if Dn <= 0:
        raise InvalidInputError("zero profile")
    p = setup.params.p
    return (G - setup.params.gamma * Hd) / Dn ** (p / setup.params.p_star)


def _value_and_grad(setup: QuotientSetup, v):
    p, g, ps = setup.params.p, setup.params.gamma, setup.params.p_star
    G, Hd, Dn, D, A, B, C = _parts(setup, v)
    if Dn <= 0:
        raise InvalidInputError("zero profile")
    L = G - g * Hd
    F = A * np.abs(D) ** (p - 2) * D
    dG = p * (F[:-1] - F[1:]) / setup.h
    sgn = np.sign(v)
    av = np.abs(v)
    dH = p * B * av ** (p - 1) * sgn
    dD = ps * C * av ** (ps - 1) * sgn
    dL = dG - g * dH
    scale = Dn ** (p / ps)
    Q = L / scale
    grad = (dL - (p / ps) * (L / Dn) * dD) / scale
    return Q, grad


def quotient_gradient(setup: QuotientSetup, profile):
    """Exact gradient of the discrete quotient with respect to the interior values."""
    return _value_and_grad(setup, _interior(setup, profile))[1]


def gradient_check(setup: QuotientSetup, v, rng, directions=32, step=1e-4, scale="pairing"):
    """Worst relative gap between <grad Q, d> and five-point differences of Q.

    Directions are smooth, so the step never flips the sign of a slope.
    ``scale="pairing"`` divides by max(|<grad Q, d>|, |fd|), the strict test
    for generic points.  Near a critical point that pairing is itself at
    rounding level, so ``scale="norms"`` divides by |grad Q| |d| instead.
    """
    v = _interior(setup, v)
    _, g = _value_and_grad(setup, v)
    s = np.linspace(0, 1, len(v))
    modes = np.sin(np.pi * np.outer(np.arange(1, 9), s))
    worst = 0.0
    for _ in range(directions):
        # smooth random direction: v times a random low-frequency sine series
        d = v * ((rng.standard_normal(8) / np.arange(1, 9)) @ modes)
        hs = step * np.linalg.norm(v) / np.linalg.norm(d)
        q = [rayleigh_quotient(setup, v + k * hs * d) for k in (-2, -1, 1, 2)]
        fd = (8 * (q[2] - q[1]) - (q[3] - q[0])) / (12 * hs)
        an = float(g @ d)
        den = max(abs(an), abs(fd)) if scale == "pairing" else np.linalg.norm(g) * np.linalg.norm(d)
        worst = max(worst, abs(fd - an) / max(den, 1e-300))
    return worst


def _preconditioner(setup: QuotientSetup, v):
    """Banded SPD matrix from the second variation of the gradient term."""
    p = setup.params.p
    full = np.concatenate([[0.0], v, [0.0]])
    D = np.diff(full) / setup.h
    _, _, _, _, A, B, _ = _parts(setup, v)
    fl = GRAD_FLOOR * max(np.abs(v).max(), 1e-300)
    k = p * (p - 1) * A * np.maximum(np.abs(D), fl) ** (p - 2) / setup.h**2
    diag = k[:-1] + k[1:]
    if p != 2:
        # keeps the degenerate (p > 2) or singular (p < 2) weights positive definite
        diag = diag + 1e-8 * diag.max() * B / B.max()
    ab = np.zeros((3, len(v)))
    ab[0, 1:] = -k[1:-1]
    ab[1] = diag
    ab[2, :-1] = -k[1:-1]
    return ab


# --- initial profiles ------------------------------------------------------------------


def talenti_profile(params: ProblemParams, t):
    """(1 + t^{p/(p-1)})^{-(N-p)/p}, the Sobolev extremal shape."""
    p, N = params.p, params.N
    return (1 + t ** (p / (p - 1))) ** (-(N - p) / p)


def power_truncated_profile(params: ProblemParams, t, s=2.0):
    """t^{-mu1} (1 + t^s)^{-(mu2-mu1)/s}: the two decay rates glued at t = 1."""
    e = solve_exponents(params)
    return t ** (-e.mu1) * (1 + t**s) ** (-(e.mu2 - e.mu1) / s)


def exact_minimizer_p2(params: ProblemParams, t):
    """t^{-mu1} (1 + t^{2ν})^{-(N-2)/2}, ν = sqrt(1 - 4γ/(N-2)^2), for p = 2 only."""
    if params.p != 2:
        raise InvalidInputError("closed form only for p = 2")
    N = params.N
    nu = np.sqrt(1 - 4 * params.gamma / (N - 2) ** 2)
    mu1 = (N - 2) / 2 * (1 - nu)
    return t ** (-mu1) * (1 + t ** (2 * nu)) ** (-(N - 2) / 2)


def initial_profile(setup: QuotientSetup, init="talenti"):
    t = setup.nodes
    if callable(init):
        v = np.asarray(init(t), dtype=float)
    elif isinstance(init, np.ndarray):
        v = np.asarray(init, dtype=float)
    elif init == "talenti":
        v = talenti_profile(setup.params, t)
    elif init == "power-truncated":
        v = power_truncated_profile(setup.params, t)
    else:
        raise InvalidInputError(f"unknown initialiser {init!r}")
    if v.shape != t.shape or np.any(~np.isfinite(v)) or np.any(v <= 0):
        raise InvalidInputError("initialiser must be positive and finite on the grid")
    return v


# --- minimisation ------------------------------------------------------------------------


@dataclass
class MinimizationResult:
    S_estimate: float
    profile: RadialProfile
    iterations: int
    history: list
    grad_norm: float
    reason: str
    grad_checks: list = field(default_factory=list)
    setup: QuotientSetup | None = field(default=None, repr=False)

    @property
    def converged(self):
        return self.reason == "converged"

    def summary(self):
        return {"S": self.S_estimate, "iterations": self.iterations, "grad_norm": self.grad_norm,
                "reason": self.reason, "initial": self.history[0] if self.history else None,
                "max_grad_check": max((c[1] for c in self.grad_checks), default=None)}


def _normalize(setup, v):
    Dn = _parts(setup, v)[2]
    return v / Dn ** (1 / setup.params.p_star)


def minimize_quotient(setup: QuotientSetup, init="talenti", tol=GRAD_TOL, max_iters=MAX_ITERS,
                      seed=0, check_every=GRAD_CHECK_EVERY) -> MinimizationResult:
    """Preconditioned normalised gradient descent with Armijo backtracking.

    Each step solves P d = -grad Q with P the second variation of the
    gradient term, backtracks until the Armijo condition holds with every
    value still positive, then rescales so that ∫|v|^{p*} = 1.  The exit
    measure is the relative dual norm sqrt(g^T P^{-1} g) / Q.
    """
    rng = np.random.default_rng(seed)
    v = _normalize(setup, initial_profile(setup, init))
    Q, g = _value_and_grad(setup, v)
    history = [Q]
    checks = []
    alpha = 1.0
    reason = "max-iters"
    gn = float("inf")
    it = 0
    for it in range(max_iters):
        d = -solve_banded((1, 1), _preconditioner(setup, v), g)
        gd = float(g @ d)
        gn = np.sqrt(max(-gd, 0.0)) / abs(Q)
        if gn <= tol:
            reason = "converged"
            break
        if gd >= 0:
            reason = "not-descent"
            break
        a = min(2 * alpha, 1e6)
        while True:
            trial = v + a * d
            if np.all(trial > 0):
                Qt = rayleigh_quotient(setup, trial)
                if Qt <= Q + ARMIJO_C * a * gd:
                    break
            a *= 0.5
            if a < 1e-16:
                break
        if a < 1e-16:
            # no representable decrease left along the preconditioned direction
            reason = "converged" if gn <= 100 * tol else "stalled"
            break
        alpha = a
        v = _normalize(setup, trial)
        Q, g = _value_and_grad(setup, v)
        history.append(Q)
        if check_every and (it + 1) % check_every == 0:
            checks.append((it + 1, gradient_check(setup, v, rng, directions=4, scale="norms")))
    prof = RadialProfile.from_values(setup.nodes, v)
    return MinimizationResult(Q, prof, it, history, float(gn), reason, checks, setup)


# --- S(gamma) sweep ------------------------------------------------------------------------


@dataclass
class SweepRow:
    gamma: float
    S: float
    iterations: int
    grad_norm: float
    inner_fit: float
    outer_fit: float
    reason: str
    flagged: bool

    def as_row(self):
        return (self.gamma, self.S, self.iterations, self.grad_norm, self.inner_fit,
                self.outer_fit, self.reason, self.flagged)


SWEEP_COLUMNS = ("gamma", "S", "iterations", "grad_norm", "inner_fit", "outer_fit", "reason",
                 "flagged")


def s_gamma_curve(params: ProblemParams, gammas, kappa=None, t_min=1e-4, t_max=1e4, points=2048,
                  init="talenti", tol=GRAD_TOL, max_iters=MAX_ITERS):
    """One minimisation per γ (ascending), each warm-started from the previous minimiser.

    Returns (rows, strictly_decreasing).
    """
    gammas = sorted(float(g) for g in gammas)
    rows = []
    warm = init
    for gm in gammas:
        pg = params.with_gamma(gm)
        setup = QuotientSetup.build(pg, kappa, t_min, t_max, points)
        res = minimize_quotient(setup, warm, tol, max_iters)
        fits = _safe_fits(res.profile)
        rows.append(SweepRow(gm, res.S_estimate, res.iterations, res.grad_norm, fits[0], fits[1],
                             res.reason, not res.converged))
        warm = np.array(res.profile.v)
    S = np.array([r.S for r in rows])
    return rows, bool(np.all(np.diff(S) < 0))


def _safe_fits(profile):
    try:
        lo, hi = audit_windows(profile)
        return decay_fit(profile, lo).exponent, decay_fit(profile, hi).exponent
    except InvalidInputError:
        return float("nan"), float("nan")


# --- decay audit ---------------------------------------------------------------------------


def audit_windows(profile: RadialProfile, inset=2):
    """One-decade windows ``inset`` decades in from each truncation end.

    The Dirichlet cut at t_min (t_max) perturbs the profile by a relative
    (t_min/t)^{mu2-mu1} ((t/t_max)^{mu2-mu1}), so windows one decade in are
    still visibly bent by the truncation.
    """
    lo, hi = profile.t[0], profile.t[-1]
    k = 10.0**inset
    return (lo * k, lo * k * 10), (hi / k / 10, hi / k)


@dataclass
class DecayAudit:
    inner: DecayFit
    outer: DecayFit
    inner_grad: DecayFit | None
    outer_grad: DecayFit
    targets: dict
    checks: dict
    notes: list

    @property
    def passed(self):
        return all(c["passed"] for c in self.checks.values() if c["passed"] is not None)

    def to_dict(self):
        from .reports import _plain
        return _plain({"inner": self.inner.to_dict(), "outer": self.outer.to_dict(),
                       "inner_grad": None if self.inner_grad is None else self.inner_grad.to_dict(),
                       "outer_grad": self.outer_grad.to_dict(), "targets": self.targets,
                       "checks": self.checks, "notes": self.notes, "passed": self.passed})


def minimizer_decay_audit(result, params: ProblemParams, rtol=0.05, windows=None) -> DecayAudit:
    """Fit inner/outer decay of a converged minimiser against (mu1, mu2) and (mu1+1, mu2+1).

    ``result`` may also be a bare RadialProfile (e.g. a pure power).  Zero
    targets are compared with an absolute tolerance ``rtol``.
    """
    if isinstance(result, RadialProfile):
        prof = result
    else:
        if not result.converged:
            raise InvalidInputError(f"minimisation did not converge ({result.reason})")
        prof = result.profile
    e = solve_exponents(params)
    inner_w, outer_w = windows or audit_windows(prof)
    fits = {"inner": decay_fit(prof, inner_w), "outer": decay_fit(prof, outer_w),
            "outer_grad": gradient_decay_fit(prof, outer_w)}
    notes = []
    if params.gamma > 0:
        fits["inner_grad"] = gradient_decay_fit(prof, inner_w)
    else:
        notes.append("gamma = 0: v' vanishes at the origin, inner gradient fit skipped")
    targets = {"inner": e.mu1, "outer": e.mu2, "inner_grad": e.mu1 + 1, "outer_grad": e.mu2 + 1}
    checks = {}
    for key, target in targets.items():
        fit = fits.get(key)
        if fit is None:
            checks[key] = {"target": target, "fitted": None, "passed": None}
            continue
        err = abs(fit.exponent - target)
        ok = err <= rtol * target if target > 0 else err <= rtol
        checks[key] = {"target": target, "fitted": fit.exponent, "error": err, "passed": bool(ok)}
    return DecayAudit(fits["inner"], fits["outer"], fits.get("inner_grad"), fits["outer_grad"],
                      targets, checks, notes)


def truncation_sensitivity(params: ProblemParams, kappa=None, narrow=(1e-4, 1e4), wide=(1e-5, 1e5),
                           per_decade=256, init="talenti"):
    """Relative change of the minimised quotient when the truncation widens."""
    out = []
    for lo, hi in (narrow, wide):
        pts = int(per_decade * np.log10(hi / lo)) + 1
        res = minimize_quotient(QuotientSetup.build(params, kappa, lo, hi, pts), init)
        out.append(res.S_estimate)
    return {"narrow": out[0], "wide": out[1], "relative_change": abs(out[1] - out[0]) / out[1]}
