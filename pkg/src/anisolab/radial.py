"""Profiles u(x) = v(H°(x)) and the reduced one-dimensional operator.

For u = v(H°(x)) with s = v'(t), t = H°(x), the anisotropic p-Laplacian
reduces to

    -Δ_p^H u = -(p-1)|s|^{p-2} s' - (N-1)|s|^{p-2} s / t,

for every admissible gauge, because <grad H°, grad H(grad H°)> = 1 and
div grad H(grad H°(x)) = (N-1)/H°(x).  Integrals over H°-balls become
N κ ∫ f(t) t^{N-1} dt with κ = |B_1^{H°}|.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass

import numpy as np
from scipy.integrate import trapezoid

from .errors import DegenerateFitError, InvalidInputError
from .reports import ResidualReport
from .spectrum import ProblemParams

log = logging.getLogger(__name__)

GRAD_FLOOR = 1e-14
DEFAULT_GRID = (1e-4, 1e4, 2048)


def log_grid(t_min=DEFAULT_GRID[0], t_max=DEFAULT_GRID[1], points=DEFAULT_GRID[2]):
    if not (0 < t_min < t_max) or points < 3:
        raise InvalidInputError("need 0 < t_min < t_max and at least 3 points")
    return np.geomspace(t_min, t_max, int(points))


def log_derivatives(t, v):
    """First and second t-derivatives by second-order differences in x = log t."""
    x = np.log(t)
    dx = np.diff(x)
    if np.allclose(dx, dx[0], rtol=1e-9, atol=0):
        h = dx[0]
        vx = np.empty_like(v)
        vxx = np.empty_like(v)
        vx[1:-1] = (v[2:] - v[:-2]) / (2 * h)
        vx[0] = (-3 * v[0] + 4 * v[1] - v[2]) / (2 * h)
        vx[-1] = (3 * v[-1] - 4 * v[-2] + v[-3]) / (2 * h)
        vxx[1:-1] = (v[2:] - 2 * v[1:-1] + v[:-2]) / h**2
        vxx[0] = (2 * v[0] - 5 * v[1] + 4 * v[2] - v[3]) / h**2
        vxx[-1] = (2 * v[-1] - 5 * v[-2] + 4 * v[-3] - v[-4]) / h**2
    else:
        vx = np.gradient(v, x, edge_order=2)
        vxx = np.gradient(vx, x, edge_order=2)
    return vx / t, (vxx - vx) / t**2


@dataclass(frozen=True, eq=False)
class RadialProfile:
    """Positive values of v on a strictly increasing grid of t = H°(x) > 0."""

    t: np.ndarray
    v: np.ndarray
    dv: np.ndarray
    d2v: np.ndarray
    source: str = "finite-difference"

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float)
        v = np.asarray(self.v, dtype=float)
        if t.ndim != 1 or t.shape != v.shape or len(t) < 3:
            raise InvalidInputError("grid and values must be 1-D arrays of equal length >= 3")
        if not (t[0] > 0 and np.all(np.diff(t) > 0)):
            raise InvalidInputError("grid must be strictly increasing with t_min > 0")
        if not np.all(np.isfinite(v)) or np.any(v <= 0):
            raise InvalidInputError("profile values must be finite and positive")
        for name in ("t", "v", "dv", "d2v"):
            a = np.array(getattr(self, name), dtype=float)
            a.setflags(write=False)
            object.__setattr__(self, name, a)

    @classmethod
    def from_values(cls, t, v):
        t = np.asarray(t, dtype=float)
        v = np.asarray(v, dtype=float)
        if len(t) < 4:
            raise InvalidInputError("finite-difference profiles need at least 4 points")
        if t.shape != v.shape or not np.all(np.isfinite(v)):
            raise InvalidInputError("profile values must be finite and match the grid")
        dv, d2v = log_derivatives(t, v)
        return cls(t, v, dv, d2v, "finite-difference")

    @classmethod
    def from_function(cls, t, fn):
        """``fn(t)`` returns ``(v, v', v'')`` in closed form."""
        t = np.asarray(t, dtype=float)
        v, dv, d2v = (np.broadcast_to(np.asarray(a, dtype=float), t.shape) for a in fn(t))
        return cls(t, v, dv, d2v, "analytic")

    @classmethod
    def power(cls, t, mu, c=1.0):
        """c t^{-mu} with analytic derivatives."""
        return cls.from_function(
            t, lambda s: (c * s**-mu, -c * mu * s ** (-mu - 1), c * mu * (mu + 1) * s ** (-mu - 2))
        )

    def scaled(self, lam):
        return RadialProfile(self.t, lam * self.v, lam * self.dv, lam * self.d2v, self.source)

    def window(self, lo, hi):
        return (self.t >= lo) & (self.t <= hi)

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["t", "v"])
            for a, b in zip(self.t, self.v):
                w.writerow([repr(float(a)), repr(float(b))])

    @classmethod
    def from_csv(cls, path):
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        return cls.from_values(data[:, 0], data[:, 1])


def _operator_terms(params: ProblemParams, t, v, s, ds):
    p, N = params.p, params.N
    a = np.abs(s)
    floored = np.zeros(a.shape, dtype=bool)
    if p < 2:
        # floor on the log-derivative |s| t / v, so steep power tails never trip it
        fl = GRAD_FLOOR * np.abs(v) / t
        floored = a < fl
        a = np.maximum(a, fl)
    w = a ** (p - 2)
    t1 = -(p - 1) * w * ds
    t2 = -(N - 1) * w * s / t
    t3 = -params.gamma * v ** (p - 1) / t**p
    return t1, t2, t3, floored


def radial_operator(params: ProblemParams, profile: RadialProfile):
    """-Δ_p^H u - γ u^{p-1}/t^p on the grid, for u = v(H°(x))."""
    t1, t2, t3, floored = _operator_terms(params, profile.t, profile.v, profile.dv, profile.d2v)
    if floored.any():
        log.warning("gradient floor binds at %d grid point(s)", int(floored.sum()))
    return t1 + t2 + t3


def residual_report(params: ProblemParams, profile: RadialProfile, rhs) -> ResidualReport:
    """Max residual of the reduced equation against ``rhs``.

    The relative residual divides by |rhs| plus the sum of the magnitudes of
    the three operator terms, so exact solutions of the homogeneous equation
    (rhs = 0) get a meaningful relative error.
    """
    rhs = np.broadcast_to(np.asarray(rhs, dtype=float), profile.t.shape) if np.ndim(rhs) == 0 else np.asarray(rhs, dtype=float)
    if rhs.shape != profile.t.shape:
        raise InvalidInputError("rhs must live on the profile grid")
    t1, t2, t3, floored = _operator_terms(params, profile.t, profile.v, profile.dv, profile.d2v)
    err = np.abs(t1 + t2 + t3 - rhs)
    scale = np.abs(rhs) + np.abs(t1) + np.abs(t2) + np.abs(t3) + np.finfo(float).tiny
    rel = err / scale
    k = int(np.argmax(rel))
    return ResidualReport(float(err.max()), float(rel.max()), float(profile.t[k]),
                          len(profile.t), floor_binds=int(floored.sum()))


def discrete_operator(params: ProblemParams, t, v, va=None, vb=None):
    """Conservative finite-volume form of the reduced operator at interior nodes.

    With x = log t the principal part is -t^{-N} d/dx [t^{N-p} |v_x|^{p-2} v_x];
    fluxes sit at cell midpoints.  ``va``/``vb`` default to v[0], v[-1].
    Returns the operator (principal part minus γ v^{p-1}/t^p) at t[1:-1].
    """
    N, p = params.N, params.p
    x = np.log(t)
    D = np.diff(v) / np.diff(x)
    tm = np.exp(0.5 * (x[1:] + x[:-1]))
    a = np.abs(D)
    if p < 2:
        a = np.maximum(a, GRAD_FLOOR * 0.5 * np.abs(v[1:] + v[:-1]))
    F = tm ** (N - p) * a ** (p - 2) * D
    ti = t[1:-1]
    vi = v[1:-1]
    half = 0.5 * (x[2:] - x[:-2])
    return -(F[1:] - F[:-1]) / half / ti**N - params.gamma * vi ** (p - 1) / ti**p


# --- decay fits ------------------------------------------------------------------


@dataclass(frozen=True)
class DecayFit:
    exponent: float
    amplitude: float
    r_squared: float
    window: tuple
    points: int

    def to_dict(self):
        return {"exponent": self.exponent, "amplitude": self.amplitude,
                "r_squared": self.r_squared, "window": list(self.window), "points": self.points}


def default_windows(profile: RadialProfile):
    """Inner and outer decades away from the truncation edges."""
    lo, hi = profile.t[0], profile.t[-1]
    return (lo * 10, lo * 100), (hi / 100, hi / 10)


def power_fit(t, y, window) -> DecayFit:
    """Least-squares line through (log t, log y); exponent is minus the slope."""
    if len(t) < 8:
        raise InvalidInputError("fit window must contain at least 8 grid points")
    if np.any(y <= 0):
        raise InvalidInputError("nonpositive values in fit window")
    X, Y = np.log(t), np.log(y)
    slope, icpt = np.polyfit(X, Y, 1)
    resid = Y - (slope * X + icpt)
    ss_tot = np.sum((Y - Y.mean()) ** 2)
    r2 = 1.0 if ss_tot == 0 else max(0.0, 1.0 - np.sum(resid**2) / ss_tot)
    return DecayFit(float(-slope), float(np.exp(icpt)), float(r2), tuple(map(float, window)), len(t))


def decay_fit(profile: RadialProfile, window=None) -> DecayFit:
    if window is None:
        window = default_windows(profile)[0]
    m = profile.window(*window)
    return power_fit(profile.t[m], profile.v[m], window)


def gradient_decay_fit(profile: RadialProfile, window=None) -> DecayFit:
    """Fit log|v'| against log t; the expected exponent is mu + 1."""
    if window is None:
        window = default_windows(profile)[0]
    m = profile.window(*window)
    g = np.abs(profile.dv[m])
    if len(g) >= 8 and np.any(g <= 1e-300):
        raise DegenerateFitError("derivative vanishes in the fit window")
    return power_fit(profile.t[m], g, window)


def trapezoid_log(t, f):
    """∫ f dt on a grid, integrating f·t in x = log t."""
    return float(trapezoid(f * t, np.log(t)))


def cumulative_log(t, f):
    x = np.log(t)
    g = f * t
    out = np.zeros_like(t)
    out[1:] = np.cumsum(0.5 * (g[1:] + g[:-1]) * np.diff(x))
    return out


def localized_norm_curve(params: ProblemParams, profile: RadialProfile, radii, kappa,
                         complement=False):
    """(R, ||u||_{L^{p*}}) over B_R^{H°} (or its complement within the grid)."""
    radii = np.asarray(radii, dtype=float)
    t = profile.t
    if np.any(radii < t[0]) or np.any(radii > t[-1]):
        raise InvalidInputError("radii must lie inside the profile grid")
    ps = params.p_star
    f = params.N * kappa * profile.v**ps * t ** (params.N - 1)
    cum = cumulative_log(t, f)
    inside = np.interp(np.log(radii), np.log(t), cum)
    mass = cum[-1] - inside if complement else inside
    return [(float(R), float(m ** (1 / ps))) for R, m in zip(radii, mass)]


def norm_curve_exponent(curve) -> float:
    """Log-log slope of a localized norm curve."""
    R = np.array([c[0] for c in curve])
    n = np.array([c[1] for c in curve])
    return float(np.polyfit(np.log(R), np.log(n), 1)[0])
