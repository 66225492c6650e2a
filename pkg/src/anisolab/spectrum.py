"""Hardy constant, decay exponents and the explicit supersolution recipe."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConsistencyError, DomainError, InvalidInputError, InvalidParamsError


def hardy_constant(N, p) -> float:
    if not (1 < p < N):
        raise InvalidParamsError(f"need 1 < p < N, got N={N}, p={p}")
    return ((N - p) / p) ** p


@dataclass(frozen=True)
class ProblemParams:
    N: int
    p: float
    gamma: float = 0.0

    def __post_init__(self):
        if not (isinstance(self.N, (int, np.integer)) and self.N >= 2):
            raise InvalidParamsError("N must be an integer >= 2")
        if not (1 < self.p < self.N):
            raise InvalidParamsError(f"need 1 < p < N, got p={self.p}")
        if not (0 <= self.gamma < self.C_H):
            raise InvalidParamsError(
                f"need 0 <= gamma < C_H = {self.C_H:.6g}, got gamma={self.gamma}"
            )

    @property
    def C_H(self) -> float:
        return hardy_constant(self.N, self.p)

    @property
    def p_star(self) -> float:
        return self.N * self.p / (self.N - self.p)

    @property
    def mid(self) -> float:
        """(N-p)/p, the exponent separating the two decay rates."""
        return (self.N - self.p) / self.p

    @property
    def top(self) -> float:
        """(N-p)/(p-1), the fundamental-solution exponent."""
        return (self.N - self.p) / (self.p - 1)

    def with_gamma(self, gamma) -> "ProblemParams":
        return ProblemParams(self.N, self.p, gamma)

    def as_dict(self):
        return {"N": self.N, "p": self.p, "gamma": self.gamma,
                "C_H": self.C_H, "p_star": self.p_star}


def characteristic(params: ProblemParams, mu) -> float:
    """mu^{p-2}[(p-1)mu^2 - (N-p)mu] + gamma, written without negative powers."""
    mu = float(mu)
    if mu < 0:
        raise DomainError("mu must be nonnegative")
    N, p = params.N, params.p
    return (p - 1) * mu**p - (N - p) * mu ** (p - 1) + params.gamma


@dataclass(frozen=True)
class ExponentPair:
    mu1: float
    mu2: float
    res1: float
    res2: float


def _bisect(f, lo, hi):
    flo = f(lo)
    fhi = f(hi)
    if flo == 0:
        return lo
    if fhi == 0:
        return hi
    if flo * fhi > 0:
        raise ConsistencyError("characteristic has no sign change on the bracket")
    # run to float exhaustion: near mu = 0 the characteristic is infinitely steep
    # when p < 2, so an absolute stopping width leaves large residuals
    for _ in range(2200):
        mid = 0.5 * (lo + hi)
        if not lo < mid < hi:
            break
        fm = f(mid)
        if fm == 0:
            return mid
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def solve_exponents(params: ProblemParams) -> ExponentPair:
    """Both roots of the characteristic by bisection on their monotone brackets.

    f(0) = gamma >= 0, f((N-p)/p) = gamma - C_H < 0 and f((N-p)/(p-1)) = gamma,
    so [0, (N-p)/p] holds mu1 and [(N-p)/p, (N-p)/(p-1)] holds mu2.
    """
    if not params.gamma < params.C_H:
        raise InvalidParamsError("gamma must be below the Hardy constant")

    def f(mu):
        return characteristic(params, mu)

    if params.gamma == 0:
        # exact roots; bisection would hinge on the rounded sign of f(top) = 0
        return ExponentPair(0.0, params.top, 0.0, f(params.top))
    mu1 = _bisect(f, 0.0, params.mid)
    # f(top) = gamma exactly; for gamma below rounding level its sign is noise
    mu2 = params.top if f(params.top) <= 0 else _bisect(f, params.mid, params.top)
    return ExponentPair(mu1, mu2, f(mu1), f(mu2))


def exponent_row(params: ProblemParams):
    e = solve_exponents(params)
    return (params.N, params.p, params.gamma, params.C_H, e.mu1, e.mu2, e.res1, e.res2)


EXPONENT_COLUMNS = ("N", "p", "gamma", "C_H", "mu1", "mu2", "res1", "res2")


# --- supersolution profile ----------------------------------------------------


def h_kernel(params: ProblemParams, mu, epsilon, tau):
    """h as a function of tau = delta * t**epsilon.

    h(t) depends on t only through tau, and the recipe's h'(0), delta_h and
    R are all statements about this kernel near tau = 0.  For mu > 0 the
    powers are expanded with log1p/expm1 so that the O(1) terms, which cancel
    exactly at a root of the characteristic, are subtracted before rounding.
    """
    N, p, g = params.N, params.p, params.gamma
    tau = np.asarray(tau, dtype=float)
    b0 = mu**2 * (p - 1) - (N - p) * mu
    b1 = -(p - 1) * (mu - epsilon) ** 2 + (N - p) * (mu - epsilon)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        if mu > 0:
            c = (mu - epsilon) / mu
            e1 = np.expm1((p - 2) * np.log1p(-c * tau))
            e2 = np.expm1((p - 1) * np.log1p(-tau))
            stable = (-(mu ** (p - 2) * b0 + g) - mu ** (p - 2) * b0 * e1
                      - mu ** (p - 2) * b1 * tau * (1 + e1) - g * e2)
            # log1p needs 1 - c*tau > 0 and 1 - tau > 0
            inside = (c * tau < 1) & (tau < 1)
        else:
            inside = np.zeros(tau.shape, dtype=bool)
            stable = np.zeros(tau.shape)
        a = np.abs(mu - (mu - epsilon) * tau)
        one = 1.0 - tau
        verbatim = -a ** (p - 2) * (b0 + b1 * tau) - g * np.abs(one) ** (p - 2) * one
        out = np.where(inside, stable, verbatim)
    return out[()] if out.ndim == 0 else out


def h_profile(params: ProblemParams, mu, delta, epsilon, t):
    """h(t) from the supersolution computation, evaluated verbatim."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise DomainError("t must be nonnegative")
    with np.errstate(divide="ignore"):
        tau = delta * t**epsilon
    return h_kernel(params, mu, epsilon, tau)


def g_profile(params: ProblemParams, mu, delta, epsilon, t):
    """Coefficient g with -Δ_p v - γ v^{p-1}/t^p = g v^{p-1} for v = (1 - δt^ε) t^{-μ}."""
    t = np.asarray(t, dtype=float)
    p = params.p
    tau = delta * t**epsilon
    one = 1.0 - tau
    return h_kernel(params, mu, epsilon, tau) / (np.abs(one) ** (p - 2) * one * t**p)


def supersolution_values(mu, delta, epsilon, t):
    """v(t) = (1 - δ t^ε) t^{-μ} and its first two derivatives."""
    t = np.asarray(t, dtype=float)
    e, m = epsilon, mu
    v = (1 - delta * t**e) * t ** (-m)
    dv = t ** (-m - 1) * (-m + delta * (m - e) * t**e)
    d2v = t ** (-m - 2) * (m * (m + 1) - delta * (m - e) * (m - e + 1) * t**e)
    return v, dv, d2v


def kernel_slope(params: ProblemParams, mu, epsilon, steps=(1e-6, 1e-7), rtol=1e-4):
    """One-sided difference quotients of h_kernel at 0 with a Richardson check.

    Each step gives a first-order Richardson extrapolate from s and s/2; the
    steps shrink tenfold until the two extrapolates agree to ``rtol`` (the
    linear regime of h can be very short when mu is small).  Returns
    ``(slope, spread)``.
    """
    h0 = float(h_kernel(params, mu, epsilon, 0.0))

    def extrap(s):
        k1 = (float(h_kernel(params, mu, epsilon, s)) - h0) / s
        k2 = (float(h_kernel(params, mu, epsilon, s / 2)) - h0) / (s / 2)
        return 2 * k2 - k1

    s1, s2 = steps
    while True:
        e1, e2 = extrap(s1), extrap(s2)
        spread = abs(e1 - e2) / max(abs(e2), 1e-300)
        if spread <= rtol or s2 < 1e-13:
            return e2, spread
        s1, s2 = s1 / 10, s2 / 10


def kernel_slope_exact(params: ProblemParams, mu, epsilon):
    """Closed-form d/dtau of h_kernel at 0 (valid for mu > 0)."""
    N, p, g = params.N, params.p, params.gamma
    b0 = mu**2 * (p - 1) - (N - p) * mu
    b1 = -(p - 1) * (mu - epsilon) ** 2 + (N - p) * (mu - epsilon)
    return (p - 2) * mu ** (p - 3) * (mu - epsilon) * b0 - mu ** (p - 2) * b1 + g * (p - 1)


TAU_GRID = np.geomspace(1e-8, 1.0, 512, endpoint=False)


@dataclass(frozen=True)
class SupersolutionParams:
    branch: str
    A: float
    alpha: float
    mu: float
    delta: float
    epsilon: float
    R: float
    delta_h: float
    slope: float
    tau_grid: tuple = field(default=(1e-8, 1.0, 512), compare=False)
    note: str = ""

    def g(self, params, t):
        return g_profile(params, self.mu, self.delta, self.epsilon, t)

    def values(self, t):
        return supersolution_values(self.mu, self.delta, self.epsilon, t)

    def check_grid(self, points=200, span=1e8, tau_floor=1e-10):
        """Log grid on which g >= A t^{-alpha} is asserted.

        The grid stops where delta * t**epsilon drops below ``tau_floor``:
        beyond that h is dominated by the rounding residual of the root mu.
        """
        edge = (tau_floor / self.delta) ** (1.0 / self.epsilon)
        if self.branch == "origin":
            lo = max(self.R / span, min(edge, self.R / 10))
            return np.geomspace(lo, self.R, points + 1)[:-1]
        hi = min(self.R * span, max(edge, self.R * 10))
        return np.geomspace(self.R, hi, points + 1)[1:]


def supersolution_params(params: ProblemParams, A, alpha, branch="origin") -> SupersolutionParams:
    """Synthesise (δ, ε, R) so that (1 - δ t^ε) t^{-μ} is a supersolution with g >= A t^{-α}.

    Origin branch: μ = μ1, α < p, ε = (p - α)/2 > 0, valid on (0, R) with R <= 1.
    Infinity branch: μ = μ2, α > p, the same formula gives ε < 0 so the
    perturbation t^ε decays, valid on (R, ∞) with R >= 1.
    """
    if A <= 0:
        raise InvalidInputError("A must be positive")
    if branch == "origin":
        if not alpha < params.p:
            raise InvalidInputError("origin branch needs alpha < p")
        mu = solve_exponents(params).mu1
    elif branch == "infinity":
        if not alpha > params.p:
            raise InvalidInputError("infinity branch needs alpha > p")
        mu = solve_exponents(params).mu2
    else:
        raise InvalidInputError(f"unknown branch {branch!r}")
    eps = (params.p - alpha) / 2
    slope, spread = kernel_slope(params, mu, eps)
    if not np.isfinite(slope) or slope <= 0:
        raise ConsistencyError(f"h'(0) = {slope:.6g} is not positive")
    if spread > 1e-3:
        raise ConsistencyError(f"h'(0) finite differences disagree (spread {spread:.2e})")
    k = h_kernel(params, mu, eps, TAU_GRID)
    ok = (2 * slope * TAU_GRID >= k) & (k >= 0.5 * slope * TAU_GRID) & (k > 0)
    if not ok[0]:
        raise ConsistencyError("linear bounds on h fail at the smallest grid point")
    bad = np.flatnonzero(~ok)
    delta_h = float(TAU_GRID[bad[0] - 1]) if len(bad) else 1.0
    delta = min(delta_h, 0.5)
    base = (delta * slope / (2 * A)) ** (1.0 / (params.p - alpha - eps))
    R = min(1.0, base) if branch == "origin" else max(1.0, base)
    note = "" if branch == "origin" else "infinity branch recipe mirrors the origin branch"
    return SupersolutionParams(branch, float(A), float(alpha), mu, delta, eps, R,
                               delta_h, slope, note=note)
