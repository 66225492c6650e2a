"""Finsler gauges H, their duals H°, and numerical checks of the gauge calculus.

A gauge is a positive, even, 1-homogeneous function on R^N that is C^2 away
from the origin and has a uniformly convex unit ball.  Built-in variants carry
closed-form derivatives and duals; a custom variant wraps any vectorised
1-homogeneous convex evaluator and falls back on finite differences and a
projected-ascent dual.

All evaluators act on the last axis, so ``xi`` may have shape ``(..., N)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.special import gamma as gamma_fn

from .errors import DomainError, DualEvaluationError, InvalidInputError
from .reports import IdentityCheck, IdentityReport, ResidualReport

VARIANTS = ("euclidean", "ell_q", "quadratic", "custom")

# Directions within this angle of a coordinate axis are excluded when
# sampling Hessian-dependent quantities of ell_q gauges with q != 2.
AXIS_CONE = 1e-6

DUAL_RESTARTS = 8
DUAL_TOL = 1e-8
DUAL_MAX_ITER = 500
_DUAL_SEED = 20240611


@dataclass(frozen=True)
class GaugeSpec:
    variant: str
    q: float | None = None
    matrix: tuple | None = None
    evaluator: Callable | None = field(default=None, compare=False)
    name: str = ""

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise InvalidInputError(f"unknown gauge variant {self.variant!r}")
        if self.variant == "ell_q":
            if self.q is None or not np.isfinite(self.q) or self.q <= 1:
                raise InvalidInputError("ell_q requires a finite exponent q > 1")
        if self.variant == "quadratic":
            if self.matrix is None:
                raise InvalidInputError("quadratic gauge needs a matrix")
            A = np.asarray(self.matrix, dtype=float)
            if A.ndim != 2 or A.shape[0] != A.shape[1]:
                raise InvalidInputError("quadratic matrix must be square")
            if not np.allclose(A, A.T, rtol=0, atol=1e-12 * np.abs(A).max()):
                raise InvalidInputError("quadratic matrix must be symmetric")
            if np.linalg.eigvalsh(A).min() <= 0:
                raise InvalidInputError("quadratic matrix must be positive definite")
            object.__setattr__(self, "matrix", tuple(tuple(float(v) for v in r) for r in A))
        if self.variant == "custom" and self.evaluator is None:
            raise InvalidInputError("custom gauge needs an evaluator")

    @classmethod
    def euclidean(cls):
        return cls("euclidean")

    @classmethod
    def ell_q(cls, q):
        return cls("ell_q", q=float(q))

    @classmethod
    def quadratic(cls, A):
        return cls("quadratic", matrix=tuple(map(tuple, np.asarray(A, dtype=float))))

    @classmethod
    def custom(cls, evaluator, name="custom"):
        return cls("custom", evaluator=evaluator, name=name)

    def label(self) -> str:
        if self.variant == "ell_q":
            return f"ell_q(q={self.q:g})"
        if self.variant == "quadratic":
            return "quadratic(" + ";".join(",".join(f"{v:g}" for v in r) for r in self.matrix) + ")"
        if self.variant == "custom":
            return f"custom({self.name})"
        return "euclidean"


# --- kernels: raw evaluators without input validation -----------------------


class _Euclidean:
    def value(self, xi):
        return np.linalg.norm(xi, axis=-1)

    def grad(self, xi):
        return xi / np.linalg.norm(xi, axis=-1, keepdims=True)

    def hess(self, xi):
        r = np.linalg.norm(xi, axis=-1)[..., None, None]
        n = xi.shape[-1]
        u = xi[..., :, None] * xi[..., None, :]
        return (np.eye(n) - u / r**2) / r

    def dual(self):
        return self


class _EllQ:
    def __init__(self, q):
        self.q = q

    def value(self, xi):
        a = np.abs(xi)
        m = a.max(axis=-1)
        safe = np.where(m > 0, m, 1.0)
        s = np.sum((a / safe[..., None]) ** self.q, axis=-1) ** (1.0 / self.q)
        return np.where(m > 0, m * s, 0.0)

    def grad(self, xi):
        h = self.value(xi)[..., None]
        return np.sign(xi) * (np.abs(xi) / h) ** (self.q - 1)

    def hess(self, xi):
        q = self.q
        h = self.value(xi)[..., None]
        g = np.sign(xi) * (np.abs(xi) / h) ** (q - 1)
        with np.errstate(divide="ignore"):
            diag = (np.abs(xi) / h) ** (q - 2)
        n = xi.shape[-1]
        D = diag[..., :, None] * np.eye(n)
        return (q - 1) / h[..., None] * (D - g[..., :, None] * g[..., None, :])

    def dual(self):
        return _EllQ(self.q / (self.q - 1))


class _Quadratic:
    def __init__(self, A):
        self.A = np.asarray(A, dtype=float)

    def value(self, xi):
        return np.sqrt(np.maximum(np.einsum("...i,ij,...j->...", xi, self.A, xi), 0.0))

    def grad(self, xi):
        return (xi @ self.A) / self.value(xi)[..., None]

    def hess(self, xi):
        h = self.value(xi)[..., None, None]
        Ax = xi @ self.A
        return (self.A - Ax[..., :, None] * Ax[..., None, :] / h**2) / h

    def dual(self):
        return _Quadratic(np.linalg.inv(self.A))


class _Custom:
    """Finite-difference derivatives of a black-box 1-homogeneous evaluator."""

    def __init__(self, f):
        self.f = f

    def value(self, xi):
        return np.asarray(self.f(xi), dtype=float)

    def grad(self, xi):
        # 0-homogeneous, so differentiate on the unit sphere with a fixed step
        r = np.linalg.norm(xi, axis=-1, keepdims=True)
        u = xi / r
        h = 1e-5
        n = xi.shape[-1]
        out = np.empty_like(u)
        for j in range(n):
            e = np.zeros(n)
            e[j] = h
            out[..., j] = (self.value(u + e) - self.value(u - e)) / (2 * h)
        return out

    def hess(self, xi):
        r = np.linalg.norm(xi, axis=-1, keepdims=True)
        u = xi / r
        h = 1e-4
        n = xi.shape[-1]
        out = np.empty(u.shape + (n,))
        for j in range(n):
            e = np.zeros(n)
            e[j] = h
            out[..., :, j] = (self.grad(u + e) - self.grad(u - e)) / (2 * h)
        out = 0.5 * (out + np.swapaxes(out, -1, -2))
        return out / r[..., None]

    def dual(self):
        return None


def _make_kernel(spec: GaugeSpec):
    if spec.variant == "euclidean":
        return _Euclidean()
    if spec.variant == "ell_q":
        return _EllQ(spec.q)
    if spec.variant == "quadratic":
        return _Quadratic(spec.matrix)
    return _Custom(spec.evaluator)


# --- numerical dual ----------------------------------------------------------


def _unit_rows(a):
    return a / np.linalg.norm(a, axis=-1, keepdims=True)


def projected_ascent_dual(kernel, x, restarts=DUAL_RESTARTS, tol=DUAL_TOL,
                          max_iter=DUAL_MAX_ITER, seed=_DUAL_SEED):
    """Maximise <xi, x> over the unit H-ball by ascent on the unit sphere.

    The supremum sits on the H-sphere, parametrised as xi = d / H(d) with
    |d| = 1.  Ascent runs on phi(d) = <d, x> / H(d) with adaptive steps and a
    renormalising retraction; the start set is x/|x| plus ``restarts - 1``
    seeded random directions.  Returns ``(value, maximiser)`` for rows of a
    2-D array ``x`` with nonzero rows.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    B, n = x.shape
    rng = np.random.default_rng(seed)
    xn = np.linalg.norm(x, axis=-1)
    starts = np.empty((B, restarts, n))
    starts[:, 0] = x / xn[:, None]
    if restarts > 1:
        starts[:, 1:] = _unit_rows(rng.standard_normal((B, restarts - 1, n)))
    d = starts.reshape(B * restarts, n)
    xr = np.repeat(x, restarts, axis=0)
    scale = np.repeat(xn, restarts)

    phi, g = _phi_rows(kernel, d, xr)
    step = np.full(len(d), 0.5) / scale
    done = np.linalg.norm(g, axis=-1) <= tol * scale
    for _ in range(max_iter):
        if done.all():
            break
        act = ~done
        trial = _unit_rows(d[act] + step[act, None] * g[act])
        h = kernel.value(trial)
        phi_t = np.einsum("ij,ij->i", trial, xr[act]) / h
        better = phi_t >= phi[act]
        idx = np.flatnonzero(act)
        acc = idx[better]
        d[acc] = trial[better]
        step[acc] *= 2.0
        step[idx[~better]] *= 0.25
        if len(acc):
            phi_a, g_a = _phi_rows(kernel, d[acc], xr[acc])
            phi[acc] = phi_a
            g[acc] = g_a
        done = np.linalg.norm(g, axis=-1) <= tol * scale
        # step collapsed at round-off level near the optimum
        gn = np.linalg.norm(g, axis=-1)
        done |= (step * gn < 1e-16) & (gn <= 1e-6 * scale)
    phi = phi.reshape(B, restarts)
    best = np.argmax(phi, axis=1)
    value = phi[np.arange(B), best]
    conv = done.reshape(B, restarts)[np.arange(B), best]
    d_best = d.reshape(B, restarts, n)[np.arange(B), best]
    if not conv.all():
        raise DualEvaluationError(
            f"projected ascent did not converge for {int((~conv).sum())} point(s)",
            lower_bound=value,
        )
    xi = d_best / kernel.value(d_best)[:, None]
    return value, xi


def _phi_rows(kernel, d, xr):
    h = kernel.value(d)
    dx = np.einsum("ij,ij->i", d, xr)
    g = xr / h[:, None] - (dx / h**2)[:, None] * kernel.grad(d)
    g -= np.einsum("ij,ij->i", g, d)[:, None] * d
    return dx / h, g


class _NumericalDual:
    def __init__(self, kernel):
        self.kernel = kernel

    def _solve(self, x):
        x = np.asarray(x, dtype=float)
        flat = x.reshape(-1, x.shape[-1])
        nz = np.linalg.norm(flat, axis=-1) > 0
        val = np.zeros(len(flat))
        arg = np.full(flat.shape, np.nan)
        if nz.any():
            v, a = projected_ascent_dual(self.kernel, flat[nz])
            val[nz] = v
            arg[nz] = a
        return val.reshape(x.shape[:-1]), arg.reshape(x.shape)

    def value(self, x):
        return self._solve(x)[0]

    def grad(self, x):
        return self._solve(x)[1]


# --- the gauge object ---------------------------------------------------------


def _check_finite(a):
    a = np.asarray(a, dtype=float)
    if not np.all(np.isfinite(a)):
        raise InvalidInputError("non-finite input")
    return a


def _check_nonzero(a):
    if np.any(np.linalg.norm(a, axis=-1) == 0):
        raise DomainError("H is not differentiable at the origin")


def sphere_directions(n_dim, count, rng):
    return _unit_rows(rng.standard_normal((count, n_dim)))


class Gauge:
    """A certified gauge in dimension ``dim``.

    Build with :meth:`Gauge.build`, which samples the equivalence constants
    ``alpha1 <= H(xi)/|xi| <= alpha2``, the bounds ``|grad H| <= M`` and
    ``|D^2 H(xi)| <= Mbar/|xi|``, and the uniform-convexity constant
    ``Lambda``.  The sampling budget, seed and any axis-cone exclusion are
    kept in ``certification``.
    """

    def __init__(self, spec, dim, dual_mode, constants, certification):
        self.spec = spec
        self.dim = dim
        self.dual_mode = dual_mode
        self.alpha1 = constants["alpha1"]
        self.alpha2 = constants["alpha2"]
        self.M = constants["M"]
        self.Mbar = constants["Mbar"]
        self.Lambda = constants["Lambda"]
        self.certification = certification
        self._k = _make_kernel(spec)
        analytic = self._k.dual()
        if dual_mode == "analytic" and analytic is None:
            raise InvalidInputError("custom gauges have no analytic dual; use dual_mode='numerical'")
        self._dual = analytic if dual_mode == "analytic" else _NumericalDual(self._k)

    @classmethod
    def build(cls, spec: GaugeSpec, dim: int, dual_mode: str | None = None,
              budget: int = 10_000, seed: int = 0) -> "Gauge":
        if int(dim) != dim or dim < 2:
            raise InvalidInputError("dimension must be an integer >= 2")
        dim = int(dim)
        if spec.variant == "quadratic" and len(spec.matrix) != dim:
            raise InvalidInputError("matrix size does not match dimension")
        if dual_mode is None:
            dual_mode = "numerical" if spec.variant == "custom" else "analytic"
        if dual_mode not in ("analytic", "numerical"):
            raise InvalidInputError(f"unknown dual mode {dual_mode!r}")
        constants, cert = certify(_make_kernel(spec), spec, dim, budget, seed)
        return cls(spec, dim, dual_mode, constants, cert)

    @property
    def excludes_axes(self) -> bool:
        return self.spec.variant == "ell_q" and self.spec.q != 2

    def _validate(self, xi):
        xi = _check_finite(xi)
        if xi.shape[-1] != self.dim:
            raise InvalidInputError(f"expected last axis of length {self.dim}")
        return xi

    def h(self, xi):
        return self._k.value(self._validate(xi))

    def grad(self, xi):
        xi = self._validate(xi)
        _check_nonzero(xi)
        return self._k.grad(xi)

    def hess(self, xi):
        xi = self._validate(xi)
        _check_nonzero(xi)
        return self._k.hess(xi)

    def dual(self, x):
        return self._dual.value(self._validate(x))

    def dual_grad(self, x):
        x = self._validate(x)
        _check_nonzero(x)
        return self._dual.grad(x)

    def flux(self, xi, p):
        """H^{p-1}(xi) grad H(xi), extended by 0 at xi = 0."""
        xi = self._validate(xi)
        r = np.linalg.norm(xi, axis=-1)
        nz = r > 0
        out = np.zeros_like(xi)
        if np.any(nz):
            z = xi[nz]
            out[nz] = self._k.value(z)[..., None] ** (p - 1) * self._k.grad(z)
        return out

    def describe(self):
        return {
            "gauge": self.spec.label(),
            "dimension": self.dim,
            "dual_mode": self.dual_mode,
            "alpha1": self.alpha1,
            "alpha2": self.alpha2,
            "M": self.M,
            "Mbar": self.Mbar,
            "Lambda": self.Lambda,
            "certification": self.certification,
        }

    def __repr__(self):
        return f"Gauge({self.spec.label()}, N={self.dim}, dual={self.dual_mode})"


def _axis_probes(dim):
    # directions on the boundary of the excluded axis cone
    out = []
    for j in range(dim):
        for k in range(dim):
            if k != j:
                for s in (1.0, -1.0):
                    d = np.zeros(dim)
                    d[j] = 1.0
                    d[k] = s * AXIS_CONE * 1.0001
                    for m in range(dim):
                        if m not in (j, k):
                            d[m] = AXIS_CONE * 1.0001
                    out.append(d / np.linalg.norm(d))
    return np.array(out)


def outside_axis_cone(d):
    u = np.abs(_unit_rows(d))
    return u.min(axis=-1) >= AXIS_CONE


def tangent_basis(g):
    """Orthonormal bases of g^perp, shape (..., N, N-1)."""
    n = g.shape[-1]
    # Householder-free: QR of [g | I] keeps the last N-1 columns orthogonal to g
    mats = np.concatenate([g[..., :, None], np.broadcast_to(np.eye(n), g.shape[:-1] + (n, n))], axis=-1)
    q, _ = np.linalg.qr(mats)
    return q[..., :, 1:n]


def _tangent_min_eig(kernel, d):
    """min eigenvalue of D^2H restricted to grad H^perp at xi = d/H(d)."""
    h = kernel.value(d)
    hess = kernel.hess(d) * h[:, None, None]
    P = tangent_basis(kernel.grad(d))
    red = np.einsum("bia,bij,bjc->bac", P, hess, P)
    return np.linalg.eigvalsh(red)[:, 0]


def certify(kernel, spec, dim, budget, seed):
    """Sample the direction-only constants of a gauge on the unit sphere."""
    if budget < 1:
        raise InvalidInputError("certification budget must be positive")
    rng = np.random.default_rng(seed)
    d = sphere_directions(dim, budget, rng)
    notes = []
    excluded = 0
    if spec.variant == "ell_q" and spec.q != 2:
        keep = outside_axis_cone(d)
        excluded = int((~keep).sum())
        d = np.concatenate([d[keep], _axis_probes(dim)])
        notes.append(f"hessian sampling excludes a {AXIS_CONE:g} cone around coordinate axes")
    ratio = kernel.value(d)
    gnorm = np.linalg.norm(kernel.grad(d), axis=-1)
    hnorm = np.linalg.norm(kernel.hess(d), ord=2, axis=(-2, -1))
    lam = _tangent_min_eig(kernel, d)
    h = kernel.value(d)[:, None]
    g = kernel.grad(d)
    h2 = g[:, :, None] * g[:, None, :] + h[:, :, None] * kernel.hess(d)
    h2min = np.linalg.eigvalsh(h2)[:, 0]
    constants = {
        "alpha1": float(ratio.min() * 0.99),
        "alpha2": float(ratio.max() * 1.01),
        "M": float(gnorm.max() * 1.01),
        "Mbar": float(hnorm.max() * 1.01),
        "Lambda": float(lam.min() * 0.99),
    }
    cert = {
        "budget": int(budget),
        "seed": int(seed),
        "margin": 0.01,
        "axis_cone": AXIS_CONE if excluded or spec.variant == "ell_q" and spec.q != 2 else 0.0,
        "excluded_directions": excluded,
        "min_eig_hess_h2_half": float(h2min.min()),
        "notes": notes,
    }
    return constants, cert


# --- spec-level operations ---------------------------------------------------


def eval_h(gauge: Gauge, xi):
    return gauge.h(xi)


def grad_h(gauge: Gauge, xi):
    return gauge.grad(xi)


def hess_h(gauge: Gauge, xi):
    return gauge.hess(xi)


def eval_dual(gauge: Gauge, x):
    return gauge.dual(x)


def grad_dual(gauge: Gauge, x):
    return gauge.dual_grad(x)


def _sample_points(gauge, samples, rng):
    d = sphere_directions(gauge.dim, samples, rng)
    if gauge.excludes_axes:
        while True:
            bad = ~outside_axis_cone(d)
            if not bad.any():
                break
            d[bad] = sphere_directions(gauge.dim, int(bad.sum()), rng)
    r = np.exp(rng.uniform(np.log(1e-2), np.log(1e2), size=samples))
    return d * r[:, None]


def verify_identities(gauge: Gauge, samples: int = 1000, seed: int = 0,
                      tol: float | None = None) -> IdentityReport:
    """Check the gauge identities at random nonzero points.

    Covers H(grad H°) = 1 = H°(grad H), the inverse-map identities
    H(x) grad H°(grad H(x)) = x = H°(x) grad H(grad H°(x)), Euler's identity,
    D^2H(xi) xi = 0, the certified bounds, and uniform convexity on the unit
    H-sphere.  Failures mark the report; nothing is raised.
    """
    if samples < 1:
        raise InvalidInputError("samples must be >= 1")
    numerical = gauge.dual_mode == "numerical"
    fd_hessian = gauge.spec.variant == "custom"
    if tol is None:
        tol = 1e-5 if numerical else 1e-8
    tol_h = 1e-5 if fd_hessian else tol
    rng = np.random.default_rng(seed)
    x = _sample_points(gauge, samples, rng)
    xn = np.linalg.norm(x, axis=-1)
    H, Hd = gauge.h(x), gauge.dual(x)
    g, gd = gauge.grad(x), gauge.dual_grad(x)
    hess = gauge.hess(x)
    checks = []

    def add(name, abs_err, rel_err, tolerance):
        a = float(np.max(abs_err))
        r = float(np.max(rel_err))
        checks.append(IdentityCheck(name, a, r, samples, seed, tolerance, bool(r <= tolerance)))

    e = np.abs(gauge.h(gd) - 1.0)
    add("H(grad H°(x)) = 1", e, e, tol)
    e = np.abs(gauge.dual(g) - 1.0)
    add("H°(grad H(x)) = 1", e, e, tol)
    e = np.linalg.norm(H[:, None] * gauge.dual_grad(g) - x, axis=-1)
    add("H(x) grad H°(grad H(x)) = x", e, e / xn, tol)
    e = np.linalg.norm(Hd[:, None] * gauge.grad(gd) - x, axis=-1)
    add("H°(x) grad H(grad H°(x)) = x", e, e / xn, tol)
    e = np.abs(np.einsum("ij,ij->i", g, x) - H)
    add("<grad H(xi), xi> = H(xi)", e, e / H, tol)
    hx = np.einsum("bij,bj->bi", hess, x)
    e = np.linalg.norm(hx, axis=-1)
    hn = np.linalg.norm(hess, ord=2, axis=(-2, -1))
    add("D2H(xi) xi = 0", e, e / (hn * xn), tol_h)
    e = np.maximum(0.0, np.maximum(gauge.alpha1 * xn - H, H - gauge.alpha2 * xn)) / xn
    add("alpha1|xi| <= H(xi) <= alpha2|xi|", e * xn, e, tol)
    e = np.maximum(0.0, np.linalg.norm(g, axis=-1) - gauge.M)
    add("|grad H| <= M", e, e / gauge.M, tol)
    e = np.maximum(0.0, hn * xn - gauge.Mbar)
    add("|D2H(xi)| <= Mbar/|xi|", e, e / gauge.Mbar, tol_h)
    lam = _tangent_min_eig(gauge._k, x / xn[:, None])
    e = np.maximum(0.0, gauge.Lambda - lam)
    add("uniform convexity >= Lambda", e, e / gauge.Lambda, tol_h)
    # second characterisation of (iii): D^2(H^2/2) positive definite
    h2 = g[:, :, None] * g[:, None, :] + H[:, None, None] * hess
    h2min = np.linalg.eigvalsh(h2)[:, 0]
    e = np.maximum(0.0, -h2min)
    add("D2(H^2) positive definite", e, e, tol_h)
    notes = [f"sampled Lambda = {gauge.Lambda:.6g}",
             f"min eig D2(H^2/2) on sample = {float(h2min.min()):.6g}"]
    notes += gauge.certification.get("notes", [])
    return IdentityReport(checks, samples, seed, notes)


def divergence_identity_check(gauge: Gauge, samples: int = 100, fd_step: float = 1e-4,
                              seed: int = 0) -> ResidualReport:
    """Compare a central-difference divergence of x -> grad H(grad H°(x)) with (N-1)/H°(x)."""
    if fd_step <= 0:
        raise InvalidInputError("fd_step must be positive")
    rng = np.random.default_rng(seed)
    x = _sample_points(gauge, samples, rng)
    xn = np.linalg.norm(x, axis=-1)
    near = xn < 10 * fd_step
    x = x[~near]
    n = gauge.dim

    def field_(y):
        return gauge.grad(gauge.dual_grad(y))

    # the field is 0-homogeneous: a step proportional to |x| keeps the
    # truncation error scale-free
    step = fd_step * np.maximum(np.linalg.norm(x, axis=-1), 1.0)
    div = np.zeros(len(x))
    for j in range(n):
        e = np.zeros((len(x), n))
        e[:, j] = step
        div += (field_(x + e)[:, j] - field_(x - e)[:, j]) / (2 * step)
    exact = (n - 1) / gauge.dual(x)
    err = np.abs(div - exact)
    rel = err / np.abs(exact)
    k = int(np.argmax(rel))
    return ResidualReport(
        max_abs=float(err.max()),
        max_rel=float(rel.max()),
        argmax=float(gauge.dual(x[k])),
        size=int(len(x)),
        skipped=int(near.sum()),
    )


def wulff_volume(gauge: Gauge, budget: int = 100_000, seed: int = 0):
    """Monte-Carlo volume of the unit H°-ball, with its standard error.

    The ball lies in the Euclidean ball of radius alpha2 (H°(x) >= |x|/alpha2),
    so points are drawn uniformly from the enclosing cube.
    """
    if budget < 10_000:
        raise InvalidInputError("budget must be at least 1e4")
    rng = np.random.default_rng(seed)
    a = gauge.alpha2
    n = gauge.dim
    box = (2 * a) ** n
    hits = 0
    chunk = 200_000
    left = budget
    while left > 0:
        m = min(chunk, left)
        pts = rng.uniform(-a, a, size=(m, n))
        hits += int(np.count_nonzero(gauge.dual(pts) < 1.0))
        left -= m
    frac = hits / budget
    kappa = box * frac
    stderr = box * math.sqrt(frac * (1 - frac) / budget)
    return kappa, stderr


def ell_ball_volume(r, n):
    """Volume of the unit ell_r ball in R^n."""
    return (2 * gamma_fn(1 / r + 1)) ** n / gamma_fn(n / r + 1)


def wulff_volume_exact(gauge: Gauge) -> float:
    """Closed-form |B_1^{H°}| for built-in gauges."""
    n = gauge.dim
    v = gauge.spec.variant
    if v == "euclidean":
        return ell_ball_volume(2.0, n)
    if v == "ell_q":
        q = gauge.spec.q
        return ell_ball_volume(q / (q - 1), n)
    if v == "quadratic":
        # H°(x)^2 = x^T A^{-1} x, an ellipsoid with semi-axes sqrt(eig A)
        return ell_ball_volume(2.0, n) * math.sqrt(np.linalg.det(np.asarray(gauge.spec.matrix)))
    raise InvalidInputError("no closed form for custom gauges; use wulff_volume")


def euclid_plus_l4(xi):
    """sqrt(|xi|^2 + |xi|_4^2): a smooth, uniformly convex, non-quadratic gauge."""
    xi = np.asarray(xi, dtype=float)
    sq = xi * xi  # products, not **: the generic pow path dominates dual solves
    l2sq = np.sum(sq, axis=-1)
    l4sq = np.sqrt(np.sum(sq * sq, axis=-1))
    return np.sqrt(l2sq + l4sq)


CUSTOM_GAUGES = {"euclid_plus_l4": euclid_plus_l4}
