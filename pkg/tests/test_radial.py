import numpy as np
import pytest

from anisolab.errors import DegenerateFitError, InvalidInputError
from anisolab.radial import (
    RadialProfile,
    decay_fit,
    discrete_operator,
    gradient_decay_fit,
    localized_norm_curve,
    log_grid,
    norm_curve_exponent,
    power_fit,
    radial_operator,
    residual_report,
    trapezoid_log,
)
from anisolab.spectrum import ProblemParams, solve_exponents

from conftest import random_params


def test_profile_validation():
    t = log_grid(1e-2, 1e2, 50)
    with pytest.raises(InvalidInputError):
        RadialProfile.from_values(t, -np.ones_like(t))
    with pytest.raises(InvalidInputError):
        RadialProfile.from_values(t[::-1], np.ones_like(t))
    with pytest.raises(InvalidInputError):
        RadialProfile.from_values(t, np.full_like(t, np.inf))
    with pytest.raises(InvalidInputError):
        log_grid(1.0, 0.5, 10)
    prof = RadialProfile.power(t, 1.0)
    with pytest.raises(ValueError):
        prof.v[0] = 2.0


def test_power_solutions_residual(rng):
    for _ in range(20):
        P = random_params(rng)
        e = solve_exponents(P)
        t = log_grid(1e-3, 1e3, 400)
        for mu in (e.mu1, e.mu2):
            c = float(rng.uniform(0.1, 10))
            rep = residual_report(P, RadialProfile.power(t, mu, c), 0.0)
            assert rep.max_rel <= 1e-8


def test_operator_on_non_solution():
    P = ProblemParams(4, 2.0, 0.0)
    t = log_grid(0.1, 10, 100)
    op = radial_operator(P, RadialProfile.power(t, 1.0))
    # v = t^-1: -v'' - 3 v'/t = -2 t^-3 + 3 t^-3 = t^-3
    assert np.allclose(op, t ** -3.0, rtol=1e-12)


def test_finite_difference_derivatives_converge():
    fn = lambda s: 1 / (1 + s**2)
    errs = []
    for n in (200, 400, 800):
        t = log_grid(0.1, 10, n)
        prof = RadialProfile.from_values(t, fn(t))
        exact = -2 * t / (1 + t**2) ** 2
        errs.append(np.max(np.abs(prof.dv - exact)))
    order = np.log2(errs[0] / errs[1]), np.log2(errs[1] / errs[2])
    assert min(order) > 1.8


def test_discrete_operator_second_order():
    P = ProblemParams(3, 1.5, 0.1)
    e = solve_exponents(P)
    errs = []
    for n in (257, 513, 1025):
        t = log_grid(0.1, 10, n)
        v = t ** (-e.mu2) * (1 + 0.1 * np.sin(np.log(t)))
        prof = RadialProfile.from_function(t, lambda s: (
            s ** (-e.mu2) * (1 + 0.1 * np.sin(np.log(s))),
            s ** (-e.mu2 - 1) * (-e.mu2 * (1 + 0.1 * np.sin(np.log(s))) + 0.1 * np.cos(np.log(s))),
            s ** (-e.mu2 - 2) * ((e.mu2 * (e.mu2 + 1)) * (1 + 0.1 * np.sin(np.log(s)))
                                 - 0.1 * (2 * e.mu2 + 1) * np.cos(np.log(s)) - 0.1 * np.sin(np.log(s)))))
        exact = radial_operator(P, prof)[1:-1]
        errs.append(np.max(np.abs(discrete_operator(P, t, v) - exact)) / np.max(np.abs(exact)))
    assert errs[0] / errs[1] > 3.5 and errs[1] / errs[2] > 3.5


def test_discrete_operator_exact_power_small():
    P = ProblemParams(5, 2.5, 0.4)
    e = solve_exponents(P)
    t = log_grid(0.1, 10, 2049)
    v = t ** (-e.mu1)
    op = discrete_operator(P, t, v)
    assert np.max(np.abs(op) * t[1:-1] ** P.p / v[1:-1] ** (P.p - 1)) < 1e-5


def test_decay_fits():
    t = log_grid(1e-4, 1e4, 801)
    prof = RadialProfile.power(t, 1.25, 3.0)
    f = decay_fit(prof)
    assert f.exponent == pytest.approx(1.25, abs=1e-12)
    assert f.amplitude == pytest.approx(3.0, rel=1e-10)
    assert f.r_squared == pytest.approx(1.0)
    assert gradient_decay_fit(prof).exponent == pytest.approx(2.25, abs=1e-12)
    flat = RadialProfile.from_function(t, lambda s: (np.ones_like(s), np.zeros_like(s), np.zeros_like(s)))
    with pytest.raises(DegenerateFitError):
        gradient_decay_fit(flat)
    with pytest.raises(InvalidInputError):
        power_fit(t[:5], t[:5], (1, 2))


def test_csv_round_trip(tmp_path):
    t = log_grid(1e-2, 1e2, 64)
    prof = RadialProfile.from_values(t, 1 / (1 + t))
    path = tmp_path / "p.csv"
    prof.to_csv(path)
    back = RadialProfile.from_csv(path)
    assert np.array_equal(back.t, prof.t) and np.array_equal(back.v, prof.v)


def test_integrals_and_norm_curve():
    t = log_grid(1e-3, 1e3, 4001)
    assert trapezoid_log(t, t**-0.5) == pytest.approx(2 * (np.sqrt(1e3) - np.sqrt(1e-3)), rel=1e-6)
    # u = t^{-mu2}: the complement norm over t > R scales like R^{N/p* - mu2}
    P = ProblemParams(3, 2.0, 0.0)
    prof = RadialProfile.power(log_grid(1e-2, 1e8, 4001), 1.0)
    curve = localized_norm_curve(P, prof, [10, 20, 40, 80], 1.0, complement=True)
    assert norm_curve_exponent(curve) == pytest.approx(3 / 6 - 1.0, abs=1e-3)
    with pytest.raises(InvalidInputError):
        localized_norm_curve(P, prof, [1e9], 1.0)
