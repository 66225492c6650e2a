import math

import numpy as np
import pytest

from anisolab.errors import InvalidInputError
from anisolab.spectrum import ProblemParams
from anisolab.variational import (
    QuotientSetup,
    exact_minimizer_p2,
    functionals,
    gradient_check,
    initial_profile,
    minimize_quotient,
    minimizer_decay_audit,
    quotient_gradient,
    rayleigh_quotient,
    s_gamma_curve,
    talenti_profile,
)

# best Sobolev constant in R^4 for p = 2: pi N (N-2) (Gamma(N/2)/Gamma(N))^{2/N}
TALENTI_N4 = math.pi * 8 * (math.gamma(2) / math.gamma(4)) ** 0.5


def s_gamma_ratio(N, gamma):
    # p = 2: S(gamma)/S(0) = (1 - 4 gamma/(N-2)^2)^{(N-1)/N}
    return (1 - 4 * gamma / (N - 2) ** 2) ** ((N - 1) / N)


@pytest.fixture(scope="module")
def setup_n4():
    return QuotientSetup.build(ProblemParams(4, 2.0, 0.0), t_min=1e-4, t_max=1e4, points=1025)


def test_talenti_constant_value():
    assert TALENTI_N4 == pytest.approx(10.2604, abs=1e-4)


def test_setup_validation_and_quadrature(setup_n4):
    ok, approx, exact = setup_n4.self_test()
    assert ok
    with pytest.raises(InvalidInputError):
        QuotientSetup(ProblemParams(4, 2.0), 1.0, np.linspace(1, 2, 10))
    with pytest.raises(InvalidInputError):
        QuotientSetup(ProblemParams(4, 2.0), 0.0, np.geomspace(1, 2, 10))
    with pytest.raises(InvalidInputError):
        rayleigh_quotient(setup_n4, np.ones(5))


def test_talenti_profile_on_grid(setup_n4):
    q = rayleigh_quotient(setup_n4, talenti_profile(setup_n4.params, setup_n4.nodes))
    assert q == pytest.approx(TALENTI_N4, rel=1e-3)


def test_quotient_is_scale_invariant(setup_n4):
    v = talenti_profile(setup_n4.params, setup_n4.nodes)
    assert rayleigh_quotient(setup_n4, 3.7 * v) == pytest.approx(rayleigh_quotient(setup_n4, v), rel=1e-12)
    g = quotient_gradient(setup_n4, v)
    assert abs(np.dot(g, v)) <= 1e-10 * np.linalg.norm(g) * np.linalg.norm(v) + 1e-14


def test_gradient_matches_finite_differences(rng):
    for p, gamma in [(2.0, 0.3), (2.5, 0.2), (1.6, 0.1)]:
        setup = QuotientSetup.build(ProblemParams(4, p, gamma), t_min=1e-3, t_max=1e3, points=257)
        v = initial_profile(setup, "power-truncated") * (1 + 0.05 * np.sin(np.log(setup.nodes)))
        worst = gradient_check(setup, v, rng, directions=8)
        assert worst <= 1e-6


def test_minimize_n4_gamma0(setup_n4):
    res = minimize_quotient(setup_n4)
    assert res.converged
    assert res.S_estimate == pytest.approx(TALENTI_N4, rel=0.02)
    assert np.all(np.diff(res.history) <= 1e-12 * res.history[0])


def test_s_gamma_ratio_and_exact_minimizer():
    N, gamma = 4, 0.75
    t = (1e-6, 1e6, 1537)
    S0 = minimize_quotient(QuotientSetup.build(ProblemParams(N, 2.0, 0.0), None, *t)).S_estimate
    setup = QuotientSetup.build(ProblemParams(N, 2.0, gamma), None, *t)
    res = minimize_quotient(setup, "power-truncated")
    assert res.converged
    assert res.S_estimate / S0 == pytest.approx(s_gamma_ratio(N, gamma), rel=2e-3)
    exact = exact_minimizer_p2(setup.params, setup.nodes)
    assert rayleigh_quotient(setup, exact) == pytest.approx(res.S_estimate, rel=2e-3)
    v = res.profile.v / res.profile.v[len(exact) // 2] * exact[len(exact) // 2]
    mid = slice(len(exact) // 4, 3 * len(exact) // 4)
    assert np.max(np.abs(v[mid] / exact[mid] - 1)) < 0.02


def test_decay_audit_targets():
    P = ProblemParams(4, 2.0, 0.75)
    res = minimize_quotient(QuotientSetup.build(P, None, 1e-6, 1e6, 1537), "power-truncated")
    audit = minimizer_decay_audit(res, P)
    assert audit.passed
    assert audit.targets == pytest.approx({"inner": 0.5, "outer": 1.5, "inner_grad": 1.5, "outer_grad": 2.5})


def test_decay_audit_requires_convergence():
    P = ProblemParams(4, 2.0, 0.5)
    res = minimize_quotient(QuotientSetup.build(P, None, 1e-3, 1e3, 257), max_iters=1)
    assert not res.converged
    with pytest.raises(InvalidInputError):
        minimizer_decay_audit(res, P)


def test_sweep_strictly_decreasing():
    P = ProblemParams(4, 2.0)
    rows, dec = s_gamma_curve(P, np.linspace(0, 0.9 * P.C_H, 5), t_min=1e-4, t_max=1e4, points=1025)
    assert dec
    assert all(not r.flagged for r in rows)
    S = np.array([r.S for r in rows])
    ratio = S / S[0]
    expect = np.array([s_gamma_ratio(4, r.gamma) for r in rows])
    assert np.allclose(ratio, expect, rtol=0.02)


def test_functionals_positive(setup_n4):
    G, H, D = functionals(setup_n4, talenti_profile(setup_n4.params, setup_n4.nodes))
    assert G > 0 and H > 0 and D > 0
