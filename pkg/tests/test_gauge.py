import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from anisolab.errors import InvalidInputError
from anisolab.gauge import (
    CUSTOM_GAUGES,
    Gauge,
    GaugeSpec,
    divergence_identity_check,
    ell_ball_volume,
    verify_identities,
    wulff_volume,
    wulff_volume_exact,
)

QUAD = [[2.0, 0.5], [0.5, 1.0]]


def builtin(dim):
    A = 2.0 * np.eye(dim) + 0.5 * (np.eye(dim, k=1) + np.eye(dim, k=-1))
    return [GaugeSpec.euclidean(), GaugeSpec.ell_q(3.0), GaugeSpec.ell_q(1.5),
            GaugeSpec.quadratic(A), GaugeSpec.custom(CUSTOM_GAUGES["euclid_plus_l4"], "euclid_plus_l4")]


@pytest.fixture(scope="module")
def gauges():
    return {(s.label(), d): Gauge.build(s, d) for d in (2, 3) for s in builtin(d)}


def test_labels():
    assert GaugeSpec.quadratic(QUAD).label() == "quadratic(2,0.5;0.5,1)"
    assert GaugeSpec.ell_q(3).label() == "ell_q(q=3)"
    assert GaugeSpec.custom(CUSTOM_GAUGES["euclid_plus_l4"], "euclid_plus_l4").label() == "custom(euclid_plus_l4)"


@pytest.mark.parametrize("bad", [
    dict(variant="nope"), dict(variant="ell_q", q=1.0), dict(variant="ell_q", q=float("inf")),
    dict(variant="quadratic", matrix=((1.0, 0.2), (0.0, 1.0))),
    dict(variant="quadratic", matrix=((1.0, 2.0), (2.0, 1.0))), dict(variant="custom"),
])
def test_spec_validation(bad):
    with pytest.raises(InvalidInputError):
        GaugeSpec(**bad)


def test_build_validation():
    with pytest.raises(InvalidInputError):
        Gauge.build(GaugeSpec.quadratic(QUAD), 3)
    with pytest.raises(InvalidInputError):
        Gauge.build(GaugeSpec.euclidean(), 1)
    custom = GaugeSpec.custom(CUSTOM_GAUGES["euclid_plus_l4"], "euclid_plus_l4")
    with pytest.raises(InvalidInputError):
        Gauge.build(custom, 2, "analytic")


def test_input_validation(gauges):
    g = gauges[("euclidean", 2)]
    with pytest.raises(InvalidInputError):
        g.h(np.array([1.0, np.nan]))
    with pytest.raises(InvalidInputError):
        g.h(np.ones(3))
    with pytest.raises(InvalidInputError):
        g.grad(np.zeros(2))
    assert np.all(g.flux(np.zeros((1, 2)), 1.5) == 0)


def test_closed_form_duals(rng):
    x = rng.normal(size=(200, 3))
    g = Gauge.build(GaugeSpec.ell_q(3.0), 3)
    assert np.allclose(g.dual(x), np.sum(np.abs(x) ** 1.5, axis=1) ** (1 / 1.5), rtol=1e-12)
    q = Gauge.build(GaugeSpec.quadratic(QUAD), 2)
    y = x[:, :2]
    inv = np.linalg.inv(QUAD)
    assert np.allclose(q.dual(y), np.sqrt(np.einsum("bi,ij,bj->b", y, inv, y)), rtol=1e-12)
    e = Gauge.build(GaugeSpec.euclidean(), 3)
    assert np.allclose(e.dual(x), np.linalg.norm(x, axis=1))


def test_numerical_dual_agrees_with_analytic(rng):
    for spec in (GaugeSpec.quadratic(QUAD), GaugeSpec.ell_q(3.0)):
        a = Gauge.build(spec, 2, "analytic")
        n = Gauge.build(spec, 2, "numerical")
        x = rng.normal(size=(50, 2))
        assert np.allclose(n.dual(x), a.dual(x), rtol=1e-7)


@pytest.mark.parametrize("dim", [2, 3, 4])
def test_identities_all_builtin(dim):
    for spec in builtin(dim):
        rep = verify_identities(Gauge.build(spec, dim), samples=300, seed=dim)
        assert rep.passed, (spec.label(), [c for c in rep.checks if not c.passed])


def test_identities_numerical_dual_tolerance():
    rep = verify_identities(Gauge.build(GaugeSpec.euclidean(), 3, "numerical"), samples=200)
    assert rep.passed
    assert all(c.tolerance == 1e-5 for c in rep.checks)


@pytest.mark.parametrize("spec", [GaugeSpec.euclidean(), GaugeSpec.ell_q(3.0), GaugeSpec.quadratic(QUAD)],
                         ids=lambda s: s.label())
def test_divergence_identity(spec):
    rep = divergence_identity_check(Gauge.build(spec, 2), samples=100)
    assert rep.max_rel <= 1e-3


def test_wulff_volume(rng):
    assert ell_ball_volume(2.0, 2) == pytest.approx(np.pi)
    assert ell_ball_volume(1.0, 2) == pytest.approx(2.0)
    assert ell_ball_volume(2.0, 3) == pytest.approx(4 * np.pi / 3)
    q = Gauge.build(GaugeSpec.quadratic(QUAD), 2)
    assert wulff_volume_exact(q) == pytest.approx(np.pi * np.sqrt(1.75))
    kappa, err = wulff_volume(q, budget=200_000)
    assert abs(kappa - wulff_volume_exact(q)) <= 5 * err
    l3 = Gauge.build(GaugeSpec.ell_q(3.0), 3)
    kappa, err = wulff_volume(l3, budget=200_000)
    assert abs(kappa - wulff_volume_exact(l3)) <= 5 * err


def test_certified_constants(gauges):
    e = gauges[("euclidean", 3)]
    assert e.alpha1 <= 1 <= e.alpha2 and e.M >= 1 and 0 < e.Lambda <= 1
    assert gauges[("ell_q(q=3)", 2)].excludes_axes
    d = e.describe()
    assert d["certification"]["budget"] == 10_000


vec = arrays(np.float64, 3, elements=st.floats(-1e3, 1e3, allow_nan=False))


@settings(max_examples=150, deadline=None)
@given(x=vec, lam=st.floats(1e-3, 1e3))
def test_homogeneity_and_euler(x, lam):
    if np.linalg.norm(x) < 1e-6:
        return
    for spec in (GaugeSpec.quadratic(np.diag([1.0, 2.0, 3.0])), GaugeSpec.ell_q(4.0)):
        g = Gauge.build(spec, 3, budget=500)
        assert g.h(lam * x) == pytest.approx(lam * g.h(x), rel=1e-12)
        assert g.dual(lam * x) == pytest.approx(lam * g.dual(x), rel=1e-12)
        assert np.dot(g.grad(x), x) == pytest.approx(g.h(x), rel=1e-10)
        # Cauchy-Schwarz for a gauge and its dual
        y = np.roll(x, 1) + 0.1
        assert abs(np.dot(x, y)) <= g.h(x) * g.dual(y) * (1 + 1e-12)


@settings(max_examples=100, deadline=None)
@given(x=vec, y=vec)
def test_triangle_inequality(x, y):
    g = Gauge.build(GaugeSpec.ell_q(3.0), 3, budget=500)
    assert g.h(x + y) <= g.h(x) + g.h(y) + 1e-9 * (1 + np.abs(x).sum() + np.abs(y).sum())
