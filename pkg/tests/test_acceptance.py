"""Acceptance criteria 1-12, one test each.

Every test prints a single ``[criterion k] PASS|FAIL ...`` line with the
measured quantities.  Run ``pytest tests/test_acceptance.py -s`` (or the file
as a script) to see the lines.
"""

import math
import time

import numpy as np
import pytest

from anisolab import cli
from anisolab import inequalities as iq
from anisolab.comparison import liouville_check
from anisolab.gauge import Gauge, GaugeSpec, divergence_identity_check, verify_identities
from anisolab.radial import RadialProfile, log_grid, residual_report
from anisolab.spectrum import ProblemParams, solve_exponents, supersolution_params
from anisolab.variational import (
    QuotientSetup,
    minimize_quotient,
    minimizer_decay_audit,
    rayleigh_quotient,
    s_gamma_curve,
    talenti_profile,
)

from conftest import random_params

SEED = 20240611


def line(k, ok, msg):
    text = f"[criterion {k:2d}] {'PASS' if ok else 'FAIL'} {msg}"
    print(text)
    return text


def test_criterion_01_exponents():
    rng = np.random.default_rng(SEED)
    t0 = time.perf_counter()
    worst_root = 0.0
    for _ in range(100):
        N = int(rng.integers(3, 12))
        P = ProblemParams(N, 2.0, 0.0)
        P = P.with_gamma(float(rng.uniform(0, 0.999)) * P.C_H)
        e = solve_exponents(P)
        d = math.sqrt((N - 2) ** 2 - 4 * P.gamma)
        worst_root = max(worst_root, abs(e.mu1 - (N - 2 - d) / 2), abs(e.mu2 - (N - 2 + d) / 2))
    ordered, worst_res = True, 0.0
    for _ in range(100):
        P = random_params(rng, max_N=10, frac_hi=0.999)
        while P.p == 2.0:
            P = random_params(rng, max_N=10, frac_hi=0.999)
        e = solve_exponents(P)
        ordered &= 0 <= e.mu1 < P.mid < e.mu2 <= P.top or P.gamma == 0
        worst_res = max(worst_res, abs(e.res1), abs(e.res2))
    dt = time.perf_counter() - t0
    ok = worst_root <= 1e-10 and ordered and worst_res <= 1e-10 and dt < 1.0
    line(1, ok, f"root err {worst_root:.2e}, residual {worst_res:.2e}, ordered={ordered}, {dt:.2f}s")
    assert ok


def _builtin(dim):
    return cli.builtin_gauges(dim)


def test_criterion_02_gauge_identities():
    t0 = time.perf_counter()
    worst = {}
    ok = True
    for dim in (2, 3, 4):
        cases = [(s, None) for s in _builtin(dim)] + [(GaugeSpec.euclidean(), "numerical")]
        for spec, mode in cases:
            g = Gauge.build(spec, dim, mode)
            rep = verify_identities(g, samples=1000, seed=dim)
            ok &= rep.passed
            key = (g.dual_mode, spec.variant)
            worst[key] = max(worst.get(key, 0.0), max(c.max_rel_err for c in rep.checks))
    dt = time.perf_counter() - t0
    ok &= dt < 10
    summary = ", ".join(f"{v}/{m} {e:.1e}" for (m, v), e in sorted(worst.items()))
    line(2, ok, f"{summary}; {dt:.1f}s")
    assert ok


def test_criterion_03_divergence():
    worst = {}
    for dim in (2, 3):
        for spec in _builtin(dim):
            rep = divergence_identity_check(Gauge.build(spec, dim), samples=100, seed=dim)
            worst[spec.variant] = max(worst.get(spec.variant, 0.0), rep.max_rel)
    ok = all(v <= 1e-3 for v in worst.values()) and len(worst) >= 3
    line(3, ok, ", ".join(f"{k} {v:.1e}" for k, v in sorted(worst.items())))
    assert ok


def test_criterion_04_power_residual():
    rng = np.random.default_rng(SEED + 4)
    t = log_grid(1e-4, 1e4, 2048)
    worst = 0.0
    for _ in range(20):
        P = random_params(rng)
        e = solve_exponents(P)
        for mu in (e.mu1, e.mu2):
            worst = max(worst, residual_report(P, RadialProfile.power(t, mu, rng.uniform(0.1, 10)), 0.0).max_rel)
    ok = worst <= 1e-8
    line(4, ok, f"max relative residual {worst:.2e} over 20 parameter sets, both branches")
    assert ok


def test_criterion_05_supersolution():
    rng = np.random.default_rng(SEED + 5)
    ok, worst_margin, count = True, np.inf, 0
    for branch in ("origin", "infinity"):
        for _ in range(20):
            P = random_params(rng, frac_hi=0.9)
            A = float(10 ** rng.uniform(-2, 2))
            alpha = float(rng.uniform(0.05, 0.95) * P.p) if branch == "origin" else float(rng.uniform(1.05, 3) * P.p)
            sp = supersolution_params(P, A, alpha, branch)
            tg = sp.check_grid()
            m = float(np.min(sp.g(P, tg) / (A * tg ** (-alpha)))) - 1
            worst_margin = min(worst_margin, m)
            ok &= m >= 0 and sp.delta <= 0.5 and sp.epsilon == (P.p - alpha) / 2 and len(tg) == 200
            count += 1
    line(5, ok, f"{count} syntheses, min relative margin g/(A t^-alpha) - 1 = {worst_margin:.2e}")
    assert ok


def test_criterion_06_inequality_suite():
    t0 = time.perf_counter()
    s = iq.default_suite()
    reports = []
    for spec, dim, p in s["monotonicity"]:
        reports.append(iq.check_vector_monotonicity(Gauge.build(spec, dim), p, 10_000, SEED))
    for spec, dim, p in s["convexity_ge_2"]:
        reports.append(iq.check_convexity_p_ge_2(Gauge.build(spec, dim), p, 10_000, SEED))
    for spec, dim, p in s["convexity_lt_2"]:
        reports.append(iq.check_convexity_p_lt_2(Gauge.build(spec, dim), p, 10_000, SEED))
    for spec, dim, p in s["log"]:
        reports.append(iq.check_log_pointwise(Gauge.build(spec, dim), p, 10_000, SEED))
    for p, delta in s["split"]:
        reports.append(iq.check_power_split(p, delta, 10_000, SEED, iq.frozen_split_constant(p, delta)))
    violations = sum(r.violations for r in reports)
    # frozen constants against a 4x refined oracle
    drift = 0.0
    for e in iq.load_manifest()["constants"]:
        if e["inequality"] == "power-split":
            fine = iq.split_constant_oracle(e["p"], e["delta"], grid=4 * iq.SPLIT_GRID)
            drift = max(drift, abs(fine - e["oracle_supremum"]) / e["oracle_supremum"])
        else:
            spec = {"euclidean": GaugeSpec.euclidean(),
                    "quadratic(2,0.5;0.5,1)": GaugeSpec.quadratic([[2.0, 0.5], [0.5, 1.0]])}[e["gauge"]]
            fine, _ = iq.singular_constant_oracle(Gauge.build(spec, e["dimension"]), e["p"],
                                                  samples=4 * iq.ORACLE_SAMPLES)
            drift = max(drift, abs(fine - e["oracle_infimum"]) / e["oracle_infimum"])
    dt = time.perf_counter() - t0
    ok = violations == 0 and drift <= 0.01 and dt < 60
    line(6, ok, f"{len(reports)} checks x 1e4 samples, {violations} violations, "
                f"oracle drift under 4x refinement {drift:.1e}, {dt:.1f}s")
    assert ok


def test_criterion_07_hardy():
    worst, near = np.inf, {}
    ok = True
    for N, p in [(3, 2.0), (4, 2.5), (5, 1.5)]:
        P = ProblemParams(N, p)
        rep = iq.check_hardy(P, profiles=1000, seed=SEED)
        ok &= rep.passed
        worst = min(worst, rep.details["min_quotient"] / P.C_H)
        near[(N, p)] = iq.hardy_quotient(P, iq.near_extremal_profile(P, 1e-8, 1e8)) / P.C_H
    ok &= all(1 <= r <= 1.05 for r in near.values())
    line(7, ok, f"min quotient/C_H over 3x1000 profiles {worst:.4f}; near-extremal ratios "
                + ", ".join(f"{r:.4f}" for r in near.values()))
    assert ok


def test_criterion_08_variational():
    t0 = time.perf_counter()
    P = ProblemParams(4, 2.0, 0.0)
    grid = (1e-4, 1e4, 2048)
    setup = QuotientSetup.build(P, None, *grid)
    discrete_talenti = rayleigh_quotient(setup, talenti_profile(P, setup.nodes))
    res = minimize_quotient(setup)
    err = abs(res.S_estimate - discrete_talenti) / discrete_talenti
    rows, dec = s_gamma_curve(P, np.linspace(0, 0.9 * P.C_H, 5), None, *grid)
    dt = time.perf_counter() - t0
    ok = res.converged and err <= 0.02 and dec and dt < 300
    line(8, ok, f"S(0) = {res.S_estimate:.5f} vs discrete Talenti {discrete_talenti:.5f} "
                f"(rel {err:.1e}); S(gamma) = " + ", ".join(f"{r.S:.4f}" for r in rows)
                + f" strictly decreasing={dec}; {dt:.1f}s")
    assert ok


def test_criterion_09_decay_audit():
    P = ProblemParams(4, 2.0, 0.75)
    res = minimize_quotient(QuotientSetup.build(P, None, 1e-6, 1e6, 1537), "power-truncated")
    audit = minimizer_decay_audit(res, P, rtol=0.05)
    ok = res.converged and audit.passed
    fitted = ", ".join(f"{k} {c['fitted']:.4f}/{c['target']:.1f}" for k, c in audit.checks.items())
    line(9, ok, fitted)
    assert ok


def test_criterion_10_liouville():
    rng = np.random.default_rng(SEED + 10)
    worst = 0.0
    ok = True
    for _ in range(4):
        P = random_params(rng, max_N=6, frac_hi=0.9)
        for branch in ("mu1", "mu2"):
            rep = liouville_check(P, branch, (0.1, 10.0), float(rng.uniform(0.5, 2)), widen=10, refine=4)
            ok &= rep.ordered
            worst = max(worst, rep.deviation)
    ok &= worst <= 1e-6
    line(10, ok, f"max relative deviation from the pure power {worst:.1e} (base, 10x widened, 4x refined)")
    assert ok


def test_criterion_11_comparison():
    ok = True
    n = 0
    growth_ok = True
    for P in (ProblemParams(4, 2.0, 0.75), ProblemParams(3, 1.5, 0.05), ProblemParams(5, 2.5, 0.5)):
        pairs, growth = cli.comparison_suite(P, SEED)
        ok &= all(r["ordered"] for r in pairs.values())
        n += len(pairs)
        growth_ok &= growth.decreasing
    vals = [f"{v:.3g}" for _, v in growth.values]
    ok &= growth_ok
    line(11, ok, f"{n} verified pairs ordered; exterior growth R=10..80 -> {', '.join(vals)} decreasing={growth_ok}")
    assert ok


def test_criterion_12_cli_determinism(tmp_path):
    t0 = time.perf_counter()
    codes = [cli.main(["suite", "--out", str(tmp_path / d), "--seed", "7"]) for d in ("a", "b")]
    dt = time.perf_counter() - t0
    a = {f.name: f.read_bytes() for f in (tmp_path / "a").iterdir() if not f.name.endswith(".manifest.json")}
    b = {f.name: f.read_bytes() for f in (tmp_path / "b").iterdir() if not f.name.endswith(".manifest.json")}
    same = a == b and len(a) > 0
    ok = codes == [0, 0] and same and dt < 600
    line(12, ok, f"exit codes {codes}, {len(a)} report files byte-identical={same}, two runs in {dt:.0f}s")
    assert ok


if __name__ == "__main__":
    import sys
    sys.exit(pytest.main([__file__, "-s", "-q"]))
