"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Resolution choices that go beyond the default rule (alpha h <= 0.1) are
stated next to the criterion that needs them.
"""
import time

import numpy as np
import pytest

from pucci_robin.discretization import MINUS, PLUS, DiscreteOperator, StencilSet
from pucci_robin.experiments import (
    blowup_profile,
    comparison_sanity,
    concentration_profile,
    convergence_study,
    grid_for,
    liouville_check,
    resolution_rule,
    sweep_alpha,
)
from pucci_robin.mesh import Domain, build_grid
from pucci_robin.operator_core import (
    PucciPair,
    _eigs_sym2_array,
    pucci_minus,
    pucci_plus,
    pucci_sup_sample_oracle_batch,
)
from pucci_robin.oracles import oracle_rectangle_linear, transcendental_root
from pucci_robin.solver import SolverConfig, principal_eigen

P14 = PucciPair(1, 4)
UNIT = Domain.interval(1)
ALPHAS = (1, 2, 4, 8, 16)


@pytest.fixture(scope="module")
def fine_sweep():
    # first-order Robin rows: 1% agreement with the oracle ratios needs alpha h ~ 0.004
    return sweep_alpha(UNIT, P14, ALPHAS, resolution_rule(0.004))


@pytest.fixture(scope="module")
def default_sweep():
    return sweep_alpha(UNIT, P14, ALPHAS)


def test_c01_eigenvalue_accuracy(report):
    g = build_grid(UNIT, 1024)
    mu = transcendental_root(4.0, 0.5)
    t0 = time.perf_counter()
    lp = principal_eigen("positive", P14, 4.0, g).lam
    lm = principal_eigen("negative", P14, 4.0, g).lam
    elapsed = time.perf_counter() - t0
    ep, em = abs(lp + 4 * mu**2) / (4 * mu**2), abs(lm + mu**2) / mu**2
    ok = ep <= 1e-2 and em <= 1e-2 and elapsed <= 10
    report(1, ok, "1D eigenvalue accuracy", f"rel err plus {ep:.2e}, minus {em:.2e}, {elapsed:.2f}s")
    assert ok


def test_c02_asymptotic_ratios(fine_sweep, report):
    rp = np.array([r.ratio_plus for r in fine_sweep])
    rm = np.array([r.ratio_minus for r in fine_sweep])
    orc = np.array([(transcendental_root(a, 0.5) / a) ** 2 for a in ALPHAS])
    dev_p = np.abs(rp / (P14.A * orc) - 1).max()
    dev_m = np.abs(rm / (P14.a * orc) - 1).max()
    ok = (
        all(r.status == "ok" for r in fine_sweep)
        and np.all(np.diff(rp) < 0) and np.all(rp > P14.A) and abs(rp[-1] / P14.A - 1) <= 0.05
        and np.all(np.diff(rm) < 0) and np.all(rm > P14.a) and abs(rm[-1] / P14.a - 1) <= 0.05
        and dev_p <= 0.01 and dev_m <= 0.01
    )
    report(2, ok, "ratios toward A and a",
           f"ratio_plus {np.round(rp, 4).tolist()}, ratio_minus {np.round(rm, 4).tolist()}, "
           f"max oracle dev {max(dev_p, dev_m):.2e}")
    assert ok


def test_c03_strict_bounds(default_sweep, report):
    # the margin at alpha = 16 is ~4e-7 relative; only the extrapolated value
    # (6 levels doubling from the sweep grid) resolves it against its error
    worst, raw_ok, details = np.inf, True, []
    for row in default_sweep:
        for mode, coeff, lam_raw in (("positive", P14.A, row.lambda_plus), ("negative", P14.a, row.lambda_minus)):
            raw_ok &= lam_raw < -coeff * row.alpha**2
            rows = convergence_study(UNIT, P14, row.alpha, [row.nx * 2**k for k in range(6)],
                                     SolverConfig(tol_lambda=1e-10), mode=mode)
            margin = -(rows[-1].extrapolated + coeff * row.alpha**2)
            ratio = margin / rows[-1].extrapolation_error
            worst = min(worst, ratio)
            details.append(f"{row.alpha:g}{mode[0]}:{margin:.2e}/{rows[-1].extrapolation_error:.1e}")
    ok = raw_ok and worst >= 3
    report(3, ok, "strict bounds with margin", f"min margin/estimate {worst:.0f}; " + " ".join(details))
    assert ok


def test_c04_monotone_in_alpha(default_sweep, fine_sweep, report):
    ok = True
    for rows in (default_sweep, fine_sweep):
        lp = [r.lambda_plus for r in rows]
        lm = [r.lambda_minus for r in rows]
        ok &= all(a > b for a, b in zip(lp, lp[1:])) and all(a > b for a, b in zip(lm, lm[1:]))
    report(4, ok, "eigenvalues decreasing in alpha",
           f"lambda_plus {[round(r.lambda_plus, 2) for r in default_sweep]}")
    assert ok


def test_c05_linear_rectangle(report):
    g = build_grid(Domain.rectangle(1, 1), 129, 129)
    lam = principal_eigen("positive", PucciPair(1, 1), 2.0, g).lam
    exact = oracle_rectangle_linear(2.0, 1, 1)
    err = abs(lam / exact - 1)
    ok = err <= 0.02
    report(5, ok, "2D linear cross-check", f"lambda {lam:.5f} vs {exact:.5f}, rel err {err:.2e}")
    assert ok


def test_c06_ratio_identity(report):
    rows = sweep_alpha(UNIT, P14, (2, 4, 8))
    q = [r.lambda_plus / r.lambda_minus for r in rows]
    ok = all(r.alpha * r.h <= 0.1 for r in rows) and all(abs(x / 4 - 1) <= 0.02 for x in q)
    report(6, ok, "lambda+/lambda- = A/a", f"ratios {[f'{x:.6f}' for x in q]}")
    assert ok


def test_c07_concentration(report):
    sups = []
    for a in (4, 8, 16):
        g = grid_for(UNIT, resolution_rule()(a, 1.0))
        sups.append(concentration_profile(principal_eigen("positive", P14, a, g), deltas=(0.25,))[0].sup)
    ok = sups[-1] <= 0.05 and sups[0] > sups[1] > sups[2]
    report(7, ok, "concentration away from the boundary", f"sup over dist>=0.25 at alpha 4,8,16: {np.round(sups, 5).tolist()}")
    assert ok


def test_c08_blowup_profile(report):
    # profile error is first order in alpha h (7% at alpha h = 0.1); alpha h = 0.02 here
    g = grid_for(UNIT, resolution_rule(0.02)(16, 1.0))
    rows = blowup_profile(principal_eigen("positive", P14, 16.0, g), alpha=16.0)
    dev = max(abs(r.value / r.reference - 1) for r in rows)
    ok = rows[-1].t >= 2.0 - 16 * g.h and dev <= 0.05
    report(8, ok, "boundary-layer profile exp(-t)", f"max rel dev {dev:.2e} on t in [0, {rows[-1].t:.3f}], nx={g.nx}")
    assert ok


def test_c09_liouville(report):
    pair = PucciPair(1, 1)
    res = liouville_check(pair, 2.0, 10.0, 2000)
    b1 = liouville_check(pair, 1.0, 10.0, 2000).boundary_value
    b4 = liouville_check(pair, 4.0, 10.0, 2000).boundary_value
    ordered = comparison_sanity(pair, 2.0, 10.0, 2000)
    ok = res.sup_error <= 1e-3 and abs(b1 - 1) <= 1e-3 and abs(b4 - 0.5) <= 1e-3 and ordered
    report(9, ok, "half-line Liouville profile",
           f"sup err {res.sup_error:.2e}, u(0) at gamma=A {b1:.6f}, at 4A {b4:.6f}, comparison {ordered}")
    assert ok


def test_c10_operator_properties(report):
    rng = np.random.default_rng(2024)
    n = 10_000
    m = rng.uniform(-1, 1, (n, 3))
    k = rng.uniform(-1, 1, (n, 3))
    a = rng.uniform(0.1, 2, n)
    A = a * rng.uniform(1, 5, n)
    pair = PucciPair(1, 4)
    plus, minus = pucci_plus(m, pair), pucci_minus(m, pair)
    duality = (np.abs(minus + pucci_plus(-m, pair)) / np.maximum(np.abs(minus), 1e-300)).max()
    t = rng.uniform(0, 10, n)
    l_lo, l_hi = _eigs_sym2_array(m[:, 0], m[:, 1], m[:, 2])
    # relative to the size of the summed terms, so cancellation near M+ = 0 is not amplified
    terms = pair.A * (np.maximum(l_lo, 0) + np.maximum(l_hi, 0)) - pair.a * (np.minimum(l_lo, 0) + np.minimum(l_hi, 0))
    homog = (np.abs(pucci_plus(m * t[:, None], pair) - t * plus) / np.maximum(t * terms, 1e-300)).max()
    sub = (pucci_plus(m + k, pair) - plus - pucci_plus(k, pair)).max()
    # PSD: random rotations of nonnegative spectra, per-sample pairs
    l1, l2, th = rng.uniform(0, 1, n), rng.uniform(0, 1, n), rng.uniform(0, np.pi, n)
    c, s = np.cos(th), np.sin(th)
    psd = np.column_stack([l1 * c * c + l2 * s * s, (l1 - l2) * c * s, l1 * s * s + l2 * c * c])
    lo, _ = _eigs_sym2_array(psd[:, 0], psd[:, 1], psd[:, 2])
    keep = lo >= 0
    tr = psd[:, 0] + psd[:, 2]
    psd_err = 0.0
    for i in np.flatnonzero(keep):
        pr = PucciPair(a[i], A[i])
        psd_err = max(psd_err, abs(pucci_plus(psd[i], pr) - A[i] * tr[i]) / max(A[i] * tr[i], 1e-300),
                      abs(pucci_minus(psd[i], pr) - a[i] * tr[i]) / max(a[i] * tr[i], 1e-300))
    # sampling oracle: 1e6 shared samples, evaluated on the hull of the sample
    est = pucci_sup_sample_oracle_batch(m, pair, 10**6, seed=99)
    gap_bound = 1e-2 * (pair.A * (np.abs(l_lo) + np.abs(l_hi)) + 1)
    above = (est - plus).max()
    gap = (plus - est) / gap_bound
    # scheme monotonicity: random fields, random single-neighbour bumps
    g = build_grid(Domain.rectangle(1, 1), 11, 11)
    st = StencilSet.default(2, wide=True)
    ops = {op: DiscreteOperator(g, st, pair, op) for op in (PLUS, MINUS)}
    bumps, mono_ok = 0, True
    for _ in range(1000):
        u = rng.normal(size=g.size)
        D = ops[PLUS if rng.random() < 0.5 else MINUS]
        j = rng.integers(len(D.nodes))
        nb = rng.integers(g.size - 1)
        nb += nb >= D.nodes[j]  # any node but the centre
        v = u.copy()
        v[nb] += rng.uniform(0, 1)
        mono_ok &= D.evaluate(v)[j] >= D.evaluate(u)[j] - 1e-12
        bumps += 1
    ok = (duality <= 1e-12 and homog <= 1e-12 and sub <= 1e-10 and psd_err <= 1e-12
          and above <= 1e-9 and gap.max() <= 1 and mono_ok and bumps >= 1000 and keep.sum() >= 9000)
    report(10, ok, "operator property suite",
           f"{n} matrices: duality {duality:.1e}, homog {homog:.1e}, subadd {sub:.1e}, psd {psd_err:.1e}, "
           f"oracle excess {above:.1e}, gap/bound max {gap.max():.2f}; {bumps} bump probes ok={mono_ok}")
    assert ok


def test_c11_simplicity(report):
    diffs = []
    for grid in (build_grid(UNIT, 201), build_grid(Domain.rectangle(1, 1), 33, 33)):
        us = [principal_eigen("positive", P14, 1.0, grid, cfg=SolverConfig(init="random", seed=s, tol_lambda=1e-12)).u.values
              for s in (11, 12)]
        diffs.append(float(np.abs(us[0] - us[1]).max()))
    ok = max(diffs) <= 1e-6
    report(11, ok, "simplicity from random starts", f"sup diff 1D {diffs[0]:.1e}, 2D {diffs[1]:.1e}")
    assert ok


def test_c12_small_alpha(report):
    g = grid_for(UNIT, resolution_rule()(0.01, 1.0))
    lam = principal_eigen("positive", P14, 0.01, g).lam
    bound = 2 * P14.A * 0.01 / 0.5
    zero = principal_eigen("positive", P14, 0.0, g)
    ok = abs(lam) <= bound and zero.lam == 0 and np.all(zero.u.values == 1.0)
    report(12, ok, "small-alpha limit", f"|lambda+| {abs(lam):.4e} <= {bound:.2e}; alpha=0 gives lambda={zero.lam}, u==1")
    assert ok


def test_c13_exp_probe(report):
    g = build_grid(Domain.rectangle(1, 1), 257, 257)
    D = DiscreteOperator(g, StencilSet.default(2), P14, PLUS)
    v = np.exp(g.x)
    err = np.abs(D.evaluate(v) / (P14.A * v[D.nodes]) - 1).max()
    ok = err <= 1e-3 and g.h == 1 / 256
    report(13, ok, "discrete operator on exp(x1)", f"max rel err {err:.2e} at h=1/256")
    assert ok
