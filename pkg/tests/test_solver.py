import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pucci_robin.discretization import MINUS, PLUS, StencilSet
from pucci_robin.mesh import Domain, ScalarField, build_grid
from pucci_robin.operator_core import PucciPair
from pucci_robin.oracles import oracle_interval, oracle_rectangle_linear, transcendental_root
from pucci_robin.solver import (
    ConvergenceError,
    ShiftedProblem,
    ShiftedSystem,
    ShiftTooSmallError,
    SolverConfig,
    adapt_shift,
    collatz_bracket,
    howard_solve,
    principal_eigen,
)

P14 = PucciPair(1, 4)
ST1 = StencilSet.default(1)


@pytest.fixture(scope="module")
def grid1024():
    return build_grid(Domain.interval(1), 1024)


@pytest.fixture(scope="module")
def eig4(grid1024):
    return {m: principal_eigen(m, P14, 4.0, grid1024) for m in ("positive", "negative")}


# -- shifted solves ----------------------------------------------------------

def test_howard_zero_rhs():
    g = build_grid(Domain.interval(1), 101)
    p = ShiftedProblem(P14, PLUS, 2.0, 500.0, ScalarField(g, np.zeros(g.size)))
    assert np.all(howard_solve(p, g, ST1).values == 0)


def test_howard_constant_neumann():
    g = build_grid(Domain.interval(1), 101)
    rhs = np.ones(g.size)
    rhs[g.boundary] = 0  # boundary rows carry the Robin residual, here zero
    p = ShiftedProblem(P14, PLUS, 0.0, 1.0, ScalarField(g, rhs))
    np.testing.assert_allclose(howard_solve(p, g, ST1).values, 1.0, rtol=1e-12)


def test_howard_resolvent_on_oracle_ray(grid1024):
    alpha, mu = 4.0, 8 * P14.A * 16
    orc = oracle_interval(P14, alpha, 1.0)
    rhs = orc.profile(grid1024.x)
    rhs[grid1024.boundary] = 0
    u = howard_solve(ShiftedProblem(P14, PLUS, alpha, mu, ScalarField(grid1024, rhs)), grid1024, ST1).values
    ratio = u[grid1024.interior] / rhs[grid1024.interior]
    target = 1 / (mu + orc.lam)
    assert np.abs(ratio / target - 1).max() <= 1e-2


def test_shifted_problem_validation():
    g = build_grid(Domain.interval(1), 11)
    with pytest.raises(ValueError):
        ShiftedProblem(P14, PLUS, 1.0, 0.0, ScalarField(g, np.zeros(11)))
    with pytest.raises(ValueError):
        ShiftedProblem(P14, "max", 1.0, 1.0, ScalarField(g, np.zeros(11)))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from([PLUS, MINUS]), st.floats(0, 3))
def test_resolvent_positivity(seed, op, alpha):
    g = build_grid(Domain.rectangle(1, 1), 15, 15)
    st2 = StencilSet.default(2)
    mu = adapt_shift(P14, alpha, g)
    rhs = np.random.default_rng(seed).uniform(0, 1, g.size)
    rhs[g.boundary] = 0
    rhs[g.interior[0]] += 0.1
    system = ShiftedSystem(g, st2, P14, op, alpha, mu)
    u, _, _ = system.howard(rhs)
    assert np.all(u > 0)
    assert np.abs(system.residual(u, rhs)).max() <= 1e-10 * (1 + system.operator_norm * u.max())


def test_howard_iteration_cap():
    g = build_grid(Domain.rectangle(1, 1), 15, 15)
    rhs = np.random.default_rng(0).normal(size=g.size)
    rhs[g.boundary] = 0
    system = ShiftedSystem(g, StencilSet.default(2), P14, PLUS, 1.0, 100.0)
    with pytest.raises(ConvergenceError):
        system.howard(rhs, tol=1e-300, max_iters=1)


# -- eigenpairs --------------------------------------------------------------

def test_eigen_accuracy_alpha4(eig4):
    mu = transcendental_root(4.0, 0.5)
    assert abs(eig4["positive"].lam + 4 * mu**2) <= 1e-2 * 4 * mu**2
    assert abs(eig4["negative"].lam + mu**2) <= 1e-2 * mu**2
    assert eig4["negative"].lam == pytest.approx(eig4["positive"].lam / 4, rel=1e-2)


@pytest.mark.parametrize("mode", ["positive", "negative"])
def test_eigen_result_invariants(eig4, mode):
    r = eig4[mode]
    assert r.cw_lo <= -r.lam <= r.cw_hi
    assert np.abs(r.u.values).max() == pytest.approx(1.0, abs=1e-12)
    assert np.all(r.u.values > 0) if mode == "positive" else np.all(r.u.values < 0)
    assert r.interior_residual <= 1e-6 * abs(r.lam) and r.boundary_residual <= 1e-6 * abs(r.lam)
    assert (r.cw_hi - r.cw_lo) <= 1e-8 * abs(r.lam)
    assert r.mode == mode and r.grid.size == 1024


def test_positive_eigenfunction_is_convex(eig4):
    u = eig4["positive"].u.values
    assert np.all(np.diff(u, 2) > 0)


@pytest.mark.parametrize("mode", ["positive", "negative"])
def test_bracket_nested(eig4, mode):
    hist = eig4[mode].history
    lam = abs(eig4[mode].lam)
    tol = 1e-9 * lam
    for (lo0, hi0), (lo1, hi1) in zip(hist, hist[1:]):
        assert lo1 >= lo0 - tol and hi1 <= hi0 + tol


def test_alpha_zero_is_exact():
    g = build_grid(Domain.rectangle(1, 1), 9, 9)
    for mode in ("positive", "negative"):
        r = principal_eigen(mode, P14, 0.0, g)
        assert r.lam == 0
        assert np.all(r.u.values == (1.0 if mode == "positive" else -1.0))


def test_rectangle_linear_case():
    g = build_grid(Domain.rectangle(1, 1), 65, 65)
    r = principal_eigen("positive", PucciPair(1, 1), 2.0, g)
    exact = oracle_rectangle_linear(2.0, 1, 1)
    assert abs(r.lam / exact - 1) <= 0.05


@pytest.mark.parametrize("dim", [1, 2])
def test_max_on_boundary(dim):
    dom = Domain.interval(1) if dim == 1 else Domain.rectangle(1, 1)
    for alpha in (0.5, 2.0, 5.0):
        g = build_grid(dom, 81) if dim == 1 else build_grid(dom, 81, 81)
        r = principal_eigen("positive", P14, alpha, g)
        assert g.node_class[np.argmax(r.u.values)] != 0


def test_monotone_in_alpha():
    g = build_grid(Domain.interval(1), 401)
    for mode in ("positive", "negative"):
        lams = [principal_eigen(mode, P14, a, g).lam for a in (0.5, 1, 2, 4, 8)]
        assert all(l1 > l2 for l1, l2 in zip(lams, lams[1:]))


def test_simplicity_small():
    g = build_grid(Domain.interval(1), 201)
    u = [principal_eigen("positive", P14, 1.0, g, cfg=SolverConfig(init="random", seed=s, tol_lambda=1e-12)).u.values
         for s in (1, 2)]
    assert np.abs(u[0] - u[1]).max() <= 1e-6


def test_explicit_start():
    g = build_grid(Domain.interval(1), 201)
    r = principal_eigen("positive", P14, 1.0, g, u0=np.linspace(1, 2, g.size))
    ref = principal_eigen("positive", P14, 1.0, g)
    assert r.lam == pytest.approx(ref.lam, rel=1e-7)
    with pytest.raises(ValueError):
        principal_eigen("positive", P14, 1.0, g, u0=np.zeros(g.size))


def test_eigen_errors():
    g = build_grid(Domain.interval(1), 11)
    with pytest.raises(ValueError):
        principal_eigen("sideways", P14, 1.0, g)
    with pytest.raises(ValueError):
        principal_eigen("positive", P14, 2.0, g)  # alpha h = 0.2
    g = build_grid(Domain.interval(1), 401)
    with pytest.raises(ConvergenceError):
        principal_eigen("positive", P14, 4.0, g, cfg=SolverConfig(max_power_iters=2))
    with pytest.raises(ValueError):
        principal_eigen("positive", P14, 1.0, g, cfg=SolverConfig(init="zeros"))


# -- shifts ------------------------------------------------------------------

def test_adapt_shift_examples():
    g = build_grid(Domain.interval(1), 11)
    assert adapt_shift(PucciPair(1, 1), 0.0, g) == 4
    assert adapt_shift(P14, 4.0, g) == 336
    assert adapt_shift(P14, 4.0, g) > -oracle_interval(P14, 4.0, 1.0).lam


def test_small_shift_recovers_by_doubling():
    g = build_grid(Domain.interval(1), 401)
    lam = oracle_interval(P14, 4.0, 1.0).lam
    system = ShiftedSystem(g, ST1, P14, PLUS, 4.0, abs(lam) / 2)
    rhs = np.ones(g.size)
    rhs[g.boundary] = 0
    with pytest.raises(ShiftTooSmallError):
        system.howard(rhs)
    r = principal_eigen("positive", P14, 4.0, g, cfg=SolverConfig(shift=abs(lam) / 2))
    assert r.shift >= abs(lam)
    assert r.lam == pytest.approx(lam, rel=2e-2)


def test_shift_budget_exhausted():
    g = build_grid(Domain.interval(1), 401)
    cfg = SolverConfig(shift=1.0, max_shift_doublings=0)
    with pytest.raises(ShiftTooSmallError):
        principal_eigen("positive", P14, 4.0, g, cfg=cfg)


# -- collatz bracket ---------------------------------------------------------

def test_collatz_constant():
    g = build_grid(Domain.rectangle(1, 1), 9, 9)
    assert collatz_bracket(ScalarField(g, np.ones(g.size)), P14, PLUS, 0.0, StencilSet.default(2)) == (0.0, 0.0)


def test_collatz_on_sampled_oracle(grid1024):
    orc = oracle_interval(P14, 4.0, 1.0)
    lo, hi = collatz_bracket(ScalarField(grid1024, orc.profile(grid1024.x)), P14, PLUS, 4.0, ST1)
    target = -orc.lam
    h, mu = grid1024.h, orc.mu_root
    # the centred difference of cosh is exact up to the factor 2(cosh(mu h)-1)/(mu h)^2
    discrete = target * 2 * (np.cosh(mu * h) - 1) / (mu * h) ** 2
    assert lo == pytest.approx(discrete, rel=1e-9) and hi == pytest.approx(discrete, rel=1e-9)
    assert hi - lo <= 0.05 * target
    assert abs(lo - target) <= 1e-5 * target


def test_collatz_on_eigenfunction(eig4):
    r = eig4["positive"]
    lo, hi = collatz_bracket(r.u, P14, PLUS, 4.0, ST1)
    assert hi - lo <= 1e-8 * abs(r.lam)


def test_collatz_rejects_sign_change():
    g = build_grid(Domain.interval(1), 11)
    with pytest.raises(ValueError):
        collatz_bracket(ScalarField(g, np.linspace(-1, 1, 11)), P14, PLUS, 0.0, ST1)
    with pytest.raises(ValueError):
        collatz_bracket(ScalarField(g, -np.ones(11)), P14, PLUS, 0.0, ST1)
