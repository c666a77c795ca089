"""Howard policy iteration and the nonlinear inverse-power eigensolver.

The shifted problem

    mu u - M+-_h u = rhs   (interior),    Robin rows = 0   (boundary)

is solved by freezing the extremal frame/coefficients per node, solving the
resulting sparse linear system and re-selecting, until the policy is
stationary.  For ``mu`` above the discrete principal value every frozen
matrix is a nonsingular M-matrix, so positive data give positive solutions.

The principal pair is the fixed ray of ``u -> (mu - M_h)^{-1} u``; the
Collatz-Wielandt ratios ``M_h(u)/u`` at the interior nodes bracket ``-lambda``
and serve as the stopping test.
"""
from dataclasses import dataclass, field
import logging

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .discretization import (
    MINUS,
    PLUS,
    DiscreteOperator,
    StencilSet,
    assemble_residual,
    check_alpha_h,
    robin_matrix,
)
from .mesh import ScalarField

__all__ = [
    "ShiftTooSmallError",
    "ConvergenceError",
    "ShiftedProblem",
    "SolverConfig",
    "EigenResult",
    "ShiftedSystem",
    "howard_solve",
    "principal_eigen",
    "collatz_bracket",
    "adapt_shift",
]

log = logging.getLogger(__name__)


class ShiftTooSmallError(RuntimeError):
    """The shift does not make the policy-frozen systems M-matrices."""


class ConvergenceError(RuntimeError):
    """An iteration hit its cap without meeting its tolerance."""


@dataclass(frozen=True, eq=False)
class ShiftedProblem:
    pair: object
    op: str
    alpha: float
    mu: float
    rhs: ScalarField

    def __post_init__(self):
        if not self.mu > 0:
            raise ValueError(f"shift must be positive, got {self.mu}")
        if self.op not in (PLUS, MINUS):
            raise ValueError(f"op must be 'plus' or 'minus', got {self.op!r}")


@dataclass
class SolverConfig:
    tol_lambda: float = 1e-8
    tol_residual: float = 1e-10
    max_power_iters: int = 5000
    max_howard_iters: int = 200
    max_shift_doublings: int = 20
    alpha_h_limit: float = 0.1
    shift: float = None
    init: str = "ones"
    seed: int = 0


@dataclass(eq=False)
class EigenResult:
    """Principal eigenpair with its certificate.

    ``cw_lo <= -lam <= cw_hi`` is the Collatz-Wielandt bracket of the returned
    eigenfunction ``u`` (sup norm 1; positive in positive mode, negative in
    negative mode).
    """

    lam: float
    u: ScalarField
    cw_lo: float
    cw_hi: float
    power_iters: int
    howard_iters_total: int
    interior_residual: float
    boundary_residual: float
    mode: str = "positive"
    shift: float = float("nan")
    history: list = field(default_factory=list, repr=False)

    @property
    def grid(self):
        return self.u.grid


def adapt_shift(pair, alpha, grid):
    """Initial shift ``4 max(A, 1) (alpha^2 + alpha + 1/L_min^2)``."""
    L = grid.domain.min_length
    return 4.0 * max(pair.A, 1.0) * (alpha**2 + alpha + 1.0 / L**2)


class ShiftedSystem:
    """``mu - M_h`` with Robin rows, caching one LU factorisation per policy."""

    def __init__(self, grid, stencils, pair, op, alpha, mu):
        check_alpha_h(grid, alpha)
        self.grid, self.pair, self.op, self.alpha, self.mu = grid, pair, op, alpha, float(mu)
        self.D = DiscreteOperator(grid, stencils, pair, op)
        self.B = robin_matrix(grid, alpha)
        self.int_nodes = self.D.nodes
        self.bnd_nodes = grid.boundary
        n = grid.size
        # row permutation: interior rows first, then boundary rows, placed back by node index
        perm = np.concatenate([self.int_nodes, self.bnd_nodes])
        self._P = sp.csr_matrix((np.ones(n), (perm, np.arange(n))), shape=(n, n))
        self._shift_rows = sp.csr_matrix(
            (np.full(len(self.int_nodes), self.mu), (np.arange(len(self.int_nodes)), self.int_nodes)),
            shape=(len(self.int_nodes), n),
        )
        self._lu_key, self._lu = None, None
        self.factorizations = 0
        # sup-norm row bound of mu - M_h; also sets the rounding floor of M_h u / u
        self.operator_norm = self.mu + 4.0 * grid.dim * pair.A / grid.h**2

    def residual(self, u, rhs):
        """Nonlinear residual, interior and boundary rows in node order."""
        r = np.empty(self.grid.size)
        r[self.int_nodes] = self.mu * u[self.int_nodes] - self.D.evaluate(u) - rhs[self.int_nodes]
        r[self.bnd_nodes] = self.B @ u - rhs[self.bnd_nodes]
        return r

    def solve_policy(self, policy, rhs):
        key = policy.key()
        if key != self._lu_key:
            L = self.D.policy_matrix(policy)
            M = (self._P @ sp.vstack([self._shift_rows - L, self.B])).tocsc()
            try:
                self._lu = spla.splu(M)
            except RuntimeError as exc:
                raise ShiftTooSmallError(f"policy-frozen system is singular at mu={self.mu:g}") from exc
            self._lu_key = key
            self.factorizations += 1
        u = self._lu.solve(rhs)
        if not np.all(np.isfinite(u)):
            raise ShiftTooSmallError(f"policy-frozen solve broke down at mu={self.mu:g}")
        return u

    def initial_policy(self, u):
        return self.D.select_policy(u)

    def howard(self, rhs, policy=None, tol=1e-10, max_iters=200):
        """Solve ``mu u - M_h u = rhs`` (interior), ``B u = rhs`` (boundary).

        Returns ``(u, policy, iterations)``.
        """
        rhs = np.asarray(rhs, dtype=float)
        rhs_int = rhs[self.int_nodes]
        positive = np.all(rhs_int >= 0) and np.any(rhs_int > 0) and not np.any(rhs[self.bnd_nodes])
        rhs_scale = float(np.abs(rhs).max())
        if policy is None:
            policy = self.initial_policy(rhs)
        for it in range(1, max_iters + 1):
            u = self.solve_policy(policy, rhs)
            if positive and np.any(u <= 0):
                raise ShiftTooSmallError(
                    f"positive data gave a non-positive solution at mu={self.mu:g} (min {u.min():.3e})"
                )
            new = self.D.select_policy(u, current=policy)
            res = np.abs(self.residual(u, rhs)).max()
            # backward-error scale: |rhs| + |operator| |u|
            if res <= tol * (rhs_scale + self.operator_norm * np.abs(u).max()):
                return u, new, it
            policy = new
        raise ConvergenceError(f"Howard iteration did not converge in {max_iters} iterations")


def howard_solve(p, grid, stencils, tol=1e-10, max_iters=200):
    """Solve the shifted Bellman problem of ``p`` by policy iteration.

    Parameters
    ----------
    p : ShiftedProblem
    grid : Grid
    stencils : StencilSet
    tol : float
        Bound on the sup-norm nonlinear residual relative to
        ``|rhs| + |mu - M_h| |u|`` (a backward-error scale).
    max_iters : int

    Returns
    -------
    ScalarField

    Raises
    ------
    ShiftTooSmallError
        If a frozen system is singular or positive data give a non-positive
        solution.
    ConvergenceError
        If the policy is not stationary after ``max_iters`` solves.
    """
    system = ShiftedSystem(grid, stencils, p.pair, p.op, p.alpha, p.mu)
    u, _, _ = system.howard(p.rhs.values, tol=tol, max_iters=max_iters)
    return ScalarField(grid, u)


def collatz_bracket(u, pair, op, alpha, stencils):
    """Collatz-Wielandt bracket ``(min, max)`` of ``M_h(u)/u`` over interior nodes.

    For ``u > 0`` satisfying the Robin rows, ``-lambda`` of the discrete
    principal pair lies in the returned interval.
    """
    v = u.values
    if not (np.all(v > 0) or np.all(v < 0)):
        raise ValueError("Collatz-Wielandt bracket needs a sign-definite field")
    if np.all(v < 0):
        raise ValueError("Collatz-Wielandt bracket needs a positive field")
    D = DiscreteOperator(u.grid, stencils, pair, op)
    ratio = D.evaluate(v) / v[D.nodes]
    return float(ratio.min()), float(ratio.max())


def _initial_guess(grid, cfg, u0):
    if u0 is not None:
        u = np.asarray(u0.values if isinstance(u0, ScalarField) else u0, dtype=float).copy()
        if np.any(u <= 0):
            raise ValueError("initial guess must be strictly positive")
        return u
    if cfg.init == "ones":
        return np.ones(grid.size)
    if cfg.init == "random":
        rng = np.random.default_rng(cfg.seed)
        return rng.uniform(0.5, 1.5, grid.size)
    raise ValueError(f"unknown init {cfg.init!r}")


def _width_ok(lo, hi, system, tol):
    # relative test, floored near lambda = 0 and at the rounding level of M_h u / u
    floor = 16 * np.finfo(float).eps * system.operator_norm
    return hi - lo <= max(tol * max(abs(lo), abs(hi), 1e-6 * system.mu), floor)


def _power(system, u, cfg, history):
    grid = system.grid
    D = system.D
    nodes = D.nodes
    u = u / u.max()
    howard_total = 0
    policy = None
    if np.abs(system.B @ u).max() <= cfg.tol_residual * max(1.0, 1.0 / grid.h):
        ratio = D.evaluate(u) / u[nodes]
        lo, hi = float(ratio.min()), float(ratio.max())
        history.append((lo, hi))
        if _width_ok(lo, hi, system, cfg.tol_lambda):
            return u, -0.5 * (lo + hi) + 0.0, lo, hi, 0, 0  # + 0.0 turns -0.0 into 0.0
    rhs = np.zeros(grid.size)
    for k in range(1, cfg.max_power_iters + 1):
        rhs[nodes] = u[nodes]
        v, policy, its = system.howard(rhs, policy, tol=cfg.tol_residual, max_iters=cfg.max_howard_iters)
        howard_total += its
        ratio = D.evaluate(v) / v[nodes]
        lo, hi = float(ratio.min()), float(ratio.max())
        history.append((lo, hi))
        # sup-norm Collatz ratio over the interior nodes, where rhs lives
        lam = np.abs(u[nodes]).max() / np.abs(v[nodes]).max() - system.mu
        u = v / v.max()
        if _width_ok(lo, hi, system, cfg.tol_lambda):
            lam = min(max(lam, -hi), -lo)
            return u, lam, lo, hi, k, howard_total
    raise ConvergenceError(
        f"inverse power iteration did not converge in {cfg.max_power_iters} steps "
        f"(bracket width {hi - lo:.3e})"
    )


def principal_eigen(mode, pair, alpha, grid, stencils=None, cfg=None, u0=None):
    """Principal demi-eigenpair of ``M+(D^2 u) + lambda u = 0``, ``du/dn = alpha u``.

    Parameters
    ----------
    mode : {"positive", "negative"}
        ``"positive"`` gives ``lambda+`` with ``u > 0``; ``"negative"`` gives
        ``lambda-`` with ``u < 0``, computed as the positive pair of ``M-``.
    pair : PucciPair
    alpha : float
        Robin coefficient, ``alpha >= 0``.
    grid : Grid
    stencils : StencilSet, optional
        Defaults to :meth:`StencilSet.default` for the grid dimension.
    cfg : SolverConfig, optional
    u0 : ScalarField or array, optional
        Strictly positive starting field (before the sign flip of negative
        mode).  Overrides ``cfg.init``.

    Returns
    -------
    EigenResult
    """
    cfg = cfg or SolverConfig()
    stencils = stencils or StencilSet.default(grid.dim)
    if mode not in ("positive", "negative"):
        raise ValueError(f"mode must be 'positive' or 'negative', got {mode!r}")
    if alpha * grid.h > cfg.alpha_h_limit:
        raise ValueError(
            f"alpha*h = {alpha * grid.h:.4g} exceeds the limit {cfg.alpha_h_limit}; refine the grid"
        )
    op = PLUS if mode == "positive" else MINUS
    mu = cfg.shift if cfg.shift is not None else adapt_shift(pair, alpha, grid)
    start = _initial_guess(grid, cfg, u0)
    for _ in range(cfg.max_shift_doublings + 1):
        system = ShiftedSystem(grid, stencils, pair, op, alpha, mu)
        history = []
        try:
            w, lam, lo, hi, iters, hw = _power(system, start, cfg, history)
            break
        except ShiftTooSmallError as exc:
            log.info("shift %g too small (%s); doubling", mu, exc)
            mu *= 2.0
    else:
        raise ShiftTooSmallError(f"no admissible shift after {cfg.max_shift_doublings} doublings")

    u = w if mode == "positive" else -w
    res = assemble_residual(ScalarField(grid, u), pair, PLUS, alpha, lam, stencils).values
    return EigenResult(
        lam=float(lam),
        u=ScalarField(grid, u),
        cw_lo=lo,
        cw_hi=hi,
        power_iters=iters,
        howard_iters_total=hw,
        interior_residual=float(np.abs(res[grid.interior]).max()) if grid.interior.size else 0.0,
        boundary_residual=float(np.abs(res[grid.boundary]).max()),
        mode=mode,
        shift=mu,
        history=history,
    )
