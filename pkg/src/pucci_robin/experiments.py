"""Scripted experiments: alpha sweeps, grid convergence, concentration,
boundary-layer profiles and the truncated half-line problem.

Every experiment returns a list of dataclass rows; :func:`rows_to_csv`
serialises them with a fixed column order and 17 significant digits.
"""
from dataclasses import asdict, dataclass, fields
import csv
import io
import math

import numpy as np
from scipy.interpolate import RegularGridInterpolator
from scipy.linalg import solve_banded

from .discretization import StencilSet
from .mesh import Domain, build_grid, restrict_sup
from .operator_core import phi_minus, phi_plus
from .oracles import halfspace_profile, oracle_interval, oracle_rectangle_linear
from .solver import ConvergenceError, SolverConfig, principal_eigen

__all__ = [
    "SweepRow",
    "ConvergenceRow",
    "ConcentrationRow",
    "BlowupRow",
    "LiouvilleResult",
    "resolution_rule",
    "grid_for",
    "sweep_alpha",
    "richardson_table",
    "convergence_study",
    "concentration_profile",
    "blowup_profile",
    "solve_halfline",
    "liouville_check",
    "comparison_sanity",
    "rows_to_csv",
]


@dataclass
class SweepRow:
    alpha: float
    h: float
    nx: int
    ny: int
    lambda_plus: float
    ratio_plus: float
    lambda_minus: float
    ratio_minus: float
    iters_plus: int
    iters_minus: int
    residual_plus: float
    residual_minus: float
    oracle_lambda_plus: float = None
    oracle_lambda_minus: float = None
    status: str = "ok"


@dataclass
class ConvergenceRow:
    n: int
    h: float
    lam: float
    oracle: float
    error_vs_oracle: float
    richardson_estimate: float
    extrapolated: float
    extrapolation_error: float
    observed_order: float


@dataclass
class ConcentrationRow:
    delta: float
    sup: float


@dataclass
class BlowupRow:
    t: float
    value: float
    reference: float


@dataclass
class LiouvilleResult:
    sup_error: float
    boundary_value: float
    exact_boundary_value: float
    x: np.ndarray
    u: np.ndarray


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.17g}"
    return str(v)


def rows_to_csv(rows, row_type=None, comments=()):
    """CSV text for dataclass rows: comment lines, header, one line per row."""
    row_type = row_type or type(rows[0])
    names = [f.name for f in fields(row_type) if f.type not in (np.ndarray, "np.ndarray")]
    buf = io.StringIO()
    for c in comments:
        buf.write(f"# {c}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(names)
    for r in rows:
        d = asdict(r)
        w.writerow([_fmt(d[n]) for n in names])
    return buf.getvalue()


def resolution_rule(alpha_h=0.1, base=64):
    """Nodes per axis ``base + ceil(alpha L / alpha_h)``, so that ``alpha h <= alpha_h``."""

    def rule(alpha, length):
        return base + int(math.ceil(alpha * length / alpha_h - 1e-12)) + 1

    return rule


def grid_for(domain, n):
    """Grid with ``n`` nodes along the shortest axis (square cells)."""
    if domain.dim == 1:
        return build_grid(domain, n)
    h = domain.min_length / (n - 1)
    nx, ny = (int(round(L / h)) + 1 for L in domain.lengths)
    return build_grid(domain, nx, ny)


def _oracles(domain, pair, alpha):
    if alpha <= 0:
        return 0.0, 0.0
    if domain.kind == "interval":
        (L,) = domain.lengths
        return oracle_interval(pair, alpha, L, "plus").lam, oracle_interval(pair, alpha, L, "minus").lam
    if domain.kind == "rectangle" and pair.a == pair.A:
        lam = oracle_rectangle_linear(alpha, *domain.lengths, sigma=pair.A)
        return lam, lam
    return None, None


def _ratio(lam, alpha):
    return lam / (-alpha**2) if alpha > 0 else float("nan")


def sweep_alpha(domain, pair, alphas, rule=None, cfg=None, stencils=None):
    """Both demi-eigenvalues for each ``alpha``, one row per value, sorted by ``alpha``.

    A failed solve marks its row's ``status`` instead of aborting the sweep.
    """
    rule = rule or resolution_rule()
    cfg = cfg or SolverConfig()
    rows = []
    for alpha in sorted(float(a) for a in alphas):
        n = rule(alpha, domain.min_length)
        grid = grid_for(domain, n)
        st = stencils or StencilSet.default(grid.dim)
        o_plus, o_minus = _oracles(domain, pair, alpha)
        try:
            rp = principal_eigen("positive", pair, alpha, grid, st, cfg)
            rm = principal_eigen("negative", pair, alpha, grid, st, cfg)
        except (ValueError, RuntimeError) as exc:
            nan = float("nan")
            rows.append(SweepRow(alpha, grid.h, grid.nx, grid.ny, nan, nan, nan, nan, 0, 0, nan, nan,
                                 o_plus, o_minus, f"failed: {exc}"))
            continue
        rows.append(SweepRow(
            alpha, grid.h, grid.nx, grid.ny,
            rp.lam, _ratio(rp.lam, alpha), rm.lam, _ratio(rm.lam, alpha),
            rp.power_iters, rm.power_iters,
            max(rp.interior_residual, rp.boundary_residual),
            max(rm.interior_residual, rm.boundary_residual),
            o_plus, o_minus,
        ))
    return rows


def richardson_table(hs, values):
    """Neville table extrapolating ``values(h)`` to ``h = 0`` by polynomials in ``h``.

    ``T[k][j]`` uses levels ``k-j..k``; the diagonal ``T[k][k]`` is the best
    estimate from the first ``k+1`` levels.
    """
    hs = np.asarray(hs, dtype=float)
    n = len(hs)
    T = [[float(values[k])] for k in range(n)]
    for k in range(n):
        for j in range(1, k + 1):
            hi, lo = hs[k - j], hs[k]
            T[k].append(T[k][j - 1] + (T[k][j - 1] - T[k - 1][j - 1]) * lo / (hi - lo))
    return T


def convergence_study(domain, pair, alpha, resolutions, cfg=None, mode="positive", stencils=None):
    """Eigenvalue against grid size, with oracle errors and Richardson estimates.

    ``richardson_estimate`` is ``|lam_h - extrapolated|`` using the most
    extrapolated value from all levels; ``extrapolation_error`` is the gap
    between the two highest-order extrapolants available up to that level.
    """
    cfg = cfg or SolverConfig()
    hs, lams = [], []
    for n in sorted(resolutions):
        grid = grid_for(domain, n)
        st = stencils or StencilSet.default(grid.dim)
        r = principal_eigen(mode, pair, alpha, grid, st, cfg)
        hs.append(grid.h)
        lams.append(r.lam)
    o_plus, o_minus = _oracles(domain, pair, alpha)
    oracle = o_plus if mode == "positive" else o_minus
    T = richardson_table(hs, lams)
    best = T[-1][-1]
    rows = []
    for k, (n, h, lam) in enumerate(zip(sorted(resolutions), hs, lams)):
        err = abs(lam - oracle) if oracle is not None else None
        ext = T[k][k]
        ext_err = abs(T[k][k] - T[k][k - 1]) if k >= 1 else None
        order = None
        if k >= 1:
            if oracle is not None:
                prev = abs(lams[k - 1] - oracle)
                cur = err
            elif k >= 2:
                prev, cur = abs(lams[k - 1] - lams[k - 2]), abs(lam - lams[k - 1])
            else:
                prev = cur = None
            if prev and cur:
                order = math.log(prev / cur) / math.log(hs[k - 1] / h)
        rows.append(ConvergenceRow(n, h, lam, oracle, err, abs(lam - best), ext, ext_err, order))
    return rows


def concentration_profile(eig, grid=None, deltas=(0.0, 0.1, 0.2, 0.25, 0.3, 0.4)):
    """Sup of the normalised eigenfunction over ``{dist >= delta}`` per ``delta``."""
    return [ConcentrationRow(float(d), restrict_sup(eig.u, d)) for d in deltas]


def blowup_profile(eig, grid=None, alpha=None, t_max=2.0, ts=None):
    """Eigenfunction along the inward normal at its boundary maximum, in the
    boundary-layer variable ``t = alpha * depth``, against ``exp(-t)``.

    Without ``ts`` the grid's own depths up to ``t_max`` are used; values
    between nodes are interpolated linearly.
    """
    grid = grid or eig.u.grid
    if alpha is None or alpha <= 0:
        raise ValueError("blow-up profile needs alpha > 0")
    u = np.abs(eig.u.values)
    k = int(np.argmax(u))
    if grid.node_class[k] == 0:
        raise ValueError("eigenfunction maximum is not on the boundary")
    n = grid.normal[k]
    half_width = 0.5 * grid.domain.min_length
    if t_max / alpha >= half_width:
        raise ValueError(f"depth {t_max}/alpha reaches the centre of the domain")
    inward = -n / np.linalg.norm(n)
    step = grid.h / np.abs(inward).max()
    if ts is None:
        depths = np.arange(0.0, t_max / alpha + 0.5 * step, step)
        depths = depths[depths <= t_max / alpha + 1e-12]
        ts = alpha * depths
    ts = np.asarray(ts, dtype=float)
    pts = grid.coords[k] + np.outer(ts / alpha, inward)
    if grid.dim == 1:
        vals = np.interp(pts[:, 0], grid.x, u)
    else:
        xs = grid.x[: grid.nx]
        ys = grid.y[:: grid.nx]
        interp = RegularGridInterpolator((ys, xs), u.reshape(grid.shape), method="linear")
        vals = interp(np.column_stack([pts[:, 1], pts[:, 0]]))
    vals = vals / u[k]
    return [BlowupRow(float(t), float(v), float(np.exp(-t))) for t, v in zip(ts, vals)]


def solve_halfline(pair, gamma, T, n, datum=1.0, op="plus", tol=1e-12, max_iters=100):
    """Truncated half-line problem ``M(u'') - gamma u = 0`` on ``[0, T]``.

    The datum ``-u'(0) = datum`` enters through a reflected (ghost-node) row,
    which keeps the scheme monotone and second order; the far end is closed
    with the exact half-line profile.  Solved by policy iteration on the
    coefficient choice.

    Returns ``(x, u)``.
    """
    grid = build_grid(Domain.halfline(T), n)
    h, x = grid.h, grid.x
    scal = phi_plus if op == "plus" else phi_minus
    if datum == 0:
        closure = 0.0
    else:
        # u > 0 is convex, u < 0 concave: that fixes the active coefficient
        up = datum > 0
        coeff = (pair.A if up else pair.a) if op == "plus" else (pair.a if up else pair.A)
        closure = abs(datum) * halfspace_profile(gamma, coeff, "plus" if up else "minus")(T)

    def second_diff(u):
        d = np.empty(n - 1)
        d[0] = (2 * u[1] - 2 * u[0] + 2 * h * datum) / h**2
        d[1:] = (u[2:] - 2 * u[1:-1] + u[:-2]) / h**2
        return d

    def coeffs(d):
        if op == "plus":
            return np.where(d > 0, pair.A, pair.a)
        return np.where(d > 0, pair.a, pair.A)

    c = np.full(n - 1, pair.A if op == "plus" else pair.a)
    u = np.zeros(n)
    for _ in range(max_iters):
        w = c / h**2
        ab = np.zeros((3, n))
        rhs = np.zeros(n)
        # rows i = 0..n-2: gamma u_i - c_i d_i = 0
        ab[1, : n - 1] = gamma + 2 * w
        ab[0, 1:n] = -w
        ab[0, 1] = -2 * w[0]
        ab[2, : n - 2] = -w[1:]
        rhs[0] = 2 * w[0] * h * datum
        ab[1, n - 1] = 1.0
        rhs[n - 1] = closure
        u = solve_banded((1, 1), ab, rhs)
        d = second_diff(u)
        new = coeffs(d)
        # ties at d == 0 do not change the value of the row
        changed = (new != c) & (np.abs(d) > 0)
        if not np.any(changed):
            res = gamma * u[:-1] - scal(d, pair)
            if np.abs(res).max() <= tol * (gamma + 4 * pair.A / h**2) * np.abs(u).max():
                return x, u
        c = np.where(changed, new, c)
    raise ConvergenceError(f"half-line policy iteration did not converge in {max_iters} iterations")


def liouville_check(pair, gamma, T, n):
    """Compare the truncated half-line solution with ``sqrt(A/g) exp(-sqrt(g/A) x)``.

    Returns the sup error over ``[0, T/2]`` with the computed and exact
    boundary values.
    """
    if not gamma > 0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    if T < 10 * math.sqrt(pair.A / gamma) * (1 - 1e-12):
        raise ValueError(f"truncation T={T} is below 10*sqrt(A/gamma)={10 * math.sqrt(pair.A / gamma):.4g}")
    x, u = solve_halfline(pair, gamma, T, n)
    prof = halfspace_profile(gamma, pair.A)
    mask = x <= T / 2 + 1e-12
    err = float(np.abs(u[mask] - prof(x[mask])).max())
    return LiouvilleResult(err, float(u[0]), float(prof.boundary_value), x, u)


def comparison_sanity(pair, gamma, T, n, data=(1.0, 1.1)):
    """True when the solution for the smaller datum lies below the other at every node."""
    lo, hi = sorted(data)
    _, u_lo = solve_halfline(pair, gamma, T, n, datum=lo)
    _, u_hi = solve_halfline(pair, gamma, T, n, datum=hi)
    return bool(np.all(u_lo <= u_hi))
