"""Monotone wide-stencil discretisation of the Pucci operators and the Robin row.

The discrete maximal operator at an interior node is

    M+_h u(x) = max over frames (e1, e2) of  phi(d_e1) + phi(d_e2),
    d_e = (u(x + h e) - 2 u(x) + u(x - h e)) / (h^2 |e|^2),

with ``phi(t) = A t+ + a t-``; the minimal one takes the minimum with
``psi(t) = a t+ + A t-``.  Every frame value is nondecreasing in each
neighbour, so the scheme is monotone.  A frame whose neighbours leave the
grid is skipped; the axis frame is always available at interior nodes.

The Robin condition ``du/dn = alpha u`` is imposed strongly by a first-order
one-sided row, scaled by ``1/h``:

    ((1 - alpha h) u_b - u_in) / h = 0.
"""
from dataclasses import dataclass
from itertools import product

import numpy as np
import scipy.sparse as sp

from .mesh import INTERIOR, ScalarField
from .operator_core import phi_minus, phi_plus

__all__ = [
    "PLUS",
    "MINUS",
    "StencilSet",
    "StencilUnavailable",
    "BellmanRow",
    "Policy",
    "DiscreteOperator",
    "directional_second_diff",
    "bellman_value",
    "robin_row",
    "robin_matrix",
    "check_alpha_h",
    "assemble_residual",
]

PLUS, MINUS = "plus", "minus"


def _check_op(op):
    if op not in (PLUS, MINUS):
        raise ValueError(f"op must be 'plus' or 'minus', got {op!r}")


class StencilUnavailable(ValueError):
    """A stencil neighbour falls outside the grid."""


@dataclass(frozen=True)
class StencilSet:
    """Orthogonal lattice frames used by the wide stencil.

    Each frame is a tuple of ``dim`` integer directions, mutually orthogonal
    and of equal lattice length.
    """

    frames: tuple

    def __post_init__(self):
        frames = tuple(tuple(tuple(int(c) for c in e) for e in fr) for fr in self.frames)
        if not frames:
            raise ValueError("at least one frame is required")
        dim = len(frames[0][0])
        axis = tuple(tuple(int(i == j) for j in range(dim)) for i in range(dim))
        for fr in frames:
            if len(fr) != dim or any(len(e) != dim for e in fr):
                raise ValueError(f"frame {fr} does not match dimension {dim}")
            lengths = [np.dot(e, e) for e in fr]
            if len(set(lengths)) != 1 or lengths[0] == 0:
                raise ValueError(f"frame {fr} directions must share a nonzero lattice length")
            for e1, e2 in product(fr, fr):
                if e1 is not e2 and np.dot(e1, e2) != 0:
                    raise ValueError(f"frame {fr} is not orthogonal")
        if axis not in frames:
            raise ValueError("the axis frame must be present")
        object.__setattr__(self, "frames", frames)

    @classmethod
    def default(cls, dim, wide=False):
        """Axis frame (1D), axis and diagonal frames (2D), plus the (2,1)
        families when ``wide``."""
        if dim == 1:
            return cls((((1,),),))
        frames = [((1, 0), (0, 1)), ((1, 1), (1, -1))]
        if wide:
            frames += [((2, 1), (-1, 2)), ((1, 2), (-2, 1))]
        return cls(tuple(frames))

    @property
    def dim(self):
        return len(self.frames[0][0])

    def lattice_length(self, i):
        e = self.frames[i][0]
        return float(np.sqrt(np.dot(e, e)))


@dataclass(frozen=True)
class BellmanRow:
    """A linear row ``diag * u[node] + sum(weights * u[neighbors]) + constant``.

    For interior rows this is the policy-frozen discrete operator
    (``weights >= 0``, ``diag = -sum(weights)``); for Robin rows it is the
    scaled boundary residual.
    """

    node: int
    frame: int
    coeffs: tuple
    neighbors: np.ndarray
    weights: np.ndarray
    diag: float
    constant: float = 0.0

    def apply(self, values):
        values = values.values if isinstance(values, ScalarField) else np.asarray(values)
        return float(self.diag * values[self.node] + np.dot(self.weights, values[self.neighbors]) + self.constant)


def _shift(grid, node, e, sign):
    ix, iy = grid.ij(node)
    jx = ix + sign * e[0]
    jy = iy + sign * (e[1] if len(e) > 1 else 0)
    if not (0 <= jx < grid.nx and 0 <= jy < grid.ny):
        return None
    return grid.index(jx, jy)


def directional_second_diff(f, node, e):
    """Centred second difference of ``f`` at ``node`` along lattice direction ``e``.

    Raises :class:`StencilUnavailable` when ``node +- e`` is off the grid.
    """
    grid = f.grid
    fwd, bwd = _shift(grid, node, e, +1), _shift(grid, node, e, -1)
    if fwd is None or bwd is None:
        raise StencilUnavailable(f"direction {e} leaves the grid at node {node}")
    v = f.values
    return (v[fwd] - 2.0 * v[node] + v[bwd]) / (grid.h**2 * float(np.dot(e, e)))


def _coeffs_for(d, pair, op):
    if op == PLUS:
        return pair.A if d > 0 else pair.a
    return pair.a if d > 0 else pair.A


def bellman_value(f, node, pair, op, stencils):
    """Discrete ``M+-`` at one interior node, with its maximising row.

    Returns
    -------
    value : float
    row : BellmanRow
        The frame attaining the extremum and the sign-selected coefficients.
    """
    _check_op(op)
    grid = f.grid
    if grid.node_class[node] != INTERIOR:
        raise ValueError(f"node {node} is on the boundary")
    scal = phi_plus if op == PLUS else phi_minus
    best, best_i, best_d = None, None, None
    for i, frame in enumerate(stencils.frames):
        try:
            ds = [directional_second_diff(f, node, e) for e in frame]
        except StencilUnavailable:
            continue
        val = float(sum(scal(d, pair) for d in ds))
        if best is None or (val > best if op == PLUS else val < best):
            best, best_i, best_d = val, i, ds
    frame = stencils.frames[best_i]
    coeffs = tuple(_coeffs_for(d, pair, op) for d in best_d)
    neighbors, weights = [], []
    for c, e in zip(coeffs, frame):
        w = c / (grid.h**2 * float(np.dot(e, e)))
        neighbors += [_shift(grid, node, e, +1), _shift(grid, node, e, -1)]
        weights += [w, w]
    weights = np.array(weights)
    row = BellmanRow(node, best_i, coeffs, np.array(neighbors), weights, -float(weights.sum()))
    return best, row


def check_alpha_h(grid, alpha):
    """Reject ``alpha * h >= 1``, where the Robin row loses its positive diagonal."""
    if alpha < 0:
        raise ValueError(f"alpha must be nonnegative, got {alpha}")
    ah = alpha * grid.h
    if ah >= 1.0:
        L = grid.domain.min_length
        need = int(np.floor(alpha * L)) + 2
        raise ValueError(
            f"alpha*h = {ah:.4g} >= 1: the Robin row needs alpha*h < 1; "
            f"use at least {need} nodes per unit-spacing axis (about {int(np.ceil(10 * alpha * L)) + 1} for alpha*h <= 0.1)"
        )


def robin_row(grid, node, alpha):
    """Scaled one-sided Robin row at boundary ``node``.

    Face node: ``((1 - alpha h) u_b - u_in) / h``.  Corner node: the average of
    the two face forms, ``((1 - alpha h) u_b - (u_x + u_y) / 2) / h``.
    """
    if grid.node_class[node] == INTERIOR:
        raise ValueError(f"node {node} is interior")
    if grid.dirichlet[node]:
        raise ValueError(f"node {node} carries a Dirichlet closure, not a Robin row")
    check_alpha_h(grid, alpha)
    h = grid.h
    inner = grid.inward_neighbors(node)
    w = -1.0 / (h * len(inner))
    return BellmanRow(
        node, -1, (), np.array(inner), np.full(len(inner), w), (1.0 - alpha * h) / h
    )


def robin_matrix(grid, alpha):
    """Sparse rows for every boundary node: Robin rows, identity on Dirichlet nodes.

    Returns a CSR matrix of shape ``(len(grid.boundary), grid.size)``.
    """
    check_alpha_h(grid, alpha)
    h = grid.h
    rows, cols, vals = [], [], []
    for r, k in enumerate(grid.boundary):
        if grid.dirichlet[k]:
            rows.append(r), cols.append(k), vals.append(1.0)
            continue
        inner = grid.inward_neighbors(k)
        rows.append(r), cols.append(k), vals.append((1.0 - alpha * h) / h)
        for j in inner:
            rows.append(r), cols.append(j), vals.append(-1.0 / (h * len(inner)))
    return sp.csr_matrix((vals, (rows, cols)), shape=(len(grid.boundary), grid.size))


@dataclass(frozen=True, eq=False)
class Policy:
    """Frozen control per interior node: frame index and one coefficient per direction."""

    frame: np.ndarray
    coeff: np.ndarray

    def key(self):
        return self.frame.tobytes() + self.coeff.tobytes()


class DiscreteOperator:
    """Vectorised ``M+-_h`` on all interior nodes of a grid.

    Parameters
    ----------
    grid : Grid
    stencils : StencilSet
    pair : PucciPair
    op : {"plus", "minus"}
    """

    def __init__(self, grid, stencils, pair, op):
        _check_op(op)
        if stencils.dim != grid.dim:
            raise ValueError("stencil dimension does not match the grid")
        self.grid, self.stencils, self.pair, self.op = grid, stencils, pair, op
        self.nodes = grid.interior
        ix, iy = grid.ij(self.nodes)
        nf, nd = len(stencils.frames), grid.dim
        n = len(self.nodes)
        self.fwd = np.zeros((nf, nd, n), dtype=np.intp)
        self.bwd = np.zeros((nf, nd, n), dtype=np.intp)
        self.available = np.ones((nf, n), dtype=bool)
        self.scale = np.zeros((nf, nd))
        for f, frame in enumerate(stencils.frames):
            for k, e in enumerate(frame):
                ex, ey = e[0], (e[1] if nd == 2 else 0)
                ok = ((ix + ex >= 0) & (ix + ex < grid.nx) & (ix - ex >= 0) & (ix - ex < grid.nx)
                      & (iy + ey >= 0) & (iy + ey < grid.ny) & (iy - ey >= 0) & (iy - ey < grid.ny))
                self.available[f] &= ok
                off = ey * grid.nx + ex
                self.fwd[f, k] = np.where(ok, self.nodes + off, self.nodes)
                self.bwd[f, k] = np.where(ok, self.nodes - off, self.nodes)
                self.scale[f, k] = 1.0 / (grid.h**2 * float(np.dot(e, e)))
        self._scal = phi_plus if op == PLUS else phi_minus

    def second_diffs(self, u):
        """Directional second differences, shape ``(frames, dim, interior)``."""
        u = np.asarray(u)
        c = u[self.nodes]
        return (u[self.fwd] - 2.0 * c + u[self.bwd]) * self.scale[:, :, None]

    def frame_values(self, u, diffs=None):
        d = self.second_diffs(u) if diffs is None else diffs
        vals = self._scal(d, self.pair).sum(axis=1)
        fill = -np.inf if self.op == PLUS else np.inf
        return np.where(self.available, vals, fill)

    def evaluate(self, u):
        """``M+-_h u`` at the interior nodes."""
        vals = self.frame_values(u)
        return vals.max(axis=0) if self.op == PLUS else vals.min(axis=0)

    def _coeff_from_sign(self, d):
        hi, lo = self.pair.A, self.pair.a
        if self.op == PLUS:
            return np.where(d > 0, hi, lo)
        return np.where(d > 0, lo, hi)

    def apply_policy(self, u, policy, diffs=None):
        d = self.second_diffs(u) if diffs is None else diffs
        n = np.arange(len(self.nodes))
        return (policy.coeff * d[policy.frame, :, n]).sum(axis=1)

    def select_policy(self, u, current=None, rtol=1e-13):
        """Extremal frame and coefficients at ``u``.

        With ``current`` given, a node keeps its policy unless switching
        improves its value by more than ``rtol`` relative (or by more than the
        rounding error of the differences); this prevents cycling on ties.
        """
        d = self.second_diffs(u)
        vals = self.frame_values(u, d)
        best = vals.argmax(axis=0) if self.op == PLUS else vals.argmin(axis=0)
        n = np.arange(len(self.nodes))
        frame = best
        coeff = self._coeff_from_sign(d[best, :, n])
        if current is not None:
            best_val = vals[best, n]
            cur_val = self.apply_policy(u, current, d)
            gain = best_val - cur_val if self.op == PLUS else cur_val - best_val
            # ties up to the rounding level of the differences themselves
            au = np.abs(np.asarray(u, dtype=float))
            mag = ((au[self.fwd] + 2.0 * au[self.nodes] + au[self.bwd]) * self.scale[:, :, None]).max(axis=(0, 1))
            tol = self.pair.A * (rtol * np.abs(d).max(axis=(0, 1)) + 8 * np.finfo(float).eps * mag) + 1e-300
            keep = gain <= tol
            frame = np.where(keep, current.frame, best)
            coeff = np.where(keep[:, None], current.coeff, coeff)
        return Policy(np.ascontiguousarray(frame), np.ascontiguousarray(coeff))

    def policy_matrix(self, policy):
        """Sparse ``L_q`` rows, shape ``(interior, grid.size)``."""
        n = len(self.nodes)
        rows = np.arange(n)
        f = policy.frame
        w = policy.coeff * self.scale[f]  # (n, dim)
        fwd = self.fwd[f, :, rows]
        bwd = self.bwd[f, :, rows]
        r = np.concatenate([np.repeat(rows, w.shape[1])] * 2 + [rows])
        c = np.concatenate([fwd.ravel(), bwd.ravel(), self.nodes])
        v = np.concatenate([w.ravel(), w.ravel(), -2.0 * w.sum(axis=1)])
        return sp.csr_matrix((v, (r, c)), shape=(n, self.grid.size))


def assemble_residual(f, pair, op, alpha, lam, stencils):
    """Nodewise residual of the eigen-equation at ``(u, lam)``.

    Interior: ``M+-_h u + lam u``; boundary: the scaled Robin row (or ``u``
    itself on a Dirichlet node).
    """
    grid = f.grid
    check_alpha_h(grid, alpha)
    u = f.values
    res = np.zeros(grid.size)
    D = DiscreteOperator(grid, stencils, pair, op)
    res[D.nodes] = D.evaluate(u) + lam * u[D.nodes]
    res[grid.boundary] = robin_matrix(grid, alpha) @ u
    return ScalarField(grid, res)
