"""Closed-form reference solutions.

On an interval of length ``L`` a positive principal eigenfunction of the
Robin problem is convex, so ``M+(u'') = A u''`` and the pair is

    u = cosh(mu (x - L/2)),   lambda+ = -A mu^2,   mu tanh(mu L/2) = alpha,

with the same root giving ``lambda- = -a mu^2``.  For ``a = A = sigma`` the
rectangle separates into two such factors.
"""
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.optimize import brentq


__all__ = [
    "OracleResult",
    "HalfspaceProfile",
    "ExpSubsolution",
    "transcendental_root",
    "oracle_interval",
    "oracle_rectangle_linear",
    "halfspace_profile",
    "explicit_subsolution_exp",
]


@dataclass(frozen=True)
class OracleResult:
    lam: float
    mu_root: float
    profile: Callable


def transcendental_root(alpha, halflength):
    """Root ``mu > alpha`` of ``mu tanh(mu l) = alpha``.

    The bracket starts at ``[alpha, 2 alpha + 2/l]`` and doubles its upper end
    until the sign changes; the root is then refined to machine precision.
    """
    alpha, ell = float(alpha), float(halflength)
    if not (alpha > 0 and ell > 0):
        raise ValueError(f"need alpha > 0 and halflength > 0, got {alpha}, {ell}")

    def f(mu):
        return mu * np.tanh(mu * ell) - alpha

    lo, hi = alpha, 2.0 * alpha + 2.0 / ell
    while f(hi) <= 0:
        hi *= 2.0
    if f(lo) >= 0:
        # tanh(alpha l) rounds to 1: the root is alpha to machine precision
        return lo
    return brentq(f, lo, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)


def oracle_interval(pair, alpha, L, which="plus"):
    """Exact principal pair on ``[0, L]``.

    ``which="plus"`` gives ``lambda+ = -A mu^2`` with profile
    ``cosh(mu (x - L/2)) / cosh(mu L/2)``; ``"minus"`` gives ``-a mu^2`` and the
    negated profile.
    """
    if which not in ("plus", "minus"):
        raise ValueError(f"which must be 'plus' or 'minus', got {which!r}")
    mu = transcendental_root(alpha, L / 2.0)
    coeff = pair.A if which == "plus" else pair.a
    sign = 1.0 if which == "plus" else -1.0

    def profile(x):
        x = np.asarray(x, dtype=float)
        # cosh ratio written with exponentials so large mu L does not overflow
        t = np.abs(x - 0.5 * L)
        return sign * np.exp(mu * (t - 0.5 * L)) * (1 + np.exp(-2 * mu * t)) / (1 + np.exp(-mu * L))

    return OracleResult(-coeff * mu**2, mu, profile)


def oracle_rectangle_linear(alpha, Lx, Ly, sigma=1.0):
    """Principal eigenvalue of ``sigma * Laplacian`` on ``[0,Lx]x[0,Ly]`` with
    the Robin condition: ``-sigma (mu_x^2 + mu_y^2)``."""
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    mx = transcendental_root(alpha, Lx / 2.0)
    my = transcendental_root(alpha, Ly / 2.0)
    return -sigma * (mx**2 + my**2)


@dataclass(frozen=True)
class HalfspaceProfile:
    """``sign * sqrt(coeff/gamma) * exp(-sqrt(gamma/coeff) t)``, the bounded
    solution of ``coeff v'' = gamma v`` on ``t > 0`` with ``-v'(0) = sign``."""

    gamma: float
    coeff: float
    sign: float = 1.0

    @property
    def rate(self):
        return np.sqrt(self.gamma / self.coeff)

    @property
    def boundary_value(self):
        return self.sign * np.sqrt(self.coeff / self.gamma)

    def __call__(self, t):
        return self.boundary_value * np.exp(-self.rate * np.asarray(t, dtype=float))

    def derivative(self, t):
        return -self.rate * self(t)

    def second_derivative(self, t):
        return self.rate**2 * self(t)


def halfspace_profile(gamma, coeff, sign="plus"):
    """Half-line profile for the normalised Neumann datum ``-v'(0) = 1``."""
    if not gamma > 0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    if sign not in ("plus", "minus"):
        raise ValueError(f"sign must be 'plus' or 'minus', got {sign!r}")
    return HalfspaceProfile(float(gamma), float(coeff), 1.0 if sign == "plus" else -1.0)


@dataclass(frozen=True)
class ExpSubsolution:
    """``v(x) = exp(alpha x_1)``; its Hessian is ``alpha^2 v e1 (x) e1``."""

    alpha: float

    def __call__(self, x1):
        return np.exp(self.alpha * np.asarray(x1, dtype=float))

    def pucci_plus(self, x1, pair):
        """``M+(D^2 v) = A alpha^2 v`` (rank-one PSD Hessian)."""
        return pair.A * self.alpha**2 * self(x1)

    def pucci_minus(self, x1, pair):
        return pair.a * self.alpha**2 * self(x1)


def explicit_subsolution_exp(alpha):
    return ExpSubsolution(float(alpha))
