"""Pucci extremal operators on symmetric matrices.

The maximal operator is ``M+(M) = sup tr(sigma M)`` over symmetric ``sigma``
with ``a I <= sigma <= A I``; the minimal one takes the infimum.  Both are
evaluated through the spectrum of ``M``::

    M+(M) = A * sum(max(l_i, 0)) + a * sum(min(l_i, 0))
    M-(M) = a * sum(max(l_i, 0)) + A * sum(min(l_i, 0))

A Monte-Carlo sampler over admissible ``sigma`` is provided as an
independent check of these closed forms.
"""
from dataclasses import dataclass

import numpy as np
from scipy.spatial import ConvexHull, QhullError

__all__ = [
    "PucciPair",
    "SymMat2",
    "phi_plus",
    "phi_minus",
    "pucci_plus_from_eigs",
    "pucci_minus_from_eigs",
    "eigs_sym2",
    "pucci_plus",
    "pucci_minus",
    "pucci_sup_sample_oracle",
    "pucci_sup_sample_oracle_batch",
]


@dataclass(frozen=True)
class PucciPair:
    """Ellipticity bounds ``0 < a <= A``."""

    a: float
    A: float

    def __post_init__(self):
        a, A = float(self.a), float(self.A)
        if not (np.isfinite(a) and np.isfinite(A)):
            raise ValueError("ellipticity bounds must be finite")
        if not 0 < a <= A:
            raise ValueError(f"need 0 < a <= A, got a={a}, A={A}")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "A", A)


@dataclass(frozen=True)
class SymMat2:
    """Symmetric 2x2 matrix stored by its upper triangle."""

    m11: float
    m12: float
    m22: float

    def to_array(self):
        return np.array([[self.m11, self.m12], [self.m12, self.m22]], dtype=float)

    def __neg__(self):
        return SymMat2(-self.m11, -self.m12, -self.m22)

    def __add__(self, other):
        return SymMat2(self.m11 + other.m11, self.m12 + other.m12, self.m22 + other.m22)

    def scale(self, t):
        return SymMat2(t * self.m11, t * self.m12, t * self.m22)


def phi_plus(t, pair):
    """Scalar maximal operator ``A t+ + a t-`` (works elementwise on arrays)."""
    t = np.asarray(t, dtype=float)
    return pair.A * np.maximum(t, 0.0) + pair.a * np.minimum(t, 0.0)


def phi_minus(t, pair):
    """Scalar minimal operator ``a t+ + A t-``."""
    t = np.asarray(t, dtype=float)
    return pair.a * np.maximum(t, 0.0) + pair.A * np.minimum(t, 0.0)


def pucci_plus_from_eigs(eigs, pair):
    """Maximal Pucci operator of a symmetric matrix given its eigenvalues."""
    eigs = np.asarray(eigs, dtype=float)
    return float(np.sum(phi_plus(eigs, pair)))


def pucci_minus_from_eigs(eigs, pair):
    """Minimal Pucci operator of a symmetric matrix given its eigenvalues."""
    eigs = np.asarray(eigs, dtype=float)
    return float(np.sum(phi_minus(eigs, pair)))


def eigs_sym2(m):
    """Eigenvalues of a symmetric 2x2 matrix in ascending order.

    Uses the trace/discriminant formula; the larger root is taken from the
    sign-stable branch and the smaller one recovered from the determinant
    when that avoids cancellation.
    """
    m11, m12, m22 = float(m.m11), float(m.m12), float(m.m22)
    big = max(abs(m11), abs(m12), abs(m22))
    if big == 0 or not np.isfinite(big):
        return (m11, m22) if m11 <= m22 else (m22, m11)
    # exact power-of-two rescale keeps the determinant clear of under/overflow
    e = -np.frexp(big)[1]
    lo, hi = _eigs_scaled(np.ldexp(m11, e), np.ldexp(m12, e), np.ldexp(m22, e))
    return float(np.ldexp(lo, -e)), float(np.ldexp(hi, -e))


def _eigs_scaled(m11, m12, m22):
    half_tr = 0.5 * (m11 + m22)
    half_diff = 0.5 * (m11 - m22)
    r = np.hypot(half_diff, m12)
    if half_tr >= 0:
        hi = half_tr + r
        det = m11 * m22 - m12 * m12
        lo = det / hi if hi != 0 else half_tr - r
    else:
        lo = half_tr - r
        det = m11 * m22 - m12 * m12
        hi = det / lo if lo != 0 else half_tr + r
    if lo > hi:
        lo, hi = hi, lo
    return lo, hi


def _eigs_sym2_array(m11, m12, m22):
    half_tr = 0.5 * (m11 + m22)
    r = np.hypot(0.5 * (m11 - m22), m12)
    return half_tr - r, half_tr + r


def pucci_plus(m, pair):
    """``M+`` of a :class:`SymMat2` (or of a stacked ``(..., 3)`` array of
    upper triangles ``(m11, m12, m22)``)."""
    if isinstance(m, SymMat2):
        return pucci_plus_from_eigs(eigs_sym2(m), pair)
    m = np.asarray(m, dtype=float)
    lo, hi = _eigs_sym2_array(m[..., 0], m[..., 1], m[..., 2])
    return phi_plus(lo, pair) + phi_plus(hi, pair)


def pucci_minus(m, pair):
    """``M-`` of a :class:`SymMat2` or stacked upper triangles."""
    if isinstance(m, SymMat2):
        return pucci_minus_from_eigs(eigs_sym2(m), pair)
    m = np.asarray(m, dtype=float)
    lo, hi = _eigs_sym2_array(m[..., 0], m[..., 1], m[..., 2])
    return phi_minus(lo, pair) + phi_minus(hi, pair)


def _sample_sigmas(pair, nsamples, seed):
    # sigma = Q^T diag(s1, s2) Q with Q a rotation by theta
    rng = np.random.default_rng(seed)
    s = rng.uniform(pair.a, pair.A, size=(nsamples, 2))
    theta = rng.uniform(0.0, np.pi, size=nsamples)
    c, sn = np.cos(theta), np.sin(theta)
    s11 = s[:, 0] * c * c + s[:, 1] * sn * sn
    s22 = s[:, 0] * sn * sn + s[:, 1] * c * c
    s12 = (s[:, 0] - s[:, 1]) * c * sn
    return s11, s12, s22


def pucci_sup_sample_oracle(m, pair, nsamples, seed=0):
    """Brute-force lower bound on ``M+(m)`` from random admissible ``sigma``.

    Parameters
    ----------
    m : SymMat2
        Matrix to evaluate.
    pair : PucciPair
        Ellipticity bounds.
    nsamples : int
        Number of sampled ``sigma``; eigenvalues uniform in ``[a, A]`` and a
        uniform rotation angle.
    seed : int
        Seed for :func:`numpy.random.default_rng`.

    Returns
    -------
    float
        ``max_k tr(sigma_k m)``, which increases to ``M+(m)`` as the sample
        grows.
    """
    if nsamples < 1:
        raise ValueError("nsamples must be >= 1")
    best = -np.inf
    chunk = 1 << 18
    rng_seed = np.random.SeedSequence(seed)
    for start, child in zip(range(0, nsamples, chunk), rng_seed.spawn((nsamples + chunk - 1) // chunk)):
        k = min(chunk, nsamples - start)
        s11, s12, s22 = _sample_sigmas(pair, k, child)
        vals = s11 * m.m11 + 2.0 * s12 * m.m12 + s22 * m.m22
        best = max(best, float(vals.max()))
    return best


def pucci_sup_sample_oracle_batch(ms, pair, nsamples, seed=0):
    """Sampling oracle for many matrices sharing one sample of ``sigma``.

    ``tr(sigma m)`` is linear in the sample point ``(s11, 2 s12, s22)``, so the
    maximum over the sample equals the maximum over the vertices of its
    convex hull; only those vertices are evaluated.  With the same ``seed``
    the sample matches :func:`pucci_sup_sample_oracle`, so the results agree
    up to summation order.

    Parameters
    ----------
    ms : array_like, shape (k, 3)
        Upper triangles ``(m11, m12, m22)``.
    """
    ms = np.atleast_2d(np.asarray(ms, dtype=float))
    chunk = 1 << 18
    pts = []
    rng_seed = np.random.SeedSequence(seed)
    for start, child in zip(range(0, nsamples, chunk), rng_seed.spawn((nsamples + chunk - 1) // chunk)):
        k = min(chunk, nsamples - start)
        s11, s12, s22 = _sample_sigmas(pair, k, child)
        p = np.column_stack([s11, 2.0 * s12, s22])
        pts.append(_hull_vertices(p))
    pts = _hull_vertices(np.concatenate(pts))
    return (ms @ pts.T).max(axis=1)


def _hull_vertices(p):
    if len(p) <= 64:
        return p
    try:
        return p[ConvexHull(p).vertices]
    except QhullError:
        # flat sample (a == A): every point is a candidate
        return p
