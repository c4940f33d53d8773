"""Cone geometry of discretized Banach lattices.

A :class:`LatticeContext` describes a weighted sequence space (discretized
L^p with p in {1, 2, inf}) together with an optional reference vector u.
"""
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import NumericalFailure

POSITIVE = "positive"
STRONGLY_POSITIVE = "strongly-positive-wrt-u"
NOT_POSITIVE = "not-positive"
NOT_STRONGLY_POSITIVE = "not-strongly-positive"


def _parse_p(p):
    if isinstance(p, str):
        p = p.strip().lower()
        if p in ("inf", "infinity", "oo"):
            return np.inf
        p = float(p)
    if p in (1, 2):
        return int(p)
    if p == np.inf:
        return np.inf
    raise NumericalFailure("unsupported exponent (only 1, 2, inf)", p=p)


@dataclass(frozen=True)
class LatticeContext:
    """Discretization metadata for cone geometry.

    Parameters
    ----------
    n : int
        Dimension.
    p : {1, 2, inf}
        Exponent of the weighted norm.
    weights : ndarray
        Positive quadrature weights (ignored by the sup norm).
    u : ndarray, optional
        Reference vector, entrywise non-negative.
    """

    n: int
    p: float = np.inf
    weights: np.ndarray = field(default=None)
    u: Optional[np.ndarray] = None

    def __post_init__(self):
        object.__setattr__(self, "p", _parse_p(self.p))
        w = np.ones(self.n) if self.weights is None else np.asarray(self.weights, float)
        if w.shape != (self.n,) or np.any(w <= 0):
            raise ValueError("weights must be strictly positive with length n")
        object.__setattr__(self, "weights", w)
        if self.u is not None:
            u = np.asarray(self.u, float)
            if u.shape != (self.n,) or np.any(u < 0):
                raise ValueError("u must be entrywise non-negative with length n")
            object.__setattr__(self, "u", u)

    @classmethod
    def sequence(cls, n, p=np.inf, u="ones"):
        """Unit weights; ``u="ones"`` gives the constant reference vector."""
        if isinstance(u, str) and u == "ones":
            u = np.ones(n)
        return cls(n=n, p=p, weights=np.ones(n), u=u)

    @property
    def has_quasi_interior_u(self):
        return self.u is not None and bool(np.all(self.u > 0))

    def with_u(self, u):
        return LatticeContext(self.n, self.p, self.weights, u)

    def norm(self, f):
        """Weighted p-norm of a (complex) vector or of each column of a matrix."""
        a = np.abs(np.asarray(f))
        w = self.weights if a.ndim == 1 else self.weights[:, None]
        if self.p == 1:
            return np.sum(w * a, axis=0)
        if self.p == 2:
            return np.sqrt(np.sum(w * a * a, axis=0))
        return np.max(a, axis=0)

    @property
    def tol_strict(self):
        if self.u is None:
            raise NumericalFailure("reference vector u is absent")
        return 1e-10 * float(np.max(self.u))


@dataclass(frozen=True)
class PositivityCertificate:
    """Result of a (strong) positivity test.

    ``constant`` is the largest c with f >= c u (or the minimum over columns
    for operators); ``witness_index`` is where it is attained.
    """

    kind: str
    constant: float
    witness_index: int
    positive: bool = False

    @property
    def strongly_positive(self):
        return self.kind == STRONGLY_POSITIVE


def cone_residual(f):
    """Per-coordinate distance of ``f`` to the half line [0, inf).

    Works on vectors and column-stacked matrices.
    """
    f = np.asarray(f)
    if not np.iscomplexobj(f):
        return np.maximum(-f, 0.0)
    g, h = f.real, f.imag
    return np.where(g >= 0, np.abs(h), np.hypot(g, h))


def dist_to_cone(f, ctx):
    """Distance of ``f`` to the positive cone in the norm of ``ctx``.

    The nearest cone element is ``max(Re f, 0)`` coordinatewise, so the
    distance is the ctx-norm of :func:`cone_residual`. Matrices are
    treated column by column and give one distance per column.
    """
    f = np.asarray(f)
    if f.shape[0] != ctx.n:
        raise ValueError("length mismatch")
    return ctx.norm(cone_residual(f))


def gauge_norm(f, ctx):
    """Gauge norm ``max_i |f_i| / u_i``; ``inf`` if ``f`` leaves the ideal of u."""
    if ctx.u is None:
        raise NumericalFailure("gauge norm needs a reference vector u")
    a = np.abs(np.asarray(f))
    u = ctx.u
    if np.any((u == 0) & (a > 0)):
        return float("inf")
    pos = u > 0
    if not np.any(pos):
        return 0.0
    return float(np.max(a[pos] / u[pos]))


def _real_or_fail(f, what="vector"):
    f = np.asarray(f)
    if np.iscomplexobj(f):
        scale = max(1.0, float(np.max(np.abs(f), initial=0.0)))
        if np.max(np.abs(f.imag), initial=0.0) > 1e-10 * scale:
            raise NumericalFailure(f"strong positivity needs a real {what}",
                                   max_imag=float(np.max(np.abs(f.imag))))
        f = f.real
    return f.astype(float)


def _require_quasi_interior(ctx):
    if ctx.u is None:
        raise NumericalFailure("reference vector u is absent")
    if not ctx.has_quasi_interior_u:
        raise NumericalFailure("reference vector u is not quasi-interior (has zero entries)")


def strong_positivity(f, ctx):
    """Certificate for ``f >> 0`` with respect to ``ctx.u``.

    Returns
    -------
    PositivityCertificate
        ``constant = min_i f_i / u_i``; strongly positive iff the constant
        exceeds ``ctx.tol_strict``.
    """
    _require_quasi_interior(ctx)
    f = _real_or_fail(f)
    ratios = f / ctx.u
    i = int(np.argmin(ratios))
    c = float(ratios[i])
    pos = bool(np.all(f >= 0))
    if c > ctx.tol_strict:
        kind = STRONGLY_POSITIVE
    else:
        kind = NOT_STRONGLY_POSITIVE if pos else NOT_POSITIVE
    return PositivityCertificate(kind, c, i, pos)


def operator_strong_positivity(T, ctx, tol_entry=None):
    """Certificate for ``T >> 0`` with respect to ``ctx.u``.

    ``T`` is strongly positive iff every column is, since each positive
    vector is a positive combination of coordinate atoms. The reported
    constant is ``min_j min_i T_ij / u_i``; ``witness_index`` is the
    flattened (row-major) index of the binding entry.
    """
    _require_quasi_interior(ctx)
    T = _real_or_fail(T, "matrix")
    if T.shape != (ctx.n, ctx.n):
        raise ValueError("context dimension mismatch")
    if tol_entry is None:
        tol_entry = 1e-12 * max(1.0, float(np.max(np.abs(T))))
    ratios = T / ctx.u[:, None]
    idx = int(np.argmin(ratios))
    c = float(ratios.flat[idx])
    pos = bool(np.all(T >= -tol_entry))
    if c > ctx.tol_strict:
        kind = STRONGLY_POSITIVE
    elif pos:
        kind = NOT_STRONGLY_POSITIVE
    else:
        kind = NOT_POSITIVE
    return PositivityCertificate(kind, c, idx, pos)


def trapezoid_weights(x):
    """Trapezoid weights on a node set ``x`` (including end points)."""
    x = np.asarray(x, float)
    w = np.zeros_like(x)
    d = np.diff(x)
    w[:-1] += d / 2
    w[1:] += d / 2
    return w
