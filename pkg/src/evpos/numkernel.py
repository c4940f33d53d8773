"""Dense complex linear algebra kernels.

Everything downstream (spectra, projections, semigroups, resolvents) is
built on the small set of functions in this module. All functions are
pure and deterministic.
"""
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .errors import NumericalFailure


def as_matrix(A):
    """Validate and return ``A`` as a square 2-D complex or real array.

    Parameters
    ----------
    A : array_like
        Candidate square matrix.

    Returns
    -------
    ndarray
        Real input stays real (float64), anything else becomes complex128.
    """
    A = np.asarray(A)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] == 0:
        raise ValueError(f"expected a non-empty square matrix, got shape {A.shape}")
    if np.iscomplexobj(A):
        A = A.astype(np.complex128)
    else:
        A = A.astype(np.float64)
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix has non-finite entries")
    return A


def is_real(A, tol=1e-12):
    """True if the imaginary part of ``A`` is negligible relative to its size."""
    A = np.asarray(A)
    if not np.iscomplexobj(A):
        return True
    scale = max(1.0, float(np.max(np.abs(A))) if A.size else 1.0)
    return bool(np.max(np.abs(A.imag), initial=0.0) <= tol * scale)


def norm2(A):
    """Spectral norm (largest singular value)."""
    return float(np.linalg.norm(A, 2))


@dataclass(frozen=True)
class SchurForm:
    """Complex Schur form ``A = Q U Q*``."""

    unitary: np.ndarray
    triangular: np.ndarray

    @property
    def eigenvalues(self):
        return np.diag(self.triangular).copy()

    @property
    def n(self):
        return self.triangular.shape[0]

    def reconstruct(self):
        Q = self.unitary
        return Q @ self.triangular @ Q.conj().T


@dataclass(frozen=True)
class EigenPair:
    """Eigenvalue with right and left eigenvectors.

    ``right`` has unit 2-norm; ``left`` is scaled so that
    ``left.conj() @ right == 1`` when the eigenvalue is algebraically simple.
    """

    value: complex
    right: np.ndarray
    left: np.ndarray


def schur_decompose(A):
    """Complex Schur decomposition.

    Parameters
    ----------
    A : array_like
        Square matrix with finite entries.

    Returns
    -------
    SchurForm

    Raises
    ------
    NumericalFailure
        If the QR iteration does not converge or the reconstruction error
        exceeds ``1e-10 * n * ||A||``.
    """
    A = as_matrix(A)
    n = A.shape[0]
    try:
        U, Q = sla.schur(A.astype(np.complex128), output="complex")
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise NumericalFailure("Schur iteration did not converge", detail=str(exc), n=n)
    err = norm2(Q @ U @ Q.conj().T - A)
    scale = max(norm2(A), np.finfo(float).tiny)
    if err > 1e-10 * n * scale and err > 1e-300:
        raise NumericalFailure("Schur reconstruction error too large",
                               error=err, norm=scale, n=n)
    return SchurForm(unitary=Q, triangular=np.triu(U))


def _tie_guard(d, scale):
    # perturb exact ties so triangular back-solves stay finite
    tiny = 1e-14 * scale
    d = np.where(np.abs(d) < tiny, tiny, d)
    return d


def triangular_right_eigvec(U, k):
    """Right eigenvector of upper-triangular ``U`` for the diagonal entry ``k``.

    Back-substitution on ``(U - U[k,k] I) x = 0`` with ``x[k] = 1``.
    """
    n = U.shape[0]
    lam = U[k, k]
    scale = max(1.0, float(np.max(np.abs(U))))
    x = np.zeros(n, dtype=np.complex128)
    x[k] = 1.0
    for j in range(k - 1, -1, -1):
        s = U[j, j + 1:k + 1] @ x[j + 1:k + 1]
        x[j] = -s / _tie_guard(U[j, j] - lam, scale)
    return x


def triangular_left_eigvec(U, k):
    """Left eigenvector ``y`` (``y* U = U[k,k] y*``) by forward substitution."""
    n = U.shape[0]
    lam = U[k, k]
    scale = max(1.0, float(np.max(np.abs(U))))
    yc = np.zeros(n, dtype=np.complex128)  # holds conj(y)
    yc[k] = 1.0
    for j in range(k + 1, n):
        s = yc[k:j] @ U[k:j, j]
        yc[j] = -s / _tie_guard(U[j, j] - lam, scale)
    return yc.conj()


def eigenpair(schur, k):
    """Eigenpair for the Schur diagonal entry ``k``.

    Parameters
    ----------
    schur : SchurForm
    k : int
        Index into the Schur diagonal.

    Returns
    -------
    EigenPair
    """
    U, Q = schur.triangular, schur.unitary
    x = Q @ triangular_right_eigvec(U, k)
    y = Q @ triangular_left_eigvec(U, k)
    x = x / np.linalg.norm(x)
    ip = np.vdot(y, x)
    if abs(ip) > 1e-300:
        y = y / np.conj(ip)
    return EigenPair(value=complex(U[k, k]), right=x, left=y)


def expm(A):
    """Matrix exponential by scaling and squaring with a diagonal Pade approximant.

    Raises
    ------
    NumericalFailure
        On overflow, reporting the scaling exponent that would be used.
    """
    A = as_matrix(A)
    with np.errstate(over="ignore", invalid="ignore"):
        E = sla.expm(A)
    if not np.all(np.isfinite(E)):
        nrm = float(np.linalg.norm(A, 1))
        s = int(max(0, np.ceil(np.log2(nrm / 5.371920351148152)))) if nrm > 0 else 0
        raise NumericalFailure("matrix exponential overflow", scaling_exponent=s, norm1=nrm)
    return E


def resolvent(A, z, tol_singular=None):
    """Resolvent ``R(z, A) = (zI - A)^{-1}`` by LU with partial pivoting.

    Parameters
    ----------
    A : array_like
        Square matrix.
    z : complex
        Point in the resolvent set.
    tol_singular : float, optional
        Minimal admissible distance to the spectrum, default
        ``1e-12 * ||A|| * n``.

    Raises
    ------
    NumericalFailure
        If ``zI - A`` is singular or nearly singular, or the backward error
        of the computed inverse is above ``1e-10 * n``.
    """
    A = as_matrix(A)
    n = A.shape[0]
    nA = norm2(A)
    if tol_singular is None:
        tol_singular = 1e-12 * max(nA, 1e-300) * n
    M = z * np.eye(n) - A
    if not np.iscomplexobj(A) and complex(z).imag == 0:
        M = M.real
    dtype = M.dtype
    try:
        with np.errstate(all="ignore"), warnings.catch_warnings():
            warnings.simplefilter("ignore", sla.LinAlgWarning)
            lu = sla.lu_factor(M, check_finite=False)
            R = sla.lu_solve(lu, np.eye(n, dtype=dtype), check_finite=False)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise NumericalFailure("singular shifted system", z=complex(z), detail=str(exc))
    if not np.all(np.isfinite(R)):
        raise NumericalFailure("singular shifted system", z=complex(z), residual=float("inf"))
    nR = float(np.linalg.norm(R, 1))
    res = float(np.linalg.norm(M @ R - np.eye(n), 1))
    backward = res / max(float(np.linalg.norm(M, 1)) * nR, 1e-300)
    near = False
    if 1.0 / nR < tol_singular:
        # 1/||R|| underestimates the distance for non-normal A; confirm on the spectrum
        near = float(np.min(np.abs(np.linalg.eigvals(A) - z))) < tol_singular
    if near or backward > 1e-10 * n:
        raise NumericalFailure("near-singular shifted system", z=complex(z),
                               residual=res, backward_error=backward,
                               distance_estimate=1.0 / nR, tol_singular=tol_singular)
    return R


def operator_norm(A, ctx):
    """Induced operator norm on the weighted space described by ``ctx``.

    p = 1 uses weighted column sums, p = inf plain row sums (the sup norm
    ignores weights) and p = 2 the largest singular value of
    ``W^{1/2} A W^{-1/2}``.
    """
    A = np.asarray(A)
    if A.shape != (ctx.n, ctx.n):
        raise ValueError("context dimension mismatch")
    w = ctx.weights
    if ctx.p == 1:
        return float(np.max((w @ np.abs(A)) / w))
    if ctx.p == 2:
        s = np.sqrt(w)
        return norm2(s[:, None] * A / s[None, :])
    if ctx.p == np.inf:
        return float(np.max(np.sum(np.abs(A), axis=1)))
    raise NumericalFailure("unsupported exponent", p=ctx.p)


class Propagator:
    """Evaluate ``e^{tA}`` for many ``t``.

    Uses a diagonalization when the eigenvector basis is well conditioned
    and falls back to :func:`expm` otherwise.
    """

    def __init__(self, A, cond_max=1e6):
        self.A = as_matrix(A)
        self.real = not np.iscomplexobj(self.A)
        self._eig = None
        try:
            lam, V = np.linalg.eig(self.A)
            if np.linalg.cond(V) < cond_max:
                self._eig = (lam, V, np.linalg.inv(V))
        except np.linalg.LinAlgError:
            pass

    def __call__(self, t):
        if self._eig is None:
            return expm(t * self.A)
        lam, V, Vi = self._eig
        E = (V * np.exp(t * lam)) @ Vi
        return E.real if self.real else E

    def apply(self, t, f):
        """``e^{tA} f`` (cheaper than forming ``e^{tA}`` when diagonalized)."""
        if self._eig is None:
            return expm(t * self.A) @ f
        lam, V, Vi = self._eig
        g = V @ (np.exp(t * lam) * (Vi @ f))
        return g.real if self.real and not np.iscomplexobj(f) else g
