"""Spectral structure: clusters, spectral bound, dominance, projections.

Spectral projections are computed from the Schur form (eigen-dyads for
simple eigenvalues, reordered Schur form plus a Sylvester solve for
clusters). Contour, Abel and power-iteration projections are independent
oracles used to cross-check them.
"""
from dataclasses import dataclass, field
from typing import List

import numpy as np
from scipy.linalg import lapack

from .errors import NumericalFailure
from .numkernel import (as_matrix, norm2, resolvent, schur_decompose, eigenpair,
                        operator_norm, SchurForm)

TOL_RANK = 1e-9


def default_tol_cluster(A):
    return 1e-7 * max(1.0, norm2(A))


@dataclass(frozen=True)
class EigenvalueCluster:
    center: complex
    members: tuple
    algebraic_multiplicity: int
    geometric_multiplicity: int
    pole_order: int

    @property
    def semisimple(self):
        return self.pole_order == 1

    @property
    def simple(self):
        return self.algebraic_multiplicity == 1


@dataclass(frozen=True)
class SpectrumReport:
    clusters: List[EigenvalueCluster]
    spectral_bound: float
    peripheral: tuple
    dominant: bool
    dominance_margin: float
    tol_cluster: float
    schur: SchurForm = field(repr=False)
    norm: float = 1.0
    warnings: tuple = ()

    def cluster_near(self, z, tol=None):
        """Cluster whose center is closest to ``z`` (within ``tol``)."""
        tol = self.tol_cluster if tol is None else tol
        d = [abs(c.center - z) for c in self.clusters]
        i = int(np.argmin(d))
        if d[i] > max(tol, 10 * self.tol_cluster):
            raise NumericalFailure("not a spectral value", z=complex(z), distance=float(d[i]))
        return self.clusters[i]

    @property
    def peripheral_clusters(self):
        return [self.clusters[i] for i in self.peripheral]

    def summary(self):
        return {
            "spectral_bound": self.spectral_bound,
            "dominant": self.dominant,
            "dominance_margin": self.dominance_margin,
            "tol_cluster": self.tol_cluster,
            "warnings": list(self.warnings),
            "clusters": [
                {"center_re": float(c.center.real), "center_im": float(c.center.imag),
                 "algebraic": c.algebraic_multiplicity,
                 "geometric": c.geometric_multiplicity,
                 "pole_order": c.pole_order}
                for c in self.clusters[:50]
            ],
            "cluster_count": len(self.clusters),
            "peripheral": [
                {"center_re": float(c.center.real), "center_im": float(c.center.imag)}
                for c in self.peripheral_clusters
            ],
        }


@dataclass(frozen=True)
class ProjectionData:
    P: np.ndarray
    cluster: EigenvalueCluster
    method: str
    residual: float
    right: np.ndarray = None
    left: np.ndarray = None


def _greedy_clusters(ev, tol):
    centers, members = [], []
    for i, z in enumerate(ev):
        for c in range(len(centers)):
            if abs(z - centers[c]) <= tol:
                members[c].append(i)
                centers[c] = np.mean(ev[members[c]])
                break
        else:
            centers.append(z)
            members.append([i])
    return centers, members


def reorder_schur(schur, members):
    """Move the Schur diagonal entries listed in ``members`` to the top.

    Returns
    -------
    T, Q, sep : ndarray, ndarray, float
        Reordered triangular factor, unitary factor and the LAPACK estimate
        of the separation between the leading block and the rest.
    """
    n = schur.n
    select = np.zeros(n, dtype=np.int32)
    select[list(members)] = 1
    T, Q, _, m, _, sep, info = lapack.ztrsen(select, schur.triangular, schur.unitary,
                                              lwork=max(1, n * n // 2 + n))
    if info != 0:
        raise NumericalFailure("Schur reordering failed", info=int(info),
                               block=[int(i) for i in members])
    return np.triu(T), Q, float(sep)


def _rank(M, thresh):
    if M.size == 0:
        return 0
    s = np.linalg.svd(M, compute_uv=False)
    return int(np.sum(s > thresh))


def _multiplicities(schur, members, center, nA):
    m = len(members)
    if m == 1:
        return 1, 1
    T, _, _ = reorder_schur(schur, members)
    N = T[:m, :m] - center * np.eye(m)
    scale = max(1.0, nA)
    ranks = [m]
    Nk = np.eye(m, dtype=complex)
    for k in range(1, m + 2):
        Nk = Nk @ N
        ranks.append(_rank(Nk, TOL_RANK * scale ** k))
        if ranks[-1] == ranks[-2]:
            break
    geometric = m - ranks[1]
    pole = next(k for k in range(1, len(ranks)) if ranks[k] == ranks[k - 1]) - 1
    pole = max(pole, 1)
    return geometric, pole


def spectrum_report(A, tol_cluster=None):
    """Cluster the spectrum of ``A`` and summarize its peripheral structure.

    Parameters
    ----------
    A : array_like
        Square matrix.
    tol_cluster : float, optional
        Clustering radius, default ``1e-7 * max(1, ||A||)``.

    Returns
    -------
    SpectrumReport
    """
    A = as_matrix(A)
    nA = norm2(A)
    if tol_cluster is None:
        tol_cluster = 1e-7 * max(1.0, nA)
    schur = schur_decompose(A)
    ev = schur.eigenvalues
    centers, members = _greedy_clusters(ev, tol_cluster)
    order = sorted(range(len(centers)),
                   key=lambda c: (-round(centers[c].real / tol_cluster),
                                  centers[c].imag))
    clusters = []
    for c in order:
        mem = tuple(sorted(members[c]))
        geo, pole = _multiplicities(schur, mem, centers[c], nA)
        clusters.append(EigenvalueCluster(complex(centers[c]), mem, len(mem), geo, pole))
    warnings = []
    cs = np.array([c.center for c in clusters])
    if len(cs) > 1:
        d = np.abs(cs[:, None] - cs[None, :]) + np.diag(np.full(len(cs), np.inf))
        if np.min(d) <= 2 * tol_cluster:
            warnings.append("ambiguous clustering: two cluster centers within 2*tol_cluster")
    s = float(max(c.center.real for c in clusters))
    peripheral = tuple(i for i, c in enumerate(clusters)
                       if abs(c.center.real - s) <= tol_cluster)
    rest = [c.center.real for i, c in enumerate(clusters) if i not in peripheral]
    margin = s - max(rest) if rest else float("inf")
    dominant = len(peripheral) == 1 and abs(clusters[peripheral[0]].center.imag) <= tol_cluster
    return SpectrumReport(clusters, s, peripheral, bool(dominant), float(margin),
                          float(tol_cluster), schur, nA, tuple(warnings))


def _projection_residual(A, P):
    nA = max(norm2(A), 1e-300)
    return float(max(norm2(P @ P - P) / max(1.0, norm2(P)),
                     norm2(A @ P - P @ A) / (nA * max(1.0, norm2(P)))))


def spectral_projection(A, cluster, report=None):
    """Riesz projection onto the generalized eigenspace of ``cluster``.

    Parameters
    ----------
    A : array_like
        Square matrix.
    cluster : EigenvalueCluster or complex
        Cluster from ``report`` (or a spectral value to look up).
    report : SpectrumReport, optional
        Report the cluster belongs to; computed if omitted.

    Returns
    -------
    ProjectionData

    Raises
    ------
    NumericalFailure
        If the cluster is not isolated (distance to the rest of the
        spectrum at most ``4 * tol_cluster``) or the Sylvester equation is
        ill conditioned.
    """
    A = as_matrix(A)
    if report is None:
        report = spectrum_report(A)
    if not isinstance(cluster, EigenvalueCluster):
        cluster = report.cluster_near(complex(cluster))
    schur = report.schur
    n = schur.n
    ev = schur.eigenvalues
    others = np.setdiff1d(np.arange(n), cluster.members)
    if len(others):
        gap = float(np.min(np.abs(ev[others][:, None] - ev[list(cluster.members)][None, :])))
        if gap <= 4 * report.tol_cluster:
            raise NumericalFailure("cluster not isolated", gap=gap,
                                   tol_cluster=report.tol_cluster)
    if cluster.algebraic_multiplicity == n:
        P = np.eye(n, dtype=complex)
        return ProjectionData(P, cluster, "schur-sylvester", 0.0)
    if cluster.algebraic_multiplicity == 1:
        ep = eigenpair(schur, cluster.members[0])
        P = np.outer(ep.right, ep.left.conj())
        return ProjectionData(P, cluster, "eigen-dyad", _projection_residual(A, P),
                              ep.right, ep.left)
    m = cluster.algebraic_multiplicity
    T, Q, sep = reorder_schur(schur, cluster.members)
    if sep <= 1e-14 * max(1.0, report.norm):
        raise NumericalFailure("ill-conditioned Sylvester equation", sep=sep)
    Y, scale, info = lapack.ztrsyl(T[:m, :m], T[m:, m:], T[:m, m:], isgn=-1)
    if info < 0 or scale == 0:
        raise NumericalFailure("Sylvester solve failed", info=int(info))
    Y = Y / scale
    Pp = np.zeros((n, n), dtype=complex)
    Pp[:m, :m] = np.eye(m)
    Pp[:m, m:] = Y
    P = Q @ Pp @ Q.conj().T
    return ProjectionData(P, cluster, "schur-sylvester", _projection_residual(A, P))


def projection_by_contour(A, center, radius, m=64, tol=None):
    """Riesz projection by the m-point trapezoid rule on a circle.

    Oracle only. Raises if the circle passes within ``tol`` of an
    eigenvalue (eigenvalues taken from ``numpy.linalg.eigvals``).
    """
    A = as_matrix(A)
    n = A.shape[0]
    if tol is None:
        tol = 1e-8 * max(1.0, norm2(A))
    ev = np.linalg.eigvals(A)
    d = np.min(np.abs(np.abs(ev - center) - radius))
    if d <= tol:
        raise NumericalFailure("contour passes too close to an eigenvalue",
                               distance=float(d), tol=tol)
    theta = 2 * np.pi * (np.arange(m) + 0.5) / m
    P = np.zeros((n, n), dtype=complex)
    for th in theta:
        w = radius * np.exp(1j * th)
        P += w * resolvent(A, center + w)
    return P / m


def projection_by_abel(A, lam0, ctx=None, steps=6, levels=0, scale=1.0):
    """Abel-mean approximation ``(lam - lam0) R(lam, A)`` of the projection at ``lam0``.

    Evaluated at ``lam = lam0 + scale * 10**-steps``. With ``levels > 0``
    the values at offsets ``delta / 2**j`` are Richardson-extrapolated,
    removing the Laurent terms ``delta**1 .. delta**levels``. Oracle only;
    the plain version has error O(delta).
    """
    A = as_matrix(A)
    delta = scale * 10.0 ** (-steps)
    vals = [delta / 2 ** j * resolvent(A, lam0 + delta / 2 ** j) for j in range(levels + 1)]
    for k in range(1, levels + 1):
        f = 2.0 ** k
        vals = [(f * vals[j + 1] - vals[j]) / (f - 1) for j in range(len(vals) - 1)]
    return vals[0]


def projection_by_power(A, lam, iterations=60):
    """Power ``[lam R(lam, A)]^n``, converging to the projection at s(A) = 0.

    Raises
    ------
    NumericalFailure
        If the powers grow (``s(A) > 0`` or a higher order pole at 0).
    """
    A = as_matrix(A)
    if lam <= 0:
        raise ValueError("lam must be positive")
    M = lam * resolvent(A, lam)
    out = np.linalg.matrix_power(M, int(iterations))
    nrm = norm2(out)
    if not np.isfinite(nrm) or nrm > 1e6 * max(1.0, norm2(M)):
        raise NumericalFailure("power iteration diverges", norm=float(nrm),
                               iterations=int(iterations))
    return out


def abel_growth_check(A, lam0, ctx=None, samples=6, report=None):
    """Sample ``||(lam - lam0) R(lam, A)||`` at ``lam = lam0 + 10**-j``.

    Returns
    -------
    dict
        ``bounded`` (last three values within a factor 10), ``values``,
        ``pole_order`` from the spectrum report and ``consistent``.
    """
    A = as_matrix(A)
    values = []
    for j in range(1, samples + 1):
        d = 10.0 ** (-j)
        M = d * resolvent(A, lam0 + d)
        values.append(float(operator_norm(M, ctx) if ctx is not None else norm2(M)))
    tail = values[-3:]
    bounded = bool(max(tail) / max(min(tail), 1e-300) < 10.0)
    if report is None:
        report = spectrum_report(A)
    try:
        pole = report.cluster_near(lam0).pole_order
    except NumericalFailure:
        pole = 0
    return {"bounded": bounded, "values": values, "pole_order": pole,
            "consistent": bounded == (pole <= 1)}
