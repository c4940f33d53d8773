"""Model constructors: generators, lattice contexts, closed-form oracles and
the classification each model is expected to reproduce."""
from dataclasses import dataclass, field
from functools import partial
from typing import Callable, Optional

import numpy as np
from scipy.linalg import block_diag, solve

from . import classify as C
from . import dynamics
from .errors import ModelError, NumericalFailure
from .lattice import LatticeContext
from .numkernel import resolvent
from .special import (bessel_i_table, bessel_j_table, bessel_zero, delay_char,
                      network_char, safeguarded_newton)


@dataclass(frozen=True)
class ModelBundle:
    """A model ready for analysis.

    ``A`` is ``None`` for simulator-backed models. ``oracles`` may hold
    ``semigroup(t)``, ``resolvent(lam)`` and ``conserved_functionals``
    (weight vectors ``w`` with ``w @ A = 0``). ``predicted`` records the
    expected classification together with a short provenance note.
    ``extras`` carries model-specific handles (characteristic functions,
    simulators, analysis records).
    """

    name: str
    A: Optional[np.ndarray]
    ctx: LatticeContext
    oracles: dict = field(default_factory=dict)
    predicted: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)
    extras: dict = field(default_factory=dict)

    @property
    def n(self):
        return self.ctx.n


# finite-dimensional examples -------------------------------------------------

def spiral3():
    """Rotation towards the positive axis: ``e^{tA}`` converges to a positive
    rank-one projection while orbits keep leaving the cone."""
    A = np.array([[0.0, 0, 0], [0, -1, -1], [0, 1, -1]])

    def semigroup(t):
        c, s = np.cos(t), np.sin(t)
        E = np.zeros((3, 3))
        E[0, 0] = 1.0
        E[1:, 1:] = np.exp(-t) * np.array([[c, -s], [s, c]])
        return E

    def res(lam):
        R = np.zeros((3, 3), dtype=complex)
        R[0, 0] = 1.0 / lam
        a = lam + 1.0
        R[1:, 1:] = np.array([[a, -1.0], [1.0, a]]) / (a * a + 1.0)
        return R

    return ModelBundle(
        "spiral3", A, LatticeContext.sequence(3, np.inf),
        {"semigroup": semigroup, "resolvent": res,
         "conserved_functionals": [np.array([1.0, 0, 0])],
         "projection": np.diag([1.0, 0, 0])},
        {"semigroup": C.UAP, "positive": False, "eventually_positive": False,
         "note": "orbits spiral towards the positive half-axis"})


def stock_inner_matrix():
    """3x3 generator of a bounded, eventually (not) positive semigroup with s = 0."""
    K = np.array([[0.0, 1, -1], [-1, 0, 1], [1, -1, 0]])
    return np.full((3, 3), 1.0 / 3.0) - np.eye(3) + 0.5 * K


def positivity_gap(A_inner, lam0, tol=1e-12):
    """True if ``R(lam0, A_inner)`` has an entry below ``-tol * max|R|``."""
    R = np.real(resolvent(A_inner, lam0))
    return bool(np.min(R) < -tol * np.max(np.abs(R)))


def shifted_direct_sum(A_inner=None, lam0=10.0):
    """``B = (A_inner - lam0 I) (+) 0``: eventually positive semigroup whose
    resolvent fails to be eventually positive at ``s(B) = 0``."""
    A_inner = stock_inner_matrix() if A_inner is None else np.asarray(A_inner, float)
    if lam0 <= 0 or not positivity_gap(A_inner, lam0):
        raise NumericalFailure("R(lam0, A_inner) is positive; lam0 outside the gap set",
                               lam0=float(lam0))
    m = A_inner.shape[0]
    B = block_diag(A_inner - lam0 * np.eye(m), np.zeros((1, 1)))

    def res(lam):
        R = np.zeros((m + 1, m + 1), dtype=complex)
        R[:m, :m] = resolvent(A_inner, lam0 + lam)
        R[m, m] = 1.0 / lam
        return R

    P = np.zeros((m + 1, m + 1))
    P[m, m] = 1.0
    w = np.zeros(m + 1)
    w[m] = 1.0
    return ModelBundle(
        "shifted_direct_sum", B, LatticeContext.sequence(m + 1, np.inf),
        {"resolvent": res, "conserved_functionals": [w], "projection": P},
        {"semigroup": C.UAP, "positive": False, "eventually_positive": True,
         "resolvent_eventually_positive": False,
         "note": "shift of an eventually positive block plus a zero block"},
        {"lam0": float(lam0), "m": m})


def reflection_lp(N=64, p=2):
    """Reflection model on ``L^p(-1, 1)`` discretized at cell midpoints.

    ``A = (-2 I - S)(I - Pi)`` with ``S`` the reflection and ``Pi`` the mean
    projection; ``sigma(A) = {0, -1, -3}``.
    """
    N = int(N)
    if N < 4 or N % 2:
        raise ModelError("N must be even and >= 4")
    x = -1.0 + (np.arange(N) + 0.5) * (2.0 / N)
    Pi = np.full((N, N), 1.0 / N)
    S = np.eye(N)[::-1]
    I = np.eye(N)
    A = (-2.0 * I - S) @ (I - Pi)

    def semigroup(t):
        return Pi + np.exp(-2.0 * t) * (np.cosh(t) * I - np.sinh(t) * S) @ (I - Pi)

    def res(lam):
        return Pi / lam + ((lam + 2.0) * I - S) @ (I - Pi) / ((lam + 2.0) ** 2 - 1.0)

    ctx = LatticeContext(N, p, np.full(N, 2.0 / N), np.ones(N))
    return ModelBundle(
        "reflection_lp", A, ctx,
        {"semigroup": semigroup, "resolvent": res,
         "conserved_functionals": [np.full(N, 2.0 / N)], "projection": Pi},
        {"semigroup": C.UESP, "positive": False,
         "infinite_dimensional": C.RESOLUTION_DEPENDENT,
         "t0_slope": 1.0 / (2.0 * ctx.p),
         "note": "P >> 0 yet onsets of singular profiles grow with the resolution"},
        {"N": N, "p": ctx.p}, {"x": x, "singular_profile": singular_profile(x, ctx.p)})


def singular_profile(x, p):
    """``(1 - x)^(-1/(2p))`` sampled at ``x``."""
    return (1.0 - np.asarray(x)) ** (-1.0 / (2.0 * p))


# PDE discretizations ---------------------------------------------------------

def dirichlet_laplacian_matrix(N):
    h = 1.0 / (N + 1)
    return (np.diag(np.full(N, -2.0)) + np.diag(np.ones(N - 1), 1)
            + np.diag(np.ones(N - 1), -1)) / h ** 2


def dirichlet_green(N):
    """Exact inverse of ``-Delta_D``: ``h x_min (1 - x_max)``."""
    h = 1.0 / (N + 1)
    x = h * np.arange(1, N + 1)
    lo, hi = np.minimum.outer(x, x), np.maximum.outer(x, x)
    return h * lo * (1.0 - hi)


def dirichlet_laplacian_sq_1d(N=64):
    """``A = -Delta_D^2`` on interior nodes of (0, 1); u = dist to the boundary."""
    N = int(N)
    if N < 8:
        raise ModelError("N must be >= 8")
    h = 1.0 / (N + 1)
    x = h * np.arange(1, N + 1)
    L = dirichlet_laplacian_matrix(N)
    A = -L @ L
    k = np.arange(1, N + 1)
    mu = 4.0 / h ** 2 * np.sin(0.5 * np.pi * k * h) ** 2
    V = np.sqrt(2.0 * h) * np.sin(np.pi * np.outer(x, k))

    def semigroup(t):
        return (V * np.exp(-t * mu ** 2)) @ V.T

    def res(lam):
        return (V / (lam + mu ** 2)) @ V.T

    G = dirichlet_green(N)
    u = np.minimum(x, 1.0 - x)
    return ModelBundle(
        "dirichlet_laplacian_sq_1d", A, LatticeContext(N, np.inf, None, u),
        {"semigroup": semigroup, "resolvent": res, "green": G, "resolvent_at_0": G @ G},
        {"semigroup": C.UESP, "positive": False,
         "note": "R(0, A) = R(0, Delta_D)^2 >> 0 with u = dist"},
        {"N": N}, {"x": x})


def bilaplacian_clamped_1d(N=100):
    """``A = -D4`` with clamped ends on interior nodes of (0, 1).

    Ghost nodes ``u_{-1} = u_1`` and ``u_{N+2} = u_N`` (zero first
    difference) give diagonal 7 in the first and last rows.
    """
    N = int(N)
    if N < 10:
        raise ModelError("N must be >= 10")
    h = 1.0 / (N + 1)
    x = h * np.arange(1, N + 1)
    D = (np.diag(np.full(N, 6.0)) + np.diag(np.full(N - 1, -4.0), 1)
         + np.diag(np.full(N - 1, -4.0), -1) + np.diag(np.ones(N - 2), 2)
         + np.diag(np.ones(N - 2), -2))
    D[0, 0] = D[-1, -1] = 7.0
    A = -D / h ** 4
    u = np.minimum(x, 1.0 - x) ** 2
    # ||A|| ~ 16/h^4 while the low eigenvalues are O(1e3) apart: the generic
    # 1e-7 ||A|| cluster radius merges them for N >~ 150
    return ModelBundle(
        "bilaplacian_clamped_1d", A, LatticeContext(N, 2, np.full(N, h), u),
        {}, {"semigroup": C.UESP, "positive": False,
             "note": "simple leading eigenvalue, eigenvector >> dist^2"},
        {"N": N}, {"x": x, "tol_cluster": 1e-10 * 16.0 / h ** 4})


def robin_generator(N, L, B):
    """Cell-centred finite volumes for ``f'' `` with ``-f'(0) + (B gamma)_1 = 0``
    and ``f'(L) + (B gamma)_2 = 0``, ``gamma = (f(0), f(L))``.

    Traces come from half-cell one-sided differences:
    ``(I + (h/2) B) gamma = (f_0, f_{N-1})``.
    """
    B = np.asarray(B, float).reshape(2, 2)
    h = L / N
    G = (np.diag(np.full(N, -2.0)) + np.diag(np.ones(N - 1), 1)
         + np.diag(np.ones(N - 1), -1)) / h ** 2
    G[0, 0] = G[-1, -1] = -1.0 / h ** 2
    T = np.zeros((2, N))
    T[0, 0] = T[1, -1] = 1.0
    BG = B @ solve(np.eye(2) + 0.5 * h * B, T)
    G[0] -= BG[0] / h
    G[-1] -= BG[1] / h
    return G


def nonlocal_robin_1d(N=200, L=1.0, B=((1.0, 1.0), (1.0, 1.0)), name="nonlocal_robin_1d"):
    """Laplacian on (0, L) with the non-local Robin condition ``df/dnu + B trace(f) = 0``."""
    N = int(N)
    if N < 16:
        raise ModelError("N must be >= 16")
    B = np.asarray(B, float).reshape(2, 2)
    h = L / N
    x = (np.arange(N) + 0.5) * h
    A = robin_generator(N, L, B)
    ctx = LatticeContext(N, 2, np.full(N, h), np.ones(N))
    return ModelBundle(name, A, ctx, {}, {}, {"N": N, "L": float(L), "B": B.tolist()},
                       {"x": x})


def nonlocal_robin_thermostat(beta=0.2, N=400):
    """Thermostat ``B = [[0, beta], [0, 0]]`` on (0, pi)."""
    b = nonlocal_robin_1d(N, np.pi, [[0.0, beta], [0.0, 0.0]], "nonlocal_robin_thermostat")
    if beta <= 0:
        pred = {"semigroup": C.POSITIVE, "positive": True}
    elif beta < 0.5:
        pred = {"semigroup": C.UESP, "positive": False}
    else:
        pred = {"semigroup": C.NONE, "positive": False}
    pred["note"] = "eventually strongly positive iff 0 < beta < 1/2, positive iff beta <= 0"
    return ModelBundle(b.name, b.A, b.ctx, {}, pred, {**b.params, "beta": float(beta)},
                       b.extras)


def ones_robin_profile(x):
    """``R(0, -A) 1`` for the ones-matrix condition on (0, 1)."""
    x = np.asarray(x)
    return 0.25 + 0.5 * x - 0.5 * x ** 2


def nonlocal_robin_ones(N=200):
    """Ones-matrix condition ``B = [[1, 1], [1, 1]]`` on (0, 1)."""
    b = nonlocal_robin_1d(N, 1.0, np.ones((2, 2)), "nonlocal_robin_ones")
    return ModelBundle(b.name, b.A, b.ctx, {"resolvent_at_0_ones": ones_robin_profile(b.extras["x"])},
                       {"semigroup": C.UESP, "positive": False,
                        "note": "R(0, -A) >> 0; Beurling-Deny fails"}, b.params, b.extras)


def beurling_deny_witness(B=((1.0, 1.0), (1.0, 1.0)), N=64, L=1.0):
    """Form value ``a(f+, f-)`` for ``f = 2x/L - 1`` on a vertex grid.

    ``a(f, g) = int f' g' + <B trace f, trace g>``; ``f+`` and ``f-`` have
    disjoint supports (N even puts the zero on a node), so only the
    boundary term survives. A positive value violates the Beurling-Deny
    criterion.
    """
    N = int(N) + int(N) % 2
    B = np.asarray(B, float).reshape(2, 2)
    x = np.linspace(0.0, L, N + 1)
    f = 2.0 * x / L - 1.0
    fp, fm = np.maximum(f, 0.0), np.maximum(-f, 0.0)
    h = L / N
    grad = np.sum(np.diff(fp) * np.diff(fm)) / h
    bnd = (B @ np.array([fp[0], fp[-1]])) @ np.array([fm[0], fm[-1]])
    return float(grad + bnd)


# circle / disk ---------------------------------------------------------------

def dtn_symbol(lam, K):
    """Fourier symbol ``d_k``, ``k = 0..K``, of the Dirichlet-to-Neumann map for
    ``Delta f = lam f`` on the unit disk."""
    K = int(K)
    if lam == 0:
        return np.arange(K + 1, dtype=float)
    kap = np.sqrt(abs(lam))
    k = np.arange(K + 1)
    if lam < 0:
        t = bessel_j_table(K + 1, kap)[:, 0]
        jm1 = np.concatenate([[-t[1]], t[:K]])          # J_{-1} = -J_1
        dj = 0.5 * (jm1 - t[1:K + 2])
        # a zero of J_k relative to the local oscillation scale
        small = np.abs(t[:K + 1]) <= 1e-10 * np.hypot(t[:K + 1], dj)
        if np.any(small):
            kb = int(np.nonzero(small)[0][0])
            raise NumericalFailure("symbol pole: J_k(sqrt(-lam)) vanishes", k=kb, lam=float(lam))
        return kap * dj / t[:K + 1]
    t = bessel_i_table(K + 1, kap, scaled=True)[:, 0]
    im1 = np.concatenate([[t[1]], t[:K]])
    di = 0.5 * (im1 + t[1:K + 2])
    return kap * di / t[:K + 1]


def circulant_from_symbol(d):
    """Real symmetric circulant on ``n = 2K + 1`` nodes with even symbol ``d_0..d_K``."""
    d = np.asarray(d, float)
    K = len(d) - 1
    n = 2 * K + 1
    th = 2.0 * np.pi * np.arange(n) / n
    diff = th[:, None] - th[None, :]
    k = np.arange(1, K + 1)
    return (d[0] + 2.0 * np.cos(diff[..., None] * k) @ d[1:]) / n


def dtn_disk(lam=0.0, K=32):
    """Generator ``-D_lam`` on ``2K + 1`` equispaced nodes of the unit circle."""
    K = int(K)
    if K < 8:
        raise ModelError("K must be >= 8")
    d = dtn_symbol(lam, K)
    D = circulant_from_symbol(d)
    n = 2 * K + 1
    dominant = bool(np.all(d[0] < d[1:]))
    ctx = LatticeContext(n, 2, np.full(n, 2.0 * np.pi / n), np.ones(n))
    pred = {"eventually_strongly_positive": dominant,
            "note": "largest eigenvalue -d_0 simple with constant eigenvector"}
    if lam == 0:
        pred["semigroup"] = C.POSITIVE
        pred["positive"] = True
    return ModelBundle("dtn_disk", -D, ctx, {"symbol": d}, pred,
                       {"lam": float(lam), "K": K}, {"eigenvalues": -np.concatenate([d, d[1:]])})


def bose_eigen_condition(k, q):
    """``g(s) = s J_k'(s) + q J_k(s)`` and ``g'(s)``."""
    def g(s):
        t = bessel_j_table(k + 2, s)[:, 0]
        jp = 0.5 * ((-t[1] if k == 0 else t[k - 1]) - t[k + 1])
        return s * jp + q * t[k]

    def dg(s):
        # s J'' = -J' - (s - k^2/s) J
        t = bessel_j_table(k + 2, s)[:, 0]
        jk = t[k]
        jp = 0.5 * ((-t[1] if k == 0 else t[k - 1]) - t[k + 1])
        jpp = -jp / s - (1.0 - k * k / (s * s)) * jk
        return jp + s * jpp + q * jp

    return g, dg


def bose_root(k, q):
    """Smallest ``lam = s^2`` with ``s J_k'(s) + q J_k(s) = 0`` in ``(0, j_{k,1}^2)``."""
    g, dg = bose_eigen_condition(k, q)
    jk1 = bessel_zero(k, 1)
    a, b = 1e-6 * jk1, jk1 * (1 - 1e-12)
    ga, gb = g(a), g(b)
    if not (ga > 0 > gb):
        scan = np.linspace(a, b, 65)
        raise NumericalFailure("Bose root not bracketed", k=k, interval=[a, b],
                               scan=[float(g(s)) for s in scan])
    s = safeguarded_newton(g, dg, a, b)
    return float(s * s), float(abs(g(s)))


def beurling_deny_value(q, m, tail=0.0):
    """``(2/pi) q_0 - (pi/4) q_m + (4/pi) sum_k q_{2km} / ((2k)^2 - 1)^2``.

    Coefficients beyond the given sequence count as zero; ``tail`` is an
    optional bound on the omitted part of the series.
    """
    q = np.asarray(q, float)
    qm = q[m] if m < len(q) else 0.0
    v = 2.0 / np.pi * q[0] - np.pi / 4.0 * qm
    k = 1
    while 2 * k * m < len(q):
        v += 4.0 / np.pi * q[2 * k * m] / ((2 * k) ** 2 - 1) ** 2
        k += 1
    return float(v), float(tail)


def beurling_deny_quadrature(q, m, M=4096):
    """Direct evaluation of ``int int q(th - ph) f+(ph) f-(th)`` for ``f = cos(m .)``
    with ``q(th) = (q_0 + 2 sum q_k cos(k th)) / (2 pi)``."""
    q = np.asarray(q, float)
    th = 2.0 * np.pi * np.arange(M) / M
    k = np.arange(1, len(q))
    qk = (q[0] + 2.0 * np.cos(np.outer(th, k)) @ q[1:]) / (2.0 * np.pi)
    fp, fm = np.maximum(np.cos(m * th), 0.0), np.maximum(-np.cos(m * th), 0.0)
    # q(th_i - th_j) is circulant: apply by FFT
    conv = np.real(np.fft.ifft(np.fft.fft(qk) * np.fft.fft(fp)))
    w = 2.0 * np.pi / M
    return float(w * w * conv @ fm)


def bose_disk(q_coeffs=(1.0,), K=16, M_search=None):
    """Bose condition with convolution kernel ``q``; returns a bundle without a
    matrix and an analysis record in ``extras['analysis']``."""
    q = np.asarray(q_coeffs, float)
    if q[0] <= 0 or np.any(q < 0):
        raise ModelError("need q_0 > 0 and q_k >= 0")
    K = int(K)
    qk = lambda k: q[k] if k < len(q) else 0.0
    roots, res = [], []
    for k in range(K + 1):
        lam, r = bose_root(k, qk(k))
        roots.append(lam)
        res.append(r)
    M = len(q) - 1 if M_search is None else int(M_search)
    M = max(M, 1)
    values = {m: beurling_deny_value(q, m)[0] for m in range(1, M + 1)}
    viol = [m for m, v in values.items() if v > 0]
    analysis = {
        "lambda1": roots[0], "lambda1_residual": res[0],
        "j01_squared": bessel_zero(0, 1) ** 2,
        "roots": roots, "dominant": bool(all(roots[0] < r for r in roots[1:])),
        "beurling_deny": values,
        "violation_m": viol[0] if viol else None,
        "report": (f"violation at m = {viol[0]}" if viol
                   else f"no violation found up to M = {M}"),
    }
    pred = {"semigroup": C.UESP if viol and analysis["dominant"] else None,
            "positive": False if viol else None,
            "note": "eventually strongly positive wrt 1, not positive once a Beurling-Deny value is positive"}
    ctx = LatticeContext.sequence(2 * K + 1, 2)
    return ModelBundle("bose_disk", None, ctx, {}, pred, {"q": q.tolist(), "K": K},
                       {"analysis": analysis})


# simulator-backed models -----------------------------------------------------

def network_flow(l=np.sqrt(2.0), N=256):
    """Transport on two vertices joined by edges of lengths 1, 1 and a loop of length l."""
    if l <= 0:
        raise ModelError("l must be positive")
    N = int(N)
    if N < 32:
        raise ModelError("N must be >= 32")
    n1, n2, n3, w = dynamics.graph_grid(l, N)
    weights = np.concatenate([np.full(n1, w[0]), np.full(n2, w[1]), np.full(n3, w[2])])
    ctx = LatticeContext(len(weights), 1, weights, np.ones(len(weights)))
    fixed = np.concatenate([np.zeros(n1), np.ones(n2 + n3)])
    psi = weights * np.concatenate([np.full(n1, 1.0 / 3.0), np.ones(n2 + n3)])
    return ModelBundle(
        "network_flow", None, ctx,
        {"conserved_functionals": [psi], "fixed_state": fixed},
        {"semigroup": C.UAP, "positive": False,
         "note": "s(A) = 0 dominant for irrational l; signed vertex weight"},
        {"l": float(l), "N": N},
        {"char": network_char(l),
         "state": partial(dynamics.graph_state, l, N),
         "simulate": partial(simulate_network, l=l, N=N)})


def simulate_network(T=100.0, init="bump", l=np.sqrt(2.0), N=256, dt=None, record_every=1,
                     positive_weights=False):
    if isinstance(init, str):
        if init == "bump":
            init = dynamics.graph_state(l, N, f1=dynamics.bump())
        elif init == "fixed":
            init = dynamics.graph_state(l, N, f2=lambda x: 1.0, f3=lambda x: 1.0)
        else:
            raise ModelError(f"unknown init {init!r}")
    # largest stable step: the narrowest cell width
    dt = min(init.widths) if dt is None else dt
    return dynamics.simulate_graph_flow(init, T, dt, record_every, positive_weights)


def delay_model(h=1e-3):
    """``y'(t) = y(t-2) - y(t-1)`` on the state space ``C([-2, 0])``."""
    m = int(round(1.0 / h))
    n = 2 * m + 1
    x = np.linspace(-2.0, 0.0, n)
    ctx = LatticeContext(n, np.inf, None, np.ones(n))
    return ModelBundle(
        "delay", None, ctx,
        {"phi": partial(dynamics.delay_phi, h=1.0 / m)},
        {"semigroup": C.UAP, "positive": False, "eventually_strongly_positive": False,
         "note": "lambda = 0 the only characteristic root with Re >= 0"},
        {"h": 1.0 / m}, {"char": delay_char(), "x": x,
                         "simulate": partial(simulate_delay_model, h=1.0 / m)})


def simulate_delay_model(T=50.0, init="hat", h=1e-3, record_every=1):
    if isinstance(init, str):
        if init == "hat":
            init = dynamics.hat_history()
        elif init in ("constant", "ones"):
            init = lambda x: np.ones_like(x)
        else:
            raise ModelError(f"unknown init {init!r}")
    return dynamics.simulate_delay(init, T, h, record_every)


# truncated infinite direct sums ----------------------------------------------

def rotation_generator_111():
    """Generator of the rotation by angle t about (1, 1, 1)."""
    w = np.ones(3) / np.sqrt(3.0)
    return np.array([[0.0, -w[2], w[1]], [w[2], 0.0, -w[0]], [-w[1], w[0], 0.0]])


def truncated_tower(n_blocks=8, variant="b"):
    """First ``n_blocks`` blocks of a block-diagonal multiplication operator.

    ``a``: ``A_n = n B2 - I/n`` with ``sigma(B2) = {+-i}``;
    ``b``: ``A_n = n B3 - Q/n``; ``c``: ``A_n = B3 - Q/n``, where ``B3``
    rotates about (1, 1, 1) and ``Q`` projects onto its orthogonal
    complement. Finite truncations only show trends in ``n_blocks``.
    """
    n_blocks = int(n_blocks)
    if n_blocks < 1:
        raise ModelError("n_blocks must be >= 1")
    if variant == "a":
        B = np.array([[0.0, -1.0], [1.0, 0.0]])
        blocks = [n * B - np.eye(2) / n for n in range(1, n_blocks + 1)]
        pred = {"semigroup": C.NONE, "infinite_dimensional": C.IAP,
                "note": "empty peripheral spectrum in the limit"}
    elif variant in ("b", "c"):
        B = rotation_generator_111()
        Q = np.eye(3) - np.full((3, 3), 1.0 / 3.0)
        scale = (lambda n: n) if variant == "b" else (lambda n: 1)
        blocks = [scale(n) * B - Q / n for n in range(1, n_blocks + 1)]
        pred = {"semigroup": C.UAP, "infinite_dimensional": C.IAP,
                "note": ("simple pole at 0, not uniformly asymptotically positive in the limit"
                         if variant == "b" else "peripheral spectrum not isolated in the limit")}
    else:
        raise ModelError(f"unknown variant {variant!r}")
    A = block_diag(*blocks)
    return ModelBundle(f"truncated_tower_{variant}", A, LatticeContext.sequence(A.shape[0], 2),
                       {}, pred, {"n_blocks": n_blocks, "variant": variant})


# predictions -----------------------------------------------------------------

def classify_options(bundle, **overrides):
    """Classifier options recommended for ``bundle`` (model-specific cluster radius)."""
    kw = {"tol_cluster": bundle.extras.get("tol_cluster")}
    kw.update(overrides)
    return C.ClassifyOptions(**kw)


_PREDICTED_FLAGS = ("positive", "eventually_positive", "eventually_strongly_positive")


def prediction_mismatches(bundle, sc):
    """Keys of ``bundle.predicted`` not reproduced by the classification ``sc``."""
    bad = []
    pred = bundle.predicted
    if pred.get("semigroup") is not None and pred["semigroup"] != sc.verdict:
        bad.append("semigroup")
    for k in _PREDICTED_FLAGS:
        if pred.get(k) is not None and bool(pred[k]) != bool(getattr(sc, k)):
            bad.append(k)
    return bad


# registry --------------------------------------------------------------------

REGISTRY = {
    "spiral3": spiral3,
    "shifted_direct_sum": lambda lam0=10.0: shifted_direct_sum(None, float(lam0)),
    "reflection_lp": lambda N=64, p=2: reflection_lp(int(N), p),
    "dirichlet_laplacian_sq_1d": lambda N=64: dirichlet_laplacian_sq_1d(int(N)),
    "bilaplacian_clamped_1d": lambda N=100: bilaplacian_clamped_1d(int(N)),
    "nonlocal_robin_thermostat": lambda beta=0.2, N=400: nonlocal_robin_thermostat(float(beta), int(N)),
    "nonlocal_robin_ones": lambda N=200: nonlocal_robin_ones(int(N)),
    "dtn_disk": lambda lam=0.0, K=32: dtn_disk(float(lam), int(K)),
    "bose_disk": lambda q0=1.0, K=16: bose_disk((float(q0),), int(K)),
    "network_flow": lambda l=np.sqrt(2.0), N=256: network_flow(float(l), int(N)),
    "delay": lambda h=1e-3: delay_model(float(h)),
    "truncated_tower": lambda n_blocks=8, variant="b": truncated_tower(int(n_blocks), str(variant)),
}

MATRIX_MODELS = ("spiral3", "shifted_direct_sum", "reflection_lp", "dirichlet_laplacian_sq_1d",
                 "bilaplacian_clamped_1d", "nonlocal_robin_thermostat", "nonlocal_robin_ones",
                 "dtn_disk", "truncated_tower")


def build(name, **params):
    """Construct a registered model; unknown names or parameters raise :class:`ModelError`."""
    if name not in REGISTRY:
        raise ModelError(f"unknown model {name!r}; choose from {sorted(REGISTRY)}")
    try:
        return REGISTRY[name](**params)
    except TypeError as exc:
        raise ModelError(f"bad parameters for {name}: {exc}") from None
