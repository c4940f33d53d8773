"""Bessel functions, their zeros, and root counting for characteristic functions.

Bessel J_k and I_k are evaluated for real arguments by the power series
(small x) or Miller's backward recurrence normalized by the Neumann sums
``J_0 + 2 sum J_2m = 1`` and ``I_0 + 2 sum I_m = e^x``.
"""
from dataclasses import dataclass, field
from typing import Callable, List, Tuple

import numpy as np
from scipy.special import gammaln

from .errors import NumericalFailure

K_MAX = 60
X_MAX = 1e3
_SERIES_X = 2.0
_BIG = 1e250


def _check_args(k, x):
    x = np.asarray(x, float)
    if k < 0 or k > K_MAX + 1:
        raise NumericalFailure("Bessel order out of range", k=int(k), k_max=K_MAX)
    if np.any(x < 0) or np.any(x > X_MAX) or not np.all(np.isfinite(x)):
        raise NumericalFailure("Bessel argument out of range", x_max=X_MAX)
    return x


def _series(kmax, x, modified):
    # sum_m (+-1)^m (x/2)^(2m+k) / (m! (m+k)!)
    x = np.atleast_1d(x)
    out = np.zeros((kmax + 1, x.size))
    half = x / 2
    sign = 1.0 if modified else -1.0
    with np.errstate(divide="ignore"):
        lh = np.log(half)
    for k in range(kmax + 1):
        acc = np.zeros(x.size)
        for m in range(40):
            coef = np.exp((2 * m + k) * lh - gammaln(m + 1) - gammaln(m + k + 1)) if k + m > 0 \
                else np.ones(x.size)
            acc += sign ** m * np.where(x > 0, coef, 1.0 if (m == 0 and k == 0) else 0.0)
        out[k] = acc
    return out


def _miller(kmax, x, modified):
    x = np.atleast_1d(x).astype(float)
    top = max(kmax, int(np.max(x)))
    N = 2 * ((top + int(np.sqrt(40 * top + 1)) + 20) // 2)
    f_next = np.zeros(x.size)
    f = np.full(x.size, 1e-30)
    vals = np.zeros((kmax + 1, x.size))
    norm = np.zeros(x.size)
    for k in range(N, 0, -1):
        # f holds f_k, f_next holds f_{k+1}
        if k <= kmax:
            vals[k] = f
        if modified:
            norm += 2 * f
        elif k % 2 == 0:
            norm += 2 * f
        f_prev = (2 * k / x) * f + (f_next if modified else -f_next)
        f_next, f = f, f_prev
        big = np.abs(f) > _BIG
        if np.any(big):
            for arr in (vals, ):
                arr[:, big] /= _BIG
            f[big] /= _BIG
            f_next[big] /= _BIG
            norm[big] /= _BIG
    vals[0] = f
    norm += f
    if modified:
        return vals / norm, True  # scaled by e^{-x}
    return vals / norm, False


def bessel_j_table(kmax, x):
    """``J_0 .. J_kmax`` at the points ``x``; shape ``(kmax+1, len(x))``."""
    x = _check_args(kmax, x)
    xs = np.atleast_1d(x)
    out = np.empty((kmax + 1, xs.size))
    small = xs <= _SERIES_X
    if np.any(small):
        out[:, small] = _series(kmax, xs[small], False)
    if np.any(~small):
        out[:, ~small] = _miller(kmax, xs[~small], False)[0]
    return out


def bessel_i_table(kmax, x, scaled=False):
    """``I_0 .. I_kmax`` at ``x``; with ``scaled=True`` returns ``e^{-x} I_k(x)``."""
    x = _check_args(kmax, x)
    xs = np.atleast_1d(x)
    out = np.empty((kmax + 1, xs.size))
    small = xs <= _SERIES_X
    if np.any(small):
        out[:, small] = _series(kmax, xs[small], True) * (np.exp(-xs[small]) if scaled else 1.0)
    if np.any(~small):
        v = _miller(kmax, xs[~small], True)[0]
        if scaled:
            out[:, ~small] = v
        else:
            if np.any(xs[~small] > 700):
                raise NumericalFailure("I_k overflows; use scaled=True", x_max=float(np.max(xs)))
            out[:, ~small] = v * np.exp(xs[~small])
    return out


def _scalar(table, k, x):
    r = table[k]
    return float(r[0]) if np.ndim(x) == 0 else r


def bessel_j(k, x):
    """Bessel function of the first kind ``J_k(x)`` for integer ``0 <= k <= 60``."""
    return _scalar(bessel_j_table(k, x), k, x)


def bessel_j_prime(k, x):
    """Derivative ``J_k'(x)``; ``J_0' = -J_1`` and ``J_k' = J_{k-1} - (k/x) J_k``."""
    xs = np.atleast_1d(np.asarray(x, float))
    t = bessel_j_table(k + 1, xs)
    if k == 0:
        d = -t[1]
    else:
        with np.errstate(divide="ignore", invalid="ignore"):
            d = np.where(xs > 0, t[k - 1] - k / xs * t[k], 0.5 * (t[k - 1] - t[k + 1]))
    return float(d[0]) if np.ndim(x) == 0 else d


def bessel_i(k, x, scaled=False):
    """Modified Bessel function ``I_k(x)`` (optionally times ``e^{-x}``)."""
    return _scalar(bessel_i_table(k, x, scaled), k, x)


def bessel_i_prime(k, x, scaled=False):
    """Derivative ``I_k'(x)``; ``I_0' = I_1`` and ``I_k' = I_{k-1} - (k/x) I_k``."""
    xs = np.atleast_1d(np.asarray(x, float))
    t = bessel_i_table(k + 1, xs, scaled)
    if k == 0:
        d = t[1]
    else:
        with np.errstate(divide="ignore", invalid="ignore"):
            d = np.where(xs > 0, t[k - 1] - k / xs * t[k], 0.5 * (t[k - 1] + t[k + 1]))
    return float(d[0]) if np.ndim(x) == 0 else d


def safeguarded_newton(f, df, a, b, tol=1e-15, maxiter=100):
    """Newton iteration kept inside the sign-change bracket ``[a, b]`` by bisection."""
    fa, fb = f(a), f(b)
    if fa == 0:
        return a
    if fb == 0:
        return b
    if np.sign(fa) == np.sign(fb):
        raise NumericalFailure("no sign change in bracket", a=a, b=b, fa=fa, fb=fb)
    lo, hi = (a, b) if fa < 0 else (b, a)
    x = 0.5 * (a + b)
    for _ in range(maxiter):
        fx, dx = f(x), df(x)
        if fx == 0:
            return x
        if fx < 0:
            lo = x
        else:
            hi = x
        step = fx / dx if dx != 0 else np.inf
        xn = x - step
        if not (min(lo, hi) < xn < max(lo, hi)):
            xn = 0.5 * (lo + hi)
        if abs(xn - x) <= tol * max(1.0, abs(x)):
            return xn
        x = xn
    return x


def _sign_change_scan(f, a, b, count, step):
    xs = np.arange(a, b + step, step)
    vals = f(xs)
    idx = np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)[0]
    if len(idx) < count:
        raise NumericalFailure("sign-change scan found too few zeros",
                               found=int(len(idx)), wanted=int(count), interval=(a, b))
    i = idx[count - 1]
    return float(xs[i]), float(xs[i + 1])


def bessel_zero(k, l):
    """The ``l``-th positive zero ``j_{k,l}`` of ``J_k``.

    Newton from McMahon's asymptotic guess; if Newton leaves the
    neighbourhood or lands on the wrong zero, falls back to bisection on a
    sign-change scan.
    """
    if not (0 <= k <= K_MAX) or not (1 <= l <= 20):
        raise NumericalFailure("zero index out of range", k=k, l=l)
    f = lambda x: bessel_j(k, x)
    df = lambda x: bessel_j_prime(k, x)
    mu = 4.0 * k * k
    beta = (l + k / 2 - 0.25) * np.pi
    x = beta - (mu - 1) / (8 * beta) - 4 * (mu - 1) * (7 * mu - 31) / (3 * (8 * beta) ** 3)
    ok = x > k
    for _ in range(50):
        if not ok:
            break
        d = df(x)
        if d == 0:
            ok = False
            break
        step = f(x) / d
        x -= step
        if not (k <= x <= X_MAX):
            ok = False
            break
        if abs(step) < 1e-15 * x:
            break
    if ok:
        # verify this is the l-th zero by counting sign changes below it
        xs = np.linspace(1e-9, x - 1e-6 * max(1, x), int(20 * x) + 50)
        v = bessel_j_table(k, xs)[k]
        below = int(np.sum(np.sign(v[:-1]) * np.sign(v[1:]) < 0))
        ok = below == l - 1 and abs(f(x)) <= 1e-12
    if not ok:
        a, b = _sign_change_scan(lambda xs: bessel_j_table(k, xs)[k], max(k, 1e-9),
                                 (l + k / 2 + 2) * np.pi + k, l, 0.05)
        x = safeguarded_newton(f, df, a, b)
    return float(x)


# characteristic functions and argument-principle root counting

@dataclass(frozen=True)
class CharFunction:
    """Analytic characteristic function with derivative (both vectorized)."""

    name: str
    evaluator: Callable
    derivative: Callable

    def __call__(self, z):
        return self.evaluator(z)


def delay_char():
    """``h(z) = z - e^{-2z} + e^{-z}``."""
    return CharFunction("delay_char",
                        lambda z: z - np.exp(-2 * z) + np.exp(-z),
                        lambda z: 1 + 2 * np.exp(-2 * z) - np.exp(-z))


def network_char(l=np.sqrt(2)):
    """``det S(z) = (e^{-z} - 2)(e^{-z l} - 2) - e^{-z} e^{-z l}``."""
    def f(z):
        a, b = np.exp(-z), np.exp(-z * l)
        return (a - 2) * (b - 2) - a * b

    def df(z):
        return 2 * np.exp(-z) + 2 * l * np.exp(-z * l)

    return CharFunction("network_char", f, df)


def bose_char_k0(q0):
    """``sqrt(z) J_0'(sqrt(z)) + q0 J_0(sqrt(z))`` as an entire function of z.

    Uses the power series in z, so complex arguments are allowed.
    """
    M = 60
    m = np.arange(M)
    a = (-0.25) ** m / np.exp(2 * gammaln(m + 1))          # J_0(sqrt z)
    b = (-0.25) ** m / np.exp(gammaln(m + 1) + gammaln(m + 2))  # sqrt(z) J_1(sqrt z) = z/2 * sum b z^m
    c = q0 * a
    c[1:] -= 0.5 * b[:-1]
    dc = c[1:] * np.arange(1, M)
    poly = np.polynomial.polynomial.polyval
    return CharFunction("bose_k0", lambda z: poly(z, c), lambda z: poly(z, dc))


def _boundary(rect, n):
    a, b, c, d = rect
    t = np.arange(n) / n
    bottom = a + (b - a) * t + 1j * c
    right = b + 1j * (c + (d - c) * t)
    top = b + (a - b) * t + 1j * d
    left = a + 1j * (d + (c - d) * t)
    z = np.concatenate([bottom, right, top, left])
    return z


def _winding(f, rect, n):
    z = _boundary(rect, n)
    v = f(z)
    if not np.all(np.isfinite(v)):
        raise NumericalFailure("characteristic function not finite on contour")
    v = np.append(v, v[0])
    with np.errstate(divide="ignore", invalid="ignore"):
        dphi = np.angle(v[1:] / v[:-1])
    return float(np.sum(dphi) / (2 * np.pi)), float(np.max(np.abs(dphi))), \
        float(np.min(np.abs(v))), float(np.max(np.abs(v)))


def count_roots(f, rect, samples_per_side=256, max_doublings=10):
    """Number of roots of ``f`` inside the rectangle (argument principle).

    Parameters
    ----------
    f : CharFunction or callable
        Vectorized analytic function.
    rect : tuple
        ``(re_min, re_max, im_min, im_max)``.
    samples_per_side : int
        Initial sampling; doubled until the counts of successive
        refinements agree twice and no phase jump exceeds pi/2.

    Raises
    ------
    NumericalFailure
        If a root lies (numerically) on the contour or the winding number
        is not within 0.1 of an integer.
    """
    n = int(samples_per_side)
    history = []
    for _ in range(max_doublings + 1):
        w, jump, fmin, fmax = _winding(f, rect, n)
        if fmin <= 1e-10 * max(fmax, 1e-300):
            raise NumericalFailure("root too close to the contour; subdivide differently",
                                   min_abs=fmin, rect=list(rect))
        if jump < np.pi / 2:
            history.append(w)
            if len(history) >= 3 and round(history[-1]) == round(history[-2]) == round(history[-3]):
                break
        n *= 2
    else:
        raise NumericalFailure("winding number did not stabilize", rect=list(rect),
                               history=history)
    w = history[-1]
    if abs(w - round(w)) > 0.1:
        raise NumericalFailure("winding number not near an integer; subdivide",
                               winding=w, rect=list(rect))
    return int(round(w))


@dataclass
class RootSet:
    roots: List[complex]
    residuals: List[float]
    region: Tuple[float, float, float, float]
    count_by_argument: int
    mismatch: bool = False
    rejected: List[dict] = field(default_factory=list)

    def to_dict(self):
        return {
            "region": list(self.region),
            "count_by_argument": self.count_by_argument,
            "mismatch": self.mismatch,
            "roots": [{"re": float(z.real), "im": float(z.imag), "residual": r}
                      for z, r in zip(self.roots, self.residuals)],
            "rejected": self.rejected,
        }


def _inside(z, rect, pad=0.0):
    a, b, c, d = rect
    return a - pad <= z.real <= b + pad and c - pad <= z.imag <= d + pad


def refine_roots(f, rect, seeds, count=None, tol=1e-11, maxiter=60):
    """Newton-refine ``seeds`` to roots of ``f`` inside ``rect``.

    Roots closer than 1e-8 are merged. Seeds that do not converge or leave
    the rectangle go to ``rejected``.
    """
    df = f.derivative
    roots, res, rejected = [], [], []
    for s in seeds:
        z = complex(s)
        ok = False
        for it in range(maxiter):
            fz = complex(f(np.array([z]))[0])
            if abs(fz) <= tol:
                ok = True
                # two polishing steps
                for _ in range(2):
                    d = complex(df(np.array([z]))[0])
                    zn = z - fz / d if d != 0 else z
                    fn = complex(f(np.array([zn]))[0])
                    if not abs(fn) < abs(fz):
                        break
                    z, fz = zn, fn
                break
            d = complex(df(np.array([z]))[0])
            if d == 0:
                break
            z -= fz / d
            if not np.isfinite(z):
                break
        r = abs(complex(f(np.array([z]))[0])) if np.isfinite(z) else float("inf")
        if not ok and r <= tol:
            ok = True
        if ok and _inside(z, rect):
            if all(abs(z - q) > 1e-8 for q in roots):
                roots.append(z)
                res.append(float(r))
        else:
            rejected.append({"seed_re": float(np.real(s)), "seed_im": float(np.imag(s)),
                             "last_re": float(np.real(z)) if np.isfinite(z) else None,
                             "last_im": float(np.imag(z)) if np.isfinite(z) else None,
                             "residual": float(r),
                             "reason": "outside region" if ok else "no convergence"})
    if count is None:
        count = count_roots(f, rect)
    order = np.lexsort((np.imag(roots), -np.real(roots))) if roots else []
    roots = [roots[i] for i in order]
    res = [res[i] for i in order]
    return RootSet(roots, res, tuple(rect), count, mismatch=(len(roots) != count),
                   rejected=rejected)


def _moment_seed(f, rect, n=512):
    # (1/2 pi i) contour integral of z f'/f dz over the rectangle
    z = _boundary(rect, n)
    z = np.append(z, z[0])
    g = z * f.derivative(z) / f(z)
    I = np.sum(0.5 * (g[1:] + g[:-1]) * np.diff(z))
    return I / (2j * np.pi)


def find_roots(f, rect, max_depth=20, min_size=1e-6, seed_size=2.0):
    """Locate all roots in ``rect`` by recursive subdivision and Newton refinement."""
    seeds = []

    def rec(r, depth, cnt):
        if cnt == 0:
            return
        a, b, c, d = r
        # moment seeds are only reliable on small boxes
        small = max(b - a, d - c) <= seed_size
        if (cnt == 1 and small) or depth >= max_depth or max(b - a, d - c) < min_size:
            s = _moment_seed(f, r) / cnt
            seeds.append(s)
            return
        for frac in (0.4987, 0.4713, 0.5291, 0.4411):
            if (b - a) >= (d - c):
                cut = a + (b - a) * frac
                parts = [(a, cut, c, d), (cut, b, c, d)]
            else:
                cut = c + (d - c) * frac
                parts = [(a, b, c, cut), (a, b, cut, d)]
            try:
                counts = [count_roots(f, p) for p in parts]
                break
            except NumericalFailure:
                continue  # root on the cut: move it
        else:
            raise NumericalFailure("subdivision failed", rect=list(r))
        for p, k in zip(parts, counts):
            rec(p, depth + 1, k)

    total = count_roots(f, rect)
    rec(tuple(rect), 0, total)
    return refine_roots(f, rect, seeds, count=total)
