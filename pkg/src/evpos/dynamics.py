"""Time-domain simulators for the delay equation and the graph transport flow."""
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.ndimage import minimum_filter1d

from .errors import NumericalFailure
from . import lattice
from .lattice import LatticeContext, dist_to_cone


@dataclass
class SimulationTrace:
    times: np.ndarray
    d_plus: np.ndarray
    functionals: dict
    min_value: np.ndarray
    snapshots: dict = field(default_factory=dict)
    final_state: object = None

    def columns(self):
        cols = {"t": self.times, "d_plus": self.d_plus, "min_value": self.min_value}
        cols.update(self.functionals)
        return cols


# delay equation y'(t) = y(t-2) - y(t-1) --------------------------------------

@dataclass
class DelayState:
    """History segment ``y`` on [-2, 0] (relative to ``t_now``) at spacing ``h``."""

    grid: np.ndarray
    t_now: float = 0.0

    @property
    def h(self):
        return 2.0 / (len(self.grid) - 1)


def _steps_per_unit(h):
    m = int(round(1.0 / h))
    if m < 1 or abs(m * h - 1.0) > 1e-9:
        raise NumericalFailure("step must divide 1 (h = 1/m)", h=h)
    return m


def _history_half_grid(history, m):
    """Samples on [-2, 0] at spacing h/2 (4m + 1 values)."""
    xs = np.linspace(-2.0, 0.0, 4 * m + 1)
    if callable(history):
        return np.asarray(history(xs), float) * np.ones_like(xs)
    vals = np.asarray(history, float)
    if vals.size == 4 * m + 1:
        return vals.copy()
    if vals.size == 2 * m + 1:
        return CubicSpline(np.linspace(-2.0, 0.0, 2 * m + 1), vals)(xs)
    raise NumericalFailure("history must have 2/h + 1 samples", expected=2 * m + 1,
                           got=int(vals.size))


def simulate_delay(history, T, h, record_every=1):
    """Integrate ``y'(t) = y(t-2) - y(t-1)`` by the method of steps.

    Classical RK4 with step ``h``; the right-hand side does not depend on
    ``y(t)``, so each step is Simpson's rule on the delayed values. Values
    at half steps are stored, those for ``t > 0`` from the cubic Hermite
    interpolant through the nodes (the derivative is known from the
    equation). With this storage the functional ``phi`` below is conserved
    up to rounding.

    Parameters
    ----------
    history : callable or array_like
        Function on [-2, 0] or samples at spacing ``h`` (or ``h/2``).
    T : float
        Final time, a multiple of ``h``.
    h : float
        Step, ``h = 1/m``.
    record_every : int
        Record the trace every this many steps.

    Returns
    -------
    SimulationTrace
        ``functionals["phi"]`` holds ``y(t) + int_{t-2}^{t-1} y``;
        ``d_plus`` and ``min_value`` refer to the segment on [t-2, t] in the
        sup norm. ``snapshots`` holds the full-step solution arrays
        ``t`` and ``y`` (including the history).
    """
    m = _steps_per_unit(h)
    h = 1.0 / m
    n_steps = int(round(T / h))
    if abs(n_steps * h - T) > 1e-9 * max(1.0, T):
        raise NumericalFailure("T must be a multiple of h", T=T, h=h)
    units = int(np.ceil(n_steps / m))
    Yh = np.empty(4 * m + 1 + 2 * m * units)
    Yh[:4 * m + 1] = _history_half_grid(history, m)
    for j in range(units):
        n = np.arange(j * m, (j + 1) * m)          # steps t_n -> t_{n+1}, t_n = n h
        F = n + 2 * m                              # full index of t_n
        g_node = Yh[2 * (F - 2 * m)] - Yh[2 * (F - m)]
        g_next = Yh[2 * (F + 1 - 2 * m)] - Yh[2 * (F + 1 - m)]
        g_mid = Yh[2 * (F - 2 * m) + 1] - Yh[2 * (F - m) + 1]
        incr = h / 6.0 * (g_node + 4.0 * g_mid + g_next)
        y0 = Yh[2 * F[0]]
        ynext = y0 + np.cumsum(incr)
        ycur = np.concatenate([[y0], ynext[:-1]])
        Yh[2 * (F + 1)] = ynext
        Yh[2 * F + 1] = 0.5 * (ycur + ynext) + h * (g_node - g_next) / 8.0
    n_full = 2 * m + n_steps + 1
    Yh = Yh[:2 * (n_full - 1) + 1]
    y_full = Yh[::2]
    t_full = -2.0 + h * np.arange(n_full)
    panels = h / 6.0 * (Yh[0:-1:2] + 4.0 * Yh[1::2] + Yh[2::2])
    C = np.concatenate([[0.0], np.cumsum(panels)])
    idx = np.arange(0, n_steps + 1, record_every)
    phi = y_full[idx + 2 * m] + (C[idx + m] - C[idx])
    seg_min = minimum_filter1d(y_full, 2 * m + 1, origin=m, mode="nearest")[idx + 2 * m]
    # sup-norm distance of a segment = residual of its minimum
    d_plus = lattice.cone_residual(seg_min)
    state = DelayState(y_full[-(2 * m + 1):].copy(), float(n_steps * h))
    return SimulationTrace(idx * h, d_plus, {"phi": phi}, seg_min,
                           {"t": t_full, "y": y_full}, state)



def delay_phi(samples, h):
    """``phi(f) = f(0) + int_{-2}^{-1} f`` for samples at spacing ``h`` on [-2, 0]."""
    m = _steps_per_unit(h)
    f = np.asarray(samples, float)
    seg = f[:m + 1]
    w = np.full(m + 1, h)
    w[0] = w[-1] = h / 2
    return float(f[-1] + w @ seg)


def hat_history(center=-1.0, half_width=0.25, height=1.0):
    """Hat function on [-2, 0] centred at ``center``."""
    def f(x):
        return height * np.maximum(0.0, 1.0 - np.abs(np.asarray(x) - center) / half_width)
    return f


def delay_sign_change_search(history, T=200.0, h=1e-2, window=20.0):
    """Look for late sign changes of a delay solution.

    Reports the last time at which the solution is negative, the number
    of sign changes of ``y`` in the final ``window`` and the size of the
    late solution. Findings only; no claim is derived from them.
    """
    tr = simulate_delay(history, T, h)
    t, y = tr.snapshots["t"], tr.snapshots["y"]
    late = t >= T - window
    s = np.sign(y[late])
    changes = int(np.sum(s[:-1] * s[1:] < 0))
    neg = np.nonzero(y < 0)[0]
    return {"phi": float(tr.functionals["phi"][0]),
            "last_negative_time": float(t[neg[-1]]) if len(neg) else None,
            "late_sign_changes": changes,
            "late_max_abs": float(np.max(np.abs(y[late]))),
            "T": T}


# transport on the three-edge graph -------------------------------------------

@dataclass
class GraphState:
    """Cell averages on the edges of lengths 1, 1 and l (flow from 0 to the end)."""

    edge_profiles: tuple
    widths: tuple

    def mass(self, weights=(1.0 / 3.0, 1.0, 1.0)):
        return float(sum(c * w * np.sum(f) for c, w, f in
                         zip(weights, self.widths, self.edge_profiles)))


def graph_grid(l, N):
    M = int(round(l * N))
    return N, N, M, (1.0 / N, 1.0 / N, l / M)


def graph_state(l, N, f1=None, f2=None, f3=None):
    """Build a :class:`GraphState` by sampling functions at cell centres."""
    n1, n2, n3, w = graph_grid(l, N)
    profs = []
    for f, n, wi in zip((f1, f2, f3), (n1, n2, n3), w):
        x = (np.arange(n) + 0.5) * wi
        profs.append(np.zeros(n) if f is None else np.asarray(f(x), float) * np.ones(n))
    return GraphState(tuple(profs), w)


def bump(center=0.5, half_width=0.25, height=1.0):
    """Smooth cos^2 bump; its integral is ``height * half_width``."""
    def f(x):
        z = (np.asarray(x) - center) / half_width
        return np.where(np.abs(z) < 1, height * np.cos(0.5 * np.pi * z) ** 2, 0.0)
    return f


def graph_context(state):
    w = np.concatenate([np.full(len(p), wi) for p, wi in zip(state.edge_profiles, state.widths)])
    return LatticeContext(len(w), 1, w, np.ones(len(w)))


def _advect(c, inflow, nu):
    if abs(nu - 1.0) <= 1e-12:
        out = c[-1]
        c[1:] = c[:-1].copy()
        c[0] = inflow
        return out
    out = c[-1]
    prev = np.concatenate([[inflow], c[:-1]])
    c += nu * (prev - c)
    return out


def simulate_graph_flow(init, T, dt, record_every=1, positive_weights=False,
                        snapshot_times=()):
    """Transport with unit speed on the graph with the signed vertex conditions.

    Per step each profile is shifted by ``dt`` (an exact index shift when
    ``dt`` equals the cell width, first-order upwind interpolation
    otherwise); outflow densities feed the inflow conditions

    ``f1(0) = 0``, ``f2(0) = f2(1)/2 + f3(l)/2 - f1(1)/3``,
    ``f3(0) = f2(1)/2 + f3(l)/2 + 2 f1(1)/3``.

    ``positive_weights=True`` replaces ``-1/3`` by ``+1/3`` (a positive
    control scheme which conserves the unweighted mass instead). For the
    signed conditions ``psi = int f1 / 3 + int f2 + int f3`` is conserved
    by this scheme up to rounding.

    Raises
    ------
    NumericalFailure
        If ``dt`` exceeds a cell width (CFL violation).
    """
    widths = init.widths
    nus = [dt / w for w in widths]
    if max(nus) > 1.0 + 1e-12:
        raise NumericalFailure("CFL violation", dt=dt, widths=list(widths))
    f = [np.array(p, float) for p in init.edge_profiles]
    ctx = graph_context(init)
    n_steps = int(round(T / dt))
    a = 1.0 / 3.0 if positive_weights else -1.0 / 3.0
    psi_w = (1.0, 1.0, 1.0) if positive_weights else (1.0 / 3.0, 1.0, 1.0)
    times, dps, mins, psis = [], [], [], []
    snaps = {}
    snap_steps = {int(round(t / dt)): t for t in snapshot_times}

    def record(k):
        v = np.concatenate(f)
        times.append(k * dt)
        dps.append(float(dist_to_cone(v, ctx)))
        mins.append(float(np.min(v)))
        psis.append(sum(c * w * np.sum(p) for c, w, p in zip(psi_w, widths, f)))
        if k in snap_steps:
            snaps[snap_steps[k]] = v.copy()

    record(0)
    for k in range(1, n_steps + 1):
        o1, o2, o3 = f[0][-1], f[1][-1], f[2][-1]
        in2 = 0.5 * o2 + 0.5 * o3 + a * o1
        in3 = 0.5 * o2 + 0.5 * o3 + (2.0 / 3.0) * o1
        _advect(f[0], 0.0, nus[0])
        _advect(f[1], in2, nus[1])
        _advect(f[2], in3, nus[2])
        if k % record_every == 0 or k == n_steps or k in snap_steps:
            record(k)
    final = GraphState(tuple(p.copy() for p in f), widths)
    return SimulationTrace(np.array(times), np.array(dps), {"psi": np.array(psis)},
                           np.array(mins), snaps, final)


# flattening ------------------------------------------------------------------

def extract_state_vector(state, ctx=None):
    """Lattice vector of a :class:`DelayState` or :class:`GraphState`."""
    if isinstance(state, DelayState):
        v = np.asarray(state.grid, float).copy()
    elif isinstance(state, GraphState):
        v = np.concatenate([np.asarray(p, float) for p in state.edge_profiles])
    else:
        raise TypeError("unknown state type")
    if ctx is not None and ctx.n != v.size:
        raise ValueError("context dimension mismatch")
    return v


def unflatten_state(v, template):
    """Inverse of :func:`extract_state_vector` with the layout of ``template``."""
    v = np.asarray(v, float)
    if isinstance(template, DelayState):
        return DelayState(v.copy(), template.t_now)
    sizes = np.cumsum([len(p) for p in template.edge_profiles])[:-1]
    return GraphState(tuple(np.split(v.copy(), sizes)), template.widths)
