"""Positivity theorems turned into decision procedures.

Each classifier combines a theorem-side verdict computed from exact
spectral data (dominance, pole order, sign structure of the spectral
projection) with empirical samplers that provide numeric witnesses
(onset times, onset offsets, cone distances).
"""
from dataclasses import dataclass, field, asdict
from typing import Optional

import numpy as np
from scipy.linalg import null_space

from .errors import NumericalFailure
from .lattice import (LatticeContext, dist_to_cone, operator_strong_positivity,
                      strong_positivity, PositivityCertificate)
from .numkernel import as_matrix, is_real, norm2, resolvent, Propagator
from .spectral import spectrum_report, spectral_projection, reorder_schur

POSITIVE = "positive"
UESP = "uniformly-eventually-strongly-positive"
IESP = "individually-eventually-strongly-positive"
UAP = "uniformly-asymptotically-positive"
IAP = "individually-asymptotically-positive"
NONE = "none"
UAP_BOUNDED = "uniformly-asymptotically-positive-of-bounded-type"
RESOLUTION_DEPENDENT = "individual (resolution-dependent t0)"


@dataclass
class ClassifyOptions:
    """Tolerances and sampling controls shared by the classifiers."""

    tol_cluster: Optional[float] = None
    tol_entry: float = 1e-9          # relative to max |P|
    tol_strict_rel: float = 1e-10    # for sup-normalized eigenvectors
    eps: float = 1e-6                # relative d+ threshold for onset times
    sample: bool = True
    t_grid: Optional[np.ndarray] = None
    resolvent_samples: int = 20
    delta: Optional[float] = None
    n_max: int = 256
    tail: int = 4

    def as_dict(self):
        d = asdict(self)
        if d["t_grid"] is not None:
            d["t_grid"] = [float(t) for t in np.asarray(d["t_grid"])[[0, -1]]]
        return d


def _opts(opts):
    return ClassifyOptions() if opts is None else opts


def _realify(x, tol=1e-8):
    """Rotate a complex vector to be (nearly) real; returns the real part."""
    x = np.asarray(x)
    if not np.iscomplexobj(x):
        return x.astype(float)
    k = int(np.argmax(np.abs(x)))
    if abs(x[k]) == 0:
        return x.real
    x = x * (abs(x[k]) / x[k])
    return x.real


def _sign_normalize(x, u):
    """Sup-normalize a real vector and pick the sign with the larger u-gauge constant."""
    x = x / max(np.max(np.abs(x)), 1e-300)
    c_plus, c_minus = np.min(x / u), np.min(-x / u)
    return x if c_plus >= c_minus else -x


def default_t_grid(margin):
    horizon = 200.0 / margin if np.isfinite(margin) and margin > 0 else 200.0
    horizon = min(horizon, 1e6)
    k = np.arange(int(np.ceil(np.log(horizon / 0.01) / np.log(1.2))) + 1)
    return np.concatenate([[0.0], np.minimum(0.01 * 1.2 ** k, horizon)])


# projections ---------------------------------------------------------------

@dataclass
class EigenConditions:
    geom_simple: bool
    alg_simple: bool
    eigvec_strongly_pos: bool
    left_eigvec_strictly_pos: bool
    range_meets_cone_trivially: Optional[bool]


@dataclass
class ProjectionVerdict:
    positive: bool
    strongly_positive_wrt_u: bool
    irreducible_rank1: bool
    eigen_conditions: EigenConditions
    certificate: Optional[PositivityCertificate]
    P: np.ndarray = field(repr=False)
    eigvec_constant: Optional[float] = None
    pole_order: int = 1

    @property
    def faces(self):
        ec = self.eigen_conditions
        f3 = ec.geom_simple and ec.eigvec_strongly_pos and ec.left_eigvec_strictly_pos
        f4 = ec.alg_simple and ec.eigvec_strongly_pos and bool(ec.range_meets_cone_trivially)
        return {"projection_strongly_positive": self.strongly_positive_wrt_u,
                "geometric_face": f3, "algebraic_face": f4}

    @property
    def consistent(self):
        return len(set(self.faces.values())) == 1

    def to_dict(self):
        return {
            "positive": self.positive,
            "strongly_positive_wrt_u": self.strongly_positive_wrt_u,
            "irreducible_rank1": self.irreducible_rank1,
            "eigen_conditions": asdict(self.eigen_conditions),
            "certificate": None if self.certificate is None else asdict(self.certificate),
            "eigvec_constant": self.eigvec_constant,
            "faces": self.faces,
            "faces_consistent": self.consistent,
            "pole_order": self.pole_order,
        }


def _real_matrix(P, what="projection"):
    if is_real(P, 1e-8):
        return np.real(P)
    raise NumericalFailure(f"{what} is not real", max_imag=float(np.max(np.abs(np.imag(P)))))


def check_projection(A, lam0, ctx, opts=None, report=None):
    """Positivity structure of the spectral projection at ``lam0``.

    Evaluates independently: entrywise positivity of P, strong positivity
    of P with respect to ``ctx.u``, simplicity of ``lam0``, strong
    positivity of the right eigenvector, strict positivity of the left
    eigenvector and (for algebraically simple ``lam0``) whether the range of
    ``lam0 - A`` meets the cone only at 0.

    Returns
    -------
    ProjectionVerdict
    """
    o = _opts(opts)
    A = as_matrix(A)
    if report is None:
        report = spectrum_report(A, o.tol_cluster)
    cl = report.cluster_near(lam0)
    if abs(cl.center.imag) > report.tol_cluster:
        raise NumericalFailure("spectral value is not real", center=str(cl.center))
    pd = spectral_projection(A, cl, report)
    P = _real_matrix(pd.P)
    scale = max(float(np.max(np.abs(P))), 1e-300)
    positive = bool(np.all(P >= -o.tol_entry * scale))
    u = ctx.u if ctx.u is not None else np.ones(ctx.n)
    quasi = bool(np.all(u > 0))
    cert = operator_strong_positivity(P, ctx.with_u(u), o.tol_entry * scale) if quasi else None
    strong = bool(cert is not None and cert.strongly_positive)
    geom = cl.geometric_multiplicity == 1
    alg = cl.algebraic_multiplicity == 1
    tol = o.tol_strict_rel
    vec_strong, left_pos, rng, vconst = False, False, None, None
    if geom:
        if alg:
            v, w = pd.right, pd.left
        else:
            T, Q, _ = reorder_schur(report.schur, cl.members)
            v = Q[:, 0]
            n = A.shape[0]
            w = null_space((A - cl.center * np.eye(n)).conj().T,
                           rcond=1e-9 * max(1.0, report.norm))[:, 0]
        v = _sign_normalize(_realify(v), u)
        vconst = float(np.min(v / u))
        vec_strong = bool(quasi and vconst > tol * np.max(u) / max(np.max(u), 1e-300))
        w = _realify(w)
        w = w / max(np.max(np.abs(w)), 1e-300)
        if np.sum(w) < 0:
            w = -w
        left_pos = bool(np.all(w > tol))
        if alg:
            rng = bool(np.all(w > tol) or np.all(w < -tol))
    irreducible = bool(positive and cl.algebraic_multiplicity == 1
                       and np.all(P > o.tol_entry * scale))
    ec = EigenConditions(geom, alg, vec_strong, left_pos, rng)
    return ProjectionVerdict(positive, strong, irreducible, ec, cert, P, vconst, cl.pole_order)


# semigroups ----------------------------------------------------------------

def is_metzler(A, tol=None):
    """Real matrix with off-diagonal entries >= -tol."""
    A = np.asarray(A)
    if not is_real(A):
        return False
    A = np.real(A)
    if tol is None:
        tol = 1e-12 * max(1.0, float(np.max(np.abs(A))))
    off = A - np.diag(np.diag(A))
    return bool(np.all(off >= -tol))


@dataclass
class SemigroupClassification:
    verdict: str
    theorem_basis: str
    positive: bool
    eventually_strongly_positive: bool
    asymptotically_positive: bool
    eventually_positive: Optional[bool]
    dominant: bool
    bounded_rescaled: bool
    spectral_bound: float
    projection: Optional[ProjectionVerdict]
    witnesses: dict

    def to_dict(self):
        d = {k: getattr(self, k) for k in
             ("verdict", "theorem_basis", "positive", "eventually_strongly_positive",
              "asymptotically_positive", "eventually_positive", "dominant",
              "bounded_rescaled", "spectral_bound", "witnesses")}
        d["projection"] = None if self.projection is None else self.projection.to_dict()
        return d


def _basis_norms(ctx):
    if ctx.p == np.inf:
        return np.ones(ctx.n)
    return ctx.weights ** (1.0 / ctx.p)


def _onset(times, values, thresh):
    """First grid time after which ``values`` stay at or below ``thresh``."""
    bad = np.nonzero(np.asarray(values) > thresh)[0]
    if len(bad) == 0:
        return float(times[0])
    if bad[-1] == len(times) - 1:
        return None
    return float(times[bad[-1] + 1])


def _semigroup_samples(A, ctx, s, P, report, o):
    n = A.shape[0]
    grid = default_t_grid(report.dominance_margin) if o.t_grid is None else np.asarray(o.t_grid)
    shifted = A - s * np.eye(n)
    prop = Propagator(shifted)
    bn = _basis_norms(ctx)
    if prop._eig is not None:
        lam, V, Vi = prop._eig
        if np.isfinite(report.dominance_margin):
            decay = np.real(lam) < -0.5 * report.dominance_margin
        else:
            decay = np.zeros(n, bool)
    dists = []
    rel_mins = []
    P0 = P if P is not None else np.zeros((n, n))
    zero_mask = np.abs(P0) <= 1e-9 * max(1.0, float(np.max(np.abs(P0))))
    for t in grid:
        E = prop(t)
        dists.append(dist_to_cone(E, ctx) / bn)
        if P is not None and prop._eig is not None:
            D = (V[:, decay] * np.exp(t * lam[decay])) @ Vi[decay, :]
            D = np.real(D) if not np.iscomplexobj(A) else D
        else:
            D = E - P0
        m = float(np.max(np.abs(D)))
        if m > 1e-250 and np.any(zero_mask):
            rel_mins.append(float(np.min(np.real(D)[zero_mask])) / m)
        else:
            rel_mins.append(0.0)
    dists = np.array(dists)             # (len(grid), n)
    t0 = [_onset(grid, dists[:, j], o.eps) for j in range(n)]
    tail = dists[int(0.75 * len(grid)):]
    late = np.array(rel_mins[int(0.6 * len(grid)):])
    return grid, t0, float(np.max(tail)), late


def classify_semigroup(A, ctx, opts=None):
    """Classify ``(e^{tA})`` as positive, eventually strongly positive or
    asymptotically positive.

    Theorem side: Metzler criterion for positivity; dominance, semisimple
    peripheral spectrum and ``P >> 0`` (wrt ``ctx.u``) for eventual strong
    positivity; dominance, semisimple peripheral spectrum and ``P >= 0``
    for asymptotic positivity. In finite dimensions the individual notions
    coincide with the uniform ones, so only uniform verdicts are emitted.

    Witnesses (if ``opts.sample``): onset times of ``d+(e^{t(A-s)} e_j) <= eps``,
    the late-time supremum of d+, and an entrywise sign test on the
    decaying part used for the ``eventually_positive`` flag.
    """
    o = _opts(opts)
    A = as_matrix(A)
    n = A.shape[0]
    report = spectrum_report(A, o.tol_cluster)
    s = report.spectral_bound
    bounded = all(c.pole_order == 1 for c in report.peripheral_clusters)
    metzler = is_metzler(A)
    pv = None
    if report.dominant:
        pv = check_projection(A, report.clusters[report.peripheral[0]].center.real, ctx, o,
                              report)
    esp = bool(report.dominant and bounded and pv.strongly_positive_wrt_u)
    ap = bool(report.dominant and bounded and pv.positive)
    if metzler:
        verdict, basis = POSITIVE, "off-diagonal entries non-negative (Metzler)"
    elif esp:
        verdict, basis = UESP, "dominant s(A), simple peripheral pole, P strongly positive wrt u"
    elif ap:
        verdict, basis = UAP, "dominant s(A), simple peripheral pole, P positive"
    else:
        why = []
        if not report.dominant:
            why.append("s(A) not dominant")
        if not bounded:
            why.append("peripheral pole not simple")
        if pv is not None and not pv.positive:
            why.append("P not positive")
        verdict, basis = NONE, "; ".join(why) or "no criterion met"
    witnesses = {"bounded_rescaled": bounded}
    evpos = None
    if o.sample:
        sampled = []
        for h in (1e-3, 1e-2, 1e-1):
            E = Propagator(A)(h)
            sampled.append(bool(is_real(E) and np.all(np.real(E) >= -1e-12 * np.max(np.abs(E)))))
        P = pv.P if pv is not None else None
        grid, t0, sup_tail, late = _semigroup_samples(A, ctx, s, P, report, o)
        if metzler:
            evpos = True
        elif ap:
            evpos = bool(late.size == 0 or np.min(late) >= -0.01)
        else:
            evpos = False
        witnesses.update({
            "positive_sampled": all(sampled),
            "t0_per_basis_vector": t0,
            "t0_max": None if any(t is None for t in t0) else max(t0),
            "sup_tail_distance": sup_tail,
            "t_horizon": float(grid[-1]),
        })
    return SemigroupClassification(verdict, basis, metzler, esp, ap, evpos, report.dominant,
                                   bounded, s, pv, witnesses)


@dataclass
class DistanceTrace:
    times: np.ndarray
    d_plus: np.ndarray
    t0: Optional[float]

    def pairs(self):
        return list(zip(self.times.tolist(), self.d_plus.tolist()))


def sample_semigroup_distance(A, ctx, f, t_grid=None, eps=1e-6, relative=True):
    """Cone distances of the rescaled orbit ``e^{t(A - s(A))} f``.

    ``t0`` is the first grid time after which the distance stays below
    ``eps`` (times ``||f||`` if ``relative``).
    """
    A = as_matrix(A)
    f = np.asarray(f)
    report = spectrum_report(A)
    s = report.spectral_bound
    if t_grid is None:
        t_grid = default_t_grid(report.dominance_margin)
    t_grid = np.asarray(t_grid, float)
    prop = Propagator(A - s * np.eye(A.shape[0]))
    d = np.array([float(dist_to_cone(prop.apply(t, f), ctx)) for t in t_grid])
    thresh = eps * (float(ctx.norm(f)) if relative else 1.0)
    return DistanceTrace(t_grid, d, _onset(t_grid, d, thresh))


def find_t0_strong(A, ctx, f, eps=None, t_grid=None):
    """Smallest grid time after which ``e^{t(A-s)} f >> 0`` wrt ``ctx.u``.

    The certificate constant must stay ``>= eps`` for all later grid times;
    returns ``None`` if this never happens up to the horizon. Default
    ``eps = 1e-8 * ||f|| / ||u||``.
    """
    A = as_matrix(A)
    f = np.asarray(f, float)
    if not ctx.has_quasi_interior_u:
        raise NumericalFailure("find_t0_strong needs a quasi-interior u")
    report = spectrum_report(A)
    s = report.spectral_bound
    if t_grid is None:
        t_grid = default_t_grid(report.dominance_margin)
    if eps is None:
        eps = 1e-8 * float(ctx.norm(f)) / float(ctx.norm(ctx.u))
    prop = Propagator(A - s * np.eye(A.shape[0]))
    consts = []
    for t in t_grid:
        g = prop.apply(t, f)
        consts.append(float(np.min(np.real(g) / ctx.u)))
    bad = np.nonzero(np.array(consts) < eps)[0]
    if len(bad) == 0:
        return float(t_grid[0])
    if bad[-1] == len(t_grid) - 1:
        return None
    return float(t_grid[bad[-1] + 1])


# resolvents ----------------------------------------------------------------

@dataclass
class ResolventClassification:
    verdict: str
    theorem_basis: str
    strongly_positive_theorem: bool
    asymptotic_bounded_theorem: bool
    sides: dict
    lambda1: Optional[float]
    lambda1_left: Optional[float]
    eventually_positive: bool
    abel_distance_to_zero: bool
    bounded_type: bool
    samples: list
    projection: ProjectionVerdict

    def to_dict(self):
        d = {k: getattr(self, k) for k in
             ("verdict", "theorem_basis", "strongly_positive_theorem",
              "asymptotic_bounded_theorem", "sides", "lambda1", "lambda1_left",
              "eventually_positive", "abel_distance_to_zero", "bounded_type", "samples")}
        d["projection"] = self.projection.to_dict()
        return d


def _tail_true(flags, k):
    return bool(len(flags) >= k and all(flags[-k:]))


def _onset_offset(lams, flags):
    # largest sampled lambda such that every sample closer to lam0 satisfies the flag
    if not flags or not flags[-1]:
        return None
    i = len(flags) - 1
    while i > 0 and flags[i - 1]:
        i -= 1
    return float(lams[i])


def classify_resolvent(A, lam0, ctx, opts=None):
    """Eventual strong positivity and asymptotic positivity of ``R(., A)`` at ``lam0``.

    Theorem side from :func:`check_projection`: strongly positive wrt u
    iff ``P >> 0``; asymptotically positive of bounded type iff ``P >= 0``
    and the pole is simple. Empirical side samples ``lam0 +- delta 2^-j``
    and records per-basis-vector certificate constants (scaled by
    ``max |R|``) and cone distances.
    """
    o = _opts(opts)
    A = as_matrix(A)
    n = A.shape[0]
    report = spectrum_report(A, o.tol_cluster)
    cl = report.cluster_near(lam0)
    pv = check_projection(A, lam0, ctx, o, report)
    strong = pv.strongly_positive_wrt_u
    asym = bool(pv.positive and cl.pole_order == 1)
    others = [c.center for c in report.clusters if c is not cl]
    gap = min(abs(z - cl.center) for z in others) if others else 1.0
    delta = o.delta if o.delta is not None else gap / 10
    u = ctx.u if ctx.u is not None else np.ones(n)
    bn = _basis_norms(ctx)
    samples = []
    r_lams, r_strong, r_pos, r_abel, r_d = [], [], [], [], []
    l_lams, l_neg = [], []
    # stay clear of the resolvent's near-singular threshold
    floor = 10.0 * 1e-12 * max(report.norm, 1e-300) * n
    for j in range(o.resolvent_samples + 1):
        off = delta * 2.0 ** (-j)
        if off < floor and j > o.tail:
            break
        for side in (1, -1):
            lam = lam0 + side * off
            R = resolvent(A, lam)
            R = np.real(R) if is_real(R, 1e-8) else R
            mR = float(np.max(np.abs(R)))
            Rr = np.real(R)
            if side == 1:
                c = float(np.min(Rr / u[:, None])) / mR
                d = float(np.max(dist_to_cone(R, ctx) / bn))
                r_lams.append(lam)
                r_strong.append(c > o.tol_strict_rel)
                r_pos.append(bool(np.all(Rr >= -1e-12 * mR)))
                r_abel.append(off * d / max(off * float(np.max(ctx.norm(R) / bn)), 1e-300))
                r_d.append(d)
                samples.append({"lambda": lam, "side": "right", "constant": c, "d_plus": d})
            else:
                c = float(np.max(Rr / u[:, None])) / mR
                l_lams.append(lam)
                l_neg.append(c < -o.tol_strict_rel)
                samples.append({"lambda": lam, "side": "left", "constant": c})
    k = o.tail
    right = _tail_true(r_strong, k)
    left = _tail_true(l_neg, k)
    abel0 = bool(r_abel[-1] < 1e-4)
    half = max(1, len(r_d) // 2)
    bounded = bool(r_d[-1] <= 10 * max(r_d[:half]) + 1e-12 * max(1.0, r_d[0]))
    if strong:
        verdict, basis = UESP, "P strongly positive wrt u (simple pole, finite-dimensional domination)"
    elif asym:
        verdict, basis = UAP_BOUNDED, "P positive and simple pole"
    else:
        verdict, basis = NONE, "P not positive" if not pv.positive else "pole not simple"
    return ResolventClassification(
        verdict, basis, strong, asym, {"right-positive": right, "left-negative": left},
        _onset_offset(r_lams, r_strong), _onset_offset(l_lams, l_neg),
        _tail_true(r_pos, k), abel0, bounded, samples, pv)


# powers --------------------------------------------------------------------

@dataclass
class PowerClassification:
    verdict: str
    spectral_radius: float
    power_bounded: bool
    dominant: bool
    asymptotically_positive: bool
    eventually_strongly_positive: bool
    peripheral_projection_positive: bool
    d_plus_samples: list

    def to_dict(self):
        return asdict(self)


def classify_power(T, ctx, opts=None):
    """Asymptotic and eventual strong positivity of the powers ``T^n``.

    ``T / r`` must be power bounded (peripheral clusters semisimple).
    Asymptotic positivity holds iff ``(T/r)^n P_per >= 0`` for all n,
    where ``P_per`` sums the projections of the clusters on the circle
    ``|z| = r``; this is evaluated exactly from the peripheral
    decomposition for ``n <= n_max``. The d+ of ``(T/r)^n e_j`` at
    ``n = 2^k`` is recorded as a witness.
    """
    o = _opts(opts)
    T = as_matrix(T)
    n = T.shape[0]
    report = spectrum_report(T, o.tol_cluster)
    mods = np.array([abs(c.center) for c in report.clusters])
    r = float(np.max(mods))
    if r <= report.tol_cluster:
        raise NumericalFailure("spectral radius too small", spectral_radius=r)
    per = [c for c, m in zip(report.clusters, mods) if abs(m - r) <= report.tol_cluster]
    bounded = all(c.pole_order == 1 for c in per)
    dominant = len(per) == 1 and abs(per[0].center - r) <= report.tol_cluster
    projs = [(c.center / r, spectral_projection(T, c, report).P) for c in per]
    ppos = True
    scale = max(max(float(np.max(np.abs(P))) for _, P in projs), 1e-300)
    if bounded:
        for m in range(1, o.n_max + 1):
            M = sum(z ** m * P for z, P in projs)
            if not is_real(M, 1e-8) or np.min(np.real(M)) < -o.tol_entry * scale:
                ppos = False
                break
    else:
        ppos = False
    ap = bool(bounded and ppos)
    esp = False
    u = ctx.u if ctx.u is not None else np.ones(n)
    if ap and dominant and np.all(u > 0):
        P = np.real(projs[0][1])
        esp = operator_strong_positivity(P, ctx.with_u(u), o.tol_entry * scale).strongly_positive
    samples = []
    M = T / r
    bn = _basis_norms(ctx)
    power, m = M.copy(), 1
    while m <= o.n_max:
        if not np.all(np.isfinite(power)):
            break
        samples.append({"n": m, "d_plus": float(np.max(dist_to_cone(power, ctx) / bn))})
        power = power @ power
        m *= 2
    verdict = "eventually-strongly-positive" if esp else ("asymptotically-positive" if ap else NONE)
    return PowerClassification(verdict, r, bounded, dominant, ap, bool(esp), ppos, samples)


# finite-dimensional theorems -------------------------------------------------

def shift_for_powers(report):
    """A shift c making ``s + c`` strictly larger than every other ``|mu + c|``.

    For non-peripheral mu the requirement is
    ``c > (Im mu^2 - w^2 + Re mu^2 - s^2) / (2 (s - Re mu))`` with w the
    largest imaginary part on the peripheral line.
    """
    s = report.spectral_bound
    per = report.peripheral_clusters
    w = max(abs(c.center.imag) for c in per)
    need = -s + 1.0
    min_re = min(c.center.real for c in report.clusters)
    for i, c in enumerate(report.clusters):
        if i in report.peripheral:
            continue
        mu = c.center
        need = max(need, (mu.imag ** 2 - w ** 2 + mu.real ** 2 - s ** 2) / (2 * (s - mu.real)))
    return max(1.0 + max(0.0, -min_re), 1.5 * need + 1.0) if need > 0 else 1.0 + max(0.0, -min_re)


def finite_dim_equivalence_check(A, ctx, opts=None):
    """Semigroup asymptotic positivity versus asymptotic positivity of ``A + cI``.

    Returns
    -------
    dict
        ``semigroup_side``, ``shifted_power_side``, ``shift`` and
        ``consistent``.
    """
    o = _opts(opts)
    o_ns = ClassifyOptions(**{**asdict(o), "sample": False})
    A = as_matrix(A)
    n = A.shape[0]
    sg = classify_semigroup(A, ctx, o_ns)
    report = spectrum_report(A, o.tol_cluster)
    if not all(c.pole_order == 1 for c in report.peripheral_clusters):
        raise NumericalFailure("rescaled semigroup unbounded (peripheral pole not simple)")
    c = shift_for_powers(report)
    pw = classify_power(A + c * np.eye(n), ctx, ClassifyOptions(
        **{**asdict(o_ns), "tol_cluster": None}))
    return {"semigroup_side": sg.asymptotically_positive,
            "shifted_power_side": pw.asymptotically_positive,
            "shift": float(c), "consistent": sg.asymptotically_positive == pw.asymptotically_positive}


def two_dim_theorem_check(A, ctx=None, tol=1e-12):
    """For real 2x2 ``A``: asymptotic positivity implies positivity."""
    A = as_matrix(A)
    if A.shape != (2, 2) or not is_real(A):
        raise ValueError("expected a real 2x2 matrix")
    ctx = ctx or LatticeContext.sequence(2)
    sg = classify_semigroup(A, ctx, ClassifyOptions(sample=False))
    A = np.real(A)
    positive = bool(A[0, 1] >= -tol and A[1, 0] >= -tol)
    return {"asymptotically_positive": sg.asymptotically_positive, "positive": positive,
            "theorem_holds": (not sg.asymptotically_positive) or positive}


def neumann_series_resolvent(A, mu, lam, terms=200):
    """Partial sum of ``sum_n (mu - lam)^n R(mu, A)^{n+1}``.

    Raises
    ------
    NumericalFailure
        If the terms grow (series divergent).
    """
    A = as_matrix(A)
    R = resolvent(A, mu)
    q = mu - lam
    term = R.copy()
    total = R.copy()
    first = norm2(term)
    for k in range(1, terms):
        term = q * (term @ R)
        nt = norm2(term)
        if not np.isfinite(nt) or nt > 1e3 * max(first, 1e-300):
            raise NumericalFailure("Neumann series diverges", term=k, term_norm=float(nt))
        total = total + term
        if nt <= 1e-17 * norm2(total):
            break
    else:
        if nt > 1e-8 * norm2(total):
            raise NumericalFailure("Neumann series not converged", last_term=float(nt))
    return total


# random matrices for audits ------------------------------------------------

def random_dominant_matrix(rng, n, s=None, left="positive", right="positive", gap=None):
    """Random real matrix with simple dominant eigenvalue ``s``.

    Built as ``s P + (I - P)(M - beta I)(I - P)`` with ``P = v w^T / (w^T v)``
    and ``M`` uniform in [-1, 1]; ``beta`` places the rest of the spectrum at
    real part ``s - gap``. ``left``/``right`` choose the sign pattern of
    ``w``/``v``: ``"positive"`` (entries in [0.1, 1]), ``"mixed"`` (both signs
    present) or ``"any"``.
    """
    def vec(kind):
        if kind == "positive":
            return rng.uniform(0.1, 1.0, n)
        x = rng.uniform(-1.0, 1.0, n)
        if kind == "mixed":
            x[0], x[1] = abs(x[0]) + 0.1, -abs(x[1]) - 0.1
            x = x[rng.permutation(n)]
        return x

    v, w = vec(right), vec(left)
    if abs(w @ v) < 0.05:
        w = w + 0.1 * np.sign(w @ v or 1.0) * v
    s = rng.uniform(-1, 1) if s is None else s
    gap = rng.uniform(0.2, 1.0) if gap is None else gap
    P = np.outer(v, w) / (w @ v)
    M = rng.uniform(-1, 1, (n, n))
    I = np.eye(n)
    Q = null_space(w[None, :])
    comp = np.linalg.eigvals(Q.T @ (I - P) @ M @ Q)
    beta = float(np.max(comp.real)) - s + gap
    return s * P + (I - P) @ (M - beta * I) @ (I - P)


def random_two_by_two(rng):
    """Random real 2x2 generator with semisimple peripheral spectrum."""
    while True:
        if rng.random() < 0.5:
            A = rng.uniform(-1, 1, (2, 2))
        else:
            v, w = rng.uniform(-1, 1, 2), rng.uniform(-1, 1, 2)
            if abs(w @ v) < 0.05:
                continue
            P = np.outer(v, w) / (w @ v)
            A = rng.uniform(-2, -0.1) * (np.eye(2) - P) + rng.uniform(-1, 1) * np.eye(2)
        ev = np.linalg.eigvals(A)
        # reject (near) defective double eigenvalues
        if abs(ev[0] - ev[1]) > 1e-6 or np.allclose(A, A[0, 0] * np.eye(2)):
            return A


def t0_resolution_sweep(factory, Ns, profile, eps=0.0, t_grid=None):
    """Onset times of ``e^{tA_N} f_N >= 0`` across resolutions.

    Parameters
    ----------
    factory : callable
        ``N -> ModelBundle``.
    Ns : sequence of int
    profile : callable
        ``bundle -> f`` (initial datum on the grid).
    eps : float
        Relative cone-distance threshold defining the onset.

    Returns
    -------
    dict
        ``N``, ``t0``, fitted ``slope`` of t0 against ln N and a verdict
        label that flags resolution-dependent onsets.
    """
    if t_grid is None:
        t_grid = np.linspace(0, 20, 4001)
    t0s = []
    for N in Ns:
        b = factory(N)
        f = profile(b)
        tr = sample_semigroup_distance(b.A, b.ctx, f, t_grid, eps=max(eps, 1e-300))
        t0s.append(tr.t0)
    ok = all(t is not None for t in t0s)
    slope = float(np.polyfit(np.log(Ns), t0s, 1)[0]) if ok and len(Ns) > 1 else None
    label = RESOLUTION_DEPENDENT if (slope is not None and slope > 0.05) else "uniform in N"
    return {"N": list(Ns), "t0": t0s, "slope": slope, "verdict": label}


def leading_eigenvector_constant(A, ctx, phases=720):
    """Best strong-positivity constant of an eigenvector for the rightmost eigenvalue.

    The eigenvector ``v`` is sup-normalized and rotated by ``e^{i phi}``;
    the constant is ``max_phi min_i (Re w_i - |Im w_i|) / u_i`` with
    ``w = e^{i phi} v``, which is positive iff some rotation of ``v`` is
    real and strongly positive wrt ``u``.
    """
    A = as_matrix(A)
    lam, V = np.linalg.eig(A)
    k = int(np.argmax(lam.real))
    v = V[:, k] / np.max(np.abs(V[:, k]))
    u = ctx.u if ctx.u is not None else np.ones(ctx.n)
    best = -np.inf
    for phi in np.linspace(0.0, 2.0 * np.pi, phases, endpoint=False):
        w = np.exp(1j * phi) * v
        best = max(best, float(np.min((w.real - np.abs(w.imag)) / u)))
    # refine around the best phase by aligning the largest entry
    j = int(np.argmax(np.abs(v)))
    for w in (v * np.abs(v[j]) / v[j], -v * np.abs(v[j]) / v[j]):
        best = max(best, float(np.min((w.real - np.abs(w.imag)) / u)))
    return {"eigenvalue": complex(lam[k]), "constant": best}
