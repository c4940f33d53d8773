"""Acceptance checks shared by ``evpos certify`` and the test suite.

Each ``criterion_k`` returns a :class:`CriterionResult`; ``detail`` holds
the measured quantities next to their thresholds.
"""
import time
from dataclasses import dataclass, field

import numpy as np

from . import classify as C
from . import dynamics
from . import models as M
from .errors import NumericalFailure
from .lattice import LatticeContext, dist_to_cone
from .numkernel import expm, resolvent
from .spectral import (projection_by_abel, projection_by_contour, projection_by_power,
                       spectral_projection, spectrum_report)
from .special import bessel_zero, count_roots, delay_char, find_roots, network_char


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    detail: dict = field(default_factory=dict)
    runtime: float = 0.0
    budget: float = np.inf

    def line(self):
        mark = "PASS" if self.passed else "FAIL"
        return f"[{mark}] {self.number:2d} {self.title} ({self.runtime:.2f} s)"


def _timed(number, title, budget):
    def deco(fn):
        def run(**kw):
            t = time.perf_counter()
            try:
                ok, detail = fn(**kw)
            except NumericalFailure as exc:
                ok, detail = False, {"error": exc.to_dict()}
            dt = time.perf_counter() - t
            detail["runtime_budget"] = budget
            return CriterionResult(number, title, bool(ok and dt < budget), detail, dt, budget)
        run.number, run.title, run.budget = number, title, budget
        run.__name__ = fn.__name__
        run.__doc__ = fn.__doc__
        return run
    return deco


@_timed(1, "spiral3: asymptotically but not eventually positive", 1.0)
def criterion_1():
    b = M.spiral3()
    sc = C.classify_semigroup(b.A, b.ctx)
    P = sc.projection.P
    p_err = float(np.max(np.abs(P - np.diag([1.0, 0, 0]))))
    windows = []
    for k in range(4):
        ts = np.linspace(2 * np.pi * k, 2 * np.pi * (k + 1), 129)
        windows.append(any(np.min(expm(t * b.A)) <= -0.3 * np.exp(-t) for t in ts))
    e2 = np.array([0.0, 1.0, 0.0])
    late = max(float(dist_to_cone(expm(t * b.A) @ e2, b.ctx)) for t in np.linspace(16, 60, 221))
    ok = (sc.verdict == C.UAP and sc.asymptotically_positive and not sc.eventually_positive
          and p_err <= 1e-10 and all(windows) and late <= 1e-6)
    return ok, {"verdict": sc.verdict, "P_error": p_err, "negative_windows": windows,
                "d_plus_after_16": late}


@_timed(2, "2x2: asymptotic positivity implies positivity", 5.0)
def criterion_2(samples=1000, seed=2):
    rng = np.random.default_rng(seed)
    n_ap, bad = 0, []
    for i in range(samples):
        A = C.random_two_by_two(rng)
        r = C.two_dim_theorem_check(A)
        n_ap += r["asymptotically_positive"]
        if not r["theorem_holds"]:
            bad.append(A.tolist())
    return not bad, {"samples": samples, "asymptotically_positive": n_ap, "violations": bad[:3]}


def _matrix_bundles():
    out = []
    for name in M.MATRIX_MODELS:
        out.append(M.build(name))
    out += [M.nonlocal_robin_thermostat(b, 100) for b in (-0.5, 0.45)]
    out += [M.dtn_disk(-1.0), M.truncated_tower(6, "c")]
    return out


@_timed(3, "finite-dimensional semigroup/power equivalence", 30.0)
def criterion_3(samples=500, seed=3):
    bad = []
    checked = 0
    for b in _matrix_bundles():
        rep = spectrum_report(b.A, M.classify_options(b).tol_cluster)
        if not all(c.pole_order == 1 for c in rep.peripheral_clusters):
            continue
        r = C.finite_dim_equivalence_check(b.A, b.ctx, M.classify_options(b))
        checked += 1
        if not r["consistent"]:
            bad.append(b.name)
    rng = np.random.default_rng(seed)
    kinds = ("positive", "mixed", "any")
    for i in range(samples):
        n = int(rng.integers(2, 7))
        A = C.random_dominant_matrix(rng, n, left=kinds[i % 3], right=kinds[(i // 3) % 3])
        r = C.finite_dim_equivalence_check(A, LatticeContext.sequence(n))
        if not r["consistent"]:
            bad.append(f"random[{i}]")
    return not bad, {"bundles_checked": checked, "random": samples, "inconsistent": bad}


@_timed(4, "thermostat verdicts at N = 400", 20.0)
def criterion_4(N=400):
    want = {-0.5: C.POSITIVE, 0.2: C.UESP, 0.45: C.UESP}
    detail, ok = {}, True
    for beta in (-0.5, 0.2, 0.45, 0.6):
        b = M.nonlocal_robin_thermostat(beta, N)
        sc = C.classify_semigroup(b.A, b.ctx, C.ClassifyOptions(sample=False))
        lead = C.leading_eigenvector_constant(b.A, b.ctx)
        detail[str(beta)] = {"verdict": sc.verdict, "positive": sc.positive,
                             "eigvec_constant": lead["constant"]}
        if beta in want:
            ok &= sc.verdict == want[beta]
            if beta > 0:
                ok &= not sc.positive
        else:
            ok &= (not sc.eventually_strongly_positive) and lead["constant"] <= 1e-8
    return ok, detail


@_timed(5, "non-local Robin, ones matrix", 20.0)
def criterion_5(N=200):
    b = M.nonlocal_robin_ones(N)
    # b.A is the generator (the Laplacian with the boundary condition), so
    # resolvent(b.A, 0) = (-b.A)^{-1} is the positive solution operator
    r = np.real(resolvent(b.A, 0.0) @ np.ones(N))
    err = float(np.max(np.abs(r - M.ones_robin_profile(b.extras["x"]))))
    bd = M.beurling_deny_witness(np.ones((2, 2)))
    sc = C.classify_semigroup(b.A, b.ctx, C.ClassifyOptions(sample=False))
    ok = err <= 5.0 / N and abs(bd - 1.0) <= 1e-10 and sc.verdict == C.UESP and not sc.positive
    return ok, {"max_error": err, "tolerance": 5.0 / N, "beurling_deny": bd,
                "verdict": sc.verdict, "positive": sc.positive}


@_timed(6, "delay equation", 30.0)
def criterion_6(h=1e-3):
    rect = (-0.01, 2.0, -60.0, 60.0)
    f = delay_char()
    cnt = count_roots(f, rect)
    rs = find_roots(f, rect)
    root = float(np.min(np.abs(rs.roots))) if rs.roots else np.inf
    drift = 0.0
    for hist in (dynamics.hat_history(), lambda x: np.cos(3 * x) + 0.5 * x,
                 lambda x: np.exp(x) * np.sin(7 * x)):
        tr = dynamics.simulate_delay(hist, 50.0, h, record_every=10)
        phi = tr.functionals["phi"]
        drift = max(drift, float(np.max(np.abs(phi - phi[0]))))
    tr = dynamics.simulate_delay(dynamics.hat_history(), 40.0, h, record_every=10)
    early_min = float(np.min(tr.min_value[tr.times <= 2.0]))
    d40 = float(tr.d_plus[-1])
    ok = cnt == 1 and len(rs.roots) == 1 and root <= 1e-10 and drift <= 1e-8 \
        and early_min < -1e-3 and d40 <= 1e-4
    return ok, {"count": cnt, "root_abs": root, "phi_drift": drift,
                "min_value_t_le_2": early_min, "d_plus_t40": d40}


@_timed(7, "network flow", 60.0)
def criterion_7(N=256, l=np.sqrt(2.0)):
    f = network_char(l)
    det0 = complex(f(0.0))
    cnt = count_roots(f, (-0.05, 1.0, -40.0, 40.0))
    cnt_dom = count_roots(f, (-0.01, 1.0, -40.0, 40.0))
    tr = M.simulate_network(100.0, "bump", l, N, record_every=8)
    psi = tr.functionals["psi"]
    drift = float(np.max(np.abs(psi - psi[0])) / abs(psi[0]))
    mass = 0.25                                  # integral of the default bump
    win = (tr.times > 0.5) & (tr.times < 2.0)
    dip = float(np.min(tr.min_value[win]))
    d80 = float(tr.d_plus[np.argmin(np.abs(tr.times - 80.0))])
    ok = det0 == 0 and cnt == 1 and drift <= 1e-3 and dip <= -0.2 * mass \
        and d80 <= 1e-2 * psi[0]
    return ok, {"det_S_0": abs(det0), "count_rect": cnt, "expected_count": 1,
                "count_re_ge_-0.01": cnt_dom, "psi_drift": drift, "min_value_window": dip,
                "bump_mass": mass, "d_plus_t80": d80, "psi0": float(psi[0])}


@_timed(8, "clamped beam", 60.0)
def criterion_8(Ns=(50, 100, 200), c0=1.0):
    detail, ok = {}, True
    for N in Ns:
        b = M.bilaplacian_clamped_1d(N)
        o = M.classify_options(b, sample=False)
        rep = spectrum_report(b.A, o.tol_cluster)
        lead = rep.clusters[0]
        gap = float(rep.dominance_margin)
        pv = C.check_projection(b.A, lead.center.real, b.ctx, o, rep)
        neg = min(float(np.min(expm(h * b.A)[:, N // 2])) for h in (1e-7, 1e-6, 1e-5))
        t0 = C.find_t0_strong(b.A, b.ctx, np.eye(N)[N // 2])
        good = (lead.simple and abs(lead.center.imag) <= rep.tol_cluster and gap > 0
                and pv.eigvec_constant >= c0 and float(np.min(pv.P)) >= -1e-9
                and neg <= -1e-6 and t0 is not None)
        ok &= good
        detail[N] = {"s": lead.center.real, "gap": gap, "eigvec_constant": pv.eigvec_constant,
                     "min_P": float(np.min(pv.P)), "min_short_time": neg, "t0": t0}
    return ok, detail


@_timed(9, "squared Dirichlet Laplacian", 20.0)
def criterion_9(N=64):
    b = M.dirichlet_laplacian_sq_1d(N)
    R = np.real(resolvent(b.A, 0.0))
    G = b.oracles["green"]
    err = float(np.max(np.abs(R - G @ G)))
    sc = C.classify_semigroup(b.A, b.ctx, C.ClassifyOptions(sample=False))
    ok = bool(np.all(R > 0)) and err <= 1e-10 and sc.verdict == C.UESP and not sc.positive
    return ok, {"min_R": float(np.min(R)), "error": err, "verdict": sc.verdict}


@_timed(10, "Dirichlet-to-Neumann on the disk", 20.0)
def criterion_10(lams=(0.0, -1.0, -4.0), K=32):
    detail, ok = {}, True
    for lam in lams:
        b = M.dtn_disk(lam, K)
        d = b.oracles["symbol"]
        mono = bool(np.all(np.diff(d) > 0))
        ev = np.linalg.eigh(b.A)
        dense = np.sort(ev[0])
        circ = np.sort(b.extras["eigenvalues"])
        agree = float(np.max(np.abs(dense - circ)))
        top = ev[1][:, -1]
        gap = dense[-1] - dense[-2]
        const = float(np.ptp(top / top[0]))
        condition = bool(gap > 1e-9 * max(1.0, abs(dense[0])) and const <= 1e-9)
        sc = C.classify_semigroup(b.A, b.ctx, C.ClassifyOptions(sample=False))
        good = mono and agree <= 1e-9 and (sc.eventually_strongly_positive == condition)
        ok &= good
        detail[str(lam)] = {"monotone": mono, "eig_agreement": agree, "condition": condition,
                            "eventually_strongly_positive": sc.eventually_strongly_positive}
    return ok, detail


@_timed(11, "Bose condition", 10.0)
def criterion_11():
    q = [1.0]
    v, _ = M.beurling_deny_value(q, 1)
    quad = M.beurling_deny_quadrature(q, 1)
    lam1, res = M.bose_root(0, 1.0)
    j2 = bessel_zero(0, 1) ** 2
    ok = abs(v - 2 / np.pi) <= 1e-12 and abs(quad - v) <= 1e-6 and 0 < lam1 < j2 and res <= 1e-10
    return ok, {"value": v, "quadrature": quad, "lambda1": lam1, "j01_sq": j2, "residual": res}


def _oracle_projections(b):
    o = M.classify_options(b)
    rep = spectrum_report(b.A, o.tol_cluster)
    s = rep.spectral_bound
    margin = rep.dominance_margin if np.isfinite(rep.dominance_margin) else 1.0
    n = b.A.shape[0]
    P = spectral_projection(b.A, rep.clusters[rep.peripheral[0]], rep).P
    Pc = projection_by_contour(b.A, s, 0.5 * margin)
    Pa = projection_by_abel(b.A, s, steps=2, levels=4, scale=margin)
    Pp = projection_by_power(b.A - s * np.eye(n), margin, iterations=80)
    scale = max(1.0, float(np.max(np.abs(P))))
    return {k: float(np.max(np.abs(Q - P)) / scale)
            for k, Q in (("contour", Pc), ("abel", Pa), ("power", Pp))}


@_timed(12, "oracle equivalences", 60.0)
def criterion_12(Ns=(64, 128, 256), p=1):
    detail, ok = {"projections": {}}, True
    for b in _matrix_bundles():
        rep = spectrum_report(b.A, M.classify_options(b).tol_cluster)
        if not rep.dominant:
            continue
        errs = _oracle_projections(b)
        detail["projections"][b.name] = errs
        ok &= max(errs.values()) <= 1e-7
    b = M.reflection_lp(64, p)
    sg = max(float(np.max(np.abs(b.oracles["semigroup"](t) - expm(t * b.A))))
             for t in (0.0, 0.1, 1.0, 5.0))
    rs = max(float(np.max(np.abs(b.oracles["resolvent"](lam) - resolvent(b.A, lam))))
             for lam in (0.3, 1.0, 4.0, 0.5 + 2j))
    sweep = C.t0_resolution_sweep(lambda N: M.reflection_lp(N, p), Ns,
                                  lambda bb: bb.extras["singular_profile"])
    pred = 1.0 / (2.0 * p)
    slope = sweep["slope"]
    ok &= sg <= 1e-8 and rs <= 1e-8 and slope is not None and 0.5 * pred <= slope <= 2 * pred
    detail.update({"reflection_semigroup_error": sg, "reflection_resolvent_error": rs,
                   "t0": sweep["t0"], "slope": slope, "predicted_slope": pred})
    return ok, detail


@_timed(13, "projection equivalence audit", 30.0)
def criterion_13(samples=300, seed=13):
    rng = np.random.default_rng(seed)
    bad_faces, bad_mixed = [], []
    for i in range(samples):
        n = int(rng.integers(2, 8))
        A = C.random_dominant_matrix(rng, n, left="positive", right="positive")
        pv = C.check_projection(A, _dominant_value(A), LatticeContext.sequence(n))
        if not pv.consistent:
            bad_faces.append(i)
    for i in range(samples):
        n = int(rng.integers(2, 8))
        A = C.random_dominant_matrix(rng, n, left="mixed", right="any")
        pv = C.check_projection(A, _dominant_value(A), LatticeContext.sequence(n))
        if pv.strongly_positive_wrt_u:
            bad_mixed.append(i)
    return not bad_faces and not bad_mixed, {"face_disagreements": bad_faces,
                                             "mixed_strongly_positive": bad_mixed}


def _dominant_value(A):
    return spectrum_report(A).spectral_bound


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6,
            criterion_7, criterion_8, criterion_9, criterion_10, criterion_11, criterion_12,
            criterion_13]
QUICK = (1, 2, 5, 9, 10, 11, 13)


def run_all(quick=False, jobs=1):
    """Run the criteria (``quick``: the matrix-only subset) and return results in order."""
    chosen = [c for c in CRITERIA if not quick or c.number in QUICK]
    if jobs > 1:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(jobs) as ex:
            return list(ex.map(_run_number, [c.number for c in chosen]))
    return [c() for c in chosen]


def _run_number(k):
    return CRITERIA[k - 1]()
