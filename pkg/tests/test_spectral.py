import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from evpos.errors import NumericalFailure
from evpos.lattice import LatticeContext
from evpos.models import reflection_lp, spiral3
from evpos.spectral import (abel_growth_check, projection_by_abel, projection_by_contour,
                            projection_by_power, spectral_projection, spectrum_report)

JORDAN = np.array([[0.0, 1.0], [0.0, 0.0]])
DIAG = np.diag([0.0, -1.0])


def test_report_diagonal():
    r = spectrum_report(DIAG)
    assert r.spectral_bound == 0 and r.dominant
    assert [c.pole_order for c in r.clusters] == [1, 1]
    assert r.dominance_margin == pytest.approx(1.0)


def test_report_jordan_block():
    r = spectrum_report(JORDAN)
    assert len(r.clusters) == 1
    c = r.clusters[0]
    assert (c.algebraic_multiplicity, c.geometric_multiplicity, c.pole_order) == (2, 1, 2)


def test_report_spiral3():
    r = spectrum_report(spiral3().A)
    assert r.spectral_bound == pytest.approx(0, abs=1e-14)
    assert r.dominant and r.dominance_margin == pytest.approx(1.0)
    assert len(r.peripheral) == 1 and abs(r.peripheral_clusters[0].center) < 1e-12


def test_complex_peripheral_not_dominant():
    r = spectrum_report(np.array([[0.0, 1.0], [-1.0, 0.0]]))
    assert not r.dominant and len(r.peripheral) == 2


def test_close_clusters_warn():
    r = spectrum_report(np.diag([0.0, 1.5e-7, -1.0]), tol_cluster=1e-7)
    assert r.warnings


def test_projection_examples():
    pd = spectral_projection(DIAG, 0.0)
    np.testing.assert_allclose(pd.P, np.diag([1.0, 0.0]), atol=1e-14)
    assert pd.method == "eigen-dyad"
    P = spectral_projection(spiral3().A, 0.0).P
    want = np.zeros((3, 3))
    want[0, 0] = 1
    np.testing.assert_allclose(P, want, atol=1e-12)


def test_projection_reflection_rank_one():
    b = reflection_lp(N=32)
    P = np.real(spectral_projection(b.A, 0.0).P)
    w = b.ctx.weights
    f = np.cos(3 * b.extras["x"]) + 2
    np.testing.assert_allclose(P @ f, 0.5 * (w @ f) * np.ones(b.n), rtol=1e-9)
    assert np.linalg.matrix_rank(P, tol=1e-9) == 1


def test_projection_cluster_sylvester():
    rng = np.random.default_rng(3)
    S = rng.normal(size=(4, 4))
    A = S @ np.diag([0.0, 0.0, -1.0, -2.0]) @ np.linalg.inv(S)
    pd = spectral_projection(A, 0.0)
    assert pd.method == "schur-sylvester"
    want = S[:, :2] @ np.linalg.inv(S)[:2]
    np.testing.assert_allclose(pd.P, want, atol=1e-9)
    assert pd.residual < 1e-10


def test_contour_examples():
    np.testing.assert_allclose(projection_by_contour(DIAG, 0, 0.4, 64), np.diag([1.0, 0]),
                               atol=1e-10)
    A = spiral3().A
    np.testing.assert_allclose(projection_by_contour(A, 0, 0.5, 128),
                               spectral_projection(A, 0.0).P, atol=1e-8)
    np.testing.assert_allclose(projection_by_contour(JORDAN, 0, 1.0, 64), np.eye(2), atol=1e-12)
    with pytest.raises(NumericalFailure):
        projection_by_contour(DIAG, 0, 1.0, 64)


def test_abel_examples():
    P = projection_by_abel(DIAG, 0.0, steps=6)
    np.testing.assert_allclose(np.diag(P), [1.0, 1e-6 / (1 + 1e-6)], rtol=1e-9)
    P = projection_by_abel(spiral3().A, 0.0, steps=8)
    assert abs(P[0, 0] - 1) < 1e-7
    n6 = np.linalg.norm(projection_by_abel(JORDAN, 0.0, steps=6), 2)
    n3 = np.linalg.norm(projection_by_abel(JORDAN, 0.0, steps=3), 2)
    assert n6 / n3 == pytest.approx(1e3, rel=1e-2)


def test_power_examples():
    np.testing.assert_allclose(projection_by_power(DIAG, 1.0, 30), np.diag([1.0, 2.0 ** -30]),
                               atol=1e-15)
    A = spiral3().A
    np.testing.assert_allclose(projection_by_power(A, 1.0, 60), spectral_projection(A, 0.0).P,
                               atol=1e-8)
    np.testing.assert_allclose(projection_by_power(np.eye(3) - np.eye(3), 1.0, 1), np.eye(3))
    with pytest.raises(NumericalFailure):
        projection_by_power(np.diag([0.5, 0.0]), 1.0, 200)


def test_abel_growth_examples():
    g = abel_growth_check(DIAG, 0.0)
    assert g["bounded"] and g["consistent"] and g["values"][-1] == pytest.approx(1.0, rel=1e-5)
    g = abel_growth_check(JORDAN, 0.0)
    assert not g["bounded"] and g["consistent"] and g["pole_order"] == 2
    ratios = np.array(g["values"][1:]) / np.array(g["values"][:-1])
    np.testing.assert_allclose(ratios[2:], 10.0, rtol=1e-3)
    assert abel_growth_check(spiral3().A, 0.0)["bounded"]


def _separated(rng, n):
    ev = -np.arange(n) * 1.0 + rng.uniform(-0.2, 0.2, n)
    S = rng.normal(size=(n, n)) + n * np.eye(n)
    return S @ np.diag(ev) @ np.linalg.inv(S), ev


@settings(max_examples=25)
@given(seed=st.integers(0, 10 ** 6), n=st.integers(2, 10))
def test_projection_matches_contour(seed, n):
    rng = np.random.default_rng(seed)
    A, ev = _separated(rng, n)
    rep = spectrum_report(A)
    for c in rep.clusters[:3]:
        P = spectral_projection(A, c, rep).P
        Q = projection_by_contour(A, c.center, 0.3, 256)
        assert np.max(np.abs(P - Q)) <= 1e-7 * max(1.0, np.max(np.abs(P)))


@settings(max_examples=25)
@given(seed=st.integers(0, 10 ** 6), n=st.integers(2, 10))
def test_resolution_of_identity(seed, n):
    rng = np.random.default_rng(seed)
    A = rng.normal(size=(n, n))
    rep = spectrum_report(A)
    total = sum(spectral_projection(A, c, rep).P for c in rep.clusters)
    np.testing.assert_allclose(total, np.eye(n), atol=1e-8 * np.linalg.cond(
        np.linalg.eig(A)[1]))


@settings(max_examples=25)
@given(seed=st.integers(0, 10 ** 6))
def test_jordan_structure_similarity_invariant(seed):
    rng = np.random.default_rng(seed)
    J = np.zeros((5, 5))
    J[0, 1] = J[1, 2] = 1.0           # 3-block at 0
    J[3, 3] = J[4, 4] = -2.0          # semisimple double at -2
    S = rng.normal(size=(5, 5)) + 3 * np.eye(5)
    A = S @ J @ np.linalg.inv(S)
    rep = spectrum_report(A, tol_cluster=1e-3)
    got = sorted((round(c.center.real), c.algebraic_multiplicity, c.geometric_multiplicity,
                  c.pole_order) for c in rep.clusters)
    assert got == [(-2, 2, 2, 1), (0, 3, 1, 3)]


def test_pole_order_matches_abel_slope():
    J = np.zeros((3, 3))
    J[0, 1] = J[1, 2] = 1.0
    g = abel_growth_check(J, 0.0, samples=5)
    slope = np.polyfit(np.arange(1, 6), np.log10(g["values"]), 1)[0]
    assert round(slope) == g["pole_order"] - 1 == 2


def test_abel_with_lattice_norm():
    ctx = LatticeContext.sequence(2, np.inf)
    g = abel_growth_check(DIAG, 0.0, ctx)
    assert g["bounded"]
