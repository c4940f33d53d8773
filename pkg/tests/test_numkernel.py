import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from evpos.errors import NumericalFailure
from evpos.lattice import LatticeContext
from evpos.models import reflection_lp, spiral3
from evpos.numkernel import (Propagator, as_matrix, eigenpair, expm, norm2, operator_norm,
                             resolvent, schur_decompose)

from conftest import taylor_expm


def random_complex(rng, n):
    r = rng.uniform(0, 1, (n, n))
    phi = rng.uniform(0, 2 * np.pi, (n, n))
    return r * np.exp(1j * phi)


def test_as_matrix_rejects_non_square_and_nan():
    with pytest.raises(ValueError):
        as_matrix(np.zeros((2, 3)))
    with pytest.raises(ValueError):
        as_matrix(np.array([[np.nan]]))


def test_schur_diagonal_is_identity():
    sf = schur_decompose(np.diag([2.0, 3.0]))
    np.testing.assert_allclose(np.abs(sf.unitary), np.eye(2), atol=1e-14)
    np.testing.assert_allclose(sf.triangular, np.diag([2.0, 3.0]), atol=1e-14)


def test_schur_nilpotent_block():
    A = np.array([[0.0, 1.0], [0.0, 0.0]])
    sf = schur_decompose(A)
    np.testing.assert_allclose(sf.eigenvalues, [0, 0], atol=1e-14)
    np.testing.assert_allclose(np.abs(sf.triangular), A, atol=1e-14)


def test_schur_spiral3_eigenvalues():
    ev = schur_decompose(spiral3().A).eigenvalues
    want = np.array([0, -1 + 1j, -1 - 1j])
    assert np.max(np.min(np.abs(ev[:, None] - want[None, :]), axis=0)) < 1e-12


@pytest.mark.parametrize("n", [1, 2, 5, 12])
def test_schur_reconstruction_random(rng, n):
    for _ in range(5):
        A = random_complex(rng, n)
        sf = schur_decompose(A)
        assert norm2(sf.reconstruct() - A) <= 1e-9 * n * norm2(A)
        Q = sf.unitary
        assert norm2(Q.conj().T @ Q - np.eye(n)) < 1e-12
        assert np.max(np.abs(np.tril(sf.triangular, -1))) == 0


def test_schur_deterministic(rng):
    A = random_complex(rng, 8)
    a, b = schur_decompose(A), schur_decompose(A)
    assert np.array_equal(a.triangular, b.triangular)
    assert np.array_equal(a.unitary, b.unitary)


def test_eigenpair_invariants(rng):
    A = random_complex(rng, 6)
    sf = schur_decompose(A)
    nA = norm2(A)
    for k in range(6):
        ep = eigenpair(sf, k)
        assert np.linalg.norm(A @ ep.right - ep.value * ep.right) <= 1e-10 * nA
        assert np.linalg.norm(ep.left.conj() @ A - ep.value * ep.left.conj()) \
            <= 1e-10 * nA * np.linalg.norm(ep.left)
        assert abs(np.linalg.norm(ep.right) - 1) < 1e-12
        assert abs(ep.left.conj() @ ep.right - 1) < 1e-10


def test_expm_zero_and_diagonal():
    np.testing.assert_allclose(expm(np.zeros((3, 3))), np.eye(3), atol=0)
    np.testing.assert_allclose(expm(np.diag([1.0, -1.0])), np.diag([np.e, 1 / np.e]),
                               rtol=1e-12)


def test_expm_spiral3_block_against_series():
    t = np.pi / 2
    E = expm(t * spiral3().A)
    c, s = np.cos(t), np.sin(t)
    block = np.exp(-t) * np.array([[c, -s], [s, c]])
    np.testing.assert_allclose(E[1:, 1:], block, atol=1e-13)
    np.testing.assert_allclose(E, taylor_expm(t * spiral3().A).real, atol=1e-13)


@pytest.mark.parametrize("scale", [0.1, 3.0, 50.0])
def test_expm_against_taylor_oracle(rng, scale):
    A = scale * random_complex(rng, 5) / 5
    E, T = expm(A), taylor_expm(A)
    assert norm2(E - T) <= 1e-9 * norm2(T)


def test_expm_overflow_reports_exponent():
    with pytest.raises(NumericalFailure) as exc:
        expm(np.array([[1e4]]))
    assert "scaling_exponent" in exc.value.diagnostics


def test_expm_commuting_pair(rng):
    X = random_complex(rng, 4)
    A, B = X @ X - X, 0.5 * X + 2 * np.eye(4)
    np.testing.assert_allclose(expm(A + B), expm(A) @ expm(B), atol=1e-8 * norm2(expm(A + B)))


@given(arrays(np.float64, (4, 4), elements=st.floats(-1, 1)), st.floats(0.01, 2.0))
def test_semigroup_law(A, t):
    E = expm(t * A)
    assert norm2(expm(2 * t * A) - E @ E) <= 1e-8 * max(norm2(E) ** 2, 1.0)


def test_resolvent_scalar():
    assert resolvent(np.zeros((1, 1)), 2.0)[0, 0] == pytest.approx(0.5)


def test_resolvent_reflection_at_one():
    b = reflection_lp(16, 2)
    N = 16
    Pi = np.full((N, N), 1.0 / N)
    S = np.eye(N)[::-1]
    want = Pi + (3 * np.eye(N) - S) @ (np.eye(N) - Pi) / 8.0
    np.testing.assert_allclose(resolvent(b.A, 1.0), want, atol=1e-13)


def test_resolvent_spiral3_entry():
    assert resolvent(spiral3().A, 1.0)[0, 0] == pytest.approx(1.0, abs=1e-14)


def test_resolvent_residual(rng):
    A = random_complex(rng, 7)
    R = resolvent(A, 3.0 + 1j)
    assert norm2((3.0 + 1j) * np.eye(7) @ R - A @ R - np.eye(7)) <= 1e-10 * 7


def test_resolvent_singular_raises():
    with pytest.raises(NumericalFailure):
        resolvent(np.diag([1.0, 2.0]), 1.0)


def test_resolvent_jordan_close_to_eigenvalue_ok():
    J = np.array([[0.0, 1.0], [0.0, 0.0]])
    R = resolvent(J, 1e-6)
    assert R[0, 1] == pytest.approx(1e12, rel=1e-9)


@given(st.complex_numbers(min_magnitude=3, max_magnitude=10),
       st.complex_numbers(min_magnitude=3, max_magnitude=10))
def test_resolvent_identity(z1, z2):
    A = np.array([[0.5, 1.0, 0], [-1.0, 0.2, 0.3], [0.1, 0, -0.7]])
    R1, R2 = resolvent(A, z1), resolvent(A, z2)
    cond = norm2(R1) * norm2(R2)
    assert norm2(R1 - R2 - (z2 - z1) * R1 @ R2) <= 1e-8 * max(cond, 1.0) * max(1, abs(z2 - z1))


def test_operator_norm_examples():
    assert operator_norm(np.eye(3), LatticeContext.sequence(3, 2)) == pytest.approx(1.0)
    assert operator_norm(np.diag([3.0, -4.0]), LatticeContext.sequence(2, np.inf)) == 4.0
    assert operator_norm(np.array([[0.0, 2.0], [0.0, 0.0]]), LatticeContext.sequence(2, 1)) == 2.0


@pytest.mark.parametrize("p", [1, 2, np.inf])
def test_operator_norm_is_induced_sup(rng, p):
    n = 5
    w = rng.uniform(0.5, 2.0, n)
    ctx = LatticeContext(n, p, w, None)
    A = rng.normal(size=(n, n))
    nrm = operator_norm(A, ctx)
    xs = rng.normal(size=(n, 2000))
    ratios = ctx.norm(A @ xs) / ctx.norm(xs)
    assert np.max(ratios) <= nrm * (1 + 1e-12)
    assert np.max(ratios) >= 0.5 * nrm


def test_propagator_matches_expm(rng):
    A = rng.normal(size=(6, 6))
    prop = Propagator(A)
    for t in (0.0, 0.3, 2.0):
        np.testing.assert_allclose(prop(t), expm(t * A), atol=1e-10)
        f = rng.normal(size=6)
        np.testing.assert_allclose(prop.apply(t, f), expm(t * A) @ f, atol=1e-10)


def test_propagator_defective_falls_back():
    J = np.array([[0.0, 1.0], [0.0, 0.0]])
    prop = Propagator(J)
    assert prop._eig is None
    np.testing.assert_allclose(prop(2.0), [[1, 2], [0, 1]], atol=1e-14)
