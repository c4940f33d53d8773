import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import special as sp

from evpos.errors import NumericalFailure
from evpos.special import (CharFunction, bessel_i, bessel_i_prime, bessel_j, bessel_j_prime,
                           bessel_zero, bose_char_k0, count_roots, delay_char, find_roots,
                           network_char, refine_roots, safeguarded_newton)

mpmath.mp.dps = 50


def series_j(k, x):
    """Defining series at 50-digit precision."""
    x = mpmath.mpf(x)
    return float(mpmath.nsum(lambda m: (-1) ** m * (x / 2) ** (2 * m + k)
                             / (mpmath.factorial(m) * mpmath.factorial(m + k)), [0, mpmath.inf]))


def test_j_at_zero():
    assert bessel_j(0, 0.0) == 1
    assert all(bessel_j(k, 0.0) == 0 for k in range(1, 10))
    assert bessel_i(0, 0.0) == 1 and bessel_i(3, 0.0) == 0


@pytest.mark.parametrize("k", [0, 1, 2, 5, 13, 30, 60])
@pytest.mark.parametrize("x", [1e-3, 0.5, 1.9, 2.1, 7.3, 15.0, 20.0])
def test_j_against_series(k, x):
    want = series_j(k, x)
    got = bessel_j(k, x)
    assert abs(got - want) <= 1e-10 * abs(want) + 1e-300 or abs(got - want) <= 1e-15


@settings(max_examples=60)
@given(k=st.integers(0, 60), x=st.floats(0, 1000))
def test_j_against_scipy(k, x):
    want = sp.jv(k, x)
    assert abs(bessel_j(k, x) - want) <= 1e-9 * max(abs(want), 1e-6)


@settings(max_examples=60)
@given(k=st.integers(0, 60), x=st.floats(0, 300))
def test_i_scaled_against_scipy(k, x):
    want = sp.ive(k, x)
    assert abs(bessel_i(k, x, scaled=True) - want) <= 1e-10 * max(abs(want), 1e-290)


def test_i_unscaled_and_prime():
    for k in range(6):
        for x in (0.3, 2.0, 9.0):
            assert bessel_i(k, x) == pytest.approx(sp.iv(k, x), rel=1e-12)
            assert bessel_i_prime(k, x) == pytest.approx(sp.ivp(k, x), rel=1e-10)


def test_j0_prime_identity():
    xs = np.array([0.5, 1.0, 2.0])
    assert np.max(np.abs(bessel_j_prime(0, xs) + np.array([bessel_j(1, x) for x in xs]))) <= 1e-12


@pytest.mark.parametrize("k", [0, 1, 4, 20])
def test_j_prime_against_scipy(k):
    xs = np.linspace(0, 25, 51)
    np.testing.assert_allclose(bessel_j_prime(k, xs), sp.jvp(k, xs), atol=1e-11)


def test_out_of_range():
    with pytest.raises(NumericalFailure):
        bessel_j(70, 1.0)
    with pytest.raises(NumericalFailure):
        bessel_j(0, -1.0)
    with pytest.raises(NumericalFailure):
        bessel_j(0, 2e3)


def test_wronskian_sign():
    # J_{k+1}/J_k increases between zeros, so J_{k+1} J_k' - J_k J_{k+1}' <= 0
    for k in range(1, 8):
        for x in np.linspace(0.1, 30, 60):
            W = bessel_j(k + 1, x) * bessel_j_prime(k, x) - bessel_j(k, x) * bessel_j_prime(k + 1, x)
            assert W <= 1e-14
            assert W == pytest.approx(sp.jv(k + 1, x) * sp.jvp(k, x) - sp.jv(k, x) * sp.jvp(k + 1, x),
                                      abs=1e-11)


def test_first_zero_by_bisection_oracle():
    # bisection on the high precision series
    a, b = 2.0, 3.0
    for _ in range(60):
        m = 0.5 * (a + b)
        if series_j(0, a) * series_j(0, m) <= 0:
            b = m
        else:
            a = m
    assert bessel_zero(0, 1) == pytest.approx(a, abs=1e-9)
    assert bessel_zero(0, 1) == pytest.approx(2.404825557695773, abs=1e-9)


def test_zeros_against_scipy_and_residual():
    for k in (0, 1, 3, 10, 25, 60):
        want = sp.jn_zeros(k, 20)
        for l in (1, 2, 7, 20):
            z = bessel_zero(k, l)
            assert z == pytest.approx(want[l - 1], abs=1e-9)
            assert abs(bessel_j(k, z)) <= 1e-12


def test_zero_interlacing():
    z = [bessel_zero(k, 1) for k in range(12)]
    assert all(a < b for a, b in zip(z, z[1:]))


def test_zero_index_range():
    with pytest.raises(NumericalFailure):
        bessel_zero(0, 21)


def test_safeguarded_newton():
    r = safeguarded_newton(lambda x: x ** 3 - 2, lambda x: 3 * x ** 2, 0.0, 5.0)
    assert r == pytest.approx(2 ** (1 / 3), abs=1e-14)
    with pytest.raises(NumericalFailure):
        safeguarded_newton(lambda x: x ** 2 + 1, lambda x: 2 * x, -1.0, 1.0)


IDENTITY = CharFunction("z", lambda z: z, lambda z: np.ones_like(z))


def test_count_examples():
    assert count_roots(IDENTITY, (-1, 1, -1, 1)) == 1
    assert count_roots(delay_char(), (-0.01, 2, -60, 60)) == 1
    assert count_roots(network_char(), (-0.01, 1, -40, 40)) == 1


def test_network_count_includes_near_axis_pair():
    # the wider rectangle also holds a conjugate pair with Re just below 0
    f = network_char()
    assert count_roots(f, (-0.05, 1, -40, 40)) == 3
    z = -0.01 + 31.2j
    for _ in range(50):
        z -= complex(f(np.array([z]))[0] / f.derivative(np.array([z]))[0])
    assert abs(f(np.array([z]))[0]) < 1e-12
    assert -0.05 < z.real < 0 and abs(z.imag) < 40
    w = mpmath.findroot(lambda s: 4 - 2 * mpmath.exp(-s) - 2 * mpmath.exp(-s * mpmath.sqrt(2)),
                        mpmath.mpc(-0.014, 31.23))
    assert abs(complex(w) - z) < 1e-10


def test_count_root_on_contour():
    with pytest.raises(NumericalFailure):
        count_roots(IDENTITY, (0, 1, -1, 1))


def test_char_derivatives_match_central_differences():
    rng = np.random.default_rng(7)
    z = rng.uniform(-1, 1, 20) + 1j * rng.uniform(-10, 10, 20)
    h = 1e-6
    for f in (delay_char(), network_char(), network_char(1.7), bose_char_k0(1.0)):
        zz = z if f.name != "bose_k0" else z / 10
        fd = (f(zz + h) - f(zz - h)) / (2 * h)
        np.testing.assert_allclose(f.derivative(zz), fd, rtol=1e-6, atol=1e-8)


def test_count_additive_under_split():
    rng = np.random.default_rng(11)
    poly = CharFunction("p", lambda z: (z - 0.3 - 0.2j) * (z + 0.5 - 0.7j) * (z - 0.1 + 0.6j),
                        lambda z: np.polyval(np.polyder(np.poly([0.3 + 0.2j, -0.5 + 0.7j,
                                                                  0.1 - 0.6j])), z))
    for _ in range(10):
        a, c = rng.uniform(-1.5, -1.0), rng.uniform(-1.5, -1.0)
        b, d = rng.uniform(1.0, 1.5), rng.uniform(1.0, 1.5)
        xm, ym = rng.uniform(-0.05, 0.05), rng.uniform(-0.05, 0.05)
        parts = [(a, xm, c, ym), (xm, b, c, ym), (a, xm, ym, d), (xm, b, ym, d)]
        assert count_roots(poly, (a, b, c, d)) == sum(count_roots(poly, p) for p in parts) == 3


def test_refine_examples():
    rs = find_roots(delay_char(), (-0.01, 2, -60, 60))
    assert not rs.mismatch and len(rs.roots) == 1 and abs(rs.roots[0]) <= 1e-11
    rs = find_roots(network_char(), (-0.05, 1, -40, 40))
    assert not rs.mismatch and abs(rs.roots[0]) <= 1e-11
    assert abs(network_char()(np.array([0.0]))[0]) == 0
    j01 = bessel_zero(0, 1)
    rs = find_roots(bose_char_k0(1.0), (1e-3, j01 ** 2 - 1e-3, -1, 1))
    assert len(rs.roots) == 1 and not rs.mismatch
    lam = rs.roots[0].real
    s = np.sqrt(lam)
    assert s * sp.jvp(0, s) + sp.jv(0, s) == pytest.approx(0, abs=1e-10)


def test_refine_rejects_bad_seed():
    rs = refine_roots(IDENTITY, (0.5, 1, -1, 1), [0.7 + 0.1j], count=0)
    assert rs.roots == [] and rs.rejected[0]["reason"] == "outside region"


def test_consistency_on_bundled_functions():
    for f, rect in ((delay_char(), (-3, 2, -30, 30)), (network_char(), (-2, 1, -20, 20))):
        rs = find_roots(f, rect)
        assert not rs.mismatch and len(rs.roots) == rs.count_by_argument
        assert max(rs.residuals) <= 1e-11
