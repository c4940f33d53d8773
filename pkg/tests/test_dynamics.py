import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from evpos import dynamics as D
from evpos.errors import NumericalFailure
from evpos.special import delay_char, find_roots

SQ2 = np.sqrt(2.0)


# delay equation ----------------------------------------------------------------------

def test_constant_history_is_equilibrium():
    tr = D.simulate_delay(lambda x: np.ones_like(x), 10.0, 1e-2)
    np.testing.assert_allclose(tr.snapshots["y"], 1.0, atol=1e-14)
    np.testing.assert_allclose(tr.functionals["phi"], 2.0, atol=1e-13)
    assert np.all(tr.d_plus == 0)


def test_phi_conserved_hat():
    tr = D.simulate_delay(D.hat_history(), 50.0, 1e-3, record_every=50)
    phi = tr.functionals["phi"]
    assert np.max(np.abs(phi - phi[0])) <= 1e-8


@settings(max_examples=10)
@given(c=st.lists(st.floats(-1, 1), min_size=3, max_size=3))
def test_phi_conserved_any_history(c):
    hist = lambda x: c[0] + c[1] * np.sin(3 * x) + c[2] * np.abs(x + 1.3)
    tr = D.simulate_delay(hist, 20.0, 1e-2, record_every=20)
    phi = tr.functionals["phi"]
    assert np.max(np.abs(phi - phi[0])) <= 1e-8 * max(1.0, np.max(np.abs(phi)))


def test_hat_history_dips_then_recovers():
    # by characteristics y(t) = -int_{-1}^{t-1} hat on [0, 0.25], so min y = -1/8 at t = 1/4
    tr = D.simulate_delay(D.hat_history(), 40.0, 1e-3)
    t, y = tr.snapshots["t"], tr.snapshots["y"]
    early = (t > 0) & (t <= 2)
    assert np.min(y[early]) == pytest.approx(-0.125, abs=1e-9)
    assert t[early][np.argmin(y[early])] == pytest.approx(0.25, abs=1e-3)
    assert tr.d_plus[-1] == 0


def _decaying_mode():
    roots = find_roots(delay_char(), (-3.0, -0.05, 0.5, 30.0)).roots
    return max(roots, key=lambda z: z.real)


def test_order_of_convergence():
    z = _decaying_mode()
    exact = lambda x: np.real(np.exp(z * x))
    errs = []
    for h in (0.1, 0.05, 0.025):
        tr = D.simulate_delay(exact, 4.0, h)
        t, y = tr.snapshots["t"], tr.snapshots["y"]
        errs.append(np.max(np.abs(y - exact(t))))
    rates = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(rates >= 3.5)


def test_delay_asymptotic_limit():
    hist = D.hat_history()
    errs = []
    for T in (20.0, 40.0, 80.0):
        tr = D.simulate_delay(hist, T, 1e-2)
        c = tr.functionals["phi"][0] / 2
        errs.append(np.max(np.abs(tr.final_state.grid - c)))
    assert errs[0] > errs[1] > errs[2] and errs[2] < 1e-4


def test_delay_validation():
    with pytest.raises(NumericalFailure):
        D.simulate_delay(D.hat_history(), 1.0, 0.3)
    with pytest.raises(NumericalFailure):
        D.simulate_delay(D.hat_history(), 1.005, 0.01)
    with pytest.raises(NumericalFailure):
        D.simulate_delay(np.ones(7), 1.0, 0.01)


def test_delay_phi_and_samples():
    h = 0.01
    x = np.linspace(-2, 0, 201)
    assert D.delay_phi(np.ones(201), h) == pytest.approx(2.0)
    assert D.delay_phi(x, h) == pytest.approx(-1.5)
    tr = D.simulate_delay(np.ones(201), 2.0, h)
    np.testing.assert_allclose(tr.snapshots["y"], 1.0)


def test_sign_change_search_reports():
    r = D.delay_sign_change_search(D.hat_history(), T=40.0, h=1e-2, window=10.0)
    assert r["phi"] == pytest.approx(0.125, abs=1e-12)
    assert r["last_negative_time"] is not None


# graph flow ----------------------------------------------------------------------------

def test_graph_stationary_state():
    init = D.graph_state(SQ2, 64, f2=lambda x: 1.0, f3=lambda x: 1.0)
    tr = D.simulate_graph_flow(init, 10.0, min(init.widths))
    for a, b in zip(init.edge_profiles, tr.final_state.edge_profiles):
        np.testing.assert_allclose(a, b, atol=1e-13)
    assert np.all(tr.d_plus == 0)


def test_psi_conserved_and_dip():
    N = 256
    init = D.graph_state(SQ2, N, f1=D.bump())
    tr = D.simulate_graph_flow(init, 100.0, 1.0 / N, record_every=16)
    psi = tr.functionals["psi"]
    assert np.max(np.abs(psi - psi[0])) <= 1e-3 * abs(psi[0])
    window = (tr.times > 0.5) & (tr.times < 2.0)
    mass = 0.25
    assert np.min(tr.min_value[window]) < 0
    # the flipped mass arriving on edge 2 is a third of the bump mass
    neg = D.simulate_graph_flow(init, 1.0, 1.0 / N).final_state.edge_profiles[1]
    assert -np.sum(np.minimum(neg, 0)) / N == pytest.approx(mass / 3, rel=1e-2)
    assert tr.d_plus[-1] <= 1e-6


def test_positive_weights_preserve_positivity():
    N = 128
    init = D.graph_state(SQ2, N, f1=D.bump(), f2=D.bump(0.3, 0.2))
    tr = D.simulate_graph_flow(init, 30.0, 1.0 / N, positive_weights=True)
    assert np.min(tr.min_value) >= -1e-14


def test_cfl_violation():
    init = D.graph_state(SQ2, 32)
    with pytest.raises(NumericalFailure):
        D.simulate_graph_flow(init, 1.0, 0.1)


def test_graph_asymptotic_limit():
    N = 128
    init = D.graph_state(SQ2, N, f1=D.bump())
    fixed = D.extract_state_vector(D.graph_state(SQ2, N, f2=lambda x: 1.0, f3=lambda x: 1.0))
    errs = []
    for T in (20.0, 40.0, 80.0):
        tr = D.simulate_graph_flow(init, T, min(init.widths))
        c = tr.functionals["psi"][0] / (1.0 + SQ2)
        v = D.extract_state_vector(tr.final_state)
        ctx = D.graph_context(init)
        errs.append(float(ctx.norm(v - c * fixed)))
    assert errs[0] > errs[1] > errs[2]


def test_snapshots():
    init = D.graph_state(SQ2, 64, f1=D.bump())
    tr = D.simulate_graph_flow(init, 2.0, 1.0 / 128, record_every=64, snapshot_times=(1.0,))
    assert set(tr.snapshots) == {1.0}


# flattening ----------------------------------------------------------------------------

def test_flatten_examples():
    s = D.DelayState(np.full(21, 3.0))
    np.testing.assert_array_equal(D.extract_state_vector(s), 3.0)
    g = D.graph_state(SQ2, 32, f2=lambda x: 1.0, f3=lambda x: 1.0)
    v = D.extract_state_vector(g)
    np.testing.assert_array_equal(v, np.concatenate([np.zeros(32), np.ones(32 + 45)]))
    with pytest.raises(ValueError):
        D.extract_state_vector(g, D.graph_context(D.graph_state(SQ2, 16)))


@settings(max_examples=20)
@given(seed=st.integers(0, 1000), N=st.integers(16, 64))
def test_flatten_round_trip(seed, N):
    rng = np.random.default_rng(seed)
    g = D.graph_state(SQ2, N)
    v = rng.normal(size=sum(len(p) for p in g.edge_profiles))
    np.testing.assert_array_equal(D.extract_state_vector(D.unflatten_state(v, g)), v)
    s = D.DelayState(rng.normal(size=2 * N + 1), 1.5)
    back = D.unflatten_state(D.extract_state_vector(s), s)
    np.testing.assert_array_equal(back.grid, s.grid)
    assert back.t_now == 1.5
