import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qmlab import constants
from qmlab import hyperfine as hf
from qmlab.linalg import ode_rk4

A = constants.A_HFS
HB = constants.HBAR_MHZ


@pytest.fixture(scope="module")
def model():
    return hf.HyperfineModel()


def test_field_free_spectrum(model):
    lv = hf.levels(model, 0.0)
    assert np.allclose(lv.energies, [-5 * A / 4] * 3 + [3 * A / 4] * 5, atol=1e-9 * A)


def test_field_free_states_are_f_eigenstates(model):
    o = model.ops
    h = hf.h0(model, 0.0)
    assert abs(o["F2"] @ h - h @ o["F2"]).max() < 1e-10 * A
    lv = hf.levels(model, 0.0)
    v = lv.vectors
    for op in (o["F2"], o["Fz"]):
        m = v.conj().T @ (op @ v)
        assert np.abs(m - np.diag(np.diag(m))).max() < 1e-10
    f2, fz = hf.f_quantum_numbers(model, v)
    for (f, mf), a, b in zip(lv.labels, f2, fz):
        assert a == pytest.approx(f * (f + 1), abs=1e-9)
        assert b == pytest.approx(mf, abs=1e-9)


def test_low_field_slopes(model):
    # E ~ -g muB M_F Bz with g1 = -(gS - 5 gI)/4 (F=1) and g2 = (gS + 3 gI)/4 (F=2)
    g1 = -(model.gS - 5 * model.gI) / 4
    g2 = (model.gS + 3 * model.gI) / 4
    assert abs(g1) == pytest.approx(0.501824, abs=1e-6)
    assert abs(g2) == pytest.approx(0.499833, abs=1e-6)
    h = 0.01
    lo, hi = hf.levels(model, 0.0), hf.levels(model, h)
    for f, mf in hi.labels:
        slope = (hi.energy((f, mf)) - lo.energy((f, mf))) / h
        g = g1 if f == 1 else g2
        assert slope == pytest.approx(-g * model.muB * mf, abs=1e-3)


def test_high_field_basis_is_permuted_product_basis(model):
    # overlap probabilities with the |M_I, M_J> basis form a permutation matrix
    ov = np.abs(hf.levels(model, 1e6).vectors) ** 2
    perm = ov.round()
    assert np.allclose(perm.sum(axis=0), 1) and np.allclose(perm.sum(axis=1), 1)
    assert np.abs(ov - perm).max() < 1e-3


def test_magic_field(model):
    bz, val = hf.magic_field(model)
    assert bz == pytest.approx(3.22895, abs=1e-3)
    assert val == pytest.approx(-0.00449737, abs=1e-5)

    def gap(b):
        lv = hf.levels(model, b)
        return lv.energy((2, 1)) - lv.energy((1, -1)) - 2 * A

    assert gap(bz) == pytest.approx(val, abs=1e-12)
    d = 1e-3
    assert abs((gap(bz + d) - gap(bz - d)) / (2 * d)) < 1e-6


def test_magic_field_no_interior_extremum(model):
    with pytest.raises(ValueError):
        hf.magic_field(model, bracket=(10.0, 20.0))


def test_levels_continuous(model):
    e1 = hf.levels(model, 7.0).energies
    e2 = hf.levels(model, 7.0 + 1e-4).energies
    assert np.abs(e2 - e1).max() <= 2 * model.muB * 1e-4


def test_tracking_overlaps_stay_high(model):
    _, labels, worst = hf.track_levels(model, np.arange(0.0, 3001.0, 1.0))
    assert len(labels) == 8
    assert worst.min() > 0.5


def test_transition_matrix(model):
    t, lv = hf.transition_matrix(model, 5.0, [0.3, 0.1, 0.2])
    assert np.abs(t - t.conj().T).max() < 1e-12
    # a magnetic dipole field changes M_F by at most one
    for a, (fa, ma) in enumerate(lv.labels):
        for b, (fb, mb) in enumerate(lv.labels):
            if abs(ma - mb) > 1:
                assert abs(t[a, b]) < 1e-12
    assert abs(t[lv.index((2, 2)), lv.index((2, -2))]) < 1e-12
    zero, _ = hf.transition_matrix(model, 5.0, [0, 0, 0])
    assert np.abs(zero).max() == 0


def rwa_params(seed):
    r = np.random.default_rng(seed)
    ei, ej = r.uniform(1, 2), r.uniform(-1, 0)
    tij = r.uniform(0.05, 0.5) * np.exp(1j * r.uniform(0, 2 * np.pi))
    omega = (ei - ej) / HB + r.uniform(-2, 2)
    return hf.RwaParams(ei, ej, tij, omega)


def test_rwa_initial_values():
    p = rwa_params(0)
    pi, pj = hf.rwa_evolve(p, 0.6, 0.8j, 0.0)
    assert pi == pytest.approx(0.6) and pj == pytest.approx(0.8j)


def test_rwa_resonant_rabi_flopping():
    p = hf.RwaParams(1.0, 0.0, 0.2 + 0.1j, 1.0 / HB)
    assert p.delta == pytest.approx(0.0, abs=1e-12)
    t = np.linspace(0, 50, 101)
    pi, _ = hf.rwa_evolve(p, 0.0, 1.0, t)
    assert np.allclose(np.abs(pi) ** 2, np.sin(abs(p.Tij) * t / (2 * HB)) ** 2, atol=1e-12)


def test_rwa_zero_coupling_keeps_populations():
    p = hf.RwaParams(1.0, 0.0, 0.0, 3.0)
    pi, pj = hf.rwa_evolve(p, 0.6, 0.8, np.linspace(0, 10, 7))
    assert np.allclose(np.abs(pi), 0.6) and np.allclose(np.abs(pj), 0.8)


@given(st.integers(0, 2**31 - 1), st.floats(0, 100))
def test_rwa_conserves_norm(seed, t):
    p = rwa_params(seed)
    pi, pj = hf.rwa_evolve(p, 0.6, 0.8j, t)
    assert abs(abs(pi) ** 2 + abs(pj) ** 2 - 1) < 1e-12
    assert p.rabi >= abs(p.delta)


@pytest.mark.parametrize("seed", [1, 2, 3])
def test_rwa_rk4_matches_closed_form(seed):
    p = rwa_params(seed)
    tend = 5 * 2 * np.pi / p.rabi
    steps = 4000
    traj = ode_rk4(hf.rwa_rhs(p), [0.6, 0.8j], 0.0, tend, steps)
    pi, pj = hf.rwa_evolve(p, 0.6, 0.8j, np.linspace(0, tend, steps + 1))
    assert np.abs(traj[:, 0] - pi).max() < 1e-6
    assert np.abs(traj[:, 1] - pj).max() < 1e-6


def test_interaction_picture_zero_drive(model):
    f, _ = hf.interaction_picture_rhs(model, 3.0, [0, 0, 0], 10.0)
    assert np.abs(f(0.3, np.ones(8, complex))).max() == 0


def test_interaction_picture_conserves_norm(model):
    f, _ = hf.interaction_picture_rhs(model, 3.22895, [0.1, 0.05, 0.02], 2 * np.pi * 6.8, energy_scale=1e-3)
    y0 = np.full(8, 1 / np.sqrt(8), dtype=complex)
    traj = ode_rk4(f, y0, 0.0, 10.0, 8000)
    assert np.abs(np.linalg.norm(traj, axis=1) - 1).max() < 1e-8


def test_scaled_driven_system_follows_rwa(model):
    # carrier and level energies scaled by 1e-3 so RK4 can resolve the oscillation
    bz, scale, bac = 50.0, 1e-3, [0.01, 0, 0]
    i, j = 1, 6
    t, lv = hf.transition_matrix(model, bz, bac)
    e = lv.energies * scale
    omega = (e[i] - e[j]) / HB
    p = hf.RwaParams(e[i], e[j], t[i, j], omega)
    f, _ = hf.interaction_picture_rhs(model, bz, bac, omega, energy_scale=scale)
    period = 2 * np.pi / p.rabi
    steps = int(period / 0.005)
    y0 = np.zeros(8, complex)
    y0[j] = 1
    traj = ode_rk4(f, y0, 0.0, period, steps)
    assert np.abs(np.linalg.norm(traj, axis=1) - 1).max() < 1e-6
    pi, pj = hf.rwa_evolve(p, 0.0, 1.0, np.linspace(0, period, steps + 1))
    assert np.abs(np.abs(traj[:, i]) ** 2 - np.abs(pi) ** 2).max() < 2e-2
    assert np.abs(np.abs(traj[:, j]) ** 2 - np.abs(pj) ** 2).max() < 2e-2


def test_dressed_energies():
    p = hf.RwaParams(2.0, 0.0, 0.3, 2.0 / HB)
    ep, em = hf.dressed_energies(p, 0)
    assert ep - em == pytest.approx(0.3, abs=1e-12)
    free = hf.RwaParams(2.0, 0.0, 0.0, 20.0)
    ep, em = hf.dressed_energies(free, 2)
    base = 2.0 + 2 * HB * 20.0
    assert ep == pytest.approx(base + HB * free.delta)
    assert em == pytest.approx(base)


def test_dressed_far_detuned_shift():
    tij = 0.01
    delta = 100 * tij / HB
    p = hf.RwaParams(1.0, 0.0, tij, 1.0 / HB + delta)
    # with T=0 the upper dressed level sits at Ei + hbar*Delta
    ep, _ = hf.dressed_energies(p, 0)
    shift = ep - (1.0 + HB * delta)
    expect = tij**2 / (4 * HB * delta)
    assert abs(shift) == pytest.approx(expect, rel=1e-2)
