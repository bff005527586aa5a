import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad

from qmlab import grid1d as g1


def explicit_x(n):
    j = np.arange(1, n + 1)
    return np.sqrt(2 / (n + 1)) * np.sin(np.pi * np.outer(j, j) / (n + 1))


def rand_vec(r, n, complex_=True):
    v = r.normal(size=n)
    return v + 1j * r.normal(size=n) if complex_ else v


def test_grid_points():
    g = g1.Grid1D(4)
    assert np.allclose(g.x, [0.2, 0.4, 0.6, 0.8])
    with pytest.raises(ValueError):
        g1.Grid1D(0)


@given(st.integers(1, 200), st.integers(0, 2**31 - 1))
def test_dst_involution_and_norm(n, seed):
    v = rand_vec(np.random.default_rng(seed), n)
    u = g1.dst1(v)
    assert np.abs(g1.dst1(u) - v).max() < 1e-12 * max(1, np.abs(v).max()) * 10
    assert abs(np.linalg.norm(u) - np.linalg.norm(v)) < 1e-12 * np.linalg.norm(v) * 10


@given(st.integers(1, 64))
def test_dst_matrix_orthogonal(n):
    x = g1.dst_matrix(n)
    assert np.abs(x - x.T).max() == 0
    assert np.abs(x @ x - np.eye(n)).max() < 1e-12


def test_dst_explicit_matrix_n7():
    v = rand_vec(np.random.default_rng(7), 7)
    assert np.abs(g1.dst1(v) - explicit_x(7) @ v).max() < 1e-12


@pytest.mark.parametrize("n", [65, 100, 257])
def test_fft_branch_matches_matrix(n):
    v = rand_vec(np.random.default_rng(n), n)
    assert np.abs(g1.dst1(v) - explicit_x(n) @ v).max() < 1e-12


def test_dst_first_column():
    x = explicit_x(9)
    e = g1.dst1(x[:, 0])
    assert np.allclose(e, np.eye(9)[0], atol=1e-14)


def test_dst_along_axis():
    a = rand_vec(np.random.default_rng(1), 30).reshape(5, 6)
    assert np.allclose(g1.dst1(a, axis=0), explicit_x(5) @ a)
    assert np.allclose(g1.dst1(a, axis=1), a @ explicit_x(6))


@given(st.integers(1, 12), st.integers(0, 2**31 - 1))
def test_operator_round_trip(n, seed):
    r = np.random.default_rng(seed)
    u = r.normal(size=(n, n))
    x = explicit_x(n)
    assert np.abs(x @ g1.operator_to_position(u) @ x - u).max() < 1e-10


def test_kinetic_position():
    g = g1.Grid1D(12)
    k = g1.kinetic_position(g).toarray()
    assert np.abs(k - k.T).max() < 1e-12
    assert np.allclose(np.linalg.eigvalsh(k), np.arange(1, 13) ** 2, atol=1e-10)


def test_kinetic_position_n3_by_hand():
    s = np.sin(np.pi / 4)  # entries of X for n=3: sqrt(1/2) * (sin(pi j k /4))
    x = np.sqrt(0.5) * np.array([[s, 1, s], [1, 0, -1], [s, -1, s]])
    ref = x @ np.diag([1.0, 4.0, 9.0]) @ x
    assert np.allclose(g1.kinetic_position(g1.Grid1D(3)).toarray(), ref, atol=1e-12)
    assert ref[0, 0] == pytest.approx(0.25 * 1 + 0.5 * 4 + 0.25 * 9)


def test_potential_position():
    g = g1.Grid1D(10)
    assert g1.potential_position(g, lambda x: 0.0).nnz == 0
    d = g1.potential_position(g, g1.step_potential(3.0)).diagonal().real
    assert np.allclose(d, [3.0] * 5 + [0.0] * 5)
    h = g1.potential_position(g1.Grid1D(11), lambda x: 500 * (x - 0.5) ** 2).diagonal().real
    assert np.allclose(h, h[::-1])
    with pytest.raises(ValueError):
        g1.potential_position(g, lambda x: np.inf)


def test_step_midpoint_convention():
    d = g1.potential_position(g1.Grid1D(3), g1.step_potential(2.0)).diagonal().real
    assert np.allclose(d, [2.0, 1.0, 0.0])


def test_step_matrix_elements():
    om = 2.0
    assert g1.stepwell_momentum_me(om, 1, 1) == pytest.approx(1 + om / 2)
    assert g1.stepwell_momentum_me(om, 1, 2) == pytest.approx(4 * om / (3 * np.pi))
    assert g1.stepwell_momentum_me(om, 1, 3) == 0.0
    with pytest.raises(ValueError):
        g1.stepwell_momentum_me(om, 0, 1)


@pytest.mark.parametrize("n,m", [(1, 2), (2, 5), (3, 4), (4, 7), (6, 6)])
def test_step_matrix_elements_by_quadrature(n, m):
    om = 1.7
    f = lambda x: 2 * np.sin(n * np.pi * x) * np.sin(m * np.pi * x) * om  # noqa: E731
    ref = quad(f, 0, 0.5)[0]
    assert g1.stepwell_momentum_me(om, n, m, kinetic=False) == pytest.approx(ref, abs=1e-12)


def test_stepwell_analytic():
    sol = g1.stepwell_analytic(2.0)
    assert sol.k2 == pytest.approx(1.32884, abs=1e-4)
    assert sol.k1 == pytest.approx(0.48392, abs=1e-4)
    assert sol.k1 == pytest.approx(np.sqrt(2.0 - sol.k2**2), abs=1e-12)


def test_stepwell_matching_and_norm():
    sol = g1.stepwell_analytic(2.0)
    a, b, k1, k2 = sol.A, sol.B, sol.k1, sol.k2
    left = a * np.sinh(k1 * np.pi / 2)
    right = b * np.sin(k2 * np.pi / 2)
    dleft = a * k1 * np.pi * np.cosh(k1 * np.pi / 2)
    dright = -b * k2 * np.pi * np.cos(k2 * np.pi / 2)
    assert abs(left - right) < 1e-8 and abs(dleft - dright) < 1e-8
    norm = quad(lambda x: sol(x) ** 2, 0, 0.5)[0] + quad(lambda x: sol(x) ** 2, 0.5, 1)[0]
    assert norm == pytest.approx(1, abs=1e-8)


def test_stepwell_threshold():
    with pytest.raises(ValueError):
        g1.stepwell_analytic(1.6)
    g1.stepwell_analytic(1.67)


def test_stepwell_energy_is_a_lower_bound_of_numerics():
    sol = g1.stepwell_analytic(2.0)
    e, _ = g1.stepwell_ground_momentum(2.0, 30)
    assert e >= sol.energy - 1e-12
    assert e == pytest.approx(sol.energy, abs=1e-3)


def test_interpolate_density():
    g = g1.Grid1D(20)
    v = np.random.default_rng(2).normal(size=20)
    v /= np.linalg.norm(v)
    pts = g1.interpolate_density(g, v)
    assert pts.shape == (22, 2)
    assert pts[0].tolist() == [0, 0] and pts[-1].tolist() == [1, 0]
    assert abs(np.trapezoid(pts[:, 1], pts[:, 0]) - 1) < 2 / 21
    e = np.zeros(20)
    e[4] = 1
    peak = g1.interpolate_density(g, e)
    assert peak[5, 1] == 21 and peak[5, 0] == pytest.approx(g.x[4])


def test_interpolate_momentum_ground_state():
    g = g1.Grid1D(15)
    u = np.zeros(15)
    u[0] = 1
    pts = g1.interpolate_density(g, g1.to_position(u))
    assert np.allclose(pts[:, 1], 2 * np.sin(np.pi * pts[:, 0]) ** 2, atol=1e-10)


def test_overlap_deficits_converge():
    sol = g1.stepwell_analytic(2.0)
    ns = list(range(8, 34, 2))
    dm, dp = [], []
    for n in ns:
        _, u = g1.stepwell_ground_momentum(2.0, n)
        _, v = g1.stepwell_ground_position(2.0, n)
        dm.append(g1.overlap_deficit(sol, u))
        dp.append(g1.overlap_deficit(sol, g1.to_momentum(v)))
    for d in (dm, dp):
        assert np.all(np.diff(d) < 0)
        slope = np.polyfit(np.log(ns), np.log(d), 1)[0]
        assert -5 <= slope <= -3
