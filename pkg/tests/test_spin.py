import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qmlab import constants
from qmlab.spin import SpinSpec, rotation, sid, sminus, splus, sx, sy, sz, unit_prefactor, zeeman_hamiltonian

half_integers = st.integers(0, 12).map(lambda t: t / 2)


def dense(a):
    return a.toarray()


def test_spin_half_is_pauli_over_two():
    assert np.allclose(dense(sz(0.5)), np.diag([0.5, -0.5]))
    assert np.allclose(dense(sx(0.5)), [[0, 0.5], [0.5, 0]])
    assert np.allclose(dense(sy(0.5)), [[0, -0.5j], [0.5j, 0]])


def test_ladder_on_spin_one():
    mid = np.array([0, 1, 0])
    assert np.allclose(splus(1) @ mid, [np.sqrt(2), 0, 0])


def test_spin_zero():
    assert dense(splus(0)).shape == (1, 1)
    assert dense(splus(0))[0, 0] == 0
    assert dense(sid(0))[0, 0] == 1


def test_spec_validation():
    with pytest.raises(ValueError):
        SpinSpec(-1)
    with pytest.raises(ValueError):
        SpinSpec.of(0.3)
    assert SpinSpec.of(1.5).dim == 4


@given(half_integers)
def test_casimir_and_commutators(s):
    x, y, z = dense(sx(s)), dense(sy(s)), dense(sz(s))
    n = x.shape[0]
    assert np.abs(x @ x + y @ y + z @ z - s * (s + 1) * np.eye(n)).max() < 1e-12
    assert np.abs(x @ y - y @ x - 1j * z).max() < 1e-12
    assert np.abs(y @ z - z @ y - 1j * x).max() < 1e-12
    assert np.abs(z @ x - x @ z - 1j * y).max() < 1e-12


@given(half_integers)
def test_structure(s):
    assert (splus(s).conj().T != sminus(s)).nnz == 0
    top = np.zeros(int(2 * s + 1))
    top[0] = 1
    assert np.allclose(sz(s) @ top, s * top)


def test_rotation_identity_and_sign():
    assert np.allclose(rotation(1, [0, 0, 1], 0.0), np.eye(3))
    assert np.allclose(rotation(0.5, [0, 0, 1], 2 * np.pi), -np.eye(2), atol=1e-12)


@given(half_integers, st.floats(-10, 10), st.floats(0, np.pi), st.floats(0, 2 * np.pi))
def test_rotation_unitary(s, alpha, theta, phi):
    n = [np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)]
    r = rotation(s, n, alpha)
    assert np.abs(r @ r.conj().T - np.eye(r.shape[0])).max() < 1e-12


def test_rotation_rejects_non_unit_axis():
    with pytest.raises(ValueError):
        rotation(0.5, [1, 1, 0], 1.0)


def test_unit_prefactor():
    assert unit_prefactor() == pytest.approx(1.399625, abs=1e-5)


def test_zeeman_along_z():
    k = unit_prefactor()
    h = dense(zeeman_hamiltonian((0, 0, 1)))
    e = k * (-constants.G_E) / 2
    assert np.allclose(h, np.diag([e, -e]))


@given(st.floats(-5, 5), st.floats(-5, 5), st.floats(-5, 5), st.floats(0, 7), st.floats(0, np.pi))
def test_zeeman_spectrum_depends_on_magnitude(bx, by, bz, alpha, theta):
    b = np.array([bx, by, bz])
    axis = np.array([np.sin(theta), 0, np.cos(theta)])
    c, s_ = np.cos(alpha), np.sin(alpha)
    # Rodrigues rotation of b about axis
    rb = b * c + np.cross(axis, b) * s_ + axis * axis.dot(b) * (1 - c)
    w1 = np.linalg.eigvalsh(dense(zeeman_hamiltonian(b)))
    w2 = np.linalg.eigvalsh(dense(zeeman_hamiltonian(rb)))
    assert np.allclose(w1, w2, atol=1e-12)
    k = unit_prefactor() * (-constants.G_E) / 2
    assert np.allclose(w1, [-k * np.linalg.norm(b), k * np.linalg.norm(b)], atol=1e-12)
