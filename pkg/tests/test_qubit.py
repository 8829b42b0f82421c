import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import eig_negativity
from rocent.qubit import (IDENTITY2, IDENTITY4, DensityMatrix, from_hermitian_coords, hermitian_coords,
                          negativity, partial_transpose, pauli, random_density_matrix, random_hermitian,
                          rotation, tensor, trace_norm)
from rocent.states import NamedState, make_state

angles = st.floats(-10.0, 10.0, allow_nan=False)


def test_pauli_algebra():
    sx, sy, sz = pauli("x"), pauli("y"), pauli("z")
    assert np.allclose(sz @ sz, IDENTITY2)
    assert abs(np.trace(sx)) == 0
    assert np.allclose(sx @ sy, 1j * sz)
    for s in (sx, sy, sz):
        assert np.allclose(s, s.conj().T)
    with pytest.raises(ValueError):
        pauli("w")


def test_pauli_returns_fresh_copy():
    m = pauli("x")
    m[0, 0] = 5
    assert pauli("x")[0, 0] == 0


def test_rotation_examples():
    assert np.allclose(rotation(0.0), IDENTITY2)
    u = rotation(np.pi / 2)
    assert np.allclose(u.conj().T @ pauli("x") @ u, -pauli("x"), atol=1e-12)


@given(angles)
def test_rotation_unitary_and_inverse(phi):
    u = rotation(phi)
    assert np.allclose(u @ u.conj().T, IDENTITY2, atol=1e-12)
    assert np.allclose(rotation(phi) @ rotation(-phi), IDENTITY2, atol=1e-12)


@given(angles)
def test_rotation_conjugation_formula(phi):
    u = rotation(phi)
    expected = np.cos(2 * phi) * pauli("x") - np.sin(2 * phi) * pauli("y")
    assert np.allclose(u.conj().T @ pauli("x") @ u, expected, atol=1e-12)


@given(angles)
def test_rotation_action_has_period_pi(phi):
    a, b = rotation(phi), rotation(phi + np.pi)
    sx = pauli("x")
    assert np.allclose(a.conj().T @ sx @ a, b.conj().T @ sx @ b, atol=1e-12)


def test_tensor():
    assert np.allclose(tensor(IDENTITY2, IDENTITY2), IDENTITY4)
    rng = np.random.default_rng(1)
    a, b = random_hermitian(rng, 2), random_hermitian(rng, 2)
    assert np.isclose(np.trace(tensor(a, b)), np.trace(a) * np.trace(b))
    singlet = make_state(NamedState.singlet())
    assert np.isclose(singlet.expectation(tensor(pauli("x"), pauli("x"))), -1.0)
    with pytest.raises(ValueError):
        tensor(IDENTITY4, IDENTITY2)


def test_partial_transpose_acts_on_first_factor():
    rng = np.random.default_rng(2)
    a = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    b = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    assert np.allclose(partial_transpose(np.kron(a, b)), np.kron(a.T, b))
    with pytest.raises(ValueError):
        partial_transpose(IDENTITY2)


def test_partial_transpose_of_singlet():
    pt = partial_transpose(make_state(NamedState.singlet()).matrix)
    assert np.isclose(np.linalg.eigvalsh(pt).min(), -0.5)


@settings(max_examples=50)
@given(st.integers(0, 2**32 - 1))
def test_partial_transpose_involutive_and_trace_preserving(seed):
    rho = random_density_matrix(np.random.default_rng(seed)).matrix
    pt = partial_transpose(rho)
    assert np.allclose(partial_transpose(pt), rho)
    assert np.isclose(np.trace(pt), np.trace(rho))


def test_negativity_examples():
    assert negativity(DensityMatrix(IDENTITY4 / 4)) == 0.0
    assert np.isclose(negativity(make_state(NamedState.singlet())), 0.5)
    for f in np.linspace(0, 1, 21):
        assert np.isclose(negativity(make_state(NamedState.werner(f))), max(0.0, (3 * f - 1) / 4), atol=1e-12)


def test_negativity_rejects_non_hermitian():
    bad = IDENTITY4 / 4 + 0.1 * np.triu(np.ones((4, 4)), 1)
    with pytest.raises(ValueError):
        negativity(bad)


def test_negativity_random_states_against_brute_force():
    rng = np.random.default_rng(3)
    for _ in range(1000):
        rho = random_density_matrix(rng, rank=int(rng.integers(1, 5)))
        n = negativity(rho)
        assert n >= 0
        assert abs(n - eig_negativity(rho.matrix)) < 1e-10
        if np.linalg.eigvalsh(partial_transpose(rho.matrix)).min() >= 0:
            assert n < 1e-10


@settings(max_examples=100)
@given(st.integers(0, 2**32 - 1))
def test_trace_norm_matches_eigenvalues(seed):
    a = random_hermitian(np.random.default_rng(seed), 4)
    assert abs(trace_norm(a) - np.abs(np.linalg.eigvalsh(a)).sum()) < 1e-12


def test_density_matrix_validation():
    with pytest.raises(ValueError):
        DensityMatrix(IDENTITY4 / 2)  # trace 2
    with pytest.raises(ValueError):
        DensityMatrix(np.diag([1.5, -0.5, 0, 0]))
    with pytest.raises(ValueError):
        DensityMatrix(np.eye(3) / 3)
    asym = IDENTITY4 / 4
    asym = asym + 1e-11 * np.triu(np.ones((4, 4)), 1)
    rho = DensityMatrix(asym)
    assert np.allclose(rho.matrix, rho.matrix.conj().T, atol=0)
    with pytest.raises(ValueError):
        rho.matrix[0, 0] = 1


@settings(max_examples=50)
@given(st.integers(0, 2**32 - 1))
def test_hermitian_coords_roundtrip(seed):
    h = random_hermitian(np.random.default_rng(seed), 4)
    assert np.allclose(from_hermitian_coords(hermitian_coords(h)), h)
