import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wavemax.frft import (
    AngleGrid,
    apply_frft,
    build_angle_grid,
    build_bank,
    build_frft_matrix,
    hermite_basis,
    unitary_dft,
)

from .conftest import random_vector


def test_zero_angle_is_identity():
    assert np.linalg.norm(build_frft_matrix(8, 0.0) - np.eye(8)) <= 1e-12


@pytest.mark.parametrize("n", [2, 3, 4, 5, 8, 9, 16, 33, 64])
def test_quarter_rotation_is_dft(n):
    assert np.linalg.norm(build_frft_matrix(n, np.pi / 2) - unitary_dft(n)) <= 1e-10


def test_angle_additivity_n8():
    F = build_frft_matrix(8, np.pi / 4)
    assert np.linalg.norm(F @ F - build_frft_matrix(8, np.pi / 2)) <= 1e-8


@settings(max_examples=40, deadline=None)
@given(n=st.integers(2, 40), a=st.floats(-4, 4), b=st.floats(-4, 4))
def test_unitary_and_additive(n, a, b):
    Fa, Fb = build_frft_matrix(n, a), build_frft_matrix(n, b)
    assert np.linalg.norm(Fa @ Fa.conj().T - np.eye(n)) <= 1e-10
    assert np.linalg.norm(Fa @ Fb - build_frft_matrix(n, a + b)) <= 1e-8


def test_periodic_in_two_pi():
    assert np.allclose(build_frft_matrix(12, 0.3), build_frft_matrix(12, 0.3 + 2 * np.pi), atol=1e-12)


def test_half_turn_is_reflection():
    n = 9
    P = np.zeros((n, n))
    P[np.arange(n), (-np.arange(n)) % n] = 1
    assert np.allclose(build_frft_matrix(n, np.pi), P, atol=1e-10)


@pytest.mark.parametrize("n", [4, 7, 16])
def test_hermite_basis_orthonormal_and_dft_eigen(n):
    V, orders = hermite_basis(n)
    assert np.allclose(V.T @ V, np.eye(n), atol=1e-12)
    W = unitary_dft(n)
    for k in range(n):
        assert np.allclose(W @ V[:, k], (-1j) ** orders[k] * V[:, k], atol=1e-10)
    assert not V.flags.writeable


def test_hermite_orders():
    assert list(hermite_basis(5)[1]) == [0, 1, 2, 3, 4]
    assert sorted(hermite_basis(6)[1]) == [0, 1, 2, 3, 4, 6]


@pytest.mark.parametrize("bad", [1, 0, -3])
def test_rejects_small_n(bad):
    with pytest.raises(ValueError):
        build_frft_matrix(bad, 0.1)


def test_rejects_nonfinite_angle():
    with pytest.raises(ValueError):
        build_frft_matrix(8, np.nan)


def test_apply_frft_examples(rng):
    bank = build_bank(8, AngleGrid(np.array([0.0, np.pi / 3, np.pi / 2])))
    e0 = np.eye(8)[0]
    assert np.allclose(apply_frft(bank, 0, e0), e0)
    assert np.allclose(apply_frft(bank, 2, np.ones(8) / np.sqrt(8)), e0, atol=1e-6)
    x = random_vector(rng, 8)
    assert np.allclose(apply_frft(bank, 1, x), build_frft_matrix(8, np.pi / 3) @ x, atol=1e-12)
    with pytest.raises(ValueError):
        apply_frft(bank, 0, np.ones(7))


def test_angle_grid_examples():
    assert np.allclose(build_angle_grid(3).angles, [-np.pi / 2, 0, np.pi / 2])
    assert np.allclose(np.diff(build_angle_grid(128).angles), np.pi / 127)
    g = build_angle_grid(7, (np.pi / 2, 3 * np.pi / 2))
    assert len(g) == 7 and np.allclose(np.diff(g.angles), np.pi / 6)


def test_angle_grid_validation():
    with pytest.raises(ValueError):
        AngleGrid(np.array([0.1, 0.1]))
    with pytest.raises(ValueError):
        AngleGrid(np.array([0.0, 4.0]))
    with pytest.raises(ValueError):
        build_angle_grid(0)


def test_bank_layout():
    bank = build_bank(6, 4)
    assert bank.n_angles == 4 and bank.matrices.shape == (4, 6, 6)
    assert bank.stacked.shape == (24, 6)
    assert np.allclose(bank.sampling_vector(2, 1), bank.matrices[1, 2].conj())
    sub = bank.subset([0, 3])
    assert np.allclose(sub.matrices[1], bank.matrices[3])
    assert not bank.matrices.flags.writeable
