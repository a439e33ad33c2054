import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wavemax.ambiguity import (
    AmbiguityData,
    TransformedData,
    adjoint,
    ambiguity_classic,
    ambiguity_frft,
    assemble_B,
    delay_map_from,
    lipschitz_estimate,
    measure_traces,
    transform_Y,
)
from wavemax.frft import AngleGrid, build_bank

from .conftest import random_hermitian, random_vector


def _bank(n, count=None):
    return build_bank(n, count)


def test_delta_at_quarter_rotation():
    bank = build_bank(8, AngleGrid(np.array([np.pi / 2])))
    A = ambiguity_frft(np.eye(8)[0], bank).values[0]
    assert np.allclose(A, np.eye(8)[0], atol=1e-12)


def test_quartic_homogeneity_and_phase_invariance(rng):
    bank = _bank(8)
    x = random_vector(rng, 8)
    A = ambiguity_frft(x, bank).values
    assert np.allclose(ambiguity_frft(2j * x, bank).values, 16 * A, rtol=1e-10)
    assert np.allclose(ambiguity_frft(np.exp(0.4j) * x, bank).values, A, rtol=1e-10)


def test_surface_matches_dense_B_oracle(rng):
    bank = _bank(6, 5)
    x = random_vector(rng, 6)
    A = ambiguity_frft(x, bank).values
    X = np.outer(x, x.conj())
    for a in range(5):
        for k in range(6):
            assert np.isclose(abs(np.trace(assemble_B(bank, a, k) @ X)) ** 2, A[a, k], rtol=1e-10)


@pytest.mark.parametrize("n", [8, 16, 32])
def test_traces_of_lift_reproduce_surface(rng, n):
    bank = _bank(n)
    x = random_vector(rng, n)
    A = ambiguity_frft(x, bank).values
    Ph = measure_traces(np.outer(x, x.conj()), bank)
    assert np.max(np.abs(np.abs(Ph) ** 2 - A)) <= 1e-9 * A.max()


def test_trace_examples():
    bank = _bank(8)
    assert np.all(measure_traces(np.zeros((8, 8)), bank) == 0)
    expected = np.zeros((8, 8), dtype=complex)
    expected[:, 0] = 8
    assert np.allclose(measure_traces(np.eye(8), bank), expected, atol=1e-10)
    with pytest.raises(ValueError):
        measure_traces(np.triu(np.ones((8, 8))), bank)
    with pytest.raises(ValueError):
        measure_traces(np.eye(7), bank)


def test_traces_respect_mask(rng):
    bank = _bank(8)
    mask = rng.random((8, 8)) < 0.5
    Ph = measure_traces(random_hermitian(rng, 8), bank, mask)
    assert np.all(Ph[~mask] == 0)


@settings(max_examples=30, deadline=None)
@given(n=st.sampled_from([4, 5, 8, 16]), seed=st.integers(0, 2**32 - 1))
def test_adjoint_pairing(n, seed):
    rng = np.random.default_rng(seed)
    bank = _bank(n)
    Z = random_hermitian(rng, n)
    G = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    mask = rng.random((n, n)) < 0.7
    lhs = np.real(np.vdot(G, measure_traces(Z, bank, mask)))
    rhs = np.real(np.vdot(adjoint(G, bank, mask), Z))
    assert abs(lhs - rhs) <= 1e-10 * max(1.0, abs(lhs))


def test_adjoint_of_unit_entry_is_hermitian_part_of_B_adjoint():
    bank = _bank(6, 4)
    G = np.zeros((4, 6), dtype=complex)
    G[2, 3] = 1
    B = assemble_B(bank, 2, 3)
    H = B.conj().T
    assert np.allclose(adjoint(G, bank), 0.5 * (H + H.conj().T), atol=1e-12)
    assert np.all(adjoint(np.zeros((4, 6)), bank) == 0)


def test_adjoint_is_gradient_of_misfit(rng):
    # finite-difference oracle for d/dZ 0.5 * ||Ph(Z) - c||^2
    n = 6
    bank = _bank(n)
    c = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    Z = random_hermitian(rng, n)
    D = random_hermitian(rng, n)

    def f(M):
        return 0.5 * np.sum(np.abs(measure_traces(M, bank) - c) ** 2)

    grad = adjoint(measure_traces(Z, bank) - c, bank)
    h = 1e-6
    fd = (f(Z + h * D) - f(Z - h * D)) / (2 * h)
    assert np.isclose(fd, np.real(np.vdot(grad, D)), rtol=1e-6)


def test_Y_identities(rng):
    n = 12
    bank = _bank(n)
    x = random_vector(rng, n)
    A = ambiguity_frft(x, bank)
    Y = transform_Y(A)
    norm4 = np.linalg.norm(x) ** 4
    assert np.allclose(Y.values.sum(axis=1), norm4, rtol=1e-8)
    p = np.abs(bank.matrices @ x) ** 2
    assert np.allclose(Y.values[:, 0], np.sum(p**2, axis=1), rtol=1e-10)
    for a in range(n):
        for l in range(n):
            direct = sum(p[a, (j + l) % n] * p[a, j] for j in range(n))
            assert np.isclose(Y.values[a, l], direct, rtol=1e-9, atol=1e-12 * norm4)


def test_Y_row_handling(rng):
    bank = _bank(8)
    A = ambiguity_frft(random_vector(rng, 8), bank)
    mask = np.ones((8, 8), dtype=bool)
    mask[1] = False
    Y = transform_Y(A.with_mask(mask))
    assert list(Y.angle_indices) == [0, 2, 3, 4, 5, 6, 7]
    mask[3, 2] = False
    with pytest.raises(ValueError):
        transform_Y(A.with_mask(mask))
    assert transform_Y(A.with_mask(mask), fill_missing=True).values.shape == (7, 8)


def test_classic_surface_examples(rng):
    n = 16
    x = random_vector(rng, n)
    grid = AngleGrid(np.array([-0.5, 0.0, 0.5]))
    delay = delay_map_from(20 * 0.4e-6, 0.4e-6)
    A = ambiguity_classic(x, grid, delay)
    assert np.allclose(A[1], np.abs(np.fft.fft(np.abs(x) ** 2)) ** 2, rtol=1e-10)
    e0 = np.eye(n)[0]
    D = ambiguity_classic(e0, grid, delay)
    assert np.all(D[[0, 2]] == 0) and np.all(D[1] > 0)
    # conjugate reflection only permutes bins when the Doppler lands on them
    exact = AngleGrid(np.array([0.0, np.pi / 2]))
    reflected = np.conj(x[(-np.arange(n)) % n])
    assert np.allclose(ambiguity_classic(reflected, exact, lambda a: 0), ambiguity_classic(x, exact, lambda a: 0))


def test_frft_surface_reflection_symmetries(rng):
    n = 16
    bank = _bank(n)
    x = random_vector(rng, n)
    A = ambiguity_frft(x, bank).values
    idx = (-np.arange(n)) % n
    assert np.allclose(ambiguity_frft(x[idx], bank).values, A, rtol=1e-10)
    # conjugation maps alpha to -alpha, i.e. reverses a symmetric grid
    assert np.allclose(ambiguity_frft(np.conj(x[idx]), bank).values, A[::-1], rtol=1e-10)


def test_data_validation():
    grid = AngleGrid(np.array([0.0]))
    with pytest.raises(ValueError):
        AmbiguityData(np.array([[-1.0, 1.0]]), np.ones((1, 2), bool), grid)
    with pytest.raises(ValueError):
        AmbiguityData(np.ones((2, 2)), np.ones((2, 2), bool), grid)
    A = AmbiguityData(np.array([[3.0, -1.0]]), np.array([[True, False]]), grid)
    assert A.values[0, 1] == 0 and A.m == 1
    with pytest.raises(ValueError):
        TransformedData(np.ones((2, 2)), [0])


def test_lipschitz_estimate_bounds_operator(rng):
    bank = _bank(8)
    L = lipschitz_estimate(bank)
    for _ in range(5):
        Z = random_hermitian(rng, 8)
        assert np.linalg.norm(adjoint(measure_traces(Z, bank), bank)) <= L * np.linalg.norm(Z) * (1 + 1e-6)
