"""Frozen values: closed forms and published constants."""

import numpy as np

from wavemax import ambiguity_frft, build_bank, build_frft_matrix, gaussian_bandlimited
from wavemax.harness import derive_seed, splitmix64

R2 = np.sqrt(2.0)


def test_splitmix64_reference_stream():
    # first two outputs of the reference generator seeded with 0
    assert splitmix64(0) == 0xE220A8397B1DCDAF
    assert splitmix64(0x9E3779B97F4A7C15) == 0x6E789E6AA1B965F4


def test_derive_seed_chain():
    assert derive_seed(0, 0) == splitmix64(1)
    assert derive_seed(7, 3, 2) == splitmix64(splitmix64(7 + 4) + 3)
    assert derive_seed(0, 0) == 10451216379200822465


def test_frft_quarter_angle_n4_closed_form():
    a, b, c = 1 / R2, 1 / (2 * R2), 0.25
    expected = np.array([
        [a - c * 1j, b + c * 1j, c * 1j, b + c * 1j],
        [b + c * 1j, b - (R2 + 1) / 4 * 1j, b - c * 1j, -b + (R2 - 1) / 4 * 1j],
        [c * 1j, b - c * 1j, -a - c * 1j, b - c * 1j],
        [b + c * 1j, -b + (R2 - 1) / 4 * 1j, b - c * 1j, b - (R2 + 1) / 4 * 1j],
    ])
    assert np.allclose(build_frft_matrix(4, np.pi / 4), expected, atol=1e-12)


def test_ambiguity_integer_surface_n8():
    x = np.arange(1, 9) + 1j * np.arange(8)[::-1]
    A = ambiguity_frft(x, build_bank(8)).values
    # at alpha = +-pi/2 every entry is the squared DFT of an integer sequence
    assert np.allclose(A[0, :3], [344.0**2, 288.0**2, 248.0**2], rtol=1e-13)
    assert np.allclose(A[7, :3], A[0, :3], rtol=1e-13)
    assert np.allclose(A[3, :3], [118336.0, 5329.833518564576, 3144.783671991631], rtol=1e-9)


def test_gaussian_bandlimited_seeded_samples():
    x = gaussian_bandlimited(16, 8, seed=1).samples
    expected = [0.021511483297199097 + 0.15426569964290263j,
                -0.0228076301365058 + 0.02737137721140407j,
                0.015554538821069493 + 0.054684075131126955j]
    assert np.allclose(x[:3], expected, atol=1e-15)
