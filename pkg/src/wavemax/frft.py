"""Orthonormal discrete fractional Fourier transforms.

The transform is built spectrally: the DFT commutes with a real symmetric
"second difference plus cosine potential" matrix whose eigenvectors are
discrete analogues of the Hermite-Gaussian functions. Splitting that matrix
into its even and odd parts yields two irreducible tridiagonal (Jacobi)
matrices with simple spectra, so every eigenvector has an exact parity and
is an exact eigenvector of the DFT. Ordering each block by decreasing
eigenvalue orders the vectors by zero-crossing count (Sturm), which gives
the Hermite order ``k``. The fractional transform of angle ``alpha`` is then

    F_alpha = V diag(exp(-1j * alpha * k)) V^T

which is unitary, additive in ``alpha`` and equal to the unitary DFT at
``alpha = pi/2``.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigh_tridiagonal

__all__ = [
    "AngleGrid",
    "FrFTBank",
    "build_angle_grid",
    "build_frft_matrix",
    "build_bank",
    "apply_frft",
    "hermite_basis",
    "unitary_dft",
]

DEFAULT_INTERVAL = (-math.pi / 2, math.pi / 2)


@dataclass(frozen=True)
class AngleGrid:
    """Strictly increasing rotation angles (radians) inside ``interval``."""

    angles: np.ndarray
    interval: tuple[float, float] = DEFAULT_INTERVAL

    def __post_init__(self):
        angles = np.asarray(self.angles, dtype=float).reshape(-1)
        if angles.size < 1:
            raise ValueError("an angle grid needs at least one angle")
        if not np.all(np.isfinite(angles)):
            raise ValueError("angles must be finite")
        if angles.size > 1 and np.any(np.diff(angles) <= 0):
            raise ValueError("angles must be strictly increasing")
        lo, hi = self.interval
        slack = 1e-12 * max(1.0, abs(lo), abs(hi))
        if angles[0] < lo - slack or angles[-1] > hi + slack:
            raise ValueError("angles fall outside the declared interval")
        angles.setflags(write=False)
        object.__setattr__(self, "angles", angles)
        object.__setattr__(self, "interval", (float(lo), float(hi)))

    def __len__(self):
        return self.angles.size

    def subset(self, rows) -> "AngleGrid":
        return AngleGrid(self.angles[np.asarray(rows)], self.interval)


def build_angle_grid(count: int, interval=DEFAULT_INTERVAL) -> AngleGrid:
    """Return ``count`` equally spaced angles covering ``interval`` inclusively.

    A single angle sits at the lower end of the interval.
    """
    count = int(count)
    if count < 1:
        raise ValueError("count must be at least 1")
    lo, hi = float(interval[0]), float(interval[1])
    if not (math.isfinite(lo) and math.isfinite(hi)) or hi <= lo:
        raise ValueError("interval must be a finite, non-degenerate range")
    if count == 1:
        return AngleGrid(np.array([lo]), (lo, hi))
    return AngleGrid(np.linspace(lo, hi, count), (lo, hi))


def unitary_dft(n: int) -> np.ndarray:
    """The unitary DFT matrix ``W[j, k] = exp(-2i pi jk/n) / sqrt(n)``."""
    return np.fft.fft(np.eye(n), axis=0, norm="ortho")


def _parity_blocks(n):
    # Diagonal and off-diagonal of the commuting matrix restricted to the
    # even basis {e0, (e_k + e_{n-k})/sqrt2, [e_{n/2}]} and the odd basis
    # {(e_k - e_{n-k})/sqrt2}.
    potential = 2.0 * np.cos(2.0 * np.pi * np.arange(n) / n) - 4.0
    half = (n - 1) // 2  # number of (k, n-k) pairs
    even_d = [potential[0]] + [potential[k] for k in range(1, half + 1)]
    even_e = [math.sqrt(2.0)] + [1.0] * (half - 1) if half >= 1 else []
    odd_d = [potential[k] for k in range(1, half + 1)]
    odd_e = [1.0] * (half - 1) if half >= 1 else []
    if n % 2 == 0:
        mid = n // 2
        if half >= 1:
            even_d.append(potential[mid])
            # e_{n/2} couples to the (n/2 - 1) pair through both neighbours;
            # in the odd block those couplings cancel.
            even_e.append(math.sqrt(2.0))
        else:  # n == 2
            even_d.append(potential[mid])
            even_e.append(2.0)
    else:
        if half >= 1:
            # the last pair (half, n-half) are neighbours of each other
            even_d[-1] += 1.0
            odd_d[-1] -= 1.0
    return (np.array(even_d), np.array(even_e)), (np.array(odd_d), np.array(odd_e))


def _embed(n, coeffs, parity):
    # Map reduced-basis coefficients back to length-n vectors.
    half = (n - 1) // 2
    out = np.zeros((n, coeffs.shape[1]))
    r = 1.0 / math.sqrt(2.0)
    if parity == "even":
        out[0] = coeffs[0]
        for j, k in enumerate(range(1, half + 1), start=1):
            out[k] = coeffs[j] * r
            out[n - k] = coeffs[j] * r
        if n % 2 == 0:
            out[n // 2] = coeffs[-1]
    else:
        for j, k in enumerate(range(1, half + 1)):
            out[k] = coeffs[j] * r
            out[n - k] = -coeffs[j] * r
    return out


@functools.lru_cache(maxsize=32)
def hermite_basis(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Discrete Hermite-Gaussian eigenvectors of the size-``n`` DFT.

    Returns
    -------
    V : (n, n) real orthogonal array
        Column ``j`` is the eigenvector of Hermite order ``orders[j]``.
    orders : (n,) int array
        Hermite orders; ``0..n-1`` for odd ``n`` and ``0..n-2, n`` for even.
    """
    if n < 2:
        raise ValueError("grid size must be at least 2")
    (ed, ee), (od, oe) = _parity_blocks(n)
    cols, orders = [], []
    for (d, e), parity, offset in (((ed, ee), "even", 0), ((od, oe), "odd", 1)):
        if d.size == 0:
            continue
        if d.size == 1:
            w, v = d.copy(), np.ones((1, 1))
        else:
            w, v = eigh_tridiagonal(d, e)
        v = v[:, np.argsort(-w, kind="stable")]
        vecs = _embed(n, v, parity)
        for j in range(vecs.shape[1]):
            cols.append(vecs[:, j])
            orders.append(offset + 2 * j)
    V = np.column_stack(cols)
    orders = np.array(orders)
    # deterministic sign: largest-magnitude entry positive
    pivots = np.argmax(np.abs(V), axis=0)
    V = V * np.sign(V[pivots, np.arange(n)])
    perm = np.argsort(orders, kind="stable")
    V, orders = V[:, perm], orders[perm]
    V.setflags(write=False)
    orders.setflags(write=False)
    return V, orders


def build_frft_matrix(n: int, alpha: float) -> np.ndarray:
    """Unitary DFrFT matrix of angle ``alpha``; ``alpha = pi/2`` is the DFT."""
    if int(n) != n or n < 2:
        raise ValueError("grid size must be an integer >= 2")
    alpha = float(alpha)
    if not math.isfinite(alpha):
        raise ValueError("alpha must be finite")
    V, orders = hermite_basis(int(n))
    return (V * np.exp(-1j * alpha * orders)) @ V.T


@dataclass(frozen=True)
class FrFTBank:
    """DFrFT matrices precomputed over an angle grid.

    ``matrices[a]`` is ``F_alpha`` for ``grid.angles[a]``; the conjugate of its
    row ``n`` is the sampling vector ``u_{n, alpha}``, so
    ``(F_alpha @ x)[n] == u_{n, alpha}^H x``.
    """

    n: int
    grid: AngleGrid
    matrices: np.ndarray = field(repr=False)

    def __post_init__(self):
        mats = np.ascontiguousarray(self.matrices, dtype=complex)
        if mats.shape != (len(self.grid), self.n, self.n):
            raise ValueError("matrix stack does not match grid and size")
        mats.setflags(write=False)
        object.__setattr__(self, "matrices", mats)

    @property
    def n_angles(self) -> int:
        return len(self.grid)

    @property
    def stacked(self) -> np.ndarray:
        """All matrices stacked as an ``(n_angles * n, n)`` array (a view)."""
        return self.matrices.reshape(-1, self.n)

    def sampling_vector(self, n: int, angle_index: int) -> np.ndarray:
        return self.matrices[angle_index, n].conj()

    def subset(self, rows) -> "FrFTBank":
        rows = np.asarray(rows, dtype=int)
        return FrFTBank(self.n, self.grid.subset(rows), self.matrices[rows])


def build_bank(n: int, grid: AngleGrid | int | None = None) -> FrFTBank:
    """Precompute ``F_alpha`` for every angle in ``grid``.

    ``grid`` may be an :class:`AngleGrid`, an angle count (uniform over
    ``[-pi/2, pi/2]``) or ``None`` for ``n`` angles.
    """
    if grid is None:
        grid = n
    if not isinstance(grid, AngleGrid):
        grid = build_angle_grid(int(grid))
    if int(n) != n or n < 2:
        raise ValueError("grid size must be an integer >= 2")
    V, orders = hermite_basis(int(n))
    phases = np.exp(-1j * np.outer(grid.angles, orders))
    mats = np.einsum("ik,ak,jk->aij", V, phases, V, optimize=True)
    return FrFTBank(int(n), grid, mats)


def apply_frft(bank: FrFTBank, angle_index: int, x) -> np.ndarray:
    """Return ``F_alpha @ x`` for the bank angle at ``angle_index``."""
    if not 0 <= angle_index < bank.n_angles:
        raise IndexError(f"angle index {angle_index} out of range")
    x = np.asarray(x, dtype=complex)
    if x.shape != (bank.n,):
        raise ValueError(f"expected a length-{bank.n} vector, got {x.shape}")
    return bank.matrices[angle_index] @ x
