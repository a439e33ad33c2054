"""FrFT-based ambiguity functions and the lifted measurement operator.

For every angle the surface row is ``A[alpha, k] = |DFT(|F_alpha x|^2)[k]|^2``.
Lifting ``X = x x^H`` turns each entry into ``|Tr(B_{alpha,k} X)|^2`` with
``B_{alpha,k} = sum_n u_{n,alpha} u_{n,alpha}^H w^{-kn}``; the traces are
computed as the DFT of ``diag(F_alpha Z F_alpha^H)`` so the ``B`` matrices
never need to exist outside tests.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .frft import AngleGrid, FrFTBank

__all__ = [
    "AmbiguityData",
    "TransformedData",
    "ambiguity_frft",
    "ambiguity_classic",
    "delay_map_from",
    "measure_traces",
    "adjoint",
    "transform_Y",
    "assemble_B",
    "hermitian_part",
    "lipschitz_estimate",
]

HERMITIAN_TOL = 1e-8


@dataclass(frozen=True)
class AmbiguityData:
    """An ``(n_angles, n)`` ambiguity surface with its observation mask."""

    values: np.ndarray
    mask: np.ndarray
    grid: AngleGrid

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        mask = np.array(self.mask, dtype=bool)
        if values.ndim != 2 or values.shape != mask.shape:
            raise ValueError("values and mask must be matching 2-D arrays")
        if values.shape[0] != len(self.grid):
            raise ValueError("row count does not match the angle grid")
        if np.any(values[mask] < 0):
            raise ValueError("observed ambiguity values must be nonnegative")
        values = np.where(mask, values, 0.0)
        values.setflags(write=False)
        mask.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "mask", mask)

    @property
    def m(self) -> int:
        return int(self.mask.sum())

    @property
    def shape(self):
        return self.values.shape

    def with_mask(self, mask) -> "AmbiguityData":
        mask = np.asarray(mask, dtype=bool) & self.mask
        return AmbiguityData(self.values, mask, self.grid)

    def with_values(self, values) -> "AmbiguityData":
        return AmbiguityData(values, self.mask, self.grid)

    def observed_rows(self) -> np.ndarray:
        """Indices of angle rows with at least one observed entry."""
        return np.flatnonzero(self.mask.any(axis=1))


@dataclass(frozen=True)
class TransformedData:
    """Transform-domain statistic ``Y[alpha, l]`` on the retained angle rows.

    ``angle_indices[r]`` is the bank row that ``values[r]`` belongs to.
    """

    values: np.ndarray
    angle_indices: np.ndarray = field(default=None)

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        rows = (np.arange(values.shape[0]) if self.angle_indices is None
                else np.array(self.angle_indices, dtype=int))
        if rows.shape != (values.shape[0],):
            raise ValueError("one angle index per row is required")
        values.setflags(write=False)
        rows.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "angle_indices", rows)


def _check_vector(x, n):
    x = np.asarray(x, dtype=complex).reshape(-1)
    if x.size != n:
        raise ValueError(f"signal length {x.size} does not match bank size {n}")
    return x


def ambiguity_frft(x, bank: FrFTBank) -> AmbiguityData:
    """Noiseless, fully observed FrFT-based ambiguity surface of ``x``."""
    x = _check_vector(getattr(x, "samples", x), bank.n)
    p = np.abs(bank.matrices @ x) ** 2
    values = np.abs(np.fft.fft(p, axis=1)) ** 2
    return AmbiguityData(values, np.ones(values.shape, dtype=bool), bank.grid)


def ambiguity_classic(x, grid: AngleGrid, delay_map) -> np.ndarray:
    """Direct delay/Doppler form with a cyclic delay ``p_alpha = delay_map(alpha)``.

    Diagnostic only; on a finite grid it need not coincide with
    :func:`ambiguity_frft`.
    """
    x = np.asarray(getattr(x, "samples", x), dtype=complex).reshape(-1)
    n = x.size
    idx = np.arange(n)
    out = np.empty((len(grid), n))
    for row, alpha in enumerate(grid.angles):
        p = int(delay_map(alpha))
        prod = x * x[(idx + p) % n].conj()
        kernel = np.exp(-2j * np.pi * np.outer(np.arange(n), idx) * np.cos(alpha) / n)
        out[row] = np.abs(kernel @ prod) ** 2
    return out


def delay_map_from(doppler: float, sample_period: float):
    """``alpha -> round(doppler * sin(alpha) / sample_period)``."""

    def delay(alpha):
        return int(np.rint(doppler * np.sin(alpha) / sample_period))

    return delay


def hermitian_part(M):
    return 0.5 * (M + M.conj().T)


def _full_mask(bank, mask):
    if mask is None:
        return np.ones((bank.n_angles, bank.n), dtype=bool)
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != (bank.n_angles, bank.n):
        raise ValueError("mask shape does not match the bank")
    return mask


def measure_traces(Z, bank: FrFTBank, mask=None) -> np.ndarray:
    """``Ph[alpha, k] = Tr(B_{alpha,k} Z)``, zero outside ``mask``."""
    Z = np.ascontiguousarray(Z, dtype=complex)
    if Z.shape != (bank.n, bank.n):
        raise ValueError("Z must be n x n")
    scale = max(1.0, np.linalg.norm(Z))
    if np.linalg.norm(Z - Z.conj().T) > HERMITIAN_TOL * scale:
        raise ValueError("Z is not Hermitian")
    mask = _full_mask(bank, mask)
    d = kernels.diag_traces(bank.stacked, Z).reshape(bank.n_angles, bank.n)
    ph = np.fft.fft(d, axis=1)
    return np.where(mask, ph, 0.0)


def adjoint(G, bank: FrFTBank, mask=None) -> np.ndarray:
    """Adjoint of :func:`measure_traces` for the real inner product.

    Returns the Hermitian part of ``sum_alpha F^H diag(g_alpha) F`` with
    ``g_alpha[n] = sum_k G[alpha, k] w^{kn}``, so that
    ``Re <measure_traces(Z), G> == <Z, adjoint(G)>`` for Hermitian ``Z``.
    """
    G = np.asarray(G, dtype=complex)
    mask = _full_mask(bank, mask)
    G = np.where(mask, G, 0.0)
    g = np.fft.ifft(G, axis=1) * bank.n
    M = kernels.weighted_gram(bank.stacked, np.ascontiguousarray(g.reshape(-1)))
    return hermitian_part(M)


def assemble_B(bank: FrFTBank, angle_index: int, k: int) -> np.ndarray:
    """Dense ``B_{alpha,k}``; test oracle only."""
    F = bank.matrices[angle_index]
    n = bank.n
    w = np.exp(2j * np.pi / n)
    B = np.zeros((n, n), dtype=complex)
    for row in range(n):
        u = F[row].conj()
        B += np.outer(u, u.conj()) * w ** (-k * row)
    return B


def transform_Y(A: AmbiguityData, fill_missing: bool = False) -> TransformedData:
    """``Y[alpha, l] = (1/N) sum_k A[alpha, k] w^{kl}`` on observed rows.

    Rows without any observation are dropped. A partially observed row is
    an error unless ``fill_missing`` is set, in which case missing entries
    count as zero.
    """
    rows = A.observed_rows()
    mask = A.mask[rows]
    if not fill_missing and not mask.all():
        raise ValueError("transform_Y needs fully observed angle rows")
    vals = A.values[rows]
    # Noiseless rows are even in k, so Y is real; noise breaks that symmetry
    # and the imaginary part is discarded.
    Y = np.fft.ifft(vals, axis=1)
    return TransformedData(Y.real, rows)


def lipschitz_estimate(bank: FrFTBank, mask=None, iterations: int = 30, seed: int = 0) -> float:
    """Largest eigenvalue of ``Z -> adjoint(measure_traces(Z))`` by power iteration."""
    rng = np.random.default_rng(seed)
    n = bank.n
    Z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    Z = hermitian_part(Z)
    Z /= np.linalg.norm(Z)
    value = 0.0
    for _ in range(iterations):
        Z = adjoint(measure_traces(Z, bank, mask), bank, mask)
        value = np.linalg.norm(Z)
        if value == 0:
            return 0.0
        Z /= value
    return float(value)
