"""Spectral initialization from the transform-domain statistic ``Y``.

Pipeline: ``Y`` from the ambiguity rows, pick the ``floor(m / divisor)``
largest ``Y[alpha, l]`` cells, average the corresponding sampling-vector
projectors into ``G0``, take its leading eigenvector by power iteration and
scale it by the norm estimate ``lambda0``.

A selected cell ``(alpha, l)`` is mapped to the sampling vector
``u_{n, alpha}`` with ``n = l``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .ambiguity import AmbiguityData, TransformedData, transform_Y
from .frft import FrFTBank

__all__ = [
    "InitConfig",
    "InitResult",
    "select_index_set",
    "build_g0",
    "power_iteration",
    "norm_estimate",
    "initialize",
]

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class InitConfig:
    power_iterations: int = 100
    index_fraction_divisor: int = 6
    seed: int = 0

    def __post_init__(self):
        if self.power_iterations < 1:
            raise ValueError("power_iterations must be at least 1")
        if self.index_fraction_divisor < 1:
            raise ValueError("index_fraction_divisor must be at least 1")


@dataclass
class InitResult:
    x0: np.ndarray
    lambda0: float
    selected_indices: np.ndarray  # (count, 2) rows of (n, angle_index)
    iterate_residuals: list = field(default_factory=list)
    flags: tuple = ()

    @property
    def X0(self) -> np.ndarray:
        return np.outer(self.x0, self.x0.conj())


def select_index_set(Y: TransformedData, m: int, divisor: int = 6) -> np.ndarray:
    """``(n, angle_index)`` pairs of the ``floor(m/divisor)`` largest ``Y`` cells.

    Ties go to the smaller ``(angle_index, l)`` in lexicographic order.
    """
    count = int(m) // int(divisor)
    if count <= 0:
        raise ValueError("floor(m / divisor) is zero; nothing to select")
    flat = Y.values.reshape(-1)
    if count > flat.size:
        raise ValueError("more indices requested than Y cells available")
    order = np.argsort(-flat, kind="stable")[:count]
    rows, lags = np.divmod(order, Y.values.shape[1])
    return np.column_stack([lags, Y.angle_indices[rows]])


def build_g0(bank: FrFTBank, idx) -> np.ndarray:
    """``G0 = (1/|idx|) sum u_{n,alpha} u_{n,alpha}^H`` over ``(n, angle_index)`` pairs."""
    idx = np.asarray(idx, dtype=int).reshape(-1, 2)
    if idx.shape[0] == 0:
        raise ValueError("empty index set")
    U = bank.matrices[idx[:, 1], idx[:, 0], :].conj()
    G0 = U.T @ U.conj() / idx.shape[0]
    return 0.5 * (G0 + G0.conj().T)


def _start_vector(n, seed):
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return v / np.linalg.norm(v)


def power_iteration(G0, T: int, seed: int = 0):
    """Leading eigenvector of a Hermitian PSD matrix.

    Returns ``(v, residuals, degenerate)`` where ``residuals[t]`` is
    ``||G0 v - (v^H G0 v) v||`` after iteration ``t`` and ``degenerate`` is
    set when ``G0 v`` vanished (the seeded start vector is returned).
    """
    if T < 1:
        raise ValueError("T must be at least 1")
    G0 = np.asarray(G0, dtype=complex)
    v = _start_vector(G0.shape[0], seed)
    residuals = []
    for _ in range(T):
        w = G0 @ v
        norm = np.linalg.norm(w)
        if norm == 0:
            log.warning("power iteration hit the null space; returning start vector")
            return _start_vector(G0.shape[0], seed), residuals, True
        v = w / norm
        Gv = G0 @ v
        residuals.append(float(np.linalg.norm(Gv - np.vdot(v, Gv) * v)))
    return v, residuals, False


def norm_estimate(Y: TransformedData, n_angles: int | None = None) -> tuple[float, bool]:
    """``lambda0 = mean_alpha (sum_l Y[alpha, l])^(1/4)`` over retained angles.

    Negative row sums (possible under noise) are clamped to zero and
    reported through the returned flag.
    """
    sums = Y.values.sum(axis=1)
    clamped = bool(np.any(sums < 0))
    if clamped:
        log.info("clamped %d negative Y row sums", int(np.sum(sums < 0)))
    count = Y.values.shape[0] if n_angles is None else int(n_angles)
    if count == 0:
        return 0.0, clamped
    return float(np.sum(np.maximum(sums, 0.0) ** 0.25) / count), clamped


def _norm_rows(A: AmbiguityData, Y: TransformedData):
    # sum_l Y[alpha, l] equals A[alpha, 0]; rows missing that entry would
    # bias lambda0 low.
    keep = A.mask[Y.angle_indices, 0]
    return TransformedData(Y.values[keep], Y.angle_indices[keep])


def initialize(A: AmbiguityData, bank: FrFTBank, cfg: InitConfig = InitConfig()) -> InitResult:
    """Spectral initial estimate ``x0 = lambda0 * v`` of the waveform."""
    complete = bool(A.mask[A.observed_rows()].all())
    Y = transform_Y(A, fill_missing=not complete)
    flags = [] if complete else ["partial_rows_zero_filled"]
    idx = select_index_set(Y, A.m, cfg.index_fraction_divisor)
    G0 = build_g0(bank, idx)
    v, residuals, degenerate = power_iteration(G0, cfg.power_iterations, cfg.seed)
    if degenerate:
        flags.append("degenerate_g0")
    lambda0, clamped = norm_estimate(_norm_rows(A, Y))
    if clamped:
        flags.append("negative_row_sum_clamped")
    return InitResult(lambda0 * v, lambda0, idx, residuals, tuple(flags))
