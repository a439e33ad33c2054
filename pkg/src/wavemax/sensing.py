"""Observation masks and SNR-calibrated noise for ambiguity surfaces."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .ambiguity import AmbiguityData

__all__ = ["MaskKind", "MaskSpec", "parse_mask", "make_mask", "noise_for", "add_noise", "realized_snr_db"]


class MaskKind(str, enum.Enum):
    FULL = "full"
    KEEP_EVERY_KTH_ANGLE = "every"
    RANDOM_UNIFORM = "random"
    ANGLE_FRACTION = "angles"


@dataclass(frozen=True)
class MaskSpec:
    """Which ambiguity entries are observed.

    ``angles`` removes ``fraction_removed`` of the angle rows, keeping the
    retained rows evenly spread over the grid.
    """

    kind: MaskKind = MaskKind.FULL
    k: int = 1
    fraction_removed: float = 0.0
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "kind", MaskKind(self.kind))
        if self.kind is MaskKind.KEEP_EVERY_KTH_ANGLE and int(self.k) < 1:
            raise ValueError("k must be at least 1")
        if self.kind in (MaskKind.RANDOM_UNIFORM, MaskKind.ANGLE_FRACTION):
            if not 0.0 <= self.fraction_removed < 1.0:
                raise ValueError("fraction_removed must lie in [0, 1)")

    def __str__(self):
        if self.kind is MaskKind.FULL:
            return "full"
        if self.kind is MaskKind.KEEP_EVERY_KTH_ANGLE:
            return f"every:{self.k}"
        if self.kind is MaskKind.RANDOM_UNIFORM:
            return f"random:{self.fraction_removed:g}:{self.seed}"
        return f"angles:{self.fraction_removed:g}"


def parse_mask(text: str) -> MaskSpec:
    """Parse ``full``, ``every:<k>``, ``random:<fraction>[:<seed>]`` or ``angles:<fraction>``."""
    parts = text.strip().split(":")
    head = parts[0].lower()
    try:
        if head == "full" and len(parts) == 1:
            return MaskSpec()
        if head == "every" and len(parts) == 2:
            return MaskSpec(MaskKind.KEEP_EVERY_KTH_ANGLE, k=int(parts[1]))
        if head == "random" and len(parts) in (2, 3):
            seed = int(parts[2]) if len(parts) == 3 else 0
            return MaskSpec(MaskKind.RANDOM_UNIFORM, fraction_removed=float(parts[1]), seed=seed)
        if head == "angles" and len(parts) == 2:
            return MaskSpec(MaskKind.ANGLE_FRACTION, fraction_removed=float(parts[1]))
    except ValueError as exc:
        raise ValueError(f"bad mask spec {text!r}: {exc}") from None
    raise ValueError(f"bad mask spec {text!r}")


def make_mask(spec: MaskSpec, n_angles: int, n_freq: int) -> np.ndarray:
    mask = np.zeros((n_angles, n_freq), dtype=bool)
    if spec.kind is MaskKind.FULL:
        mask[:] = True
    elif spec.kind is MaskKind.KEEP_EVERY_KTH_ANGLE:
        mask[:: int(spec.k)] = True
    elif spec.kind is MaskKind.RANDOM_UNIFORM:
        total = n_angles * n_freq
        keep = math.ceil((1.0 - spec.fraction_removed) * total - 1e-9)
        rng = np.random.default_rng(spec.seed)
        chosen = rng.choice(total, size=keep, replace=False)
        mask.reshape(-1)[chosen] = True
    else:
        keep = max(1, math.ceil((1.0 - spec.fraction_removed) * n_angles - 1e-9))
        rows = np.unique(np.round(np.linspace(0, n_angles - 1, keep)).astype(int))
        mask[rows] = True
    return mask


def noise_for(A: AmbiguityData, snr_db: float, seed: int) -> np.ndarray:
    """The noise array :func:`add_noise` injects (zero off the mask).

    The per-entry standard deviation is ``||A||_F 10^(-snr/20) / sqrt(m)``
    so that the expected noise energy is ``||A||_F^2 10^(-snr/10)``.
    """
    noise = np.zeros(A.shape)
    if math.isinf(snr_db) and snr_db > 0:
        return noise
    if not math.isfinite(snr_db):
        raise ValueError("snr_db must be finite or +inf")
    m = A.m
    if m == 0:
        return noise
    energy = np.linalg.norm(A.values[A.mask])
    sigma = energy * 10.0 ** (-snr_db / 20.0) / math.sqrt(m)
    rng = np.random.default_rng(seed)
    noise[A.mask] = sigma * rng.standard_normal(m)
    return noise


def add_noise(A: AmbiguityData, snr_db: float | None, seed: int) -> AmbiguityData:
    """Add white Gaussian noise to observed entries, clamping negatives to 0.

    ``snr_db`` of ``None`` or ``+inf`` leaves ``A`` untouched.
    """
    if snr_db is None or (math.isinf(snr_db) and snr_db > 0):
        return A
    noisy = np.maximum(A.values + noise_for(A, snr_db, seed), 0.0)
    return A.with_values(np.where(A.mask, noisy, 0.0))


def realized_snr_db(A: AmbiguityData, noise: np.ndarray) -> float:
    return 10.0 * math.log10(np.sum(A.values[A.mask] ** 2) / np.sum(noise[A.mask] ** 2))
