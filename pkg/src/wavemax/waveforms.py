"""Test waveforms: band-limited, time-limited, LFM and NLFM pulses."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "WaveformKind",
    "Waveform",
    "ChirpParams",
    "gaussian_bandlimited",
    "time_limited",
    "lfm",
    "nlfm",
    "band_limit_of",
    "longest_zero_run",
]

DEFAULT_SAMPLE_PERIOD = 0.4e-6
DEFAULT_DELTA_F = 128e3


class WaveformKind(str, enum.Enum):
    GAUSSIAN_BAND_LIMITED = "gaussian_band_limited"
    TIME_LIMITED = "time_limited"
    LFM = "lfm"
    NLFM = "nlfm"
    CUSTOM = "custom"


@dataclass(frozen=True)
class Waveform:
    samples: np.ndarray
    sample_period: float = DEFAULT_SAMPLE_PERIOD
    label: WaveformKind = WaveformKind.CUSTOM
    band: int | None = None

    def __post_init__(self):
        x = np.array(self.samples, dtype=complex).reshape(-1)
        if x.size < 2:
            raise ValueError("a waveform needs at least 2 samples")
        if not np.all(np.isfinite(x)):
            raise ValueError("waveform samples must be finite")
        x.setflags(write=False)
        object.__setattr__(self, "samples", x)
        object.__setattr__(self, "label", WaveformKind(self.label))

    @property
    def n(self) -> int:
        return self.samples.size

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.samples))

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.samples, dtype=dtype)


@dataclass(frozen=True)
class ChirpParams:
    """Chirp settings; ``pulse_duration=None`` means ``n * sample_period``."""

    delta_f: float = DEFAULT_DELTA_F
    pulse_duration: float | None = None
    harmonic_count: int = 3
    sample_period: float = DEFAULT_SAMPLE_PERIOD

    def __post_init__(self):
        if not self.delta_f > 0:
            raise ValueError("delta_f must be positive")
        if self.pulse_duration is not None and not self.pulse_duration > 0:
            raise ValueError("pulse_duration must be positive")
        if int(self.harmonic_count) != self.harmonic_count or self.harmonic_count < 1:
            raise ValueError("harmonic_count must be an integer >= 1")
        if not self.sample_period > 0:
            raise ValueError("sample_period must be positive")

    def duration(self, n: int) -> float:
        return self.pulse_duration if self.pulse_duration is not None else n * self.sample_period


def _random_phase(rng, size):
    return np.exp(2j * np.pi * rng.random(size))


def gaussian_bandlimited(n: int, band: int, spectrum_center: float | None = None,
                         spectrum_width: float | None = None, seed: int = 0,
                         sample_period: float = DEFAULT_SAMPLE_PERIOD) -> Waveform:
    """Unit-norm signal with a truncated Gaussian spectrum on ``band`` bins.

    The occupied bins are the ``band`` consecutive (cyclic) bins centred on
    ``spectrum_center``; each gets Gaussian amplitude and an independent
    uniform phase. All other DFT bins are exactly zero.
    """
    if not 1 <= band <= n:
        raise ValueError("band must satisfy 1 <= band <= n")
    center = n / 4 if spectrum_center is None else float(spectrum_center)
    width = n / 10 if spectrum_width is None else float(spectrum_width)
    if not width > 0:
        raise ValueError("spectrum_width must be positive")
    rng = np.random.default_rng(seed)
    start = int(math.floor(center - band / 2 + 0.5))
    offsets = start + np.arange(band)
    spectrum = np.zeros(n, dtype=complex)
    amplitude = np.exp(-((offsets - center) ** 2) / (2 * width**2))
    spectrum[offsets % n] = amplitude * _random_phase(rng, band)
    x = np.fft.ifft(spectrum)
    x /= np.linalg.norm(x)
    return Waveform(x, sample_period, WaveformKind.GAUSSIAN_BAND_LIMITED, band=int(band))


def time_limited(n: int, support: int, seed: int = 0,
                 sample_period: float = DEFAULT_SAMPLE_PERIOD) -> Waveform:
    """Unit-norm pulse on the first ``support`` samples, zero elsewhere."""
    if not 1 <= support <= n:
        raise ValueError("support must satisfy 1 <= support <= n")
    rng = np.random.default_rng(seed)
    t = np.arange(support)
    center = (support - 1) / 2
    width = max(support / 4, 0.5)
    x = np.zeros(n, dtype=complex)
    x[:support] = np.exp(-((t - center) ** 2) / (2 * width**2)) * _random_phase(rng, support)
    x /= np.linalg.norm(x)
    return Waveform(x, sample_period, WaveformKind.TIME_LIMITED)


def _gate(params: ChirpParams, n: int):
    t = params.sample_period * np.arange(n)
    T = params.duration(n)
    # relative slack so that n * dt == T stays inside the gate
    return t, (t >= 0) & (t <= T * (1 + 1e-12)), T


def lfm_phase(params: ChirpParams, n: int) -> np.ndarray:
    """``phi[n] = pi * r * (dt n)^2`` with ``r = delta_f / T``."""
    t, _, T = _gate(params, n)
    return np.pi * (params.delta_f / T) * t**2


def nlfm_phase(params: ChirpParams, n: int) -> np.ndarray:
    """LFM phase plus ``sum_l beta_l cos(2 pi l dt n / T)``, ``beta_l = 0.4 T / l``."""
    t, _, T = _gate(params, n)
    phi = np.pi * (params.delta_f / T) * t**2
    for harmonic in range(1, int(params.harmonic_count) + 1):
        phi = phi + (0.4 * T / harmonic) * np.cos(2 * np.pi * harmonic * t / T)
    return phi


def _chirp(params, n, phase, kind):
    if n < 2:
        raise ValueError("n must be at least 2")
    _, gate, _ = _gate(params, n)
    # x[n] = a[n] exp(i pi phi[n]): pi appears both here and inside phi
    x = np.where(gate, np.exp(1j * np.pi * phase), 0.0)
    return Waveform(x, params.sample_period, kind)


def lfm(params: ChirpParams, n: int) -> Waveform:
    return _chirp(params, n, lfm_phase(params, n), WaveformKind.LFM)


def nlfm(params: ChirpParams, n: int) -> Waveform:
    return _chirp(params, n, nlfm_phase(params, n), WaveformKind.NLFM)


def longest_zero_run(flags) -> int:
    """Longest cyclic run of ``True`` in a boolean vector."""
    flags = np.asarray(flags, dtype=bool)
    if flags.all():
        return flags.size
    if not flags.any():
        return 0
    # rotate so the sequence starts right after a False entry
    start = int(np.flatnonzero(~flags)[-1]) + 1
    rolled = np.roll(flags, -start)
    best = run = 0
    for f in rolled:
        run = run + 1 if f else 0
        best = max(best, run)
    return best


def band_limit_of(x, tol: float = 1e-12) -> int | None:
    """Smallest ``B`` with ``N - B`` cyclically consecutive (near-)zero DFT bins.

    Bins count as zero when their unitary-DFT magnitude is at most
    ``tol * ||x||``. Returns ``None`` when only ``B = N`` qualifies.
    """
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    x = np.asarray(getattr(x, "samples", x), dtype=complex).reshape(-1)
    spectrum = np.abs(np.fft.fft(x, norm="ortho"))
    zero = spectrum <= tol * np.linalg.norm(x)
    band = x.size - longest_zero_run(zero)
    return None if band == x.size else band
