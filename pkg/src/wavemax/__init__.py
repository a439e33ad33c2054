"""Radar waveform recovery from FrFT-based ambiguity functions."""

from .ambiguity import AmbiguityData, ambiguity_frft, adjoint, measure_traces, transform_Y
from .frft import AngleGrid, FrFTBank, build_angle_grid, build_bank, build_frft_matrix
from .kernels import BACKEND
from .metrics import AmbiguitySearchGrid, dist, relative_error, success
from .sensing import MaskKind, MaskSpec, add_noise, make_mask, parse_mask
from .solver import SolverConfig, extract_waveform, solve
from .spectral_init import InitConfig, initialize
from .waveforms import ChirpParams, Waveform, gaussian_bandlimited, lfm, nlfm, time_limited

__version__ = "0.1.0"

__all__ = [
    "AmbiguityData", "ambiguity_frft", "adjoint", "measure_traces", "transform_Y",
    "AngleGrid", "FrFTBank", "build_angle_grid", "build_bank", "build_frft_matrix",
    "BACKEND",
    "AmbiguitySearchGrid", "dist", "relative_error", "success",
    "MaskKind", "MaskSpec", "add_noise", "make_mask", "parse_mask",
    "SolverConfig", "extract_waveform", "solve",
    "InitConfig", "initialize",
    "ChirpParams", "Waveform", "gaussian_bandlimited", "lfm", "nlfm", "time_limited",
]
