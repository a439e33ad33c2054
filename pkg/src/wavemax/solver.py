"""Lifted forward-backward solver for waveform recovery.

Each iteration takes an amplitude-residual gradient step on the Hermitian
iterate ``Z`` through the trace measurement map, then applies eigenvalue
shrinkage (the prox of ``mu * Tr(Z)`` plus the PSD indicator):

    Ph = Tr(B Z)                         (measure_traces)
    G  = Ph/|Ph| * (|Ph| - sqrt(A))      (residual_grad, 0 where Ph == 0)
    W  = Z - tau * adjoint(G)
    S  = W            or  I + tau*mu*W   (line10_literal)
    Z  = V max(D - mu*tau, 0) V^H        (psd_shrink)

The waveform is the leading eigenvector of the final ``Z`` scaled by the
norm estimate from the initializer.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .ambiguity import AmbiguityData, adjoint, hermitian_part, lipschitz_estimate, measure_traces
from .frft import FrFTBank

__all__ = [
    "SolverConfig",
    "SolverState",
    "SolveInfo",
    "SolverError",
    "SolverDivergence",
    "residual_grad",
    "psd_shrink",
    "initial_state",
    "resolve_config",
    "step",
    "solve",
    "extract_waveform",
    "data_misfit",
    "feasibility_violation",
]

log = logging.getLogger(__name__)


class SolverError(RuntimeError):
    def __init__(self, message, iteration=None, state=None):
        super().__init__(message if iteration is None else f"{message} (iteration {iteration})")
        self.iteration = iteration
        self.state = state


class SolverDivergence(SolverError):
    """Raised on a non-finite iterate; ``state`` holds the last finite one."""


@dataclass(frozen=True)
class SolverConfig:
    max_iterations: int = 500
    tau: float | str = "auto"
    mu: float | str = "auto"
    stop_tol: float = 1e-9
    record_trace: bool = True
    line10_literal: bool = False
    lipschitz_iterations: int = 30

    def __post_init__(self):
        if int(self.max_iterations) != self.max_iterations or self.max_iterations < 0:
            raise ValueError("max_iterations must be a nonnegative integer")
        if self.tau != "auto" and not float(self.tau) > 0:
            raise ValueError("tau must be positive or 'auto'")
        if self.mu != "auto" and not float(self.mu) >= 0:
            raise ValueError("mu must be nonnegative or 'auto'")
        if self.stop_tol < 0:
            raise ValueError("stop_tol must be nonnegative")


@dataclass
class SolverState:
    Z: np.ndarray
    X0: np.ndarray
    iteration: int = 0
    objective_trace: list = field(default_factory=list)
    alignment_trace: list = field(default_factory=list)
    feasibility_trace: list = field(default_factory=list)
    min_eig_trace: list = field(default_factory=list)
    rel_change_trace: list = field(default_factory=list)

    def copy(self) -> "SolverState":
        return SolverState(
            self.Z.copy(), self.X0, self.iteration,
            list(self.objective_trace), list(self.alignment_trace),
            list(self.feasibility_trace), list(self.min_eig_trace),
            list(self.rel_change_trace),
        )

    def trace_rows(self):
        """``(iteration, misfit, alignment, min_eigenvalue, rel_change)`` tuples."""
        return list(zip(range(1, len(self.objective_trace) + 1), self.objective_trace,
                        self.alignment_trace, self.min_eig_trace, self.rel_change_trace))


@dataclass
class SolveInfo:
    iterations_used: int
    converged: bool
    tau: float
    mu: float
    lambda_max: float
    wall_time_ms: float
    init_only: bool = False
    zero_iterate: bool = False

    @property
    def sqrt_lambda_max(self) -> float:
        return float(np.sqrt(max(self.lambda_max, 0.0)))


def _sqrt_data(A: AmbiguityData):
    return np.sqrt(np.where(A.mask, A.values, 0.0))


def residual_grad(Ph, A: AmbiguityData) -> np.ndarray:
    """``G = Ph/|Ph| * (|Ph| - sqrt(A))`` on the mask; zero where ``Ph == 0``."""
    Ph = np.asarray(Ph, dtype=complex)
    if np.any(A.values[A.mask] < 0):
        raise ValueError("negative ambiguity values; clamp before solving")
    mag = np.abs(Ph)
    safe = np.where(mag > 0, mag, 1.0)
    G = np.where(mag > 0, Ph / safe, 0.0) * (mag - _sqrt_data(A))
    return np.where(A.mask & (mag > 0), G, 0.0)


def data_misfit(Ph, A: AmbiguityData) -> float:
    r = np.abs(Ph) - _sqrt_data(A)
    return 0.5 * float(np.sum(r[A.mask] ** 2))


def feasibility_violation(Ph, A: AmbiguityData) -> float:
    """``sum_mask max(|Ph| - sqrt(A), 0)^2``."""
    r = np.maximum(np.abs(Ph) - _sqrt_data(A), 0.0)
    return float(np.sum(r[A.mask] ** 2))


def _shrink(S, threshold):
    S = hermitian_part(np.asarray(S, dtype=complex))
    d, V = np.linalg.eigh(S)
    d = np.maximum(d - threshold, 0.0)
    Z = (V * d) @ V.conj().T
    return hermitian_part(Z), d


def psd_shrink(S, threshold: float) -> np.ndarray:
    """``V max(D - threshold, 0) V^H`` for the eigendecomposition of ``S``."""
    if threshold < 0:
        raise ValueError("threshold must be nonnegative")
    S = np.asarray(S, dtype=complex)
    scale = max(1.0, np.linalg.norm(S))
    if np.linalg.norm(S - S.conj().T) > 1e-8 * scale:
        raise ValueError("S is not Hermitian")
    return _shrink(S, threshold)[0]


def resolve_config(cfg: SolverConfig, A: AmbiguityData, bank: FrFTBank) -> SolverConfig:
    """Replace ``"auto"`` step size and shrinkage weight by numbers.

    ``tau = 0.9 / L`` with ``L`` the power-iteration estimate of the largest
    eigenvalue of ``adjoint o measure_traces``; ``mu = 1e-2 * max sqrt(A)``.
    """
    tau, mu = cfg.tau, cfg.mu
    if tau == "auto":
        L = lipschitz_estimate(bank, A.mask, cfg.lipschitz_iterations)
        tau = 0.9 / L if L > 0 else 1.0
    if mu == "auto":
        observed = A.values[A.mask]
        mu = 1e-2 * float(np.sqrt(observed.max())) if observed.size else 0.0
    return replace(cfg, tau=float(tau), mu=float(mu))


def initial_state(x0) -> SolverState:
    x0 = np.asarray(x0, dtype=complex).reshape(-1)
    X0 = np.outer(x0, x0.conj())
    X0.setflags(write=False)
    return SolverState(X0.copy(), X0)


def step(state: SolverState, A: AmbiguityData, bank: FrFTBank, cfg: SolverConfig) -> SolverState:
    """One forward-backward iteration; returns a new state."""
    if cfg.tau == "auto" or cfg.mu == "auto":
        cfg = resolve_config(cfg, A, bank)
    tau, mu = float(cfg.tau), float(cfg.mu)
    Z = state.Z
    Ph = measure_traces(Z, bank, A.mask)
    G = residual_grad(Ph, A)
    # overflow surfaces as a SolverDivergence below
    with np.errstate(over="ignore", invalid="ignore"):
        W = Z - tau * adjoint(G, bank, A.mask)
    if not np.all(np.isfinite(W)):
        raise SolverDivergence("non-finite gradient step", state.iteration + 1, state)
    if mu == 0.0:
        S, threshold = W, 0.0
    elif cfg.line10_literal:
        S, threshold = np.eye(bank.n) + tau * mu * W, mu * tau
    else:
        S, threshold = W, mu * tau
    try:
        Z_new, eigs = _shrink(S, threshold)
    except np.linalg.LinAlgError as exc:
        raise SolverError(f"eigendecomposition failed: {exc}", state.iteration + 1, state) from exc
    if not np.all(np.isfinite(Z_new)):
        raise SolverDivergence("non-finite iterate", state.iteration + 1, state)
    new = state.copy() if cfg.record_trace else SolverState(Z_new, state.X0, state.iteration)
    new.Z = Z_new
    new.iteration = state.iteration + 1
    if cfg.record_trace:
        change = np.linalg.norm(Z_new - Z) / max(np.linalg.norm(Z), 1e-12)
        new.objective_trace.append(data_misfit(Ph, A))
        new.feasibility_trace.append(feasibility_violation(Ph, A))
        new.alignment_trace.append(float(np.real(np.vdot(Z_new, state.X0))))
        new.min_eig_trace.append(float(eigs.min()))
        new.rel_change_trace.append(float(change))
    return new


def extract_waveform(Z, lambda0: float | None = None) -> np.ndarray:
    """Leading eigenvector of ``Z`` scaled to norm ``lambda0``.

    ``lambda0=None`` uses ``sqrt(lambda_max(Z))``. A zero matrix gives a
    zero vector (logged).
    """
    Z = hermitian_part(np.asarray(Z, dtype=complex))
    d, V = np.linalg.eigh(Z)
    if d[-1] <= 0:
        log.warning("leading eigenvalue is not positive; returning zero waveform")
        return np.zeros(Z.shape[0], dtype=complex)
    v = V[:, -1]
    scale = np.sqrt(d[-1]) if lambda0 is None else float(lambda0)
    return scale * v


def solve(A: AmbiguityData, bank: FrFTBank, x0, cfg: SolverConfig = SolverConfig(),
          callback=None) -> tuple[SolverState, SolveInfo]:
    """Run the solver from ``Z = x0 x0^H``.

    Stops after ``cfg.max_iterations`` or when the relative iterate change
    drops below ``cfg.stop_tol``. ``callback(state)`` is invoked after each
    iteration.
    """
    started = time.perf_counter()
    cfg = resolve_config(cfg, A, bank)
    state = initial_state(x0)
    converged = False
    for _ in range(int(cfg.max_iterations)):
        previous = state.Z
        state = step(state, A, bank, cfg)
        if callback is not None:
            callback(state)
        change = np.linalg.norm(state.Z - previous) / max(np.linalg.norm(previous), 1e-12)
        if change < cfg.stop_tol:
            converged = True
            break
    lam = float(np.linalg.eigvalsh(hermitian_part(state.Z))[-1])
    info = SolveInfo(
        iterations_used=state.iteration,
        converged=converged,
        tau=float(cfg.tau),
        mu=float(cfg.mu),
        lambda_max=lam,
        wall_time_ms=1e3 * (time.perf_counter() - started),
        init_only=cfg.max_iterations == 0,
        zero_iterate=lam <= 0,
    )
    return state, info
