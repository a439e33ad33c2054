"""Experiment configuration, seeding and the three experiment recipes.

``recover`` runs one waveform through the whole chain and writes every
intermediate; ``success_curve`` and ``init_curve`` sweep removal percentage
(and SNR) over many seeded trials and write one CSV row per cell plus a
gnuplot script.

Seeds: every random draw comes from ``derive_seed(master, trial, stage)``,
a splitmix64 counter chain, so a trial's numbers do not depend on which
worker runs it or in what order.
"""

from __future__ import annotations

import dataclasses
import hashlib
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import io as wio
from .ambiguity import ambiguity_frft
from .frft import build_angle_grid, build_bank
from .metrics import SUCCESS_THRESHOLD, dist, matrix_error
from .sensing import MaskKind, MaskSpec, add_noise, make_mask, parse_mask
from .solver import SolverConfig, SolverError, extract_waveform, solve
from .spectral_init import InitConfig, initialize
from .waveforms import ChirpParams, gaussian_bandlimited, lfm, nlfm, time_limited

__all__ = [
    "ConfigError",
    "StageError",
    "ExperimentConfig",
    "RecoveryReport",
    "parse_config",
    "load_config",
    "splitmix64",
    "derive_seed",
    "trial_waveform_kind",
    "make_waveform",
    "run_trial",
    "removal_mask",
    "run_recover",
    "run_success_curve",
    "run_init_curve",
    "run",
]

log = logging.getLogger(__name__)

EXPERIMENTS = ("recover", "success_curve", "init_curve")
WAVEFORMS = ("gaussian", "time_limited", "lfm", "nlfm", "mix")
STAGES = {"waveform": 0, "mask": 1, "noise": 2, "init": 3}
MASK64 = (1 << 64) - 1


class ConfigError(ValueError):
    pass


class StageError(RuntimeError):
    """A numeric failure tagged with the pipeline stage it came from."""

    def __init__(self, stage, cause):
        super().__init__(f"[{stage}] {cause}")
        self.stage = stage
        self.cause = cause


def splitmix64(state: int) -> int:
    """One splitmix64 output for the given 64-bit state."""
    z = (state + 0x9E3779B97F4A7C15) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive_seed(master: int, *path: int) -> int:
    """Fold a counter path into ``master``: ``s <- splitmix64(s + c + 1)`` per step."""
    s = int(master) & MASK64
    for c in path:
        s = splitmix64((s + int(c) + 1) & MASK64)
    return s


def _default_band(n):
    return math.ceil((n - 1) / 2)


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str = "recover"
    n: int = 64
    n_angles: int | None = None
    angle_interval: tuple = (-math.pi / 2, math.pi / 2)
    waveform: str = "gaussian"
    band: int | None = None
    support: int | None = None
    mask: MaskSpec = MaskSpec()
    snr_db: float | None = None
    trials: int = 100
    solver: SolverConfig = SolverConfig()
    init: InitConfig = InitConfig()
    seed: int = 0
    output_dir: str = "wavemax_out"
    removal_sweep: tuple = (0.0, 25.0, 50.0, 75.0)
    snr_sweep: tuple = (None, 30.0, 20.0, 10.0)
    workers: int = 1

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"experiment must be one of {EXPERIMENTS}")
        if self.n < 4:
            raise ConfigError("n must be at least 4")
        if self.trials < 1:
            raise ConfigError("trials must be at least 1")
        if self.waveform not in WAVEFORMS:
            raise ConfigError(f"waveform must be one of {WAVEFORMS}")
        if self.n_angles is not None and self.n_angles < 1:
            raise ConfigError("n_angles must be positive")
        if self.workers < 1:
            raise ConfigError("workers must be positive")
        for pct in self.removal_sweep:
            if not 0 <= pct < 100:
                raise ConfigError("removal percentages must lie in [0, 100)")

    @property
    def angle_count(self) -> int:
        return self.n if self.n_angles is None else self.n_angles

    @property
    def band_or_default(self) -> int:
        return _default_band(self.n) if self.band is None else self.band

    def to_items(self) -> dict:
        """Canonical flat key/value view (also the hashed text)."""
        s, i = self.solver, self.init
        return {
            "experiment": self.experiment,
            "n": self.n,
            "n_angles": self.angle_count,
            "angle_min": repr(float(self.angle_interval[0])),
            "angle_max": repr(float(self.angle_interval[1])),
            "waveform": self.waveform,
            "band": self.band_or_default,
            "support": self.support if self.support is not None else self.n // 2,
            "mask": str(self.mask),
            "snr_db": _snr_text(self.snr_db),
            "trials": self.trials,
            "seed": self.seed,
            "max_iterations": s.max_iterations,
            "tau": s.tau,
            "mu": s.mu,
            "stop_tol": repr(float(s.stop_tol)),
            "line10_literal": str(s.line10_literal).lower(),
            "record_trace": str(s.record_trace).lower(),
            "power_iterations": i.power_iterations,
            "index_fraction_divisor": i.index_fraction_divisor,
            "removal_sweep": ",".join(f"{p:g}" for p in self.removal_sweep),
            "snr_sweep": ",".join(_snr_text(v) for v in self.snr_sweep),
        }

    def to_text(self) -> str:
        return "".join(f"{k}={v}\n" for k, v in self.to_items().items())

    @property
    def config_hash(self) -> str:
        # output_dir and workers do not change any number, so they stay out
        return hashlib.sha256(self.to_text().encode()).hexdigest()[:16]


def _snr_text(v):
    return "inf" if v is None or math.isinf(v) else f"{v:g}"


def _parse_snr(text):
    t = text.strip().lower()
    if t in ("", "none", "inf", "+inf", "noiseless"):
        return None
    v = float(t)
    if math.isnan(v) or v == -math.inf:
        raise ValueError("snr must be a number or inf")
    return None if math.isinf(v) else v


def _parse_bool(text):
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _auto_or_float(text):
    return "auto" if text.strip().lower() == "auto" else float(text)


_TOP = {
    "experiment": lambda v: v.strip().replace("-", "_"),
    "n": int,
    "n_angles": int,
    "waveform": str.strip,
    "band": int,
    "support": int,
    "mask": parse_mask,
    "snr_db": _parse_snr,
    "trials": int,
    "seed": int,
    "output_dir": str.strip,
    "workers": int,
    "removal_sweep": lambda v: tuple(float(p) for p in v.split(",") if p.strip()),
    "snr_sweep": lambda v: tuple(_parse_snr(p) for p in v.split(",") if p.strip()),
}
_SOLVER = {
    "max_iterations": int,
    "tau": _auto_or_float,
    "mu": _auto_or_float,
    "stop_tol": float,
    "line10_literal": _parse_bool,
    "record_trace": _parse_bool,
}
_INIT = {"power_iterations": int, "index_fraction_divisor": int}


def parse_config(text: str = "", overrides: dict | None = None) -> ExperimentConfig:
    """Build a config from flat ``key=value`` text plus string overrides."""
    raw = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        if key in raw:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        raw[key] = value
    raw.update({k: str(v) for k, v in (overrides or {}).items() if v is not None})
    top, solver, init = {}, {}, {}
    lo = hi = None
    for key, value in raw.items():
        try:
            if key in _TOP:
                top[key] = _TOP[key](value)
            elif key in _SOLVER:
                solver[key] = _SOLVER[key](value)
            elif key in _INIT:
                init[key] = _INIT[key](value)
            elif key == "angle_min":
                lo = float(value)
            elif key == "angle_max":
                hi = float(value)
            else:
                raise ConfigError(f"unknown key {key!r}")
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError(f"bad value for {key!r}: {exc}") from None
    if lo is not None or hi is not None:
        default = ExperimentConfig.angle_interval
        top["angle_interval"] = (default[0] if lo is None else lo, default[1] if hi is None else hi)
    if top.get("experiment") == "success_curve" and "n" not in top:
        top["n"] = 32
    try:
        return ExperimentConfig(solver=SolverConfig(**solver), init=InitConfig(**init), **top)
    except ConfigError:
        raise
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from None


def load_config(path, overrides: dict | None = None) -> ExperimentConfig:
    try:
        text = Path(path).read_text(encoding="utf-8") if path else ""
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    return parse_config(text, overrides)


@dataclass
class RecoveryReport:
    dist_value: float
    relative_error: float
    success: bool
    iterations_used: int
    wall_time_ms: float
    lambda0: float
    seeds: dict
    config_hash: str
    waveform: str = "gaussian"
    converged: bool = False
    init_only: bool = False
    init_matrix_error: float = float("nan")
    init_relative_error: float = float("nan")
    flags: tuple = ()

    def to_items(self) -> dict:
        out = {k: v for k, v in dataclasses.asdict(self).items() if k not in ("seeds", "flags")}
        out["success"] = str(self.success).lower()
        out["converged"] = str(self.converged).lower()
        out["init_only"] = str(self.init_only).lower()
        out["flags"] = ",".join(self.flags)
        for stage, seed in self.seeds.items():
            out[f"seed_{stage}"] = seed
        return out


def trial_waveform_kind(cfg: ExperimentConfig, trial: int, mixed: bool = False) -> str:
    """80/10/10 gaussian/LFM/NLFM by ``trial mod 10`` when mixing."""
    if not mixed and cfg.waveform != "mix":
        return cfg.waveform
    slot = trial % 10
    return "lfm" if slot == 8 else "nlfm" if slot == 9 else "gaussian"


def make_waveform(cfg: ExperimentConfig, kind: str, seed: int):
    if kind == "gaussian":
        return gaussian_bandlimited(cfg.n, cfg.band_or_default, seed=seed)
    if kind == "time_limited":
        support = cfg.n // 2 if cfg.support is None else cfg.support
        return time_limited(cfg.n, support, seed=seed)
    if kind == "lfm":
        return lfm(ChirpParams(), cfg.n)
    if kind == "nlfm":
        return nlfm(ChirpParams(), cfg.n)
    raise ConfigError(f"unknown waveform {kind!r}")


def _trial_mask(spec: MaskSpec, seed: int) -> MaskSpec:
    if spec.kind is MaskKind.RANDOM_UNIFORM:
        return dataclasses.replace(spec, seed=seed)
    return spec


def removal_mask(pct: float, kind: MaskKind) -> MaskSpec:
    """Mask removing ``pct`` percent of entries (``random``) or rows (``angles``)."""
    if pct == 0:
        return MaskSpec()
    return MaskSpec(kind, fraction_removed=pct / 100.0)


_BANKS = {}


def _bank_for(cfg):
    key = (cfg.n, cfg.angle_count, tuple(cfg.angle_interval))
    if key not in _BANKS:
        _BANKS[key] = build_bank(cfg.n, build_angle_grid(cfg.angle_count, cfg.angle_interval))
    return _BANKS[key]


def run_trial(cfg: ExperimentConfig, trial: int, mask: MaskSpec, snr_db, kind: str,
              solver_cfg: SolverConfig | None = None, callback=None):
    """Waveform, surface, mask, noise, init and solve for one seeded trial.

    Returns a dict with every intermediate; numeric failures are raised as
    :class:`StageError`. ``callback`` is handed to the solver.
    """
    seeds = {stage: derive_seed(cfg.seed, trial, tag) for stage, tag in STAGES.items()}
    solver_cfg = cfg.solver if solver_cfg is None else solver_cfg
    out = {"seeds": seeds, "kind": kind}
    stage = "waveform"
    try:
        x = make_waveform(cfg, kind, seeds["waveform"] % (1 << 63))
        out["x"] = x.samples
        stage = "forward"
        bank = _bank_for(cfg)
        clean = ambiguity_frft(x, bank)
        out["clean"] = clean
        stage = "mask"
        spec = _trial_mask(mask, seeds["mask"] % (1 << 63))
        observed = clean.with_mask(make_mask(spec, *clean.shape))
        stage = "noise"
        observed = add_noise(observed, snr_db, seeds["noise"] % (1 << 63))
        out["observed"] = observed
        stage = "init"
        init_cfg = dataclasses.replace(cfg.init, seed=seeds["init"] % (1 << 63))
        init = initialize(observed, bank, init_cfg)
        out["init"] = init
        stage = "solve"
        state, info = solve(observed, bank, init.x0, solver_cfg, callback)
        out["state"], out["info"] = state, info
        q = init.x0 if solver_cfg.max_iterations == 0 else extract_waveform(state.Z, init.lambda0)
        out["q"] = q
    except (SolverError, np.linalg.LinAlgError, FloatingPointError, ValueError) as exc:
        raise StageError(stage, exc) from exc
    return out


def _summary(result):
    x, q = result["x"], result["q"]
    d = dist(x, q)
    rel = d / np.linalg.norm(x)
    return {
        "dist": d,
        "rel_error": rel,
        "success": rel < SUCCESS_THRESHOLD,
        "iterations": result["info"].iterations_used,
    }


def _pool_map(fn, jobs, workers):
    # results come back in job order whatever the scheduling
    if workers <= 1 or len(jobs) <= 1:
        return [fn(job) for job in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, jobs))


def _comments(cfg):
    return [f"config_hash={cfg.config_hash}"]


def run_recover(cfg: ExperimentConfig, out_dir=None) -> RecoveryReport:
    """Single recovery; writes waveforms, surfaces, trace, init and report."""
    started = time.perf_counter()
    out_dir = Path(cfg.output_dir if out_dir is None else out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    kind = trial_waveform_kind(cfg, 0)
    result = run_trial(cfg, 0, cfg.mask, cfg.snr_db, kind)
    x, q, init, state, info = (result[k] for k in ("x", "q", "init", "state", "info"))
    bank = _bank_for(cfg)
    recovered_af = ambiguity_frft(q, bank)
    d = dist(x, q)
    rel = d / np.linalg.norm(x)
    report = RecoveryReport(
        dist_value=d,
        relative_error=rel,
        success=bool(rel < SUCCESS_THRESHOLD),
        iterations_used=info.iterations_used,
        wall_time_ms=1e3 * (time.perf_counter() - started),
        lambda0=init.lambda0,
        seeds=result["seeds"],
        config_hash=cfg.config_hash,
        waveform=kind,
        converged=info.converged,
        init_only=info.init_only,
        init_matrix_error=matrix_error(x, init.x0),
        init_relative_error=dist(x, init.x0) / np.linalg.norm(x),
        flags=init.flags,
    )
    c = _comments(cfg)
    wio.write_waveform_csv(out_dir / "original_waveform.csv", x, c)
    wio.write_waveform_csv(out_dir / "recovered_waveform.csv", q, c)
    wio.write_ambiguity_csv(out_dir / "original_af.csv", result["clean"], c)
    wio.write_ambiguity_csv(out_dir / "masked_af.csv", result["observed"], c)
    wio.write_ambiguity_csv(out_dir / "recovered_af.csv", recovered_af, c)
    wio.write_ambiguity_binary(out_dir / "masked_af.bin", result["observed"])
    wio.write_init_result(out_dir / "init", init, c)
    wio.write_trace_csv(out_dir / "trace.csv", state, c)
    wio.write_key_values(out_dir / "config.txt", cfg.to_items(), c)
    wio.write_key_values(out_dir / "report.txt", report.to_items(), c)
    _write_plot(out_dir / "plot.gp", "recover", c)
    return report


def _success_job(job):
    cfg, trial, pct = job
    mask = removal_mask(pct, MaskKind.RANDOM_UNIFORM)
    kind = trial_waveform_kind(cfg, trial, mixed=True)
    return _summary(run_trial(cfg, trial, mask, None, kind))


def run_success_curve(cfg: ExperimentConfig, out_dir=None, trial_hook=None):
    """Noiseless success rate against random removal percentage.

    Returns the rows written to ``success_curve.csv``; ``trial_hook`` (if
    given) sees every per-trial summary in order.
    """
    out_dir = Path(cfg.output_dir if out_dir is None else out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = []
    for pct in cfg.removal_sweep:
        jobs = [(cfg, t, pct) for t in range(cfg.trials)]
        results = _pool_map(_success_job, jobs, cfg.workers)
        if trial_hook is not None:
            for r in results:
                trial_hook(pct, r)
        rel = np.array([r["rel_error"] for r in results])
        rows.append({
            "removal_pct": pct,
            "success_rate": float(np.mean([r["success"] for r in results])),
            "mean_rel_error": float(rel.mean()),
            "median_rel_error": float(np.median(rel)),
            "mean_iters": float(np.mean([r["iterations"] for r in results])),
            "trials": cfg.trials,
        })
    _write_rows(out_dir / "success_curve.csv", rows, _comments(cfg))
    wio.write_key_values(out_dir / "config.txt", cfg.to_items(), _comments(cfg))
    _write_plot(out_dir / "plot.gp", "success_curve", _comments(cfg))
    return rows


def _init_job(job):
    cfg, trial, pct, snr = job
    mask = removal_mask(pct, MaskKind.ANGLE_FRACTION)
    kind = trial_waveform_kind(cfg, trial)
    no_solve = dataclasses.replace(cfg.solver, max_iterations=0)
    result = run_trial(cfg, trial, mask, snr, kind, no_solve)
    x, x0 = result["x"], result["init"].x0
    return matrix_error(x, x0), dist(x, x0) / np.linalg.norm(x)


def run_init_curve(cfg: ExperimentConfig, out_dir=None):
    """Initializer error against removed rotations and SNR (mean and variance)."""
    out_dir = Path(cfg.output_dir if out_dir is None else out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = []
    for snr in cfg.snr_sweep:
        for pct in cfg.removal_sweep:
            jobs = [(cfg, t, pct, snr) for t in range(cfg.trials)]
            errs = np.array(_pool_map(_init_job, jobs, cfg.workers))
            rows.append({
                "removal_pct": pct,
                "snr_db": _snr_text(snr),
                "mean_matrix_error": float(errs[:, 0].mean()),
                "var_matrix_error": float(errs[:, 0].var()),
                "mean_rel_error": float(errs[:, 1].mean()),
                "var_rel_error": float(errs[:, 1].var()),
                "trials": cfg.trials,
            })
    _write_rows(out_dir / "init_curve.csv", rows, _comments(cfg))
    wio.write_key_values(out_dir / "config.txt", cfg.to_items(), _comments(cfg))
    _write_plot(out_dir / "plot.gp", "init_curve", _comments(cfg))
    return rows


def _write_rows(path, rows, comments):
    with open(path, "w", encoding="utf-8") as fh:
        for line in comments:
            fh.write(f"# {line}\n")
        fh.write(",".join(rows[0]) + "\n")
        for row in rows:
            fh.write(",".join(
                format(v, ".17g") if isinstance(v, float) else str(v) for v in row.values()) + "\n")


_PLOTS = {
    "recover": """set datafile separator ','
set multiplot layout 2,1
set title 'waveform magnitude'
plot 'original_waveform.csv' using 1:(sqrt($2**2+$3**2)) every ::1 with lines title 'original', \\
     'recovered_waveform.csv' using 1:(sqrt($2**2+$3**2)) every ::1 with lines title 'recovered'
set title 'data misfit'
set logscale y
plot 'trace.csv' using 1:2 every ::1 with lines title 'misfit'
unset multiplot
""",
    "success_curve": """set datafile separator ','
set xlabel 'removed entries (%)'
set ylabel 'success rate'
set yrange [0:1]
plot 'success_curve.csv' using 1:2 every ::1 with linespoints title 'success rate'
""",
    "init_curve": """set datafile separator ','
set xlabel 'removed rotations (%)'
set ylabel 'relative error'
plot for [s in 'inf 30 20 10'] 'init_curve.csv' using 1:(strcol(2) eq s ? $3 : 1/0):(sqrt($4)) \\
     every ::1 with yerrorlines title s.' dB'
""",
}


def _write_plot(path, experiment, comments):
    with open(path, "w", encoding="utf-8") as fh:
        for line in comments:
            fh.write(f"# {line}\n")
        fh.write(_PLOTS[experiment])


def run(cfg: ExperimentConfig):
    if cfg.experiment == "recover":
        return run_recover(cfg)
    if cfg.experiment == "success_curve":
        return run_success_curve(cfg)
    return run_init_curve(cfg)
