import numpy as np
import pytest

from wavemax import io as wio
from wavemax.harness import (
    ConfigError,
    ExperimentConfig,
    StageError,
    derive_seed,
    parse_config,
    run_init_curve,
    run_recover,
    run_success_curve,
    run_trial,
    trial_waveform_kind,
)
from wavemax.metrics import dist
from wavemax.sensing import MaskKind, MaskSpec
from wavemax.solver import SolverConfig


def test_parse_config_text_and_overrides():
    text = """# comment
experiment = success-curve
trials=3   # trailing comment
mask=every:2
snr_db=inf
max_iterations=10
power_iterations=7
removal_sweep=0,50
snr_sweep=inf,20
"""
    cfg = parse_config(text, {"seed": "5", "n": None})
    assert cfg.experiment == "success_curve" and cfg.n == 32
    assert cfg.trials == 3 and cfg.seed == 5 and cfg.snr_db is None
    assert cfg.mask == MaskSpec(MaskKind.KEEP_EVERY_KTH_ANGLE, k=2)
    assert cfg.solver.max_iterations == 10 and cfg.init.power_iterations == 7
    assert cfg.removal_sweep == (0.0, 50.0) and cfg.snr_sweep == (None, 20.0)


@pytest.mark.parametrize("text", ["n=3", "trials=0", "bogus=1", "n=abc", "novalue", "n=8\nn=9",
                                  "experiment=other", "mask=every:0", "tau=-1", "line10_literal=maybe",
                                  "removal_sweep=100"])
def test_parse_config_errors(text):
    with pytest.raises(ConfigError):
        parse_config(text)


def test_config_hash_stable_and_sensitive():
    a = ExperimentConfig()
    assert a.config_hash == ExperimentConfig().config_hash
    assert a.config_hash != ExperimentConfig(seed=1).config_hash
    assert a.config_hash == ExperimentConfig(output_dir="elsewhere", workers=3).config_hash
    assert parse_config(a.to_text()).config_hash == a.config_hash


def test_trial_mix():
    cfg = ExperimentConfig(experiment="success_curve")
    kinds = [trial_waveform_kind(cfg, t, mixed=True) for t in range(20)]
    assert kinds.count("gaussian") == 16 and kinds.count("lfm") == 2 and kinds.count("nlfm") == 2
    assert trial_waveform_kind(ExperimentConfig(waveform="lfm"), 3) == "lfm"


def test_seeds_distinct_per_trial_and_stage():
    seeds = {derive_seed(0, t, s) for t in range(50) for s in range(4)}
    assert len(seeds) == 200


def test_run_trial_is_deterministic():
    cfg = ExperimentConfig(n=8, solver=SolverConfig(max_iterations=5))
    spec = MaskSpec(MaskKind.RANDOM_UNIFORM, fraction_removed=0.25)
    a = run_trial(cfg, 3, spec, 20.0, "gaussian")
    b = run_trial(cfg, 3, spec, 20.0, "gaussian")
    assert a["q"].tobytes() == b["q"].tobytes()
    assert a["observed"].values.tobytes() == b["observed"].values.tobytes()
    c = run_trial(cfg, 4, spec, 20.0, "gaussian")
    assert not np.array_equal(a["observed"].mask, c["observed"].mask)


def test_stage_error_is_tagged():
    cfg = ExperimentConfig(n=8, band=9)
    with pytest.raises(StageError) as info:
        run_trial(cfg, 0, MaskSpec(), None, "gaussian")
    assert info.value.stage == "waveform"


def _strip_wall_time(text):
    return "\n".join(line for line in text.splitlines() if not line.startswith("wall_time_ms="))


def test_run_recover_outputs_and_determinism(tmp_path):
    cfg = ExperimentConfig(n=8, snr_db=20.0, mask=MaskSpec(MaskKind.KEEP_EVERY_KTH_ANGLE, k=2),
                           solver=SolverConfig(max_iterations=20))
    r1 = run_recover(cfg, tmp_path / "a")
    run_recover(cfg, tmp_path / "b")
    names = ["original_waveform.csv", "recovered_waveform.csv", "original_af.csv", "masked_af.csv",
             "recovered_af.csv", "masked_af.bin", "init.csv", "init.txt", "trace.csv", "config.txt",
             "report.txt", "plot.gp"]
    for name in names:
        pa, pb = tmp_path / "a" / name, tmp_path / "b" / name
        assert pa.exists()
        if name == "report.txt":
            assert _strip_wall_time(pa.read_text()) == _strip_wall_time(pb.read_text())
        else:
            assert pa.read_bytes() == pb.read_bytes(), name
        if name.endswith((".csv", ".txt", ".gp")):
            assert pa.read_text().startswith(f"# config_hash={cfg.config_hash}")
    x = wio.read_waveform_csv(tmp_path / "a" / "original_waveform.csv").samples
    q = wio.read_waveform_csv(tmp_path / "a" / "recovered_waveform.csv").samples
    assert abs(dist(x, q) / np.linalg.norm(x) - r1.relative_error) <= 1e-12
    assert abs(r1.relative_error - r1.dist_value / np.linalg.norm(x)) <= 1e-12


def test_run_recover_init_only(tmp_path):
    cfg = ExperimentConfig(n=8, solver=SolverConfig(max_iterations=0))
    report = run_recover(cfg, tmp_path)
    assert report.init_only and report.iterations_used == 0
    q = wio.read_waveform_csv(tmp_path / "recovered_waveform.csv").samples
    x0 = wio.read_waveform_csv(tmp_path / "init.csv").samples
    assert np.array_equal(q, x0)
    assert "init_only=true" in (tmp_path / "report.txt").read_text()


def test_success_curve_contract(tmp_path):
    cfg = ExperimentConfig(experiment="success_curve", n=8, trials=2, removal_sweep=(0.0, 50.0),
                           solver=SolverConfig(max_iterations=5))
    rows = run_success_curve(cfg, tmp_path)
    assert [r["removal_pct"] for r in rows] == [0.0, 50.0]
    assert all(0 <= r["success_rate"] <= 1 for r in rows)
    header = (tmp_path / "success_curve.csv").read_text().splitlines()[1]
    assert header == "removal_pct,success_rate,mean_rel_error,median_rel_error,mean_iters,trials"


def test_success_curve_pool_matches_serial(tmp_path):
    base = dict(experiment="success_curve", n=8, trials=3, removal_sweep=(25.0,),
                solver=SolverConfig(max_iterations=5))
    serial = run_success_curve(ExperimentConfig(**base), tmp_path / "s")
    pooled = run_success_curve(ExperimentConfig(workers=2, **base), tmp_path / "p")
    assert serial == pooled
    assert (tmp_path / "s" / "success_curve.csv").read_bytes() == (tmp_path / "p" / "success_curve.csv").read_bytes()


def test_init_curve_contract(tmp_path):
    cfg = ExperimentConfig(experiment="init_curve", n=8, trials=3, removal_sweep=(0.0, 50.0),
                           snr_sweep=(None, 10.0))
    rows = run_init_curve(cfg, tmp_path)
    assert len(rows) == 4
    assert {"mean_matrix_error", "var_matrix_error", "mean_rel_error", "var_rel_error"} <= set(rows[0])
    assert rows[0]["snr_db"] == "inf" and rows[-1]["snr_db"] == "10"
    assert all(r["var_matrix_error"] >= 0 for r in rows)
