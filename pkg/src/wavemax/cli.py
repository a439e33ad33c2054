"""``wavemax`` command line: ``recover``, ``success-curve`` and ``init-curve``.

Exit codes: 0 success, 2 configuration error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import logging
import sys

from .harness import ConfigError, StageError, load_config, run

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3
COMMANDS = {"recover": "recover", "success-curve": "success_curve", "init-curve": "init_curve"}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="wavemax", description="Waveform recovery from FrFT ambiguity surfaces.")
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--config", help="flat key=value config file")
    p.add_argument("--n", help="grid size")
    p.add_argument("--seed", help="master seed")
    p.add_argument("--mask", help="full | every:<k> | random:<fraction>[:<seed>] | angles:<fraction>")
    p.add_argument("--snr-db", dest="snr_db", help="SNR in dB, or inf")
    p.add_argument("--trials", help="trials per sweep cell")
    p.add_argument("--workers", help="worker processes")
    p.add_argument("--out", dest="output_dir", help="output directory")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def _summarize(cfg, result) -> str:
    if cfg.experiment == "recover":
        return (f"relative_error={result.relative_error:.6g} success={str(result.success).lower()} "
                f"iterations={result.iterations_used} out={cfg.output_dir}")
    return f"{len(result)} rows written to {cfg.output_dir}"


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    overrides = {k: getattr(args, k) for k in ("n", "seed", "mask", "snr_db", "trials", "workers", "output_dir")}
    overrides["experiment"] = COMMANDS[args.command]
    try:
        cfg = load_config(args.config, overrides)
    except ConfigError as exc:
        print(f"wavemax: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        result = run(cfg)
    except StageError as exc:
        print(f"wavemax: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ConfigError as exc:
        print(f"wavemax: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print(_summarize(cfg, result))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
