"""Compare the compiled kernels against the numpy fallback.

Run with ``python3 benchmarks/bench_kernels.py [--sizes 16 32 64] [--repeat 20]``.
The kernel timings run in-process against both backend modules; the solver
step timing runs each backend in a fresh interpreter so that the backend
selected at import is the one exercised end to end.
"""

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from wavemax import kernels
from wavemax.frft import build_bank

STEP_SNIPPET = """
import timeit
import numpy as np
from wavemax import kernels
from wavemax.ambiguity import ambiguity_frft
from wavemax.frft import build_bank
from wavemax.solver import SolverConfig, initial_state, resolve_config, step
from wavemax.spectral_init import initialize
from wavemax.waveforms import gaussian_bandlimited
n = {n}
bank = build_bank(n)
A = ambiguity_frft(gaussian_bandlimited(n, n // 2, seed=0), bank)
cfg = resolve_config(SolverConfig(), A, bank)
state = initial_state(initialize(A, bank).x0)
t = min(timeit.repeat(lambda: step(state, A, bank, cfg), number=1, repeat={repeat}))
print(kernels.BACKEND, t)
"""


def _best(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def bench_kernels(n, repeat, rng):
    S = np.ascontiguousarray(build_bank(n).stacked)
    Z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    Z = Z + Z.conj().T
    g = rng.standard_normal(S.shape[0]) + 1j * rng.standard_normal(S.shape[0])
    h = rng.standard_normal((2 * n, n)) + 1j * rng.standard_normal((2 * n, n))
    lo = rng.uniform(0, 6, 2 * n)
    rows = []
    for name, call in (
        ("diag_traces", lambda m: m.diag_traces(S, Z)),
        ("weighted_gram", lambda m: m.weighted_gram(S, g)),
        ("refine_modulation", lambda m: m.refine_modulation(h, lo, lo + 0.1, 1e-10)),
    ):
        times = {b: _best(lambda: call(kernels.backend_module(b)), repeat) for b in ("python", "compiled")}
        rows.append((name, n, times["python"], times["compiled"]))
    return rows


def bench_step(n, repeat):
    times = {}
    for backend, flag in (("python", "1"), ("compiled", "0")):
        env = dict(os.environ, WAVEMAX_PURE_PYTHON=flag)
        out = subprocess.run([sys.executable, "-c", STEP_SNIPPET.format(n=n, repeat=repeat)],
                             capture_output=True, text=True, env=env, check=True)
        got, t = out.stdout.split()
        if got != backend:
            raise RuntimeError(f"expected backend {backend}, interpreter selected {got}")
        times[backend] = float(t)
    return ("solver step", n, times["python"], times["compiled"])


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", type=int, nargs="+", default=[16, 32, 64])
    parser.add_argument("--repeat", type=int, default=20)
    args = parser.parse_args(argv)
    try:
        kernels.backend_module("compiled")
    except ImportError:
        sys.exit("compiled kernels are not built; run `pip install -e . --no-build-isolation` first")
    rng = np.random.default_rng(0)
    rows = []
    for n in args.sizes:
        rows.extend(bench_kernels(n, args.repeat, rng))
        rows.append(bench_step(n, args.repeat))
    print(f"{'kernel':<18}{'N':>5}{'python ms':>12}{'compiled ms':>14}{'speedup':>10}")
    for name, n, tp, tc in rows:
        print(f"{name:<18}{n:>5}{tp * 1e3:>12.3f}{tc * 1e3:>14.3f}{tp / tc:>9.2f}x")


if __name__ == "__main__":
    main()
