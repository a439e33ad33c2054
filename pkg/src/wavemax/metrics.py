"""Distance to the trivial-ambiguity orbit, relative errors and success tests.

The orbit of ``x`` is every ``z[n] = e^{i beta} e^{i b n} x[(eps n - a) mod N]``
with ``eps = +-1``, integer ``a`` and real ``beta``, ``b``. For fixed
``(eps, a, b)`` the best ``beta`` has a closed form, so

    ||q - z||^2 = ||q||^2 + ||x||^2 - 2 |sum_n conj(x_s[n]) q[n] e^{-i b n}|

and the search reduces to maximising a trigonometric polynomial in ``b``
for each of the ``2N`` discrete ``(eps, a)`` pairs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels

__all__ = [
    "AmbiguitySearchGrid",
    "Alignment",
    "trivial_transform",
    "align",
    "dist",
    "dist_bruteforce",
    "relative_error",
    "matrix_error",
    "success",
    "SUCCESS_THRESHOLD",
]

SUCCESS_THRESHOLD = 1e-6
BRUTEFORCE_MAX_N = 16


@dataclass(frozen=True)
class AmbiguitySearchGrid:
    """Search settings for :func:`dist`.

    The coarse modulation grid has ``oversample_factor * n`` points on
    ``[0, 2 pi)`` and therefore contains the ``n`` exact bins ``2 pi j / n``.
    """

    n: int
    oversample_factor: int = 8
    refine_tol: float = 1e-10

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be positive")
        if self.oversample_factor < 1:
            raise ValueError("oversample_factor must be at least 1")
        if not self.refine_tol > 0:
            raise ValueError("refine_tol must be positive")

    @property
    def shifts(self) -> np.ndarray:
        return np.arange(self.n)

    @property
    def reflections(self) -> tuple:
        return (1, -1)

    @property
    def modulation_count(self) -> int:
        return self.oversample_factor * self.n

    @property
    def modulation_grid(self) -> np.ndarray:
        return 2 * np.pi * np.arange(self.modulation_count) / self.modulation_count


@dataclass(frozen=True)
class Alignment:
    distance: float
    eps: int
    shift: int
    modulation: float
    phase: float

    def apply(self, x) -> np.ndarray:
        return trivial_transform(x, self.phase, self.modulation, self.shift, self.eps)


def trivial_transform(x, beta: float = 0.0, b: float = 0.0, a: int = 0, eps: int = 1) -> np.ndarray:
    """``e^{i beta} e^{i b n} x[(eps n - a) mod N]``."""
    if eps not in (1, -1):
        raise ValueError("eps must be +1 or -1")
    x = np.asarray(x, dtype=complex).reshape(-1)
    n = np.arange(x.size)
    return np.exp(1j * beta) * np.exp(1j * b * n) * x[(eps * n - int(a)) % x.size]


def _pair(x, q):
    x = np.asarray(getattr(x, "samples", x), dtype=complex).reshape(-1)
    q = np.asarray(getattr(q, "samples", q), dtype=complex).reshape(-1)
    if x.size != q.size:
        raise ValueError(f"length mismatch: {x.size} vs {q.size}")
    return x, q


def _candidates(x, q):
    # row (e, a) holds conj(x[(eps n - a) mod N]) * q[n]; e = 0 for eps = +1
    N = x.size
    n = np.arange(N)
    shifts = np.arange(N)
    h = np.empty((2, N, N), dtype=complex)
    for e, eps in enumerate((1, -1)):
        idx = (eps * n[None, :] - shifts[:, None]) % N
        h[e] = x[idx].conj() * q[None, :]
    return h.reshape(2 * N, N)


def align(x, q, grid: AmbiguitySearchGrid | None = None) -> Alignment:
    """Closest orbit element of ``x`` to ``q`` and its parameters."""
    x, q = _pair(x, q)
    N = x.size
    grid = AmbiguitySearchGrid(N) if grid is None else grid
    if grid.n != N:
        raise ValueError("search grid size does not match the signals")
    h = _candidates(x, q)
    K = grid.modulation_count
    # coarse: sum_n h[n] e^{-i 2 pi j n / K} is a zero-padded DFT
    coarse = np.abs(np.fft.fft(h, n=K, axis=1)) ** 2
    best_j = np.argmax(coarse, axis=1)
    coarse_best = coarse[np.arange(h.shape[0]), best_j]
    step = 2 * np.pi / K
    centre = best_j * step
    b_ref, v_ref = kernels.refine_modulation(h, centre - step, centre + step, grid.refine_tol)
    use_ref = v_ref > coarse_best
    b_all = np.where(use_ref, b_ref, centre)
    v_all = np.where(use_ref, v_ref, coarse_best)
    row = int(np.argmax(v_all))
    b = _polish(h[row], float(b_all[row]))
    b = float(np.mod(b, 2 * np.pi))
    c = np.sum(h[row] * np.exp(-1j * b * np.arange(N)))
    # conj(z) q summed equals e^{-i beta} c, so beta = arg c aligns it
    e, a = divmod(row, N)
    eps, beta = (1, -1)[e], float(np.angle(c))
    # evaluating ||q - z|| directly avoids the cancellation in the closed form
    z = trivial_transform(x, beta, b, int(a), eps)
    return Alignment(float(np.linalg.norm(q - z)), eps, int(a), b, beta)


def _polish(h, b, steps=4):
    """Newton steps on ``d/db |c(b)|^2 = 0`` near a located maximum.

    Golden-section search only pins ``b`` to about ``sqrt(machine eps)``
    because the objective is flat at the peak; its derivative is not.
    """
    n = np.arange(h.size)

    def parts(t):
        e = h * np.exp(-1j * t * n)
        return e.sum(), (-1j * n * e).sum(), (-(n**2) * e).sum()

    def slope(t):
        c, c1, c2 = parts(t)
        return np.real(np.conj(c) * c1), abs(c1) ** 2 + np.real(np.conj(c) * c2)

    # accept steps while the slope shrinks; the peak value itself is too
    # flat to compare in floating point
    g, dg = slope(b)
    for _ in range(steps):
        if dg >= 0 or g == 0:
            break
        trial = b - g / dg
        g_new, dg_new = slope(trial)
        if abs(g_new) >= abs(g):
            break
        b, g, dg = trial, g_new, dg_new
    return b


def dist(x, q, grid: AmbiguitySearchGrid | None = None) -> float:
    """Distance from ``q`` to the trivial-ambiguity orbit of ``x``.

    Coarse zero-padded search over the modulation, golden-section refinement
    and a Newton polish of the best candidate; the distance is evaluated
    directly at the chosen orbit point, so it is an upper bound on the
    exact infimum.
    """
    return align(x, q, grid).distance


def dist_bruteforce(x, q, discrete_b_count: int = 256) -> float:
    """Exhaustive minimum over ``eps``, ``a`` and a uniform ``b`` grid (oracle).

    Limited to ``N <= 16``.
    """
    x, q = _pair(x, q)
    N = x.size
    if N > BRUTEFORCE_MAX_N:
        raise ValueError(f"dist_bruteforce is limited to N <= {BRUTEFORCE_MAX_N}")
    if discrete_b_count < 1:
        raise ValueError("discrete_b_count must be positive")
    best = np.inf
    total = np.vdot(q, q).real + np.vdot(x, x).real
    for eps in (1, -1):
        for a in range(N):
            shifted = np.array([x[(eps * n - a) % N] for n in range(N)])
            for j in range(discrete_b_count):
                b = 2 * np.pi * j / discrete_b_count
                c = 0j
                for n in range(N):
                    c += np.conj(shifted[n]) * q[n] * np.exp(-1j * b * n)
                best = min(best, total - 2 * abs(c))
    return float(np.sqrt(max(best, 0.0)))


def relative_error(x, q, grid: AmbiguitySearchGrid | None = None) -> float:
    x, q = _pair(x, q)
    norm = np.linalg.norm(x)
    if norm == 0:
        raise ValueError("reference signal is zero")
    return dist(x, q, grid) / norm


def success(x, q, threshold: float = SUCCESS_THRESHOLD, grid: AmbiguitySearchGrid | None = None) -> bool:
    """``dist(x, q) / ||x|| < threshold``."""
    if not threshold > 0:
        raise ValueError("threshold must be positive")
    return relative_error(x, q, grid) < threshold


def matrix_error(x, x0) -> float:
    """``||x x^H - x0 x0^H||_F / ||x x^H||_F`` (insensitive to global phase only)."""
    x, x0 = _pair(x, x0)
    X = np.outer(x, x.conj())
    denom = np.linalg.norm(X)
    if denom == 0:
        raise ValueError("reference signal is zero")
    return float(np.linalg.norm(X - np.outer(x0, x0.conj())) / denom)
