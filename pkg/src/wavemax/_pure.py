"""Pure numpy implementations of the hot kernels.

Signatures mirror the compiled ``_kernels`` module exactly; ``kernels``
chooses between them at import time.
"""

import numpy as np

GOLDEN = 0.5 * (np.sqrt(5.0) - 1.0)


def diag_traces(stacked, Z):
    """Row-wise ``stacked[r] @ Z @ stacked[r]^H`` for every row ``r``.

    With ``stacked`` the ``(n_angles*n, n)`` stack of DFrFT matrices this is
    the diagonal of every ``F_alpha Z F_alpha^H`` flattened in angle-major
    order.
    """
    return np.einsum("rj,rj->r", stacked @ Z, stacked.conj())


def weighted_gram(stacked, g):
    """``sum_r g[r] * conj(stacked[r])^T stacked[r]`` (not symmetrized)."""
    return stacked.conj().T @ (g[:, None] * stacked)


def _modulus_sq(h, b):
    n = h.shape[1]
    phase = np.exp(-1j * b[:, None] * np.arange(n)[None, :])
    c = np.einsum("cn,cn->c", h, phase)
    return c.real**2 + c.imag**2


def refine_modulation(h, lo, hi, tol):
    """Golden-section maximisation of ``|sum_n h[c, n] exp(-i b n)|^2``.

    Each row ``c`` of ``h`` is refined independently over ``[lo[c], hi[c]]``
    until the bracket is narrower than ``tol``. Returns ``(b, value)``.
    """
    h = np.ascontiguousarray(h, dtype=complex)
    a = np.array(lo, dtype=float)
    b = np.array(hi, dtype=float)
    x1 = b - GOLDEN * (b - a)
    x2 = a + GOLDEN * (b - a)
    f1 = _modulus_sq(h, x1)
    f2 = _modulus_sq(h, x2)
    while np.max(b - a) > tol:
        left = f1 > f2
        # keep [a, x2] where f1 wins, [x1, b] elsewhere
        b = np.where(left, x2, b)
        a = np.where(left, a, x1)
        nx1 = np.where(left, b - GOLDEN * (b - a), x2)
        nx2 = np.where(left, x1, a + GOLDEN * (b - a))
        nf1 = np.where(left, 0.0, f2)
        nf2 = np.where(left, f1, 0.0)
        probe = np.where(left, nx1, nx2)
        fp = _modulus_sq(h, probe)
        f1 = np.where(left, fp, nf1)
        f2 = np.where(left, nf2, fp)
        x1, x2 = nx1, nx2
    mid = 0.5 * (a + b)
    return mid, _modulus_sq(h, mid)
