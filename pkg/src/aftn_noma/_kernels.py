"""Numeric inner loops with a numba fast path and a pure-numpy fallback.

The backend is chosen once at import time from the ``AFTN_NOMA_BACKEND``
environment variable: ``numba`` (default when importable), ``numpy``, or
``auto``.  Each backend is serial and deterministic, so reruns are
bit-identical; across backends the quadrature reduction order differs
(serial loop vs BLAS dot), which moves results by no more than ~1e-12.
"""

from __future__ import annotations

import os
import warnings

import numpy as np

_ENV_VAR = "AFTN_NOMA_BACKEND"


def _resolve_backend() -> str:
    choice = os.environ.get(_ENV_VAR, "auto").strip().lower()
    if choice in ("numpy", "python"):
        return "numpy"
    if choice not in ("auto", "numba", ""):
        raise ValueError(
            f"{_ENV_VAR} must be 'numba', 'numpy', or 'auto', got {choice!r}"
        )
    try:
        import numba  # noqa: F401
    except ImportError:
        if choice == "numba":
            warnings.warn("numba requested but not importable; using numpy")
        return "numpy"
    return "numba"


_BACKEND = _resolve_backend()


def backend() -> str:
    """Name of the active compute backend ('numba' or 'numpy')."""
    return _BACKEND


# ---------------------------------------------------------------------------
# pure-numpy implementations
# ---------------------------------------------------------------------------

_CHUNK_ELEMS = 4_000_000  # bound the outer-product workspace


def _corr_quad_batch_np(x, freqs, sw):
    out = np.empty(x.shape[0])
    step = max(1, _CHUNK_ELEMS // max(freqs.shape[0], 1))
    two_pi = 2.0 * np.pi
    for i in range(0, x.shape[0], step):
        xs = x[i : i + step]
        out[i : i + step] = np.cos(two_pi * xs[:, None] * freqs[None, :]) @ sw
    return out


def _cubic_interp_batch_np(table, x0, inv_h, x):
    pos = (x - x0) * inv_h
    j = np.clip(pos.astype(np.int64), 1, table.shape[0] - 3)
    t = pos - j
    ym, y0, y1, y2 = table[j - 1], table[j], table[j + 1], table[j + 2]
    # 4-point Lagrange on the uniform stencil {-1, 0, 1, 2}
    return (
        ym * (-t * (t - 1.0) * (t - 2.0) / 6.0)
        + y0 * ((t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0)
        + y1 * (-(t + 1.0) * t * (t - 2.0) / 2.0)
        + y2 * ((t + 1.0) * t * (t - 1.0) / 6.0)
    )


# ---------------------------------------------------------------------------
# numba implementations
# ---------------------------------------------------------------------------

if _BACKEND == "numba":
    from numba import njit

    @njit(cache=True, fastmath=False)
    def _corr_quad_batch_nb(x, freqs, sw):  # pragma: no cover - jitted
        n = x.shape[0]
        m = freqs.shape[0]
        out = np.empty(n)
        two_pi = 2.0 * np.pi
        for j in range(n):
            xj = two_pi * x[j]
            acc = 0.0
            for i in range(m):
                acc += sw[i] * np.cos(xj * freqs[i])
            out[j] = acc
        return out

    @njit(cache=True, fastmath=False)
    def _cubic_interp_batch_nb(table, x0, inv_h, x):  # pragma: no cover
        n = x.shape[0]
        out = np.empty(n)
        jmax = table.shape[0] - 3
        for i in range(n):
            pos = (x[i] - x0) * inv_h
            j = int(pos)
            if j < 1:
                j = 1
            elif j > jmax:
                j = jmax
            t = pos - j
            ym = table[j - 1]
            y0 = table[j]
            y1 = table[j + 1]
            y2 = table[j + 2]
            out[i] = (
                ym * (-t * (t - 1.0) * (t - 2.0) / 6.0)
                + y0 * ((t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0)
                + y1 * (-(t + 1.0) * t * (t - 2.0) / 2.0)
                + y2 * ((t + 1.0) * t * (t - 1.0) / 6.0)
            )
        return out


def corr_quad_batch(x: np.ndarray, freqs: np.ndarray, sw: np.ndarray) -> np.ndarray:
    """out[j] = sum_i sw[i] * cos(2*pi*freqs[i]*x[j]).

    ``sw`` carries quadrature weight times spectrum value, so this is the
    trapezoid evaluation of a cosine transform at the points ``x``.
    """
    x = np.ascontiguousarray(x, dtype=np.float64)
    freqs = np.ascontiguousarray(freqs, dtype=np.float64)
    sw = np.ascontiguousarray(sw, dtype=np.float64)
    if _BACKEND == "numba":
        return _corr_quad_batch_nb(x, freqs, sw)
    return _corr_quad_batch_np(x, freqs, sw)


def cubic_interp_batch(
    table: np.ndarray, x0: float, inv_h: float, x: np.ndarray
) -> np.ndarray:
    """Evaluate a uniformly tabulated function with 4-point Lagrange stencils."""
    table = np.ascontiguousarray(table, dtype=np.float64)
    x = np.ascontiguousarray(x, dtype=np.float64)
    if _BACKEND == "numba":
        return _cubic_interp_batch_nb(table, float(x0), float(inv_h), x)
    return _cubic_interp_batch_np(table, float(x0), float(inv_h), x)
