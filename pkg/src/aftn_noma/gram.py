"""MUI Gram matrices in Toeplitz form and their transform-domain evaluators.

The received-symbol model couples user l into user k's matched-filter bank
through a Toeplitz matrix whose coefficients are pulse correlations at lags
``m*zeta*T + delta_tau``.  Products of such a matrix with its transpose are
asymptotically Toeplitz with coefficients given by the discrete
autocorrelation of the correlation sequence; their transforms drive all of
the asymptotic rate formulas, so this module also provides the closed
alias-sum evaluation of those transforms for use as oracles and bounds.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .pulse import (
    DEFAULT_QUAD_POINTS,
    FtnConfig,
    PulseParams,
    alias_range,
    cross_corr,
    rrc_spectrum,
)

__all__ = [
    "ToeplitzMatrix",
    "ProductCoeffs",
    "EigReport",
    "mui_matrix",
    "gram_product_coeffs",
    "dtft_g",
    "dtft_t",
    "check_positive_definite",
]


@dataclass(frozen=True, eq=False)
class ToeplitzMatrix:
    """Banded-by-decay Toeplitz matrix stored as first column + first row.

    Entry (i, j) equals ``coefficient(j - i)``; ``first_row[j]`` holds the
    coefficient at lag +j and ``first_col[i]`` the one at lag -i.
    """

    first_col: np.ndarray
    first_row: np.ndarray
    delta_tau: float

    def __post_init__(self) -> None:
        if self.first_col.shape != self.first_row.shape:
            raise ValueError("first_col and first_row must have equal length")
        if self.first_col[0] != self.first_row[0]:
            raise ValueError("corner entry mismatch between first_col and first_row")

    @property
    def n(self) -> int:
        return self.first_col.shape[0]

    @property
    def is_symmetric(self) -> bool:
        return bool(np.array_equal(self.first_col, self.first_row))

    def coefficient(self, lag: int) -> float:
        """g[lag, delta_tau]; positive lags read the row, negative the column."""
        if abs(lag) >= self.n:
            raise IndexError(f"lag {lag} outside +-{self.n - 1}")
        return float(self.first_row[lag] if lag >= 0 else self.first_col[-lag])

    def dense(self) -> np.ndarray:
        return scipy.linalg.toeplitz(self.first_col, self.first_row)


def mui_matrix(
    delta_tau: float,
    z: FtnConfig,
    p: PulseParams,
    n: int,
    quad_points: int = DEFAULT_QUAD_POINTS,
) -> ToeplitzMatrix:
    """Interference coupling matrix between two users offset by ``delta_tau``.

    Row i, column j holds the pulse correlation at symbol offset j - i, so
    ``delta_tau == 0`` yields the symmetric self-Gram (the identity at
    zeta == 1 by Nyquist orthogonality).
    """
    if n < 1:
        raise ValueError(f"matrix dimension must be >= 1, got {n}")
    lags = np.arange(n, dtype=float)
    both = np.concatenate([-lags, lags])
    vals = cross_corr(both, delta_tau, z, p, quad_points)
    return ToeplitzMatrix(
        first_col=np.ascontiguousarray(vals[:n]),
        first_row=np.ascontiguousarray(vals[n:]),
        delta_tau=float(delta_tau),
    )


@dataclass(frozen=True, eq=False)
class ProductCoeffs:
    """Coefficients t[n] of the Gram-times-transpose Toeplitz limit.

    ``coeffs[m_max + n]`` stores t[n] for n in [-m_max, m_max].
    """

    coeffs: np.ndarray
    m_max: int

    def __getitem__(self, lag: int) -> float:
        if abs(lag) > self.m_max:
            raise IndexError(f"lag {lag} outside +-{self.m_max}")
        return float(self.coeffs[self.m_max + lag])


def gram_product_coeffs(
    delta_tau: float,
    z: FtnConfig,
    p: PulseParams,
    m_max: int = 200,
    quad_points: int = DEFAULT_QUAD_POINTS,
    tail_tol: float = 1e-6,
) -> ProductCoeffs:
    """t[n] = sum_m g[m] * g[m - n] truncated to |m| <= m_max.

    Warns when |g| has not decayed below ``tail_tol`` at the truncation edge
    (the correlation falls off cubically, so m_max = 200 is ample for the
    default pulses).
    """
    lags = np.arange(-2 * m_max, 2 * m_max + 1, dtype=float)
    g = cross_corr(lags, delta_tau, z, p, quad_points)
    tail = max(abs(g[0]), abs(g[-1]), abs(g[m_max]), abs(g[3 * m_max]))
    if tail > tail_tol:
        warnings.warn(
            f"correlation tail {tail:.2e} exceeds {tail_tol:.0e} at m_max={m_max}",
            stacklevel=2,
        )
    inner = g[m_max : 3 * m_max + 1]  # m in [-m_max, m_max]
    # t[n] = sum_i inner[i] * g[(i - m_max) - n]; correlate walks n = m_max..-m_max
    t = np.correlate(g, inner, mode="valid")[::-1]
    return ProductCoeffs(coeffs=np.ascontiguousarray(t), m_max=m_max)


def _check_band(f: np.ndarray, z: FtnConfig, p: PulseParams) -> None:
    edge = z.band_edge(p)
    if np.any(np.abs(f) > edge * (1.0 + 1e-12)):
        bad = float(np.abs(f).max())
        raise ValueError(f"frequency {bad:g} outside the symbol-rate band +-{edge:g}")


def dtft_g(f, delta_tau: float, z: FtnConfig, p: PulseParams):
    """Transform of the correlation sequence, in closed alias-sum form.

    Poisson summation collapses the series over lags into
    ``(1/(zeta*T)) * sum_k |H(f - k/(zeta*T))|^2 * exp(j*2*pi*(f - k/(zeta*T))*delta_tau)``
    with only the overlapping aliases contributing.  Out-of-band frequencies
    are rejected.
    """
    farr = np.atleast_1d(np.asarray(f, dtype=float))
    scalar = np.asarray(f).ndim == 0
    _check_band(farr, z, p)
    shift = 1.0 / (z.zeta * p.T)
    acc = np.zeros(farr.shape, dtype=complex)
    for k in alias_range(z, p):
        fk = farr - k * shift
        acc += rrc_spectrum(fk, p) * np.exp(2j * np.pi * fk * delta_tau)
    acc *= shift
    return complex(acc[0]) if scalar else acc


def dtft_t(f, delta_tau: float, z: FtnConfig, p: PulseParams):
    """Transform of the product coefficients t[n].

    t is the discrete autocorrelation of the real correlation sequence, so
    its transform is the squared magnitude of the sequence transform.
    """
    g = dtft_g(f, delta_tau, z, p)
    out = np.abs(np.atleast_1d(g)) ** 2
    return float(out[0]) if np.asarray(f).ndim == 0 else out


@dataclass(frozen=True)
class EigReport:
    """Eigenvalue summary from a positive-definiteness check."""

    min_eigenvalue: float
    max_eigenvalue: float
    floor: float
    above_floor: bool
    n_floored: int


def check_positive_definite(m: ToeplitzMatrix, floor_rel: float = 1e-12) -> EigReport:
    """Report the extreme eigenvalues of a symmetric Gram matrix.

    ``above_floor`` is true when the smallest eigenvalue clears the relative
    floor ``floor_rel * max_eigenvalue``; eigenvalues below it are counted as
    flooring events.  Positivity of these Grams is an asymptotic guarantee,
    so heavily compressed configurations legitimately land near the floor.
    """
    if not m.is_symmetric:
        raise ValueError("positive-definiteness check requires a symmetric matrix")
    eig = np.linalg.eigvalsh(m.dense())
    lo, hi = float(eig[0]), float(eig[-1])
    floor = floor_rel * hi
    return EigReport(
        min_eigenvalue=lo,
        max_eigenvalue=hi,
        floor=floor,
        above_floor=bool(lo > floor),
        n_floored=int(np.count_nonzero(eig <= floor)),
    )
