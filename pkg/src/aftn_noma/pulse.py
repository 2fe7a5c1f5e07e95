"""Root-raised-cosine spectrum, pulse correlations, and aliased spectra.

Everything here is expressed in the frequency domain.  The unit-energy RRC
pulse with roll-off ``beta`` and Nyquist period ``T`` occupies the band
``[-W, W]`` with ``W = (1+beta)/(2T)``.  Signaling at the compressed symbol
period ``zeta*T`` confines the discrete-time picture to the symbol-rate band
``[-1/(2*zeta*T), 1/(2*zeta*T)]``; whenever that band is narrower than the
pulse band, shifted copies of the pulse spectrum alias into it.  The folded
spectrum sums those copies, the twisted folded spectrum subtracts them, and
their ratio measures how much multi-user interference a relative timing
offset can remove.

All integrals are composite-trapezoid sums on uniform grids spanning the
pulse support exactly.  Because the spectrum is compactly supported and
continuously differentiable, the trapezoid sum equals the exact integral up
to aliasing of the pulse autocorrelation at lag (number of panels)/(2W),
which is far below 1e-10 at the default panel count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels

DEFAULT_QUAD_POINTS = 8192

__all__ = [
    "DEFAULT_QUAD_POINTS",
    "PulseParams",
    "FtnConfig",
    "SpectralGrid",
    "CorrTable",
    "rrc_spectrum",
    "rrc_autocorr",
    "cross_corr",
    "folded_spectrum",
    "twisted_folded_spectrum",
    "interference_reducing_spectrum",
    "alias_range",
    "spectrum_quad_nodes",
]


@dataclass(frozen=True)
class PulseParams:
    """Root-raised-cosine pulse: roll-off ``beta`` in [0, 1], period ``T`` > 0."""

    beta: float
    T: float = 1.0

    def __post_init__(self) -> None:
        if not 0.0 <= self.beta <= 1.0:
            raise ValueError(f"roll-off beta must lie in [0, 1], got {self.beta}")
        if not self.T > 0.0:
            raise ValueError(f"symbol period T must be positive, got {self.T}")

    @property
    def bandwidth(self) -> float:
        """One-sided baseband bandwidth W = (1 + beta)/(2T) in Hz."""
        return (1.0 + self.beta) / (2.0 * self.T)


@dataclass(frozen=True)
class FtnConfig:
    """Time-compression factor ``zeta`` in (0, 1]; ``zeta == 1`` is Nyquist rate."""

    zeta: float = 1.0

    def __post_init__(self) -> None:
        if not 0.0 < self.zeta <= 1.0:
            raise ValueError(f"compression factor zeta must lie in (0, 1], got {self.zeta}")

    def symbol_rate(self, pulse: PulseParams) -> float:
        return 1.0 / (self.zeta * pulse.T)

    def band_edge(self, pulse: PulseParams) -> float:
        """Half the symbol rate: edge of the discrete-time frequency band."""
        return 0.5 / (self.zeta * pulse.T)


def _prep(f):
    """Flatten array_like input; remember shape and scalar-ness."""
    arr = np.asarray(f, dtype=float)
    return np.atleast_1d(arr).ravel(), arr.shape, arr.ndim == 0


def _restore(out, shape, scalar):
    return float(out[0]) if scalar else out.reshape(shape)


def rrc_spectrum(f, p: PulseParams):
    """Energy spectral density |H(f)|^2 of the unit-energy RRC pulse.

    Piecewise: flat at T inside ``|f| < (1-beta)/(2T)``, a raised-cosine
    roll-off ``T*cos^2(pi*T/(2*beta) * (|f| - (1-beta)/(2T)))`` on the closed
    interval up to ``W``, and zero beyond.  For ``beta == 0`` the flat branch
    covers the whole closed band (brick wall); no division by beta occurs.
    """
    af, shape, scalar = _prep(f)
    af = np.abs(af)
    T = p.T
    w = p.bandwidth
    out = np.zeros_like(af)
    if p.beta == 0.0:
        out[af <= w] = T
    else:
        f1 = (1.0 - p.beta) / (2.0 * T)
        out[af < f1] = T
        roll = (af >= f1) & (af <= w)
        out[roll] = T * np.cos(np.pi * T / (2.0 * p.beta) * (af[roll] - f1)) ** 2
    return _restore(out, shape, scalar)


def rrc_autocorr(dt, p: PulseParams):
    """Closed-form autocorrelation of the unit-energy RRC pulse.

    This is the raised-cosine impulse response
    ``sinc(dt/T) * cos(pi*beta*dt/T) / (1 - (2*beta*dt/T)^2)``.
    Removable singularities at ``|dt| = T/(2*beta)`` are evaluated as the
    symmetric average of the two values at ``dt -/+ 1e-6*T``, which stays
    within 1e-9 of the analytic limit.  Kept independent of the quadrature
    path so either can validate the other.
    """
    tarr, shape, scalar = _prep(dt)
    u = tarr / p.T
    if p.beta == 0.0:
        return _restore(np.sinc(u), shape, scalar)

    def _regular(uu):
        den = 1.0 - (2.0 * p.beta * uu) ** 2
        return np.sinc(uu) * np.cos(np.pi * p.beta * uu) / den

    den = 1.0 - (2.0 * p.beta * u) ** 2
    sing = np.abs(den) < 4.0 * p.beta * 1e-6
    out = _regular(np.where(sing, 0.0, u))
    if np.any(sing):
        eps = 1e-6
        u0 = np.sign(u[sing]) / (2.0 * p.beta)  # snap to the singular point
        out[sing] = 0.5 * (_regular(u0 - eps) + _regular(u0 + eps))
    return _restore(out, shape, scalar)


def spectrum_quad_nodes(p: PulseParams, quad_points: int = DEFAULT_QUAD_POINTS):
    """Non-negative trapezoid nodes and weights for integrals against |H|^2.

    ``quad_points`` counts panels over the full support [-W, W]; it must be
    even so that f = 0 is a node.  Weights fold the negative frequencies in,
    which is valid for even integrands (all correlations are cosines).
    Returns ``(freqs, sw)`` with ``sw[i] = weight_i * |H(f_i)|^2``.
    """
    if quad_points < 2 or quad_points % 2:
        raise ValueError(f"quad_points must be even and >= 2, got {quad_points}")
    w = p.bandwidth
    h = 2.0 * w / quad_points
    freqs = np.linspace(0.0, w, quad_points // 2 + 1)
    weights = np.full(freqs.shape, 2.0 * h)
    weights[0] = h
    weights[-1] = h
    return freqs, weights * rrc_spectrum(freqs, p)


def _corr_spectral(x: np.ndarray, p: PulseParams, quad_points: int) -> np.ndarray:
    freqs, sw = spectrum_quad_nodes(p, quad_points)
    return _kernels.corr_quad_batch(x, freqs, sw)


def cross_corr(dk, dtau, z: FtnConfig, p: PulseParams, quad_points: int = DEFAULT_QUAD_POINTS):
    """Symbol correlation g[dk, dtau] between pulses offset by dk symbols + dtau.

    Evaluates ``integral of |H(f)|^2 * cos(2*pi*f*(dk*zeta*T + dtau)) df``
    over the pulse support (real by even symmetry).  This spectral quadrature
    is the production path; `rrc_autocorr` provides the independent check.
    """
    x = np.asarray(dk, dtype=float) * (z.zeta * p.T) + np.asarray(dtau, dtype=float)
    xf, shape, scalar = _prep(x)
    out = _corr_spectral(xf, p, quad_points)
    return _restore(out, shape, scalar)


def alias_range(z: FtnConfig, p: PulseParams) -> range:
    """Indices k whose shifted spectrum |H(f - k/(zeta*T))|^2 reaches the band.

    A shift overlaps the symbol-rate band on a set of positive measure iff
    ``k < zeta*(1+beta)/2 + 1/2``.  Boundary touches contribute nothing
    (for beta > 0 the spectrum vanishes at its support edge; for beta = 0
    the touch is a single point), so they are excluded: when
    ``zeta*(1+beta) <= 1`` there is no aliasing and the range is {0}.
    """
    x = z.zeta * (1.0 + p.beta) / 2.0 + 0.5
    k_max = int(math.floor(x - 1e-12))
    return range(-k_max, k_max + 1)


def folded_spectrum(f, z: FtnConfig, p: PulseParams):
    """Sum of all aliased copies of |H|^2 on the symbol-rate band, 0 outside."""
    farr, shape, scalar = _prep(f)
    edge = z.band_edge(p)
    out = np.zeros_like(farr)
    band = np.abs(farr) <= edge * (1.0 + 1e-12)
    shift = 1.0 / (z.zeta * p.T)
    for k in alias_range(z, p):
        out[band] += rrc_spectrum(farr[band] - k * shift, p)
    return _restore(out, shape, scalar)


def twisted_folded_spectrum(f, z: FtnConfig, p: PulseParams):
    """|H(f)|^2 minus all aliased copies on the band, 0 outside.

    The value is returned signed (no clamping); for the RRC family it is
    non-negative on the band because |H|^2 decreases with |f|.
    """
    farr, shape, scalar = _prep(f)
    edge = z.band_edge(p)
    out = np.zeros_like(farr)
    band = np.abs(farr) <= edge * (1.0 + 1e-12)
    out[band] = rrc_spectrum(farr[band], p)
    shift = 1.0 / (z.zeta * p.T)
    for k in alias_range(z, p):
        if k != 0:
            out[band] -= rrc_spectrum(farr[band] - k * shift, p)
    return _restore(out, shape, scalar)


def interference_reducing_spectrum(f, z: FtnConfig, p: PulseParams):
    """Ratio twisted/folded on the band (at most 1), 0 outside the band.

    Where the folded spectrum vanishes inside the band (which happens only
    without aliasing, beyond the pulse support, where twisted == folded == 0),
    the ratio is continued by its limit 1; multiplied by the twisted spectrum
    it contributes nothing either way.
    """
    farr, shape, scalar = _prep(f)
    fo = np.atleast_1d(folded_spectrum(farr, z, p))
    tw = np.atleast_1d(twisted_folded_spectrum(farr, z, p))
    band = np.abs(farr) <= z.band_edge(p) * (1.0 + 1e-12)
    out = np.zeros_like(fo)
    pos = fo > 0.0
    out[pos] = tw[pos] / fo[pos]
    out[band & ~pos] = 1.0
    return _restore(out, shape, scalar)


@dataclass(frozen=True, eq=False)
class SpectralGrid:
    """A spectrum sampled on a symmetric grid over the symbol-rate band."""

    frequencies: np.ndarray
    values: np.ndarray

    _KINDS = ("rrc", "folded", "twisted", "rho")

    @classmethod
    def sample(cls, kind: str, z: FtnConfig, p: PulseParams, n: int = 1025) -> "SpectralGrid":
        if kind not in cls._KINDS:
            raise ValueError(f"kind must be one of {cls._KINDS}, got {kind!r}")
        edge = z.band_edge(p)
        f = np.linspace(-edge, edge, n)
        fn = {
            "rrc": lambda x: rrc_spectrum(x, p),
            "folded": lambda x: folded_spectrum(x, z, p),
            "twisted": lambda x: twisted_folded_spectrum(x, z, p),
            "rho": lambda x: interference_reducing_spectrum(x, z, p),
        }[kind]
        return cls(frequencies=f, values=fn(f))


class CorrTable:
    """Tabulated pulse correlation for Monte Carlo inner loops.

    Samples the spectral-quadrature correlation on a uniform lag grid
    (step T/1024) and answers lookups by cubic interpolation, accurate to
    about 1e-10.  Lookups beyond ``x_max`` raise.
    """

    STEP_DIV = 1024

    def __init__(self, p: PulseParams, x_max: float, quad_points: int = DEFAULT_QUAD_POINTS):
        if x_max <= 0:
            raise ValueError("x_max must be positive")
        self.pulse = p
        h = p.T / self.STEP_DIV
        n_nodes = int(math.ceil(x_max / h)) + 8
        # three nodes below zero so the cubic stencil never clips near x = 0;
        # the correlation is even, so negative lags mirror positive ones
        xs = (np.arange(-3, n_nodes) * h).astype(float)
        self._table = _corr_spectral(np.abs(xs), p, quad_points)
        self._x0 = xs[0]
        self._inv_h = 1.0 / h
        self.x_max = xs[-1] - 2 * h

    def __call__(self, x) -> np.ndarray:
        xarr = np.abs(np.atleast_1d(np.asarray(x, dtype=float)))
        if xarr.size and float(xarr.max()) > self.x_max:
            raise ValueError(
                f"lag {float(xarr.max()):g} outside table domain [0, {self.x_max:g}]"
            )
        out = _kernels.cubic_interp_batch(self._table, self._x0, self._inv_h, xarr.ravel())
        return out.reshape(xarr.shape)
