"""Delay-independent closed forms for the asymptotic per-user rates.

The block rates converge, as the blocklength grows, to band integrals of
``log2(1 + SINR(f))`` where the signal term carries the folded spectrum and
the interference term is bracketed between the twisted folded spectrum
(best case: maximally destructive alias phasing) and the folded spectrum
(worst case: synchronous users).  Everything here is a deterministic
quadrature over the symbol-rate band; no delay realization enters.

Integration uses the same composite-trapezoid discipline as the rest of the
package.  Rate integrands vanish identically outside the pulse support, so
the integration interval is clipped to ``min(band edge, W)``; this keeps the
quadrature exact for flat integrands (Nyquist signaling and brick-wall
pulses) instead of straddling a jump.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .pulse import (
    DEFAULT_QUAD_POINTS,
    FtnConfig,
    PulseParams,
    folded_spectrum,
    interference_reducing_spectrum,
    rrc_spectrum,
    twisted_folded_spectrum,
)
from .rates import Scenario

__all__ = [
    "BoundPair",
    "band_integral",
    "rate_lower_bound",
    "rate_upper_bound",
    "rate_bound_pair",
    "anoma_bounds",
    "merged_rate",
    "sinr_gain",
    "dof_gain",
    "high_snr_ratio",
    "merge_threshold",
]

MERGE_TOL = 1e-12


def merge_threshold(p: PulseParams) -> float:
    """Compression factor below which aliasing disappears: 1/(1+beta)."""
    return 1.0 / (1.0 + p.beta)


def _is_merged(z: FtnConfig, p: PulseParams) -> bool:
    return p.beta == 0.0 or z.zeta <= merge_threshold(p) * (1.0 + MERGE_TOL)


@dataclass(frozen=True)
class BoundPair:
    """Lower/upper spectral-efficiency bounds; ``merged`` when they coincide."""

    lower: float
    upper: float
    merged: bool

    def __post_init__(self) -> None:
        if self.lower > self.upper + 1e-9:
            raise ValueError(f"lower bound {self.lower} exceeds upper {self.upper}")


def _grid(z: FtnConfig, p: PulseParams, quad_points: int, clip: bool) -> np.ndarray:
    edge = z.band_edge(p)
    if clip:
        edge = min(edge, p.bandwidth)
    return np.linspace(-edge, edge, quad_points + 1)


def band_integral(
    integrand,
    z: FtnConfig,
    p: PulseParams,
    quad_points: int = DEFAULT_QUAD_POINTS,
    even: bool = False,
    clip_to_pulse: bool = False,
) -> float:
    """Trapezoid integral of ``integrand(f)`` over the symbol-rate band.

    ``even=True`` declares an even integrand and evaluates only f >= 0.
    ``clip_to_pulse`` restricts to the pulse support when the caller knows
    the integrand vanishes beyond it.  NaNs raise, naming the frequency.
    """
    edge = z.band_edge(p)
    if clip_to_pulse:
        edge = min(edge, p.bandwidth)
    if even:
        half = quad_points // 2
        f = np.linspace(0.0, edge, half + 1)
        vals = np.asarray(integrand(f), dtype=float)
        _reject_nan(vals, f)
        return 2.0 * float(np.trapezoid(vals, f))
    f = np.linspace(-edge, edge, quad_points + 1)
    vals = np.asarray(integrand(f), dtype=float)
    _reject_nan(vals, f)
    return float(np.trapezoid(vals, f))


def _reject_nan(vals: np.ndarray, f: np.ndarray) -> None:
    bad = np.isnan(vals)
    if bad.any():
        raise ValueError(f"integrand is NaN at f = {float(f[bad][0]):g}")


def _powers(s: Scenario) -> np.ndarray:
    return s.energies / (s.ftn.zeta * s.pulse.T)


def _bound_value(s: Scenario, k: int, worst_case: bool, quad_points: int | None) -> float:
    if not 0 <= k < s.n_users:
        raise IndexError(f"user index {k} outside 0..{s.n_users - 1}")
    z, p = s.ftn, s.pulse
    qp = s.quad_points if quad_points is None else quad_points
    f = _grid(z, p, qp, clip=True)
    fo = folded_spectrum(f, z, p)
    gains = s.gains
    powers = _powers(s)
    if worst_case:
        interf_shape = fo
    else:
        tw = twisted_folded_spectrum(f, z, p)
        interf_shape = np.where(fo > 0.0, tw**2 / np.where(fo == 0.0, 1.0, fo), 0.0)
    interference = np.zeros_like(f)
    for l in range(k + 1, s.n_users):
        interference += gains[l] * powers[l] * interf_shape
    signal = gains[k] * powers[k] * fo
    integrand = np.log2(1.0 + signal / (s.noise_psd + interference))
    return float(np.trapezoid(integrand, f) / (2.0 * p.bandwidth))


def rate_lower_bound(s: Scenario, k: int, quad_points: int | None = None) -> float:
    """Worst-case spectral efficiency of user k: interference fully folded."""
    return _bound_value(s, k, worst_case=True, quad_points=quad_points)


def rate_upper_bound(s: Scenario, k: int, quad_points: int | None = None) -> float:
    """Best-case spectral efficiency of user k: alias phasing maximally destructive.

    The interference spectral shape is twisted^2/folded, i.e. the twisted
    folded spectrum scaled by the interference-reducing ratio.
    """
    return _bound_value(s, k, worst_case=False, quad_points=quad_points)


def rate_bound_pair(s: Scenario, k: int, quad_points: int | None = None) -> BoundPair:
    return BoundPair(
        lower=rate_lower_bound(s, k, quad_points),
        upper=rate_upper_bound(s, k, quad_points),
        merged=_is_merged(s.ftn, s.pulse),
    )


def anoma_bounds(s: Scenario, k: int, quad_points: int | None = None) -> BoundPair:
    """Bounds at Nyquist signaling (zeta = 1), where the folded spectrum is flat.

    The lower bound needs no quadrature: a flat folded spectrum turns the
    band integral into the closed form
    ``log2(1 + g_k P_k T / (N0 + sum_l g_l P_l T)) / (2 W T)``, which is the
    rate of a perfectly synchronized system.
    """
    if abs(s.ftn.zeta - 1.0) > 1e-12:
        raise ValueError(f"Nyquist-rate bounds require zeta = 1, got {s.ftn.zeta}")
    if not 0 <= k < s.n_users:
        raise IndexError(f"user index {k} outside 0..{s.n_users - 1}")
    p = s.pulse
    gains = s.gains
    powers = _powers(s)
    interference = sum(gains[l] * powers[l] * p.T for l in range(k + 1, s.n_users))
    lower = np.log2(1.0 + gains[k] * powers[k] * p.T / (s.noise_psd + interference)) / (
        2.0 * p.bandwidth * p.T
    )
    upper = rate_upper_bound(s, k, quad_points)
    return BoundPair(lower=float(lower), upper=upper, merged=p.beta == 0.0)


def synchronous_rate(s: Scenario, k: int) -> float:
    """Closed-form rate of the synchronous Nyquist system with s's powers."""
    p = s.pulse
    gains = s.gains
    powers = _powers(s)
    interference = sum(gains[l] * powers[l] * p.T for l in range(k + 1, s.n_users))
    return float(
        np.log2(1.0 + gains[k] * powers[k] * p.T / (s.noise_psd + interference))
        / (2.0 * p.bandwidth * p.T)
    )


def merged_rate(s: Scenario, k: int, quad_points: int | None = None) -> float:
    """Exact asymptotic rate when signaling fast enough that aliasing vanishes.

    Requires ``zeta <= 1/(1+beta)``; the folded and twisted spectra equal the
    pulse spectrum there, so the bounds coincide and the value is independent
    of the compression factor and of every delay.
    """
    z, p = s.ftn, s.pulse
    if not _is_merged(z, p):
        raise ValueError(
            f"merged rate requires zeta <= 1/(1+beta) = {merge_threshold(p):.6g} "
            f"(or beta = 0), got zeta = {z.zeta}"
        )
    if not 0 <= k < s.n_users:
        raise IndexError(f"user index {k} outside 0..{s.n_users - 1}")
    qp = s.quad_points if quad_points is None else quad_points
    f = np.linspace(-p.bandwidth, p.bandwidth, qp + 1)
    spec = rrc_spectrum(f, p)
    gains = s.gains
    powers = _powers(s)
    interference = np.zeros_like(f)
    for l in range(k + 1, s.n_users):
        interference += gains[l] * powers[l] * spec
    integrand = np.log2(1.0 + gains[k] * powers[k] * spec / (s.noise_psd + interference))
    return float(np.trapezoid(integrand, f) / (2.0 * p.bandwidth))


def sinr_gain(
    s: Scenario,
    k: int = 0,
    quad_points: int | None = None,
    form: str = "pointwise",
) -> float:
    """SINR advantage of asynchronous signaling over synchronous, for user k.

    ``form='pointwise'`` integrates the pointwise ratio of best-case to
    worst-case SINR and normalizes by the band width, so the no-aliasing
    regime gives exactly 1.  ``form='ratio'`` instead takes the ratio of the
    two integrated SINRs.  The two readings differ in general; pointwise is
    the default because it is the form the trade-off analysis manipulates.
    """
    if form not in ("pointwise", "ratio"):
        raise ValueError(f"form must be 'pointwise' or 'ratio', got {form!r}")
    z, p = s.ftn, s.pulse
    qp = s.quad_points if quad_points is None else quad_points
    f = _grid(z, p, qp, clip=False)
    fo = folded_spectrum(f, z, p)
    tw = twisted_folded_spectrum(f, z, p)
    gains = s.gains
    powers = _powers(s)
    n0 = s.noise_psd
    csum = sum(gains[l] * powers[l] for l in range(k + 1, s.n_users))
    if form == "pointwise":
        num = n0 * fo + csum * fo**2
        den = n0 * fo + csum * tw**2
        ratio = np.ones_like(f)
        ok = den > 0.0
        ratio[ok] = num[ok] / den[ok]
        return float(np.trapezoid(ratio, f) * (z.zeta * p.T))
    rho = interference_reducing_spectrum(f, z, p)
    sig = gains[k] * powers[k] * fo
    best = np.where(fo > 0, sig / (n0 + csum * tw * rho), 0.0)
    worst = np.where(fo > 0, sig / (n0 + csum * fo), 0.0)
    return float(np.trapezoid(best, f) / np.trapezoid(worst, f))


def dof_gain(z: FtnConfig, p: PulseParams) -> float:
    """Effective-bandwidth ratio T * min(1/(zeta*T), 2W) over Nyquist signaling."""
    return p.T * min(1.0 / (z.zeta * p.T), 2.0 * p.bandwidth)


def high_snr_ratio(s: Scenario, snr_db, k: int = 0, quad_points: int | None = None) -> np.ndarray:
    """Fast-signaling rate over synchronous Nyquist rate along an SNR sweep.

    SNR here is total received signal power over noise,
    ``sum_l g_l P_l / N0``; the noise level is adjusted to hit each grid
    point while powers stay fixed.  With interference present the ratio
    approaches 2WT = 1 + beta from below as the SNR grows.
    """
    snr_db = np.atleast_1d(np.asarray(snr_db, dtype=float))
    gains = s.gains
    powers = _powers(s)
    total = float(np.sum(gains * powers))
    out = np.empty(snr_db.shape)
    for i, sdb in enumerate(snr_db):
        n0 = total / 10.0 ** (sdb / 10.0)
        sc = s.with_noise(n0)
        out[i] = merged_rate(sc, k, quad_points) / synchronous_rate(sc, k)
    return out
