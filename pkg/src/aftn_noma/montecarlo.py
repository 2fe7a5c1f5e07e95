"""Random scenario generation and the Monte Carlo experiments.

Cell geometry follows the standard annulus drop: users land uniformly over
the area between radii D0 and D1, channels are circularly symmetric complex
Gaussian with variance 1/(1 + d^alpha), and link delays are uniform on
[0, max_delay].  Per-trial RNG streams are derived from (master seed, trial
index), so results are independent of execution order.

Two SNR conventions coexist and are never mixed: instantaneous experiments
fix a gain profile summing to one and set P/N0 directly on the grid;
ergodic experiments calibrate the per-user power from a total-received-SNR
target against the average channel gain of the cell.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import bounds as _bounds
from .pulse import DEFAULT_QUAD_POINTS, CorrTable, FtnConfig, PulseParams
from .rates import ConditionLog, Scenario, UserLink, logdet_diff_spd

__all__ = [
    "CellConfig",
    "TrialDraw",
    "BlockRateEngine",
    "InstantaneousResult",
    "ErgodicResult",
    "RateRegion",
    "TradeoffRow",
    "dbm_to_watts",
    "sample_positions",
    "sample_channel",
    "avg_channel_gain",
    "calibrate_power",
    "draw_trial",
    "instantaneous_experiment",
    "ergodic_experiment",
    "ccdf",
    "rate_region_two_user",
    "tradeoff_sweep",
]

DEGENERATE_GAIN = 1e-300


def dbm_to_watts(dbm: float) -> float:
    return 10.0 ** ((dbm - 30.0) / 10.0)


@dataclass(frozen=True)
class CellConfig:
    """Single-cell drop geometry and power calibration target."""

    d0: float = 50.0
    d1: float = 75.0
    alpha: float = 3.76
    n_users: int = 16
    noise_dbm: float = -80.0
    snr_sum_db: float = 20.0
    max_delay: float = 2.0

    def __post_init__(self) -> None:
        if not 0.0 < self.d0 < self.d1:
            raise ValueError(f"need 0 < d0 < d1, got d0={self.d0}, d1={self.d1}")
        if self.alpha <= 2.0:
            raise ValueError(f"path-loss exponent must exceed 2, got {self.alpha}")
        if self.n_users < 1:
            raise ValueError(f"need at least one user, got {self.n_users}")
        if self.max_delay < 0.0:
            raise ValueError(f"max_delay must be >= 0, got {self.max_delay}")

    @property
    def noise_watts(self) -> float:
        return dbm_to_watts(self.noise_dbm)


@dataclass(frozen=True, eq=False)
class TrialDraw:
    """One random drop: distances, fading coefficients, link delays."""

    distances: np.ndarray
    channels: np.ndarray
    delays: np.ndarray
    rng_stream_id: int
    resamples: int = 0


def sample_positions(cell: CellConfig, count: int, rng: np.random.Generator) -> np.ndarray:
    """Distances of users dropped uniformly over the annulus area.

    The radial density is 2d/(D1^2 - D0^2) on [D0, D1]; inverse-CDF sampling
    gives sqrt(D0^2 + U*(D1^2 - D0^2)).
    """
    u = rng.uniform(0.0, 1.0, size=count)
    return np.sqrt(cell.d0**2 + u * (cell.d1**2 - cell.d0**2))


def sample_channel(distance, alpha: float, rng: np.random.Generator) -> np.ndarray:
    """Circularly symmetric complex Gaussian fading, variance 1/(1 + d^alpha)."""
    d = np.atleast_1d(np.asarray(distance, dtype=float))
    std = np.sqrt(0.5 / (1.0 + d**alpha))
    return (rng.normal(size=d.shape) + 1j * rng.normal(size=d.shape)) * std


def avg_channel_gain(cell: CellConfig, n: int = 20001) -> float:
    """Expected |h|^2 over the annulus drop, by quadrature."""
    d = np.linspace(cell.d0, cell.d1, n)
    density = 2.0 * d / (cell.d1**2 - cell.d0**2)
    return float(np.trapezoid(density / (1.0 + d**cell.alpha), d))


def calibrate_power(cell: CellConfig) -> float:
    """Per-user transmit power (watts) hitting the total received SNR target.

    Total power is snr_sum (linear) * N0 / mean gain, split equally.
    """
    p_max = 10.0 ** (cell.snr_sum_db / 10.0) * cell.noise_watts / avg_channel_gain(cell)
    return p_max / cell.n_users


def draw_trial(
    cell: CellConfig, master_seed: int, index: int, max_resamples: int = 100
) -> TrialDraw:
    """Deterministic trial draw; degenerate all-faded draws are resampled."""
    for resamples in range(max_resamples + 1):
        rng = np.random.default_rng([master_seed, index, resamples])
        dist = sample_positions(cell, cell.n_users, rng)
        ch = sample_channel(dist, cell.alpha, rng)
        delays = rng.uniform(0.0, cell.max_delay, size=cell.n_users)
        if np.any(np.abs(ch) ** 2 >= DEGENERATE_GAIN):
            return TrialDraw(
                distances=dist,
                channels=ch,
                delays=delays,
                rng_stream_id=index,
                resamples=resamples,
            )
    raise RuntimeError(
        f"trial {index}: all channel gains below {DEGENERATE_GAIN:g} after "
        f"{max_resamples} resamples; check the cell geometry and path loss"
    )


class BlockRateEngine:
    """Reusable block-rate evaluator for one (pulse, zeta, blocklength).

    Caches the self-Gram and its square, and assembles the interference
    covariances from a tabulated correlation so that sweeping SNR or
    averaging over delay draws only pays for matrix sums and
    eigendecompositions.
    """

    def __init__(self, p: PulseParams, z: FtnConfig, n_symbols: int, corr: CorrTable):
        import scipy.linalg

        self.pulse = p
        self.ftn = z
        self.n_symbols = n_symbols
        self.corr = corr
        step = z.zeta * p.T
        lags = np.arange(n_symbols, dtype=float) * step
        self._toeplitz = scipy.linalg.toeplitz
        vals = corr(lags)
        self.g_self = self._toeplitz(vals, vals)
        self.t_self = self.g_self @ self.g_self.T
        self._step = step

    def coupling(self, delta_tau: float) -> np.ndarray:
        n = self.n_symbols
        lags = np.arange(n, dtype=float) * self._step
        x = np.concatenate([-lags, lags]) + delta_tau
        v = self.corr(x)
        return self._toeplitz(v[:n], v[n:])

    def products(self, delays: np.ndarray) -> dict:
        """Interference products G_lk G_lk^T for every pair l > k."""
        k_users = delays.shape[0]
        out = {}
        for k in range(k_users):
            for l in range(k + 1, k_users):
                g = self.coupling(delays[l] - delays[k])
                out[(l, k)] = g @ g.T
        return out

    def mutual_information(
        self,
        gains: np.ndarray,
        es_over_n0: np.ndarray,
        products: dict,
        cond: ConditionLog | None = None,
    ) -> np.ndarray:
        """Per-user block MI in bits for users in decode order."""
        k_users = gains.shape[0]
        out = np.empty(k_users)
        for k in range(k_users):
            b_mat = self.g_self
            for l in range(k + 1, k_users):
                b_mat = b_mat + (gains[l] * es_over_n0[l]) * products[(l, k)]
            a_mat = b_mat + (gains[k] * es_over_n0[k]) * self.t_self
            diff = logdet_diff_spd(a_mat, b_mat, cond=cond, name=f"covariance for user {k}")
            mi = 0.5 * diff / np.log(2.0)
            if mi < 0.0 and cond is not None:
                cond.clamped_rates += 1
            out[k] = max(mi, 0.0)
        return out

    def normalization(self) -> float:
        """Frame seconds times bandwidth, for bits -> bits/s/Hz."""
        return self.n_symbols * self._step * self.pulse.bandwidth


def _corr_table_for(p: PulseParams, n_symbols: int, max_delay: float, quad_points: int) -> CorrTable:
    x_max = (n_symbols - 1) * p.T + max_delay + 4.0 * p.T
    return CorrTable(p, x_max, quad_points)


@dataclass(frozen=True, eq=False)
class InstantaneousResult:
    """Delay-averaged exact rates with bounds, on a received-SNR grid."""

    snr_db: np.ndarray
    per_user_mean: np.ndarray
    per_user_se: np.ndarray
    sum_mean: np.ndarray
    sum_se: np.ndarray
    sum_zero_delay: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    sync_per_user: np.ndarray
    sync_sum: np.ndarray
    n_draws: int


def _profile_users(profile: np.ndarray, symbol_energy: float) -> tuple:
    return tuple(
        UserLink(h=complex(np.sqrt(g)), delay=0.0, symbol_energy=symbol_energy)
        for g in profile
    )


def instantaneous_experiment(
    profile,
    beta: float,
    zeta: float,
    snr_db,
    n_draws: int = 200,
    seed: int = 1,
    n_symbols: int = 100,
    max_delay: float | None = None,
    T: float = 1.0,
    quad_points: int = DEFAULT_QUAD_POINTS,
    cond: ConditionLog | None = None,
) -> InstantaneousResult:
    """Exact rates for a fixed gain profile, averaged over random link delays.

    The SNR grid is total received power over noise, sum_k g_k P_k / N0;
    with the customary unit-sum profile and equal powers this is just P/N0.
    Per-SNR delay-independent lower/upper bounds and the synchronous
    closed form are evaluated on the same grid.
    """
    profile = np.asarray(profile, dtype=float)
    if np.any(profile <= 0.0):
        raise ValueError("gain profile entries must be positive")
    order = np.argsort(-profile, kind="stable")
    profile = profile[order]
    snr_db = np.atleast_1d(np.asarray(snr_db, dtype=float))
    p = PulseParams(beta=beta, T=T)
    z = FtnConfig(zeta=zeta)
    delay_cap = 2.0 * p.T if max_delay is None else max_delay
    table = _corr_table_for(p, n_symbols, delay_cap, quad_points)
    engine = BlockRateEngine(p, z, n_symbols, table)

    k_users = profile.shape[0]
    n_snr = snr_db.shape[0]
    gsum = float(profile.sum())
    # P/N0 per SNR point with N0 = 1
    p_over_n0 = 10.0 ** (snr_db / 10.0) / gsum
    es_over_n0 = p_over_n0 * z.zeta * p.T

    rates = np.empty((n_draws, n_snr, k_users))
    norm = engine.normalization()
    rng_delays = [
        np.random.default_rng([seed, d]).uniform(0.0, delay_cap, size=k_users)
        for d in range(n_draws)
    ]
    for d in range(n_draws):
        products = engine.products(rng_delays[d])
        for i in range(n_snr):
            es = np.full(k_users, es_over_n0[i])
            rates[d, i] = engine.mutual_information(profile, es, products, cond) / norm

    zero_products = engine.products(np.zeros(k_users))
    sum_zero = np.empty(n_snr)
    for i in range(n_snr):
        es = np.full(k_users, es_over_n0[i])
        sum_zero[i] = engine.mutual_information(profile, es, zero_products, cond).sum() / norm

    lower = np.empty((n_snr, k_users))
    upper = np.empty((n_snr, k_users))
    sync = np.empty((n_snr, k_users))
    for i in range(n_snr):
        users = _profile_users(profile, float(es_over_n0[i]))
        scen = Scenario(
            users=users,
            n_symbols=n_symbols,
            noise_psd=1.0,
            ftn=z,
            pulse=p,
            max_delay=delay_cap,
            quad_points=quad_points,
        )
        for k in range(k_users):
            lower[i, k] = _bounds.rate_lower_bound(scen, k)
            upper[i, k] = _bounds.rate_upper_bound(scen, k)
            sync[i, k] = _bounds.synchronous_rate(scen, k)

    per_user_mean = rates.mean(axis=0)
    per_user_se = rates.std(axis=0, ddof=1) / np.sqrt(n_draws) if n_draws > 1 else np.zeros_like(per_user_mean)
    sums = rates.sum(axis=2)
    return InstantaneousResult(
        snr_db=snr_db,
        per_user_mean=per_user_mean,
        per_user_se=per_user_se,
        sum_mean=sums.mean(axis=0),
        sum_se=sums.std(axis=0, ddof=1) / np.sqrt(n_draws) if n_draws > 1 else np.zeros(n_snr),
        sum_zero_delay=sum_zero,
        lower=lower,
        upper=upper,
        sync_per_user=sync,
        sync_sum=sync.sum(axis=1),
        n_draws=n_draws,
    )


@dataclass(frozen=True, eq=False)
class ErgodicResult:
    """Per-trial sum rates and per-user rates for the three schemes."""

    sum_rates: dict
    per_user_rates: dict
    resampled_trials: int
    power_per_user: float
    avg_gain: float
    n_trials: int

    def mean_sum(self, scheme: str) -> float:
        return float(self.sum_rates[scheme].mean())

    def se_sum(self, scheme: str) -> float:
        x = self.sum_rates[scheme]
        return float(x.std(ddof=1) / np.sqrt(x.shape[0]))


SCHEMES = ("noma", "anoma", "aftn")


def ergodic_experiment(
    cell: CellConfig,
    beta: float = 0.3,
    zeta_ftn: float = 0.75,
    trials: int = 2000,
    seed: int = 1,
    n_symbols: int = 100,
    T: float = 1.0,
    quad_points: int = DEFAULT_QUAD_POINTS,
    cond: ConditionLog | None = None,
) -> ErgodicResult:
    """Ergodic rates over random drops for NOMA / aNOMA / aFTN-NOMA.

    All three schemes share each trial's positions, fading, and delay draw;
    the synchronous benchmark zeroes the delays, the Nyquist asynchronous
    scheme keeps them at zeta = 1, and the fast-signaling scheme uses
    ``zeta_ftn``.  Equal per-user power from `calibrate_power`; symbol energy
    scales with the symbol period so transmit power matches across schemes.
    """
    if trials < 1:
        raise ValueError(f"need at least one trial, got {trials}")
    p = PulseParams(beta=beta, T=T)
    power = calibrate_power(cell)
    n0 = cell.noise_watts
    table = _corr_table_for(p, n_symbols, cell.max_delay, quad_points)
    nyquist_engine = BlockRateEngine(p, FtnConfig(1.0), n_symbols, table)
    engines = {
        "noma": nyquist_engine,
        "anoma": nyquist_engine,
        "aftn": BlockRateEngine(p, FtnConfig(zeta_ftn), n_symbols, table),
    }
    k_users = cell.n_users
    sums = {s: np.empty(trials) for s in SCHEMES}
    per_user = {s: np.empty((trials, k_users)) for s in SCHEMES}
    resampled = 0
    # synchronous products never change across trials
    noma_products = nyquist_engine.products(np.zeros(k_users))

    for t in range(trials):
        draw = draw_trial(cell, seed, t)
        resampled += draw.resamples
        gains = np.abs(draw.channels) ** 2
        order = np.argsort(-gains, kind="stable")
        gains = gains[order]
        delays = draw.delays[order]
        for scheme in SCHEMES:
            eng = engines[scheme]
            zeta = eng.ftn.zeta
            es_over_n0 = np.full(k_users, power * zeta * p.T / n0)
            products = noma_products if scheme == "noma" else eng.products(delays)
            mi = eng.mutual_information(gains, es_over_n0, products, cond)
            rates = mi / eng.normalization()
            per_user[scheme][t] = rates
            sums[scheme][t] = rates.sum()

    return ErgodicResult(
        sum_rates=sums,
        per_user_rates=per_user,
        resampled_trials=resampled,
        power_per_user=power,
        avg_gain=avg_channel_gain(cell),
        n_trials=trials,
    )


def ccdf(samples, grid) -> np.ndarray:
    """Complementary CDF: fraction of samples strictly above each grid point."""
    s = np.sort(np.asarray(samples, dtype=float).ravel())
    if s.size == 0:
        raise ValueError("need at least one sample")
    g = np.atleast_1d(np.asarray(grid, dtype=float))
    return 1.0 - np.searchsorted(s, g, side="right") / s.size


@dataclass(frozen=True, eq=False)
class RateRegion:
    """Two-user rate region boundary: corners plus time-sharing segment."""

    solo: np.ndarray
    corner_01: np.ndarray
    corner_10: np.ndarray

    @property
    def polyline(self) -> np.ndarray:
        return np.array(
            [
                [0.0, self.solo[1]],
                [self.corner_01[0], self.corner_01[1]],
                [self.corner_10[0], self.corner_10[1]],
                [self.solo[0], 0.0],
            ]
        )


def rate_region_two_user(
    gains,
    snr_db: float,
    beta: float,
    zeta: float,
    n_draws: int = 200,
    seed: int = 1,
    n_symbols: int = 100,
    synchronous: bool = False,
    max_delay: float | None = None,
    T: float = 1.0,
    quad_points: int = DEFAULT_QUAD_POINTS,
) -> RateRegion:
    """Achievable region for two users at per-user received SNR ``snr_db``.

    Each decode order gives one corner: the first-decoded user's rate is
    delay-averaged, the second-decoded user is interference-free after
    cancellation so its rate is the single-user rate.  The region boundary
    connects the corners with the time-sharing segment.
    """
    gains = np.asarray(gains, dtype=float)
    if gains.shape != (2,):
        raise ValueError("rate region is defined for exactly two users")
    p = PulseParams(beta=beta, T=T)
    z = FtnConfig(zeta=zeta)
    delay_cap = 2.0 * p.T if max_delay is None else max_delay
    table = _corr_table_for(p, n_symbols, delay_cap, quad_points)
    engine = BlockRateEngine(p, z, n_symbols, table)
    norm = engine.normalization()
    # per-user received SNR g_k P / N0 = snr for both users, N0 = 1
    es_over_n0 = 10.0 ** (snr_db / 10.0) * z.zeta * p.T / gains

    def solo_rate(k: int) -> float:
        prod = engine.products(np.zeros(1))
        mi = engine.mutual_information(gains[[k]], es_over_n0[[k]], prod)
        return float(mi[0] / norm)

    solo = np.array([solo_rate(0), solo_rate(1)])

    draws = 1 if synchronous else n_draws
    first_rates = np.zeros((draws, 2))  # decode-first rate per order
    for d in range(draws):
        if synchronous:
            delays = np.zeros(2)
        else:
            delays = np.random.default_rng([seed, d]).uniform(0.0, delay_cap, size=2)
        for first in (0, 1):
            idx = [first, 1 - first]
            prod = engine.products(delays[idx])
            mi = engine.mutual_information(gains[idx], es_over_n0[idx], prod)
            first_rates[d, first] = mi[0] / norm

    mean_first = first_rates.mean(axis=0)
    return RateRegion(
        solo=solo,
        corner_01=np.array([mean_first[0], solo[1]]),
        corner_10=np.array([solo[0], mean_first[1]]),
    )


@dataclass(frozen=True)
class TradeoffRow:
    zeta: float
    sinr_gain: float
    dof_gain: float


def tradeoff_sweep(
    profile,
    beta: float,
    zeta_grid,
    snr_db: float = 20.0,
    k: int = 0,
    T: float = 1.0,
    quad_points: int = DEFAULT_QUAD_POINTS,
) -> list:
    """SINR gain and DoF gain across compression factors, for user ``k``."""
    profile = np.asarray(profile, dtype=float)
    order = np.argsort(-profile, kind="stable")
    profile = profile[order]
    p = PulseParams(beta=beta, T=T)
    rows = []
    for zeta in np.atleast_1d(np.asarray(zeta_grid, dtype=float)):
        z = FtnConfig(zeta=float(zeta))
        es = 10.0 ** (snr_db / 10.0) / profile.sum() * z.zeta * p.T
        scen = Scenario(
            users=_profile_users(profile, float(es)),
            n_symbols=1,
            noise_psd=1.0,
            ftn=z,
            pulse=p,
            quad_points=quad_points,
        )
        rows.append(
            TradeoffRow(
                zeta=float(zeta),
                sinr_gain=_bounds.sinr_gain(scen, k=k),
                dof_gain=_bounds.dof_gain(z, p),
            )
        )
    return rows
