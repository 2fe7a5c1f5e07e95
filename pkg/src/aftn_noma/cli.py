"""JSON-configured experiment runner emitting CSV datasets with JSON sidecars.

Configs are strict: unknown keys are rejected and every value is validated
with the offending path named.  Each run writes one CSV (12 significant
digits) and one sidecar recording the fully resolved configuration, seed,
package version, wall time, and numerical-condition counters, so every row
is reproducible from its sidecar alone.  Files are written to a temporary
name and renamed into place; on failure partial outputs are removed.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import time
from dataclasses import dataclass, field

import numpy as np

from . import __version__, _kernels, bounds, montecarlo
from .montecarlo import CellConfig
from .pulse import FtnConfig, PulseParams, SpectralGrid
from .rates import ConditionLog, Scenario, UserLink

EXPERIMENTS = (
    "spectrum",
    "rate-exact",
    "rate-bounds",
    "tradeoff",
    "rate-region",
    "ergodic",
    "ccdf",
)

SIDECAR_SCHEMA_VERSION = 1


class ConfigError(ValueError):
    """Invalid experiment configuration; message names the offending path."""


# ---------------------------------------------------------------------------
# config validation
# ---------------------------------------------------------------------------


def _type_name(v) -> str:
    return type(v).__name__


def _number(path: str, v, lo=None, hi=None, lo_open=False) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{path}: expected a number, got {_type_name(v)}")
    x = float(v)
    if lo is not None and (x <= lo if lo_open else x < lo):
        raise ConfigError(f"{path}: value {x:g} below allowed range")
    if hi is not None and x > hi:
        raise ConfigError(f"{path}: value {x:g} above allowed range")
    return x


def _integer(path: str, v, lo=None) -> int:
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigError(f"{path}: expected an integer, got {_type_name(v)}")
    if lo is not None and v < lo:
        raise ConfigError(f"{path}: value {v} below minimum {lo}")
    return v


def _number_list(path: str, v, lo=None, hi=None, lo_open=False) -> tuple:
    seq = v if isinstance(v, list) else [v]
    if not seq:
        raise ConfigError(f"{path}: list must not be empty")
    return tuple(_number(f"{path}[{i}]", x, lo, hi, lo_open) for i, x in enumerate(seq))


def _integer_list(path: str, v, lo=None) -> tuple:
    seq = v if isinstance(v, list) else [v]
    if not seq:
        raise ConfigError(f"{path}: list must not be empty")
    return tuple(_integer(f"{path}[{i}]", x, lo) for i, x in enumerate(seq))


def _subdict(raw: dict, key: str, allowed) -> dict:
    sub = raw.get(key, {})
    if not isinstance(sub, dict):
        raise ConfigError(f"{key}: expected an object")
    for k in sub:
        if k not in allowed:
            raise ConfigError(f"{key}.{k}: unknown key")
    return sub


@dataclass(frozen=True)
class ExperimentConfig:
    """Fully resolved experiment description."""

    experiment: str
    pulse: PulseParams
    ftn: FtnConfig
    h2_profile: tuple
    n_symbols: int
    max_delay: float
    cell_d0: float
    cell_d1: tuple
    cell_alpha: float
    cell_n_users: tuple
    cell_noise_dbm: float
    cell_snr_sum_db: tuple
    snr_grid_db: tuple
    snr_db: float
    trials: int
    delay_draws: int
    seed: int
    quad_points: int
    zeta_grid: tuple
    rate_grid_points: int
    sinr_user: int
    resolved: dict = field(repr=False, default_factory=dict)

    def cells(self):
        """CellConfig per (n_users, d1, snr_sum) combination, in config order."""
        for k in self.cell_n_users:
            for d1 in self.cell_d1:
                for snr in self.cell_snr_sum_db:
                    yield CellConfig(
                        d0=self.cell_d0,
                        d1=d1,
                        alpha=self.cell_alpha,
                        n_users=k,
                        noise_dbm=self.cell_noise_dbm,
                        snr_sum_db=snr,
                        max_delay=self.max_delay,
                    )


_TOP_KEYS = (
    "experiment",
    "pulse",
    "ftn",
    "scenario",
    "cell",
    "snr_grid_db",
    "snr_db",
    "trials",
    "delay_draws",
    "seed",
    "quad_points",
    "zeta_grid",
    "rate_grid_points",
    "sinr_user",
)


def parse_config(data) -> ExperimentConfig:
    """Parse and validate a JSON config (bytes, str, or already-loaded dict).

    Omitted fields fall back to the standard single-cell defaults: block
    length 100, T = 1, maximum delay 2T, path-loss exponent 3.76, noise
    level -80 dBm.
    """
    if isinstance(data, (bytes, bytearray)):
        try:
            data = data.decode("utf-8")
        except UnicodeDecodeError as err:
            raise ConfigError(f"config is not UTF-8: {err}") from err
    if isinstance(data, str):
        try:
            data = json.loads(data)
        except json.JSONDecodeError as err:
            raise ConfigError(f"config is not valid JSON: {err}") from err
    if not isinstance(data, dict):
        raise ConfigError(f"config root must be an object, got {_type_name(data)}")
    for k in data:
        if k not in _TOP_KEYS:
            raise ConfigError(f"{k}: unknown key")

    experiment = data.get("experiment", "rate-bounds")
    if experiment not in EXPERIMENTS:
        raise ConfigError(
            f"experiment: {experiment!r} is not one of {', '.join(EXPERIMENTS)}"
        )

    p_raw = _subdict(data, "pulse", ("beta", "T"))
    beta = _number("pulse.beta", p_raw.get("beta", 0.3), lo=0.0, hi=1.0)
    t_sym = _number("pulse.T", p_raw.get("T", 1.0), lo=0.0, lo_open=True)
    pulse = PulseParams(beta=beta, T=t_sym)

    f_raw = _subdict(data, "ftn", ("zeta",))
    zeta = _number("ftn.zeta", f_raw.get("zeta", 1.0), lo=0.0, hi=1.0, lo_open=True)
    ftn = FtnConfig(zeta=zeta)

    s_raw = _subdict(data, "scenario", ("h2_profile", "n_symbols", "max_delay"))
    profile = _number_list(
        "scenario.h2_profile", s_raw.get("h2_profile", [0.5, 0.4, 0.1]), lo=0.0, lo_open=True
    )
    n_symbols = _integer("scenario.n_symbols", s_raw.get("n_symbols", 100), lo=1)
    max_delay = _number(
        "scenario.max_delay", s_raw.get("max_delay", 2.0 * pulse.T), lo=0.0
    )

    c_raw = _subdict(
        data, "cell", ("d0", "d1", "alpha", "n_users", "noise_dbm", "snr_sum_db")
    )
    d0 = _number("cell.d0", c_raw.get("d0", 50.0), lo=0.0, lo_open=True)
    d1 = _number_list("cell.d1", c_raw.get("d1", 75.0), lo=0.0, lo_open=True)
    if any(v <= d0 for v in d1):
        raise ConfigError(f"cell.d1: outer radius must exceed d0 = {d0:g}")
    alpha = _number("cell.alpha", c_raw.get("alpha", 3.76))
    if alpha <= 2.0:
        raise ConfigError(f"cell.alpha: path-loss exponent must exceed 2, got {alpha:g}")
    cell_users = _integer_list("cell.n_users", c_raw.get("n_users", 16), lo=1)
    noise_dbm = _number("cell.noise_dbm", c_raw.get("noise_dbm", -80.0))
    snr_sum = _number_list("cell.snr_sum_db", c_raw.get("snr_sum_db", 20.0))

    grid_raw = data.get("snr_grid_db", {"start": 0.0, "stop": 30.0, "num": 31})
    if isinstance(grid_raw, dict):
        for k in grid_raw:
            if k not in ("start", "stop", "num"):
                raise ConfigError(f"snr_grid_db.{k}: unknown key")
        start = _number("snr_grid_db.start", grid_raw.get("start", 0.0))
        stop = _number("snr_grid_db.stop", grid_raw.get("stop", 30.0))
        num = _integer("snr_grid_db.num", grid_raw.get("num", 31), lo=2)
        if stop <= start:
            raise ConfigError("snr_grid_db.stop: must exceed start")
        snr_grid = tuple(np.linspace(start, stop, num).tolist())
    else:
        snr_grid = _number_list("snr_grid_db", grid_raw)

    snr_db = _number("snr_db", data.get("snr_db", 10.0))
    trials = _integer("trials", data.get("trials", 2000), lo=1)
    delay_draws = _integer("delay_draws", data.get("delay_draws", 200), lo=1)
    seed = _integer("seed", data.get("seed", 1), lo=0)
    quad_points = _integer("quad_points", data.get("quad_points", 8192), lo=2)
    if quad_points % 2:
        raise ConfigError(f"quad_points: must be even, got {quad_points}")
    zeta_grid = _number_list(
        "zeta_grid", data.get("zeta_grid", [1.0, 0.9, 0.8, 2.0 / 3.0]),
        lo=0.0, hi=1.0, lo_open=True,
    )
    rate_grid_points = _integer("rate_grid_points", data.get("rate_grid_points", 41), lo=2)
    sinr_user = _integer("sinr_user", data.get("sinr_user", 0), lo=0)

    cfg = ExperimentConfig(
        experiment=experiment,
        pulse=pulse,
        ftn=ftn,
        h2_profile=profile,
        n_symbols=n_symbols,
        max_delay=max_delay,
        cell_d0=d0,
        cell_d1=d1,
        cell_alpha=alpha,
        cell_n_users=cell_users,
        cell_noise_dbm=noise_dbm,
        cell_snr_sum_db=snr_sum,
        snr_grid_db=snr_grid,
        snr_db=snr_db,
        trials=trials,
        delay_draws=delay_draws,
        seed=seed,
        quad_points=quad_points,
        zeta_grid=zeta_grid,
        rate_grid_points=rate_grid_points,
        sinr_user=sinr_user,
    )
    cfg.resolved.update(_resolved_dict(cfg))
    return cfg


def _resolved_dict(cfg: ExperimentConfig) -> dict:
    return {
        "experiment": cfg.experiment,
        "pulse": {"beta": cfg.pulse.beta, "T": cfg.pulse.T},
        "ftn": {"zeta": cfg.ftn.zeta},
        "scenario": {
            "h2_profile": list(cfg.h2_profile),
            "n_symbols": cfg.n_symbols,
            "max_delay": cfg.max_delay,
        },
        "cell": {
            "d0": cfg.cell_d0,
            "d1": list(cfg.cell_d1),
            "alpha": cfg.cell_alpha,
            "n_users": list(cfg.cell_n_users),
            "noise_dbm": cfg.cell_noise_dbm,
            "snr_sum_db": list(cfg.cell_snr_sum_db),
        },
        "snr_grid_db": list(cfg.snr_grid_db),
        "snr_db": cfg.snr_db,
        "trials": cfg.trials,
        "delay_draws": cfg.delay_draws,
        "seed": cfg.seed,
        "quad_points": cfg.quad_points,
        "zeta_grid": list(cfg.zeta_grid),
        "rate_grid_points": cfg.rate_grid_points,
        "sinr_user": cfg.sinr_user,
    }


# ---------------------------------------------------------------------------
# experiment dispatch
# ---------------------------------------------------------------------------


def _fmt(x) -> str:
    if isinstance(x, float):
        return f"{x:.12g}"
    return str(x)


def _run_spectrum(cfg: ExperimentConfig, cond: ConditionLog):
    n = 1025
    grids = {
        kind: SpectralGrid.sample(kind, cfg.ftn, cfg.pulse, n)
        for kind in ("rrc", "folded", "twisted", "rho")
    }
    f = grids["rrc"].frequencies
    header = ["f_hz", "rrc", "folded", "twisted", "rho"]
    rows = [
        [f[i]] + [grids[k].values[i] for k in ("rrc", "folded", "twisted", "rho")]
        for i in range(n)
    ]
    return header, rows


def _profile_scenario(cfg: ExperimentConfig, es_over_n0: float) -> Scenario:
    profile = np.sort(np.asarray(cfg.h2_profile))[::-1]
    users = tuple(
        UserLink(h=complex(np.sqrt(g)), symbol_energy=es_over_n0) for g in profile
    )
    return Scenario(
        users=users,
        n_symbols=cfg.n_symbols,
        noise_psd=1.0,
        ftn=cfg.ftn,
        pulse=cfg.pulse,
        max_delay=cfg.max_delay,
        quad_points=cfg.quad_points,
    )


def _run_rate_bounds(cfg: ExperimentConfig, cond: ConditionLog):
    k_users = len(cfg.h2_profile)
    gsum = sum(cfg.h2_profile)
    header = ["snr_db"]
    for k in range(k_users):
        header += [f"lower_user{k + 1}", f"upper_user{k + 1}", f"sync_user{k + 1}"]
    header += ["lower_sum", "upper_sum", "sync_sum"]
    rows = []
    for sdb in cfg.snr_grid_db:
        es = 10.0 ** (sdb / 10.0) / gsum * cfg.ftn.zeta * cfg.pulse.T
        scen = _profile_scenario(cfg, es)
        row = [sdb]
        lo_sum = up_sum = sy_sum = 0.0
        for k in range(k_users):
            lo = bounds.rate_lower_bound(scen, k)
            up = bounds.rate_upper_bound(scen, k)
            sy = bounds.synchronous_rate(scen, k)
            row += [lo, up, sy]
            lo_sum += lo
            up_sum += up
            sy_sum += sy
        row += [lo_sum, up_sum, sy_sum]
        rows.append(row)
    return header, rows


def _run_rate_exact(cfg: ExperimentConfig, cond: ConditionLog):
    res = montecarlo.instantaneous_experiment(
        profile=cfg.h2_profile,
        beta=cfg.pulse.beta,
        zeta=cfg.ftn.zeta,
        snr_db=np.asarray(cfg.snr_grid_db),
        n_draws=cfg.delay_draws,
        seed=cfg.seed,
        n_symbols=cfg.n_symbols,
        max_delay=cfg.max_delay,
        T=cfg.pulse.T,
        quad_points=cfg.quad_points,
        cond=cond,
    )
    k_users = len(cfg.h2_profile)
    header = ["snr_db"]
    for k in range(k_users):
        header += [
            f"rate_user{k + 1}",
            f"se_user{k + 1}",
            f"lower_user{k + 1}",
            f"upper_user{k + 1}",
            f"sync_user{k + 1}",
        ]
    header += ["sum_rate", "sum_se", "sum_zero_delay", "sum_sync"]
    rows = []
    for i, sdb in enumerate(res.snr_db):
        row = [float(sdb)]
        for k in range(k_users):
            row += [
                res.per_user_mean[i, k],
                res.per_user_se[i, k],
                res.lower[i, k],
                res.upper[i, k],
                res.sync_per_user[i, k],
            ]
        row += [
            res.sum_mean[i],
            res.sum_se[i],
            res.sum_zero_delay[i],
            res.sync_sum[i],
        ]
        rows.append(row)
    return header, rows


def _run_tradeoff(cfg: ExperimentConfig, cond: ConditionLog):
    rows_in = montecarlo.tradeoff_sweep(
        profile=cfg.h2_profile,
        beta=cfg.pulse.beta,
        zeta_grid=cfg.zeta_grid,
        snr_db=cfg.snr_db,
        k=cfg.sinr_user,
        T=cfg.pulse.T,
        quad_points=cfg.quad_points,
    )
    header = ["zeta", "sinr_gain", "dof_gain"]
    return header, [[r.zeta, r.sinr_gain, r.dof_gain] for r in rows_in]


def _run_rate_region(cfg: ExperimentConfig, cond: ConditionLog):
    if len(cfg.h2_profile) != 2:
        raise ConfigError("scenario.h2_profile: rate-region needs exactly two users")
    header = ["scheme", "vertex", "rate_user1", "rate_user2"]
    rows = []
    schemes = (
        ("noma", 1.0, True),
        ("anoma", 1.0, False),
        ("aftn", cfg.ftn.zeta, False),
    )
    for name, zeta, synchronous in schemes:
        region = montecarlo.rate_region_two_user(
            gains=cfg.h2_profile,
            snr_db=cfg.snr_db,
            beta=cfg.pulse.beta,
            zeta=zeta,
            n_draws=cfg.delay_draws,
            seed=cfg.seed,
            n_symbols=cfg.n_symbols,
            synchronous=synchronous,
            max_delay=cfg.max_delay,
            T=cfg.pulse.T,
            quad_points=cfg.quad_points,
        )
        for i, (r1, r2) in enumerate(region.polyline):
            rows.append([name, i, float(r1), float(r2)])
    return header, rows


def _run_ergodic(cfg: ExperimentConfig, cond: ConditionLog):
    header = [
        "n_users",
        "d1",
        "snr_sum_db",
        "mean_noma",
        "se_noma",
        "mean_anoma",
        "se_anoma",
        "mean_aftn",
        "se_aftn",
        "trials",
        "resampled",
    ]
    rows = []
    for cell in cfg.cells():
        res = montecarlo.ergodic_experiment(
            cell,
            beta=cfg.pulse.beta,
            zeta_ftn=cfg.ftn.zeta,
            trials=cfg.trials,
            seed=cfg.seed,
            n_symbols=cfg.n_symbols,
            T=cfg.pulse.T,
            quad_points=cfg.quad_points,
            cond=cond,
        )
        rows.append(
            [
                cell.n_users,
                cell.d1,
                cell.snr_sum_db,
                res.mean_sum("noma"),
                res.se_sum("noma"),
                res.mean_sum("anoma"),
                res.se_sum("anoma"),
                res.mean_sum("aftn"),
                res.se_sum("aftn"),
                res.n_trials,
                res.resampled_trials,
            ]
        )
    return header, rows


def _run_ccdf(cfg: ExperimentConfig, cond: ConditionLog):
    cells = list(cfg.cells())
    if len(cells) != 1:
        raise ConfigError("cell: ccdf expects scalar n_users, d1, and snr_sum_db")
    cell = cells[0]
    res = montecarlo.ergodic_experiment(
        cell,
        beta=cfg.pulse.beta,
        zeta_ftn=cfg.ftn.zeta,
        trials=cfg.trials,
        seed=cfg.seed,
        n_symbols=cfg.n_symbols,
        T=cfg.pulse.T,
        quad_points=cfg.quad_points,
        cond=cond,
    )
    picks = {"strongest": 0, "moderate": cell.n_users // 2, "weakest": cell.n_users - 1}
    all_rates = np.concatenate(
        [res.per_user_rates[s][:, list(picks.values())].ravel() for s in montecarlo.SCHEMES]
    )
    grid = np.linspace(0.0, float(all_rates.max()) * 1.02 + 1e-12, cfg.rate_grid_points)
    header = ["rate"]
    cols = []
    for scheme in montecarlo.SCHEMES:
        for label, idx in picks.items():
            header.append(f"ccdf_{scheme}_{label}")
            cols.append(montecarlo.ccdf(res.per_user_rates[scheme][:, idx], grid))
    rows = [[grid[i]] + [c[i] for c in cols] for i in range(grid.shape[0])]
    return header, rows


_RUNNERS = {
    "spectrum": _run_spectrum,
    "rate-bounds": _run_rate_bounds,
    "rate-exact": _run_rate_exact,
    "tradeoff": _run_tradeoff,
    "rate-region": _run_rate_region,
    "ergodic": _run_ergodic,
    "ccdf": _run_ccdf,
}


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------


def _atomic_write(path: str, payload: str) -> None:
    tmp = f"{path}.tmp-{os.getpid()}"
    try:
        with open(tmp, "w", encoding="utf-8", newline="") as fh:
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def run(cfg: ExperimentConfig, out_dir: str = ".") -> dict:
    """Execute one experiment; returns paths and summary metadata.

    Writes ``<experiment>.csv`` and ``<experiment>.json`` into ``out_dir``.
    On any failure the partially written files are removed and the exception
    propagates.
    """
    os.makedirs(out_dir, exist_ok=True)
    base = os.path.join(out_dir, cfg.experiment)
    csv_path = f"{base}.csv"
    json_path = f"{base}.json"
    cond = ConditionLog()
    written = []
    t0 = time.perf_counter()
    try:
        header, rows = _RUNNERS[cfg.experiment](cfg, cond)
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(x) for x in row])
        _atomic_write(csv_path, buf.getvalue())
        written.append(csv_path)
        sidecar = {
            "schema_version": SIDECAR_SCHEMA_VERSION,
            "package_version": __version__,
            "backend": _kernels.backend(),
            "experiment": cfg.experiment,
            "config": cfg.resolved,
            "seed": cfg.seed,
            "csv": os.path.basename(csv_path),
            "columns": header,
            "rows": len(rows),
            "condition_warnings": cond.as_dict(),
            "wall_time_s": time.perf_counter() - t0,
            "conventions": {
                "dbm_to_watts": "P_W = 10**((dBm - 30)/10)",
                "rate_units": "bits/s/Hz over occupied bandwidth W = (1+beta)/(2T)",
            },
        }
        _atomic_write(json_path, json.dumps(sidecar, indent=2) + "\n")
        written.append(json_path)
        return sidecar
    except BaseException:
        for path in written:
            if os.path.exists(path):
                os.unlink(path)
        raise


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="aftn-noma",
        description="Rate analysis and Monte Carlo experiments for asynchronous "
        "faster-than-Nyquist NOMA uplinks.",
    )
    parser.add_argument("--config", required=True, help="path to a JSON experiment config")
    parser.add_argument("--seed", type=int, default=None, help="override the config seed")
    parser.add_argument("--out", default=".", help="output directory (default: cwd)")
    parser.add_argument(
        "--quad-points", type=int, default=None, help="override quadrature panel count"
    )
    parser.add_argument(
        "--threads",
        type=int,
        default=0,
        help="worker threads (0 = auto); affects wall time only, never values",
    )
    args = parser.parse_args(argv)

    try:
        with open(args.config, "rb") as fh:
            cfg = parse_config(fh.read())
        overrides = {}
        if args.seed is not None:
            overrides["seed"] = args.seed
        if args.quad_points is not None:
            if args.quad_points < 2 or args.quad_points % 2:
                raise ConfigError("--quad-points: must be even and >= 2")
            overrides["quad_points"] = args.quad_points
        if overrides:
            merged = dict(cfg.resolved)
            merged.update(overrides)
            cfg = parse_config(json.dumps(merged))
        if args.threads > 0 and _kernels.backend() == "numba":
            import numba

            numba.set_num_threads(min(args.threads, numba.config.NUMBA_NUM_THREADS))
        sidecar = run(cfg, args.out)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return 2
    except FileNotFoundError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except Exception as err:  # numerical or I/O failure
        print(f"error: {err}", file=sys.stderr)
        return 1
    print(
        f"{cfg.experiment}: wrote {sidecar['rows']} rows to "
        f"{os.path.join(args.out, sidecar['csv'])} "
        f"({sidecar['wall_time_s']:.2f}s)"
    )
    return 0


if __name__ == "__main__":
    sys.exit(main())
