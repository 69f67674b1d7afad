"""Runners for the accuracy grid, switching-time study, QBER study and tracking demo.

Every stochastic unit of work (grid cell, repeat, trial) draws from its own
generator seeded by ``(master_seed, ...indices)``, so results do not depend on
the number of workers or on scheduling order.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Iterable, Sequence

import numpy as np

from . import qber as qb
from .compensation import DriftModel, PolarimeterConfig, run_tracking_loop
from .config import ExperimentConfig, validate
from .lc import LcRetarder, tau_for_switching_time
from .metrics import ds as stokes_ds
from .polarimeter import (
    NoiseConfig,
    acquire,
    decimate,
    direct_from_samples,
    direct_schedule,
    fourier_from_samples,
    fourier_schedule,
    measure,
)
from .psg import STATE_I, STATE_II, WaveplateSetting, expected_state, state_grid
from .records import ResultRecord, Table

SECURE_QBER_THRESHOLD = 0.11
SWITCHING_STATES = (("I", STATE_I), ("II", STATE_II))


def _map(fn: Callable, items: Sequence, workers: int) -> list:
    if workers <= 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items, chunksize=max(1, len(items) // (4 * workers))))


def _noise(cfg: ExperimentConfig) -> NoiseConfig:
    return NoiseConfig(cfg.sigma_i, cfg.power_drift_amplitude, cfg.power_drift_frequency_hz)


def _devices(tau: float) -> tuple[LcRetarder, LcRetarder]:
    return LcRetarder(orientation=0.0, tau=tau), LcRetarder(orientation=math.pi / 4, tau=tau)


def _stats(values: Iterable[float]) -> dict[str, float]:
    a = np.asarray(list(values), dtype=float)
    return {"mean": float(a.mean()), "std": float(a.std())}


# --- accuracy vs number of measurements --------------------------------------

def _grid_cell(args) -> dict[int, float]:
    cfg, index, qwp, hwp = args
    s_c = expected_state(WaveplateSetting(qwp, hwp))
    rng = np.random.default_rng([cfg.seed, index])
    noise = _noise(cfg)
    out: dict[int, float] = {}
    fourier = sorted((n for n in cfg.sample_counts if n != 4), reverse=True)
    if fourier:
        top = fourier[0]
        samples = acquire(s_c, fourier_schedule(top, cfg.exposure, cfg.dwell), *_devices(cfg.lc_tau), noise, rng)
        for n in fourier:
            out[n] = stokes_ds(s_c, fourier_from_samples(decimate(samples, top // n)).stokes)
    if 4 in cfg.sample_counts:
        samples = acquire(s_c, direct_schedule(cfg.exposure, cfg.dwell), *_devices(cfg.lc_tau), noise, rng)
        out[4] = stokes_ds(s_c, direct_from_samples(samples).stokes)
    return out


def run_accuracy_grid(cfg: ExperimentConfig) -> ResultRecord:
    """Per-cell dS for the waveplate grid at every configured sample count.

    Fourier counts are taken from a single sweep at the largest count by
    dropping every second value; the 4-sample direct analysis gets its own
    acquisition.
    """
    validate(cfg)
    grid = state_grid(cfg.grid_n_qwp, cfg.grid_n_hwp, math.radians(cfg.grid_max_angle_deg))
    jobs = [(cfg, i, s.theta_qwp, s.theta_hwp) for i, s in enumerate(grid)]
    results = _map(_grid_cell, jobs, cfg.workers)

    counts = sorted(cfg.sample_counts)
    cells = Table(("cell", "qwp_deg", "hwp_deg", "n", "method", "ds"))
    for (_, i, q, h), res in zip(jobs, results):
        for n in counts:
            cells.rows.append((i, math.degrees(q), math.degrees(h), n, "direct" if n == 4 else "fourier", res[n]))

    tables = {"cells": cells}
    summary = {}
    hwp_deg = [math.degrees(s.theta_hwp) for s in grid[: cfg.grid_n_hwp]]
    for n in counts:
        values = [res[n] for res in results]
        summary[str(n)] = _stats(values)
        heat = Table(("qwp_deg", *(f"hwp_{d:.4g}" for d in hwp_deg)))
        for r in range(cfg.grid_n_qwp):
            row = values[r * cfg.grid_n_hwp : (r + 1) * cfg.grid_n_hwp]
            heat.rows.append((math.degrees(grid[r * cfg.grid_n_hwp].theta_qwp), *row))
        tables[f"heatmap_n{n}"] = heat
    return ResultRecord("grid", cfg.to_dict(), {"ds_by_n": summary}, tables)


# --- accuracy vs LC switching time -----------------------------------------

def switching_tau(cfg: ExperimentConfig, window: float) -> float:
    if cfg.tau_interpretation == "fixed_device":
        return cfg.lc_tau
    return tau_for_switching_time(window, cfg.tau_interpretation)


def _switching_job(args) -> float:
    cfg, state_idx, n, rep, window, tau = args
    s_c = expected_state(SWITCHING_STATES[state_idx][1])
    # common random numbers: the noise draw ignores the window and tau
    rng = np.random.default_rng([cfg.seed, state_idx, n, rep])
    rec, _ = measure(s_c, "fourier", n, *_devices(tau), _noise(cfg), rng, cfg.exposure, window)
    return stokes_ds(s_c, rec.stokes)


def run_switching_study(cfg: ExperimentConfig) -> ResultRecord:
    """dS against sample count and total measurement time for each switching window.

    A window is the dwell granted to the LCs before each exposure. The
    ``floor`` column repeats the measurement with ideal LCs and the same noise
    draws, isolating the settling contribution.
    """
    validate(cfg)
    counts = sorted(cfg.sample_counts)
    windows = list(cfg.switching_windows)
    jobs = []
    for si in range(len(SWITCHING_STATES)):
        for n in counts:
            for r in range(cfg.repeats):
                for w in windows:
                    jobs.append((cfg, si, n, r, w, switching_tau(cfg, w)))
                jobs.append((cfg, si, n, r, windows[0], 0.0))
    values = iter(_map(_switching_job, jobs, cfg.workers))

    per_rep = Table(("state", "window_s", "n", "repeat", "ds", "ds_floor"))
    ds_acc: dict[tuple, list[float]] = {}
    floor_acc: dict[tuple, list[float]] = {}
    for si, (name, _) in enumerate(SWITCHING_STATES):
        for n in counts:
            for r in range(cfg.repeats):
                vals = [next(values) for _ in windows]
                floor = next(values)
                for w, v in zip(windows, vals):
                    per_rep.rows.append((name, w, n, r, v, floor))
                    ds_acc.setdefault((name, w, n), []).append(v)
                    floor_acc.setdefault((name, w, n), []).append(floor)

    points = Table(("state", "window_s", "tau_s", "n", "total_time_s", "ds_mean", "ds_std", "floor_mean"))
    smallest: dict[str, dict[str, float]] = {}
    for name, _ in SWITCHING_STATES:
        for w in windows:
            for n in counts:
                st = _stats(ds_acc[(name, w, n)])
                total = fourier_schedule(n, cfg.exposure, w).total_time
                floor = float(np.mean(floor_acc[(name, w, n)]))
                points.rows.append((name, w, switching_tau(cfg, w), n, total, st["mean"], st["std"], floor))
                if n == counts[0]:
                    smallest.setdefault(name, {})[repr(w)] = st["mean"]
    summary = {"smallest_n": counts[0], "ds_at_smallest_n": smallest}
    return ResultRecord("switching", cfg.to_dict(), summary, {"points": points, "repeats": per_rep})


# --- QBER vs polarimeter accuracy ------------------------------------------

def run_qber_study(cfg: ExperimentConfig) -> ResultRecord:
    validate(cfg)
    curve = qb.dqber_curve(cfg.ds_grid, cfg.n_pairs, cfg.trials, cfg.seed, cfg.angle_convention)
    curve_t = Table(qb.CURVE_HEADER, [(p.ds, p.dqber_mean, p.dqber_std, p.qber_printed_mean) for p in curve])

    show = Table(("ds", "class", "count", "relative"))
    for d in cfg.showcase_ds:
        c = qb.showcase_counts(d, cfg.n_pairs, cfg.seed, cfg.angle_convention)
        total = c.total
        for name, v in zip(qb.FIELDS, c.as_tuple()):
            show.rows.append((d, name[2:].upper(), v, v / total if total else 0.0))

    summary = {
        "max_dqber": max(p.dqber_mean for p in curve),
        "secure_threshold": SECURE_QBER_THRESHOLD,
        "dqber_by_ds": {repr(p.ds): p.dqber_mean for p in curve},
    }
    return ResultRecord("qber", cfg.to_dict(), summary, {"curve": curve_t, "showcase": show})


# --- closed-loop tracking ---------------------------------------------------

def drift_from_config(cfg: ExperimentConfig) -> DriftModel:
    return DriftModel(
        kind=cfg.track_kind,
        axis=tuple(cfg.track_axis),
        angle=cfg.track_angle,
        rate=cfg.track_rate,
        amplitude=cfg.track_amplitude,
        frequency_hz=cfg.track_frequency_hz,
    )


def polarimeter_from_config(cfg: ExperimentConfig) -> PolarimeterConfig:
    return PolarimeterConfig(cfg.track_method, cfg.track_n, cfg.exposure, cfg.dwell, cfg.lc_tau, _noise(cfg))


def run_tracking_demo(cfg: ExperimentConfig) -> ResultRecord:
    validate(cfg)
    drift = drift_from_config(cfg)
    pol = polarimeter_from_config(cfg)
    points = run_tracking_loop(drift, pol, cfg.loop_period, cfg.duration, [cfg.seed])
    ts = Table(("t_s", "ds_before", "ds_after"), [(p.t, p.ds_before, p.ds_after) for p in points])
    after = [p.ds_after for p in points]
    summary = {
        "ticks": len(points),
        "measurement_time_s": pol.measurement_time(),
        "ds_after_max_settled": max(after[1:]) if len(after) > 1 else after[0],
        "ds_after_mean_settled": float(np.mean(after[1:])) if len(after) > 1 else after[0],
        "lag_bound": drift.max_angular_speed() * cfg.loop_period,
    }
    return ResultRecord("track", cfg.to_dict(), summary, {"timeseries": ts})


RUNNERS = {
    "grid": run_accuracy_grid,
    "switching": run_switching_study,
    "qber": run_qber_study,
    "track": run_tracking_demo,
}


def run(cfg: ExperimentConfig) -> ResultRecord:
    return RUNNERS[cfg.experiment](cfg)
