"""Matplotlib renderings of result records.

Only the ``--figures`` path imports this module, so the simulation core never
needs a plotting backend.
"""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .records import ResultRecord  # noqa: E402

RC = {
    "font.size": 9,
    "axes.labelsize": 9,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "figure.dpi": 120,
    "savefig.bbox": "tight",
}


def _save(fig, path: Path) -> Path:
    fig.savefig(path)
    plt.close(fig)
    return path


def plot_grid(record: ResultRecord, out_dir: Path) -> list[Path]:
    counts = sorted(int(k) for k in record.summary["ds_by_n"])
    ncols = min(2, len(counts))
    nrows = int(np.ceil(len(counts) / ncols))
    with plt.rc_context(RC):
        fig, axes = plt.subplots(nrows, ncols, figsize=(3.4 * ncols, 3.0 * nrows), squeeze=False)
        vmax = max(max(max(r[1:]) for r in record.tables[f"heatmap_n{n}"].rows) for n in counts)
        for ax, n in zip(axes.flat, counts):
            t = record.tables[f"heatmap_n{n}"]
            z = np.array([r[1:] for r in t.rows])
            qwp = [r[0] for r in t.rows]
            hwp = [float(c.split("_", 1)[1]) for c in t.columns[1:]]
            im = ax.imshow(z, origin="lower", aspect="auto", cmap="viridis", vmin=0, vmax=vmax,
                           extent=(hwp[0], hwp[-1], qwp[0], qwp[-1]))
            st = record.summary["ds_by_n"][str(n)]
            ax.set_title(f"n={n}: dS = {st['mean']:.3f} ± {st['std']:.3f}", fontsize=9)
            ax.set_xlabel("HWP angle (deg)")
            ax.set_ylabel("QWP angle (deg)")
            fig.colorbar(im, ax=ax, label="dS")
        for ax in list(axes.flat)[len(counts):]:
            ax.set_visible(False)
        fig.tight_layout()
        return [_save(fig, out_dir / "grid_heatmaps.png")]


def plot_switching(record: ResultRecord, out_dir: Path) -> list[Path]:
    pts = record.tables["points"]
    states = sorted(set(pts.column("state")))
    windows = sorted(set(pts.column("window_s")))
    with plt.rc_context(RC):
        fig, axes = plt.subplots(len(states), 2, figsize=(7.0, 2.8 * len(states)), squeeze=False)
        for row, state in zip(axes, states):
            for w in windows:
                sel = sorted(pts.where(state=state, window_s=w), key=lambda d: d["n"])
                n = [d["n"] for d in sel]
                y = [d["ds_mean"] for d in sel]
                label = f"{w * 1e3:.0f} ms"
                row[0].plot(n, y, marker="o", label=label)
                row[1].plot([d["total_time_s"] for d in sel], y, marker="o", label=label)
            floor = sorted(pts.where(state=state, window_s=windows[0]), key=lambda d: d["n"])
            row[0].plot([d["n"] for d in floor], [d["floor_mean"] for d in floor], "k--", lw=0.8, label="ideal LC")
            row[0].set_xlabel("number of measurements")
            row[1].set_xlabel("total measurement time (s)")
            for ax in row:
                ax.set_ylabel(f"dS (state {state})")
                ax.legend()
        fig.tight_layout()
        return [_save(fig, out_dir / "switching.png")]


def plot_qber(record: ResultRecord, out_dir: Path) -> list[Path]:
    curve = record.tables["curve"]
    show = record.tables["showcase"]
    ds_show = sorted(set(show.column("ds")))
    with plt.rc_context(RC):
        fig, ax = plt.subplots(figsize=(4.0, 3.0))
        ds = np.array(curve.column("ds"))
        ax.errorbar(ds, 100 * np.array(curve.column("dqber_mean")), yerr=100 * np.array(curve.column("dqber_std")),
                    marker="o", capsize=2)
        ax.set_xlabel("dS")
        ax.set_ylabel("dQBER (%)")
        paths = [_save(fig, out_dir / "qber_curve.png")]

        fig, axes = plt.subplots(1, len(ds_show), figsize=(3.4 * len(ds_show), 2.8), squeeze=False)
        for ax, d in zip(axes[0], ds_show):
            rows = show.where(ds=d)
            ax.bar([r["class"] for r in rows], [r["relative"] for r in rows])
            ax.set_title(f"dS = {d}")
            ax.set_ylabel("relative coincidences")
        fig.tight_layout()
        paths.append(_save(fig, out_dir / "qber_coincidences.png"))
        return paths


def plot_tracking(record: ResultRecord, out_dir: Path) -> list[Path]:
    ts = record.tables["timeseries"]
    with plt.rc_context(RC):
        fig, ax = plt.subplots(figsize=(5.0, 2.8))
        ax.plot(ts.column("t_s"), ts.column("ds_before"), label="before correction")
        ax.plot(ts.column("t_s"), ts.column("ds_after"), label="after correction")
        ax.set_xlabel("t (s)")
        ax.set_ylabel("dS")
        ax.legend()
        return [_save(fig, out_dir / "tracking.png")]


PLOTTERS = {"grid": plot_grid, "switching": plot_switching, "qber": plot_qber, "track": plot_tracking}


def render(record: ResultRecord, out_dir: str | Path) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return PLOTTERS[record.experiment](record, out)
