"""Command line entry point: ``polarsim <grid|switching|qber|track>``."""
from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

from .compensation import LoopConfigError
from .config import EXPERIMENTS, ConfigError, default_config, dump_config, load_config, validate
from .experiments import run
from .records import ResultRecord, Table, save_record, write_gnuplot

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 2, 3

log = logging.getLogger("polarsim")


def plot_blocks(record: ResultRecord) -> list[tuple[str, Table]]:
    """Split a record into gnuplot-friendly long-format blocks."""
    t = record.tables
    if record.experiment == "grid":
        cells = t["cells"]
        blocks = []
        for n in sorted(set(cells.column("n"))):
            sub = Table(("qwp_deg", "hwp_deg", "ds"), [(r["qwp_deg"], r["hwp_deg"], r["ds"]) for r in cells.where(n=n)])
            blocks.append((f"n={n}", sub))
        return blocks
    if record.experiment == "switching":
        pts = t["points"]
        blocks = []
        for state in sorted(set(pts.column("state"))):
            for w in sorted(set(pts.column("window_s"))):
                rows = [(d["n"], d["total_time_s"], d["ds_mean"], d["ds_std"], d["floor_mean"])
                        for d in pts.where(state=state, window_s=w)]
                blocks.append((f"state={state} window_s={w!r}",
                               Table(("n", "total_time_s", "ds_mean", "ds_std", "floor_mean"), rows)))
        return blocks
    if record.experiment == "qber":
        return [("curve", t["curve"]), ("showcase", t["showcase"])]
    return [("timeseries", t["timeseries"])]


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="polarsim", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="cmd", required=True)
    for name, help_ in (
        ("grid", "accuracy vs number of measurements over the waveplate grid"),
        ("switching", "accuracy vs LC switching window"),
        ("qber", "QBER increase vs polarimeter accuracy"),
        ("track", "closed-loop compensation demo"),
    ):
        s = sub.add_parser(name, help=help_)
        s.add_argument("--config", type=Path, help="JSON config file (defaults used if omitted)")
        s.add_argument("--seed", type=int, help="override the master seed")
        s.add_argument("--out", type=Path, help="output directory (default: <output_dir>/<experiment>)")
        s.add_argument("--workers", type=int, help="worker processes")
        s.add_argument("--plot-data", action="store_true", help="also write gnuplot-ready plot_data.dat")
        s.add_argument("--figures", action="store_true", help="also render PNG figures with matplotlib")
    s = sub.add_parser("init-config", help="write the default config for an experiment")
    s.add_argument("experiment", choices=EXPERIMENTS)
    s.add_argument("path", type=Path)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO, format="%(levelname)s %(message)s")

    if args.cmd == "init-config":
        dump_config(default_config(args.experiment), args.path)
        return EXIT_OK

    try:
        cfg = load_config(args.config) if args.config else default_config(args.cmd)
        if cfg.experiment != args.cmd:
            raise ConfigError(f"config is for experiment {cfg.experiment!r}, not {args.cmd!r}")
        if args.seed is not None:
            cfg = replace(cfg, seed=args.seed)
        if args.workers is not None:
            cfg = replace(cfg, workers=args.workers)
        validate(cfg)
    except ConfigError as exc:
        log.error("config error: %s", exc)
        return EXIT_CONFIG

    out = args.out or Path(cfg.output_dir) / cfg.experiment
    try:
        record = run(cfg)
    except (ConfigError, LoopConfigError) as exc:
        log.error("config error: %s", exc)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001
        log.error("run failed: %s", exc)
        return EXIT_RUNTIME

    try:
        path = save_record(record, out)
        log.info("wrote %s", path)
        if args.plot_data:
            write_gnuplot(out / "plot_data.dat", plot_blocks(record))
        if args.figures:
            from .plotting import render

            for fig in render(record, out):
                log.info("wrote %s", fig)
    except OSError as exc:
        log.error("cannot write results: %s", exc)
        return EXIT_RUNTIME
    for key, value in record.summary.items():
        log.info("%s: %s", key, value)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
