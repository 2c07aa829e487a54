"""Shared helpers for the experiment scripts."""

import argparse
import csv
import sys
from collections import defaultdict
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
CONFIGS = ROOT / "configs"

LABELS = {
    "c_mmse": "C-MMSE",
    "p_mmse": "P-MMSE",
    "l_mmse": "L-MMSE + opt. LSFD",
    "lp_mmse": "LP-MMSE + n-opt. LSFD",
    "maduo": "MADUO",
    "maduo_scl": "MADUO (scalable)",
    "centralized": "centralized",
    "distributed": "distributed",
}


def parser(description, default_out):
    p = argparse.ArgumentParser(description=description)
    p.add_argument("--config", type=Path, default=CONFIGS / "full.cfg")
    p.add_argument("--out", type=Path, default=ROOT / "results" / default_out)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE")
    p.add_argument("--no-plot", action="store_true", help="only write CSVs")
    return p


def cli_args(args, command, extra=()):
    argv = [command, "--config", str(args.config), "--out", str(args.out), "--workers", str(args.workers)]
    if args.seed is not None:
        argv += ["--seed", str(args.seed)]
    for kv in args.set:
        argv += ["--set", kv]
    return argv + list(extra)


def read_series(path, x, y):
    """scheme -> (xs, ys) from a long-format CSV."""
    series = defaultdict(lambda: ([], []))
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            xs, ys = series[row["scheme"]]
            xs.append(float(row[x]))
            ys.append(float(row[y]))
    return dict(series)


def pyplot():
    """matplotlib is optional; return None when it is not installed."""
    try:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        print("matplotlib not installed; skipping the figure", file=sys.stderr)
        return None
    return plt
