"""Command line: ``se``, ``fronthaul`` and ``complexity`` campaigns to CSV.

Exit codes: 0 success, 2 configuration error, 3 numerical error, 4 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import subprocess
import sys
import time
from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .accounting import COMPLEXITY_SCHEMES, FRONTHAUL_SCHEMES, cost_reports, fronthaul_all
from .assignment import assign
from .config import NetworkConfig, load_config, parse_config_text
from .errors import ConfigurationError, NumericalError, ProtocolError, StatisticsError
from .evaluation import SCHEMES, cdf, check_schemes, run_campaign
from .topology import generate_setup

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_IO = 0, 2, 3, 4
DEFAULT_K_GRID = (20, 40, 60, 80, 100)

SE_SAMPLES_HEADER = ("scheme", "setup", "ue", "se")
SE_CDF_HEADER = ("scheme", "se", "cdf")
FRONTHAUL_HEADER = ("scheme", "K", "mean_scalars")
COMPLEXITY_HEADER = ("scheme", "K", "mean_mults")


def fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.17g}"
    return str(x)


class CsvOutputs:
    """Write CSVs to ``*.partial`` names and publish them only on success."""

    def __init__(self, out_dir: Path):
        self.out_dir = Path(out_dir)
        self.pending: list[tuple[Path, Path]] = []

    def write(self, name: str, header, rows) -> Path:
        final = self.out_dir / name
        tmp = final.with_name(final.name + ".partial")
        self.pending.append((tmp, final))
        with open(tmp, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for row in rows:
                w.writerow([fmt(x) for x in row])
        return final

    def commit(self) -> None:
        for tmp, final in self.pending:
            os.replace(tmp, final)
        self.pending.clear()

    def discard(self) -> None:
        for tmp, _ in self.pending:
            tmp.unlink(missing_ok=True)
        self.pending.clear()


def version_string() -> str:
    try:
        out = subprocess.run(
            ["git", "describe", "--always", "--dirty", "--tags"],
            capture_output=True,
            text=True,
            cwd=Path(__file__).parent,
            timeout=5,
        )
        if out.returncode == 0 and out.stdout.strip():
            return f"{__version__}+{out.stdout.strip()}"
    except (OSError, subprocess.SubprocessError):
        pass
    return __version__


def write_manifest(out_dir: Path, command: str, config: NetworkConfig, schemes, extra, outputs, started):
    manifest = {
        "command": command,
        "config": config.to_dict(),
        "schemes": list(schemes),
        "outputs": [str(p) for p in outputs],
        "version": version_string(),
        "started": started,
        "finished": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
        **extra,
    }
    (out_dir / f"manifest_{command}.json").write_text(json.dumps(manifest, indent=2) + "\n")


# -- commands -----------------------------------------------------------------


def cmd_se(config: NetworkConfig, out: CsvOutputs, schemes, workers: int) -> list[Path]:
    schemes = check_schemes(schemes)
    rows = list(run_campaign(config, schemes, workers))
    pooled = defaultdict(list)
    for r in rows:
        pooled[r.scheme].append(r.se)
    samples = out.write("se_samples.csv", SE_SAMPLES_HEADER, ((r.scheme, r.setup_index, r.ue, r.se) for r in rows))
    curve = out.write(
        "se_cdf.csv",
        SE_CDF_HEADER,
        ((s, v, p) for s in schemes for v, p in cdf(pooled[s])),
    )
    return [samples, curve]


def setup_costs(config: NetworkConfig, setup_index: int):
    """Fronthaul counts and mean per-UE multiplications for one setup."""
    _, stats = generate_setup(config, setup_index)
    a = assign(stats.beta, config)
    reports = cost_reports(a, config)
    return fronthaul_all(a, config), {s: r.mean_mults for s, r in reports.items()}


def _costs_job(args):
    return setup_costs(*args)


def sweep_costs(config: NetworkConfig, k_grid, workers: int = 1):
    """Mean fronthaul scalars and mean per-UE mults over setups, per K."""
    jobs = [(config.replace(K=K), s) for K in k_grid for s in range(config.num_setups)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_costs_job, jobs))
    else:
        results = [_costs_job(j) for j in jobs]
    fronthaul, mults = {}, {}
    n = config.num_setups
    for i, K in enumerate(k_grid):
        chunk = results[i * n : (i + 1) * n]
        fronthaul[K] = {s: float(np.mean([fh[s] for fh, _ in chunk])) for s in FRONTHAUL_SCHEMES}
        mults[K] = {s: float(np.mean([m[s] for _, m in chunk])) for s in COMPLEXITY_SCHEMES}
    return fronthaul, mults


def cmd_fronthaul(config: NetworkConfig, out: CsvOutputs, k_grid, workers: int) -> list[Path]:
    fronthaul, _ = sweep_costs(config, k_grid, workers)
    rows = ((s, K, fronthaul[K][s]) for s in FRONTHAUL_SCHEMES for K in k_grid)
    return [out.write("fronthaul.csv", FRONTHAUL_HEADER, rows)]


def cmd_complexity(config: NetworkConfig, out: CsvOutputs, k_grid, schemes, workers: int) -> list[Path]:
    _, mults = sweep_costs(config, k_grid, workers)
    schemes = check_schemes(schemes)
    rows = ((s, K, mults[K][s]) for s in schemes for K in k_grid)
    return [out.write("complexity.csv", COMPLEXITY_HEADER, rows)]


# -- argument handling ----------------------------------------------------------


def _int_list(text: str) -> list[int]:
    try:
        values = [int(v) for v in text.replace(" ", "").split(",") if v]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if not values:
        raise argparse.ArgumentTypeError("empty list")
    return values


def _str_list(text: str) -> list[str]:
    return [v for v in text.replace(" ", "").split(",") if v]


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="flat key = value config file (or a run manifest .json)")
    common.add_argument("--seed", type=int, help="override the config seed")
    common.add_argument("--out", type=Path, default=Path("."), help="output directory")
    common.add_argument("--workers", type=int, default=1, help="worker processes; never changes results")
    common.add_argument(
        "--set", action="append", default=[], metavar="KEY=VALUE", help="override any config key (repeatable)"
    )
    parser = argparse.ArgumentParser(prog="cfmaduo", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    se = sub.add_parser("se", parents=[common], help="per-UE SE samples and CDFs")
    se.add_argument("--schemes", type=_str_list, default=list(SCHEMES), help=",".join(SCHEMES))

    fh = sub.add_parser("fronthaul", parents=[common], help="fronthaul scalars per coherence block vs K")
    fh.add_argument("--k-grid", type=_int_list, default=list(DEFAULT_K_GRID))

    cx = sub.add_parser("complexity", parents=[common], help="complex multiplications per UE vs K")
    cx.add_argument("--k-grid", type=_int_list, default=list(DEFAULT_K_GRID))
    cx.add_argument("--schemes", type=_str_list, default=list(COMPLEXITY_SCHEMES))
    return parser


def _overrides(args) -> dict:
    values = parse_config_text("\n".join(args.set), source="--set") if args.set else {}
    if args.seed is not None:
        values["seed"] = args.seed
    return values


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    started = time.strftime("%Y-%m-%dT%H:%M:%S%z")
    out = CsvOutputs(args.out)
    try:
        config = load_config(args.config, **_overrides(args))
        args.out.mkdir(parents=True, exist_ok=True)
        if args.command == "se":
            schemes = check_schemes(args.schemes)
            paths = cmd_se(config, out, schemes, args.workers)
            extra = {}
        elif args.command == "fronthaul":
            schemes = FRONTHAUL_SCHEMES
            paths = cmd_fronthaul(config, out, args.k_grid, args.workers)
            extra = {"k_grid": args.k_grid}
        else:
            schemes = check_schemes(args.schemes)
            paths = cmd_complexity(config, out, args.k_grid, schemes, args.workers)
            extra = {"k_grid": args.k_grid}
        out.commit()
        write_manifest(args.out, args.command, config, schemes, extra, paths, started)
    except ConfigurationError as exc:
        out.discard()
        print(f"cfmaduo: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalError, StatisticsError, ProtocolError, FloatingPointError) as exc:
        out.discard()
        print(f"cfmaduo: numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        out.discard()
        print(f"cfmaduo: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
