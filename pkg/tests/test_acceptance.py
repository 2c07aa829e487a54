"""End-to-end acceptance criteria, one test per criterion.

Each test prints a PASS/FAIL line; the lines are also collected into the
terminal summary under "acceptance criteria".
"""

import os
import time
from pathlib import Path

import numpy as np
import pytest
from scipy.stats import spearmanr

from cfmaduo import cli
from cfmaduo.combining import c_mmse, local_combiners
from cfmaduo.config import NetworkConfig, load_config
from cfmaduo.evaluation import run_campaign, sinr_centralized
from cfmaduo.maduo import map_combiner, maduo_sinr, master_only_sinr, optimal_sinr, problem_from_combiners

from conftest import ACCEPTANCE_LINES, crandn, desk_instance
from oracles import term_expansion_B

CONFIGS = Path(__file__).resolve().parent.parent / "configs"
WORKERS = max(1, min(4, os.cpu_count() or 1))
SLACK = 1e-9
K_GRID = (20, 40, 60, 80, 100)


def report(n, title, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {n}: {title} ({detail})"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def _desk_problems(seed, **kw):
    setup, state = desk_instance(seed, **kw)
    a, cfg, est = setup.assignment, setup.config, state.estimates
    local = local_combiners(est, a, cfg, False)
    return setup, state, [problem_from_combiners(est, local, a, cfg, k) for k in range(a.K)]


def test_criterion_1_closed_form_combiner_is_optimal():
    t0 = time.perf_counter()
    rng = np.random.default_rng(2024)
    worst = -np.inf
    for seed in range(100):
        setup, _, problems = _desk_problems(seed)
        p = setup.config.p
        for P in problems:
            best = maduo_sinr(P, map_combiner(P), setup.config)
            V = crandn(rng, 1000, P.M)
            num = p * np.abs(V.conj() @ P.z_hat) ** 2
            den = np.einsum("sm,mn,sn->s", V.conj(), P.B, V).real
            worst = max(worst, np.max(num / den) / best - 1)
    elapsed = time.perf_counter() - t0
    ok = worst <= SLACK and elapsed < 30
    report(1, "B^-1 z beats 1000 random combiners", ok, f"max excess {worst:.2e}, {elapsed:.1f} s")


def test_criterion_2_sandwich_bounds():
    worst_low, worst_up = -np.inf, -np.inf
    for seed in range(100):
        setup, state, problems = _desk_problems(seed)
        a, cfg, est = setup.assignment, setup.config, state.estimates
        for k, P in enumerate(problems):
            mid = optimal_sinr(P, cfg)
            upper = sinr_centralized(c_mmse(est, a, cfg, k), est, a, cfg, k)
            worst_low = max(worst_low, master_only_sinr(P, cfg) / mid - 1)
            worst_up = max(worst_up, mid / upper - 1)
    worst_eq = 0.0
    for seed in range(50):
        setup, state, problems = _desk_problems(seed, N=1, K=1, tau_p=1)
        a, cfg, est = setup.assignment, setup.config, state.estimates
        upper = sinr_centralized(c_mmse(est, a, cfg, 0), est, a, cfg, 0)
        worst_eq = max(worst_eq, abs(optimal_sinr(problems[0], cfg) / upper - 1))
    ok = worst_low <= SLACK and worst_up <= SLACK and worst_eq <= SLACK
    detail = f"lower excess {worst_low:.1e}, upper excess {worst_up:.1e}, K=N=1 gap {worst_eq:.1e}"
    report(2, "master-only <= MADUO <= C-MMSE", ok, detail)


def test_criterion_3_estimation_consistency():
    # default 2 km geometry: the cross term's sampling floor grows with the
    # estimation SNR of a pair, roughly sqrt(tr(R - C) / tr C) / sqrt(n)
    setup, _ = desk_instance(0, side_length=NetworkConfig().side_length)
    L, K, N = setup.stats.shape
    n = 10_000
    H = np.empty((n, L, K, N), complex)
    E = np.empty((n, L, K, N), complex)
    for r in range(n):
        st = setup.realization(r)
        H[r] = st.estimates.h_hat
        E[r] = st.h - st.estimates.h_hat
    R, C = setup.stats.R, setup.errors.C
    worst_hat = worst_err = worst_cross = 0.0
    for j in range(L):
        for k in range(K):
            h, e = H[:, j, k], E[:, j, k]
            cov_hat = h.T @ h.conj() / n
            cov_err = e.T @ e.conj() / n
            cross = e.T @ h.conj() / n
            worst_hat = max(worst_hat, np.linalg.norm(cov_hat - (R[j, k] - C[j, k])) / np.linalg.norm(R[j, k] - C[j, k]))
            worst_err = max(worst_err, np.linalg.norm(cov_err - C[j, k]) / np.linalg.norm(C[j, k]))
            worst_cross = max(worst_cross, np.linalg.norm(cross) / np.trace(C[j, k]).real)
    ok = worst_hat < 0.05 and worst_err < 0.05 and worst_cross < 0.05
    detail = f"estimate {worst_hat:.3f}, error {worst_err:.3f}, cross {worst_cross:.3f}"
    report(3, "estimate/error covariances at 1e4 draws", ok, detail)


def test_criterion_4_b_matches_term_expansion():
    worst = 0.0
    for seed in range(50):
        setup, state, problems = _desk_problems(seed, L=3, N=2, K=3)
        a, cfg, est = setup.assignment, setup.config, state.estimates
        V = local_combiners(est, a, cfg, False).V
        for k, P in enumerate(problems):
            _, B = term_expansion_B(est, V, a, cfg, k)
            worst = max(worst, np.linalg.norm(P.B - B) / np.linalg.norm(B))
    report(4, "assembled B equals covariance oracle", worst <= 1e-9, f"max rel. Frobenius {worst:.1e}")


def test_criterion_5_reduced_scale_ordering():
    cfg = load_config(CONFIGS / "reduced.cfg")
    assert (cfg.L, cfg.N, cfg.K, cfg.num_setups, cfg.num_realizations) == (25, 2, 10, 20, 50)
    t0 = time.perf_counter()
    schemes = ("c_mmse", "lp_mmse", "maduo", "maduo_scl")
    rows = list(run_campaign(cfg, schemes, workers=WORKERS))
    elapsed = time.perf_counter() - t0
    med = {s: float(np.median([r.se for r in rows if r.scheme == s])) for s in schemes}
    gap = abs(med["maduo"] - med["maduo_scl"]) / med["maduo"]
    ok = (
        med["c_mmse"] >= med["maduo"]
        and gap <= 0.10
        and med["maduo"] >= 1.10 * med["lp_mmse"]
        and elapsed < 600
    )
    detail = ", ".join(f"{s} {v:.4f}" for s, v in med.items()) + f", {elapsed:.1f} s"
    report(5, "median SE ordering at reduced scale", ok, detail)


@pytest.fixture(scope="module")
def full_sweep():
    cfg = NetworkConfig(num_setups=20)
    return cli.sweep_costs(cfg, K_GRID, workers=WORKERS)


def test_criterion_6_fronthaul(full_sweep):
    fh, _ = full_sweep
    largest = all(fh[K]["maduo"] == max(fh[K].values()) for K in K_GRID)
    below = [K for K in K_GRID if fh[K]["maduo_scl"] < fh[K]["distributed"]]
    k_star = below[0] if below else None
    crossover = k_star is not None and 40 <= k_star <= 80 and fh[K_GRID[0]]["maduo_scl"] >= fh[K_GRID[0]]["distributed"]
    detail = f"K*={k_star}, " + ", ".join(
        f"K={K}: maduo {fh[K]['maduo']:.0f} scl {fh[K]['maduo_scl']:.0f} dist {fh[K]['distributed']:.0f}" for K in K_GRID
    )
    report(6, "fronthaul ordering and crossover", largest and crossover, detail)


def test_criterion_7_complexity(full_sweep):
    _, mults = full_sweep
    scl = [mults[K]["maduo_scl"] for K in K_GRID]
    rho = spearmanr(K_GRID, scl).statistic
    below = all(
        mults[K][m] < mults[K][c] for K in K_GRID if K >= 40 for m in ("maduo", "maduo_scl") for c in ("c_mmse", "p_mmse")
    )
    detail = f"Spearman {rho:.2f}, scl " + " ".join(f"{v:.0f}" for v in scl)
    report(7, "complexity trend and ordering", rho < 0 and below, detail)


def test_criterion_8_determinism(tmp_path):
    desk = str(CONFIGS / "desk.cfg")
    runs = {
        "se": (["se", "--config", desk, "--seed", "17"], ["se_samples.csv", "se_cdf.csv"]),
        "fronthaul": (["fronthaul", "--k-grid", "20,60", "--set", "num_setups=3"], ["fronthaul.csv"]),
        "complexity": (["complexity", "--k-grid", "20,60", "--set", "num_setups=3"], ["complexity.csv"]),
    }
    identical = True
    for name, (args, files) in runs.items():
        for workers in (1, 3):
            assert cli.main(args + ["--workers", str(workers), "--out", str(tmp_path / f"{name}{workers}")]) == 0
        for f in files:
            identical &= (tmp_path / f"{name}1" / f).read_bytes() == (tmp_path / f"{name}3" / f).read_bytes()
    report(8, "byte-identical CSVs across worker counts", identical, "se, fronthaul, complexity")
