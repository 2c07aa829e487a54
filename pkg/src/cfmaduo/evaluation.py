"""Monte Carlo campaigns: per-UE spectral efficiency of every scheme."""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Iterator

import numpy as np

from . import combining
from .assignment import ServingAssignment, assign
from .channel import ALL_UES, SERVED_ONLY, ChannelEstimates, ChannelState, ErrorStatistics, draw_realization, error_statistics
from .combining import NEARLY_OPTIMAL, OPTIMAL, LsfdMoments, lsfd_sinr, lsfd_weights, stack_aps
from .config import NetworkConfig
from .errors import ConfigurationError
from .linalg import hpd_solve
from .maduo import map_combiner, maduo_sinr, master_only_sinr, optimal_sinr, problem_from_combiners
from .topology import ChannelStatistics, Geometry, generate_setup

SCHEMES = ("c_mmse", "p_mmse", "l_mmse", "lp_mmse", "maduo", "maduo_scl")
CENTRALIZED = ("c_mmse", "p_mmse")
DISTRIBUTED = {"l_mmse": (False, OPTIMAL), "lp_mmse": (True, NEARLY_OPTIMAL)}
MADUO_SCHEMES = ("maduo", "maduo_scl")


def check_schemes(schemes: Iterable[str]) -> tuple[str, ...]:
    schemes = tuple(schemes)
    unknown = [s for s in schemes if s not in SCHEMES]
    if unknown or not schemes:
        raise ConfigurationError(f"unknown schemes {unknown}; choose from {', '.join(SCHEMES)}")
    # canonical order keeps output independent of how the list was typed
    return tuple(s for s in SCHEMES if s in schemes)


@dataclass(frozen=True)
class SeResult:
    scheme: str
    setup_index: int
    ue: int
    se: float


@dataclass(frozen=True)
class Setup:
    config: NetworkConfig
    index: int
    geometry: Geometry
    stats: ChannelStatistics
    assignment: ServingAssignment
    errors: ErrorStatistics
    sqrt_R: np.ndarray

    @cached_property
    def partner_csum(self) -> list:
        """Per UE: sum over partners of C, restricted to the serving APs."""
        a = self.assignment
        return [self.errors.C[a.serving_aps(k)][:, a.partners(k)].sum(axis=1) for k in range(a.K)]

    def realization(self, r: int) -> ChannelState:
        return draw_realization(self.stats, self.assignment, self.config, self.errors, self.sqrt_R, self.index, r)


def prepare_setup(config: NetworkConfig, setup_index: int) -> Setup:
    geometry, stats = generate_setup(config, setup_index)
    assignment = assign(stats.beta, config)
    errors = error_statistics(stats, assignment, config)
    return Setup(config, setup_index, geometry, stats, assignment, errors, stats.sqrt_R())


def sinr_centralized(v, est: ChannelEstimates, assignment: ServingAssignment, config: NetworkConfig, k: int) -> float:
    """Instantaneous SINR of a combiner over the stacked antennas of A_k.

    p |v^H h_hat_k|^2 / (v^H (sum_{i!=k} p h_hat_i h_hat_i^H + sum_i p C_i + sigma^2 I) v)
    """
    v = np.asarray(v)
    if not np.any(v):
        raise ValueError("combiner must be nonzero")
    aps = assignment.serving_aps(k)
    g = v.conj() @ stack_aps(est.h_hat[aps])
    N = est.h_hat.shape[-1]
    vb = v.reshape(len(aps), N)
    Q = config.p * est.errors.csum_all[aps] + config.noise_power * np.eye(N)
    noise = np.einsum("an,anm,am->", vb.conj(), Q, vb).real
    signal = config.p * abs(g[k]) ** 2
    interference = config.p * (np.sum(np.abs(g) ** 2) - abs(g[k]) ** 2)
    return float(signal / (interference + noise))


def _centralized_vector(setup: Setup, est, k, partial):
    a = setup.assignment
    aps = a.serving_aps(k)
    if partial:
        ues = a.partners(k)
        csum = setup.partner_csum[k]
    else:
        ues = np.arange(a.K)
        csum = est.errors.csum_all[aps]
    Hs = stack_aps(est.h_hat[aps][:, ues])
    p = setup.config.p
    B = p * Hs @ Hs.conj().T + p * combining.block_diag_stack(csum) + setup.config.noise_power * np.eye(Hs.shape[0])
    return p * hpd_solve(B, stack_aps(est.h_hat[aps, k]))


def realization_sinrs(setup: Setup, state: ChannelState, schemes, moments=None, bounds=False) -> dict:
    """Per-UE SINRs of every per-realization scheme for one coherence block.

    Distributed schemes do not produce instantaneous SINRs; when
    ``moments`` (scheme -> LsfdMoments) is given their effective gains are
    accumulated instead. With ``bounds=True`` the master-alone SINR is
    also returned under the key ``'master_only'``.
    """
    a = setup.assignment
    cfg = setup.config
    est = state.estimates
    K = a.K
    out = {}
    for scheme in CENTRALIZED:
        if scheme in schemes:
            out[scheme] = np.array(
                [sinr_centralized(_centralized_vector(setup, est, k, scheme == "p_mmse"), est, a, cfg, k) for k in range(K)]
            )
    local = {}
    need_full = "l_mmse" in schemes or "maduo" in schemes or bounds
    need_part = "lp_mmse" in schemes or "maduo_scl" in schemes
    if need_full:
        local[False] = combining.local_combiners(est, a, cfg, partial=False)
    if need_part:
        local[True] = combining.local_combiners(est.restrict(a), a, cfg, partial=True)
    if moments is not None:
        for scheme, (partial, _) in DISTRIBUTED.items():
            if scheme in schemes:
                moments[scheme].add(local[partial].V, state.h)
    if "maduo" in schemes or bounds:
        problems = [problem_from_combiners(est, local[False], a, cfg, k, ALL_UES) for k in range(K)]
        if "maduo" in schemes:
            out["maduo"] = np.array([optimal_sinr(P, cfg) for P in problems])
        if bounds:
            out["master_only"] = np.array([master_only_sinr(P, cfg) for P in problems])
    if "maduo_scl" in schemes:
        served = est.restrict(a)
        sinr = np.empty(K)
        for k in range(K):
            own = problem_from_combiners(served, local[True], a, cfg, k, SERVED_ONLY)
            # evaluated against the true interference statistics
            true = problem_from_combiners(est, local[True], a, cfg, k, ALL_UES)
            sinr[k] = maduo_sinr(true, map_combiner(own), cfg)
        out["maduo_scl"] = sinr
    return out


def se_from_sinr(sinr, config: NetworkConfig):
    return config.prelog * np.log2(1.0 + np.asarray(sinr))


def se_distributed(weights: combining.LsfdWeights, config: NetworkConfig) -> float:
    return float(se_from_sinr(lsfd_sinr(weights.a, weights.moments, config), config))


def run_setup(config: NetworkConfig, setup_index: int, schemes=SCHEMES) -> list[SeResult]:
    """Evaluate every scheme on one setup; all schemes share the same draws."""
    schemes = check_schemes(schemes)
    setup = prepare_setup(config, setup_index)
    a = setup.assignment
    K = a.K
    moments = {s: LsfdMoments(a) for s in DISTRIBUTED if s in schemes}
    log_sum = {s: np.zeros(K) for s in schemes if s not in DISTRIBUTED}
    for r in range(config.num_realizations):
        state = setup.realization(r)
        sinrs = realization_sinrs(setup, state, schemes, moments)
        for s in log_sum:
            log_sum[s] += np.log2(1.0 + sinrs[s])
    results = []
    for s in schemes:
        if s in DISTRIBUTED:
            mode = DISTRIBUTED[s][1]
            se = np.empty(K)
            for k in range(K):
                mom = moments[s].for_ue(k)
                w = lsfd_weights(mom, config, mode, partners=a.partners(k))
                se[k] = se_distributed(w, config)
        else:
            se = config.prelog * log_sum[s] / config.num_realizations
        results.extend(SeResult(s, setup_index, k, float(se[k])) for k in range(K))
    return results


def _setup_job(args):
    config, setup_index, schemes = args
    return run_setup(config, setup_index, schemes)


def run_campaign(config: NetworkConfig, schemes=SCHEMES, workers: int = 1) -> Iterator[SeResult]:
    """Stream SeResults setup by setup, in setup order.

    Each setup derives its random streams from ``(seed, setup_index)`` so
    results do not depend on ``workers``.
    """
    schemes = check_schemes(schemes)
    jobs = [(config, s, schemes) for s in range(config.num_setups)]
    if workers <= 1:
        for job in jobs:
            yield from _setup_job(job)
        return
    with ProcessPoolExecutor(max_workers=workers) as pool:
        for rows in pool.map(_setup_job, jobs):
            yield from rows


def cdf(values) -> list[tuple[float, float]]:
    """Empirical CDF as (value, P[X <= value]) at each distinct value."""
    x = np.sort(np.asarray(values, dtype=float).ravel())
    if x.size == 0:
        raise ValueError("cdf of an empty sample")
    uniq, counts = np.unique(x, return_counts=True)
    return list(zip(uniq.tolist(), (np.cumsum(counts) / x.size).tolist()))
