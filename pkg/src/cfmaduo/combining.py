"""Baseline receive combiners and large-scale fading decoding.

Centralized combiners (C-MMSE, P-MMSE) act on the stacked antennas of the
serving cluster ``A_k``; local combiners (L-MMSE, LP-MMSE) act on one AP.
No normalization is applied: every SINR downstream is a ratio of quadratic
forms in the combiner.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .assignment import ServingAssignment
from .channel import ChannelEstimates
from .config import NetworkConfig
from .errors import StatisticsError
from .linalg import hpd_solve

OPTIMAL = "optimal"
NEARLY_OPTIMAL = "nearly_optimal"


def soft_local_estimate(v, y_j) -> complex:
    """v^H y_j."""
    return complex(np.vdot(v, y_j))


@dataclass(frozen=True)
class LocalCombiners:
    V: np.ndarray  # (L, K, N), zero on unserved pairs
    serves: np.ndarray  # (L, K) bool
    partial: bool

    def get(self, j: int, k: int) -> np.ndarray:
        if not self.serves[j, k]:
            raise LookupError(f"AP {j} does not serve UE {k}")
        return self.V[j, k]

    def soft_estimates(self, y) -> np.ndarray:
        """All soft local estimates for data observation ``y`` (L, N); (L, K)."""
        return np.einsum("jkn,jn->jk", self.V.conj(), y) * self.serves

    def soft_estimate(self, y_j, j: int, k: int) -> complex:
        return soft_local_estimate(self.get(j, k), y_j)


def _require(est: ChannelEstimates, aps, ues):
    if not est.in_scope[np.ix_(aps, ues)].all():
        raise LookupError(f"estimates missing at APs {list(aps)} for UEs {list(ues)} (scope {est.scope!r})")


def local_combiners(
    est: ChannelEstimates, assignment: ServingAssignment, config: NetworkConfig, partial: bool
) -> LocalCombiners:
    """L-MMSE (``partial=False``) or LP-MMSE (``partial=True``) at every AP.

    v[j, k] = p (sum_i p (h_hat[j,i] h_hat[j,i]^H + C[j,i]) + sigma^2 I)^-1 h_hat[j,k]
    with i over all UEs (L-MMSE) or over U_j (LP-MMSE).
    """
    serves = assignment.serves
    if partial:
        H = est.h_hat * serves[..., None]
        if not est.in_scope[serves].all():
            raise LookupError("LP-MMSE needs estimates of all served UEs")
        csum = est.errors.csum_served
    else:
        if not est.in_scope[serves.any(axis=1)].all():
            raise LookupError("L-MMSE needs all-UE estimates at every serving AP")
        H = est.h_hat
        csum = est.errors.csum_all
    p = config.p
    N = H.shape[-1]
    A = p * np.einsum("jin,jim->jnm", H, H.conj()) + p * csum + config.noise_power * np.eye(N)
    V = p * hpd_solve(A, np.swapaxes(H, 1, 2))
    V = np.swapaxes(V, 1, 2) * serves[..., None]
    return LocalCombiners(V, serves, partial)


def _local_one(est, assignment, config, j, k, ues, csum):
    if not assignment.serves[j, k]:
        raise LookupError(f"AP {j} does not serve UE {k}")
    _require(est, [j], ues)
    H = est.h_hat[j, ues]  # (|ues|, N)
    p = config.p
    N = H.shape[-1]
    A = p * (H.T @ H.conj()) + p * csum + config.noise_power * np.eye(N)
    return p * hpd_solve(A, est.h_hat[j, k])


def l_mmse(est, assignment, config, j, k) -> np.ndarray:
    return _local_one(est, assignment, config, j, k, np.arange(assignment.K), est.errors.csum_all[j])


def lp_mmse(est, assignment, config, j, k) -> np.ndarray:
    return _local_one(est, assignment, config, j, k, assignment.served_ues(j), est.errors.csum_served[j])


def stack_aps(x) -> np.ndarray:
    """(|A|, ..., N) per-AP blocks -> stacked (|A| N, ...) antenna axis."""
    x = np.moveaxis(x, -1, 1)
    return x.reshape((x.shape[0] * x.shape[1],) + x.shape[2:])


def block_diag_stack(blocks) -> np.ndarray:
    n_blocks, N, _ = blocks.shape
    out = np.zeros((n_blocks * N, n_blocks * N), dtype=blocks.dtype)
    for b in range(n_blocks):
        out[b * N : (b + 1) * N, b * N : (b + 1) * N] = blocks[b]
    return out


def centralized_matrix(est, config, aps, ues) -> np.ndarray:
    """sum_{i in ues} p D(h_hat_i h_hat_i^H + C_i)D + sigma^2 I over the stacked ``aps``."""
    Hs = stack_aps(est.h_hat[aps][:, ues])
    csum = est.errors.C[aps][:, ues].sum(axis=1)
    p = config.p
    M = Hs.shape[0]
    return p * Hs @ Hs.conj().T + p * block_diag_stack(csum) + config.noise_power * np.eye(M)


def _centralized(est, assignment, config, k, ues):
    aps = assignment.serving_aps(k)
    _require(est, aps, ues)
    B = centralized_matrix(est, config, aps, ues)
    return config.p * hpd_solve(B, stack_aps(est.h_hat[aps, k]))


def c_mmse(est, assignment, config, k) -> np.ndarray:
    """Centralized MMSE with every UE's CSI, over the stacked antennas of A_k."""
    return _centralized(est, assignment, config, k, np.arange(assignment.K))


def p_mmse(est, assignment, config, k) -> np.ndarray:
    """Partial MMSE: only the partners S_k enter the matrix."""
    return _centralized(est, assignment, config, k, assignment.partners(k))


# -- large-scale fading decoding ---------------------------------------------


class LsfdMoments:
    """Running sample moments of the effective gains g_ki[j] = v_jk^H h_ji.

    Gains from different APs are independent, so the second-moment matrix
    of g_ki is estimated as diag(E|g|^2) off-diagonal-completed by the
    outer product of the sample means. Accumulation order is the call
    order, which keeps results reproducible.
    """

    def __init__(self, assignment: ServingAssignment):
        self.assignment = assignment
        self.clusters = [assignment.serving_aps(k) for k in range(assignment.K)]
        K = assignment.K
        self.count = 0
        self.sum_g = [np.zeros((len(A), K), dtype=complex) for A in self.clusters]
        self.sum_abs2 = [np.zeros((len(A), K)) for A in self.clusters]
        self.sum_vnorm = [np.zeros(len(A)) for A in self.clusters]

    def add(self, V, h) -> None:
        G = np.einsum("jkn,jin->jki", V.conj(), h)
        vnorm = np.einsum("jkn,jkn->jk", V.conj(), V).real
        for k, A in enumerate(self.clusters):
            g = G[A, k, :]
            self.sum_g[k] += g
            self.sum_abs2[k] += np.abs(g) ** 2
            self.sum_vnorm[k] += vnorm[A, k]
        self.count += 1

    def for_ue(self, k: int) -> "UeMoments":
        if self.count < 2:
            raise StatisticsError(f"need at least 2 Monte Carlo samples, have {self.count}")
        n = self.count
        return UeMoments(k, self.sum_g[k] / n, self.sum_abs2[k] / n, self.sum_vnorm[k] / n, n)


@dataclass(frozen=True)
class UeMoments:
    ue: int
    mean_g: np.ndarray  # (|A_k|, K): E[g_ki]
    mean_abs2: np.ndarray  # (|A_k|, K): E|g_ki|^2
    lam: np.ndarray  # (|A_k|,): E||v_jk||^2
    count: int

    @property
    def m(self) -> np.ndarray:
        return self.mean_g[:, self.ue]

    def second_moment_sum(self, ues) -> np.ndarray:
        """sum_{i in ues} E[g_ki g_ki^H]."""
        mg = self.mean_g[:, ues]
        S = mg @ mg.conj().T
        diag = self.mean_abs2[:, ues].sum(axis=1) - (np.abs(mg) ** 2).sum(axis=1)
        return S + np.diag(diag)

    def interference_matrix(self, config: NetworkConfig, ues=None) -> np.ndarray:
        """sum_i p M_ki - p m m^H + sigma^2 Lambda, i over ``ues`` (default all)."""
        if ues is None:
            ues = np.arange(self.mean_g.shape[1])
        m = self.m
        p = config.p
        return p * self.second_moment_sum(ues) - p * np.outer(m, m.conj()) + config.noise_power * np.diag(self.lam)


@dataclass(frozen=True)
class LsfdWeights:
    ue: int
    a: np.ndarray  # one weight per serving AP, ascending AP order
    moments: UeMoments
    mode: str


def lsfd_weights(
    moments: UeMoments, config: NetworkConfig, mode: str = OPTIMAL, partners=None
) -> LsfdWeights:
    """a_k = Q^-1 m_k with Q the moment-based interference matrix.

    ``mode='optimal'`` sums interference over all UEs; ``'nearly_optimal'``
    only over ``partners`` (S_k).
    """
    if mode == OPTIMAL:
        Q = moments.interference_matrix(config)
    elif mode == NEARLY_OPTIMAL:
        if partners is None:
            raise ValueError("nearly_optimal LSFD needs the partner set")
        Q = moments.interference_matrix(config, np.asarray(sorted(partners)))
    else:
        raise ValueError(f"unknown LSFD mode {mode!r}")
    return LsfdWeights(moments.ue, hpd_solve(Q, moments.m), moments, mode)


def lsfd_sinr(a, moments: UeMoments, config: NetworkConfig) -> float:
    """Effective SINR of fusion weights ``a`` with interference from all UEs."""
    a = np.asarray(a)
    m = moments.m
    Q = moments.interference_matrix(config)
    num = config.p * abs(np.vdot(a, m)) ** 2
    den = np.vdot(a, Q @ a).real
    if den <= 0:
        raise StatisticsError("degenerate moment matrix")
    return float(num / den)
