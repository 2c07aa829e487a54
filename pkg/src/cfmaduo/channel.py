"""Channel realizations, despread pilots and MMSE channel estimation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .assignment import ServingAssignment
from .config import NetworkConfig
from .linalg import hermitian_part, hpd_solve
from .topology import ChannelStatistics

CHANNEL_STREAM = 1
ALL_UES = "all_ues"
SERVED_ONLY = "served_only"
SCOPES = (ALL_UES, SERVED_ONLY)


def complex_normal(rng, shape, variance=1.0):
    return np.sqrt(variance / 2) * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def realization_rng(config: NetworkConfig, setup_index: int, realization_index: int):
    return np.random.default_rng([config.seed, CHANNEL_STREAM, setup_index, realization_index])


@dataclass(frozen=True)
class ErrorStatistics:
    """Realization-independent quantities of MMSE estimation for one setup."""

    Psi: np.ndarray  # (L, tau_p, N, N)
    C: np.ndarray  # (L, K, N, N)
    filt: np.ndarray  # (L, K, N, N): h_hat[j,k] = filt[j,k] @ y_pilot[j, t_k]
    csum_all: np.ndarray  # (L, N, N): sum_i C[j, i]
    csum_served: np.ndarray  # (L, N, N): sum over i in U_j of C[j, i]


def pilot_covariance(stats: ChannelStatistics, assignment: ServingAssignment, config: NetworkConfig):
    """Psi[j, t] = sum_{i on pilot t} p tau_p R[j, i] + sigma^2 I."""
    L, K, N = stats.shape
    onehot = np.zeros((K, config.tau_p))
    onehot[np.arange(K), assignment.pilot_of] = 1.0
    Psi = config.p * config.tau_p * np.einsum("kt,jknm->jtnm", onehot, stats.R)
    return Psi + config.noise_power * np.eye(N)


def error_statistics(
    stats: ChannelStatistics, assignment: ServingAssignment, config: NetworkConfig
) -> ErrorStatistics:
    Psi = pilot_covariance(stats, assignment, config)
    R = stats.R
    Psi_k = Psi[:, assignment.pilot_of]
    PsiInvR = hpd_solve(Psi_k, R)
    scale = np.sqrt(config.p * config.tau_p)
    filt = scale * np.conj(np.swapaxes(PsiInvR, -1, -2))
    C = hermitian_part(R - config.p * config.tau_p * R @ PsiInvR)
    served = assignment.serves.astype(float)
    return ErrorStatistics(
        Psi=Psi,
        C=C,
        filt=filt,
        csum_all=C.sum(axis=1),
        csum_served=np.einsum("jk,jknm->jnm", served, C),
    )


def draw_channels(sqrt_R, rng) -> np.ndarray:
    """h[j, k] = R[j, k]^(1/2) w with w ~ CN(0, I); shape (L, K, N)."""
    w = complex_normal(rng, sqrt_R.shape[:-1])
    return np.einsum("jknm,jkm->jkn", sqrt_R, w)


def despread_pilots(h, assignment: ServingAssignment, config: NetworkConfig, noise) -> np.ndarray:
    """y_pilot[j, t] = sum_{i on pilot t} sqrt(p tau_p) h[j, i] + noise[j, t]."""
    K = h.shape[1]
    onehot = np.zeros((K, config.tau_p))
    onehot[np.arange(K), assignment.pilot_of] = 1.0
    return np.sqrt(config.p * config.tau_p) * np.einsum("kt,jkn->jtn", onehot, h) + noise


@dataclass(frozen=True)
class ChannelEstimates:
    h_hat: np.ndarray  # (L, K, N), zero outside scope
    in_scope: np.ndarray  # (L, K) bool
    errors: ErrorStatistics
    scope: str

    @property
    def C(self):
        return self.errors.C

    def get(self, j: int, k: int) -> np.ndarray:
        if not self.in_scope[j, k]:
            raise LookupError(f"AP {j} holds no estimate of UE {k} under scope {self.scope!r}")
        return self.h_hat[j, k]

    def restrict(self, assignment: ServingAssignment) -> "ChannelEstimates":
        """The served-only view of an all-UE estimate set."""
        mask = self.in_scope & assignment.serves
        return ChannelEstimates(self.h_hat * mask[..., None], mask, self.errors, SERVED_ONLY)


def mmse_estimate(
    y_pilot,
    stats: ChannelStatistics,
    assignment: ServingAssignment,
    config: NetworkConfig,
    scope: str = ALL_UES,
    errors: ErrorStatistics | None = None,
) -> ChannelEstimates:
    """MMSE estimates of every (AP, UE) pair in ``scope``.

    ``scope='all_ues'`` estimates all K UEs at every AP; ``'served_only'``
    only the pairs with ``k in U_j``.
    """
    if scope not in SCOPES:
        raise ValueError(f"unknown scope {scope!r}")
    if errors is None:
        errors = error_statistics(stats, assignment, config)
    y_k = y_pilot[:, assignment.pilot_of]
    h_hat = np.einsum("jknm,jkm->jkn", errors.filt, y_k)
    full = ChannelEstimates(h_hat, np.ones(assignment.serves.shape, dtype=bool), errors, ALL_UES)
    return full if scope == ALL_UES else full.restrict(assignment)


@dataclass(frozen=True)
class ChannelState:
    """One coherence block: true channels, pilot observations, estimates."""

    h: np.ndarray  # (L, K, N)
    pilot_noise: np.ndarray  # (L, tau_p, N)
    y_pilot: np.ndarray  # (L, tau_p, N)
    estimates: ChannelEstimates  # all-UE scope


def draw_realization(
    stats: ChannelStatistics,
    assignment: ServingAssignment,
    config: NetworkConfig,
    errors: ErrorStatistics,
    sqrt_R,
    setup_index: int,
    realization_index: int,
) -> ChannelState:
    rng = realization_rng(config, setup_index, realization_index)
    h = draw_channels(sqrt_R, rng)
    L, _, N = h.shape
    noise = complex_normal(rng, (L, config.tau_p, N), config.noise_power)
    y = despread_pilots(h, assignment, config, noise)
    est = mmse_estimate(y, stats, assignment, config, ALL_UES, errors)
    return ChannelState(h, noise, y, est)


def received_signal(h, s, noise) -> np.ndarray:
    """Data-phase observation y[j] = sum_i h[j, i] s[i] + noise[j], shape (L, N)."""
    return np.einsum("jkn,k->jn", h, s) + noise
