"""Fronthaul signaling and complex-multiplication counts per coherence block.

Multiplication convention (one place, applied to every scheme):

* Gram accumulation of ``|S|`` outer products of length-M vectors, upper
  triangle only: ``|S| (M^2 + M) / 2``.
* Hermitian solve via LDL^H: ``(M^3 - M) / 3`` for the factorization plus
  ``M^2`` for the two triangular solves and the diagonal scaling.
* Data combining: ``M`` per data symbol, ``M tau_u`` per block.
* MADUO message formation at an ASAP: ``Omega N`` for the fused CSI plus
  ``N^2 + N`` for the quadratic form ``mu``.

Channel estimation and anything computed from statistics only (error
covariance sums, LSFD weights) are excluded.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .assignment import ServingAssignment
from .config import NetworkConfig

FRONTHAUL_SCHEMES = ("centralized", "distributed", "maduo", "maduo_scl")
COMPLEXITY_SCHEMES = ("c_mmse", "p_mmse", "l_mmse", "lp_mmse", "maduo", "maduo_scl")


def gram_mults(n_terms: int, M: int) -> int:
    return n_terms * (M * M + M) // 2


def solve_mults(M: int) -> int:
    return (M**3 - M) // 3 + M * M


def combine_mults(M: int, tau_u: int) -> int:
    return M * tau_u


def message_mults(omega: int, N: int) -> int:
    return omega * N + N * N + N


def fronthaul_maduo(assignment: ServingAssignment, config: NetworkConfig, scalable: bool = False) -> int:
    """sum_j (tau_u + Omega + 1)(|U_j| - |U_j^master|), Omega = K or |U_j|."""
    served = assignment.serves.sum(axis=1)
    mastered = np.bincount(assignment.master_of, minlength=assignment.L)
    omega = served if scalable else np.full(assignment.L, assignment.K)
    return int(np.sum((config.tau_u + omega + 1) * (served - mastered)))


def fronthaul_baselines(assignment: ServingAssignment, config: NetworkConfig) -> tuple[int, int]:
    """(centralized, distributed) complex scalars per block.

    Centralized: every AP forwards all tau_c pilot and data samples on all
    N antennas. Distributed: one soft estimate per served UE per data symbol.
    """
    centralized = config.tau_c * config.N * config.L
    distributed = config.tau_u * int(assignment.serves.sum())
    return centralized, distributed


def fronthaul_all(assignment: ServingAssignment, config: NetworkConfig) -> dict[str, int]:
    c, d = fronthaul_baselines(assignment, config)
    return {
        "centralized": c,
        "distributed": d,
        "maduo": fronthaul_maduo(assignment, config, False),
        "maduo_scl": fronthaul_maduo(assignment, config, True),
    }


def _master_interferers(assignment: ServingAssignment, k: int) -> int:
    """UEs other than k with a nonzero column in the scalable master problem."""
    l = assignment.master_of[k]
    cover = assignment.serves[l].copy()
    for j in assignment.asaps(k):
        cover |= assignment.serves[j]
    cover[k] = False
    return int(cover.sum())


def mult_count(scheme: str, assignment: ServingAssignment, config: NetworkConfig, k: int) -> int:
    """Complex multiplications to serve UE ``k`` for one coherence block."""
    N, K, tau_u = config.N, assignment.K, config.tau_u
    A = assignment.serving_aps(k)
    nA = len(A)
    if scheme in ("c_mmse", "p_mmse"):
        M = N * nA
        S = K if scheme == "c_mmse" else len(assignment.partners(k))
        return gram_mults(S, M) + solve_mults(M) + combine_mults(M, tau_u)
    if scheme in ("l_mmse", "lp_mmse"):
        total = 0
        for j in A:
            S = K if scheme == "l_mmse" else int(assignment.serves[j].sum())
            total += gram_mults(S, N) + solve_mults(N) + combine_mults(N, tau_u)
        return total + combine_mults(nA, tau_u)  # LSFD fusion at the CPU
    if scheme in ("maduo", "maduo_scl"):
        scalable = scheme == "maduo_scl"
        total = 0
        for j in assignment.asaps(k):
            S = int(assignment.serves[j].sum()) if scalable else K
            total += gram_mults(S, N) + solve_mults(N) + combine_mults(N, tau_u)
            total += message_mults(S, N)
        M = N + nA - 1
        S = _master_interferers(assignment, k) if scalable else K - 1
        return total + gram_mults(S, M) + solve_mults(M) + combine_mults(M, tau_u)
    raise ValueError(f"unknown scheme {scheme!r}")


@dataclass(frozen=True)
class CostReport:
    scheme: str
    K: int
    fronthaul: int | None  # None for schemes without a fronthaul model of their own
    per_ue_mults: np.ndarray

    @property
    def mean_mults(self) -> float:
        return float(np.mean(self.per_ue_mults))


_FRONTHAUL_OF = {
    "c_mmse": "centralized",
    "p_mmse": "centralized",
    "l_mmse": "distributed",
    "lp_mmse": "distributed",
    "maduo": "maduo",
    "maduo_scl": "maduo_scl",
}


def cost_reports(assignment: ServingAssignment, config: NetworkConfig) -> dict[str, CostReport]:
    fh = fronthaul_all(assignment, config)
    return {
        s: CostReport(
            s,
            assignment.K,
            fh[_FRONTHAUL_OF[s]],
            np.array([mult_count(s, assignment, config, k) for k in range(assignment.K)]),
        )
        for s in COMPLEXITY_SCHEMES
    }
