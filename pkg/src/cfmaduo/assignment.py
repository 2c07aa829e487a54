"""Joint pilot assignment, serving-cluster formation and master-AP selection."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .config import NetworkConfig
from .errors import ConfigurationError, StatisticsError


@dataclass(frozen=True)
class ServingAssignment:
    """Index sets shared by every combining scheme.

    ``serves[j, k]`` is the D-mask: AP ``j`` serves UE ``k``. Pilots and APs
    are 0-based.
    """

    pilot_of: np.ndarray  # (K,) int
    master_of: np.ndarray  # (K,) int
    serves: np.ndarray  # (L, K) bool
    tau_p: int

    @property
    def L(self) -> int:
        return self.serves.shape[0]

    @property
    def K(self) -> int:
        return self.serves.shape[1]

    def copilots(self, t: int) -> np.ndarray:
        return np.flatnonzero(self.pilot_of == t)

    @cached_property
    def copilot_sets(self) -> dict[int, frozenset]:
        return {t: frozenset(self.copilots(t).tolist()) for t in range(self.tau_p)}

    def serving_aps(self, k: int) -> np.ndarray:
        return np.flatnonzero(self.serves[:, k])

    def served_ues(self, j: int) -> np.ndarray:
        return np.flatnonzero(self.serves[j])

    def master_ues(self, j: int) -> np.ndarray:
        return np.flatnonzero(self.master_of == j)

    def asaps(self, k: int) -> np.ndarray:
        """Serving APs of ``k`` other than its master, ascending."""
        A = self.serving_aps(k)
        return A[A != self.master_of[k]]

    @cached_property
    def partner_mask(self) -> np.ndarray:
        """``partner_mask[k, i]``: UEs ``k`` and ``i`` share a serving AP."""
        s = self.serves.astype(np.int64)
        return (s.T @ s) > 0

    def partners(self, k: int) -> np.ndarray:
        return np.flatnonzero(self.partner_mask[k])

    def cluster_sizes(self) -> np.ndarray:
        return self.serves.sum(axis=0)

    def check(self) -> None:
        """Assert the structural invariants; raises AssertionError."""
        K = self.K
        ks = np.arange(K)
        assert np.all(self.serves[self.master_of, ks]), "master must serve its UE"
        assert np.all(self.serves.any(axis=0)), "every UE needs a serving AP"
        assert np.all((0 <= self.pilot_of) & (self.pilot_of < self.tau_p))
        for j in range(self.L):
            mastered = set(self.master_ues(j).tolist())
            for t in range(self.tau_p):
                on_t = set(np.flatnonzero(self.serves[j] & (self.pilot_of == t)).tolist())
                # an AP only serves several co-pilot UEs if it is master of all of them
                assert len(on_t) <= 1 or on_t <= mastered, (j, t, on_t)
        assert np.all(self.partner_mask[ks, ks])

    def rows(self):
        """Debug dump rows ``(k, pilot, master, serving APs)``."""
        for k in range(self.K):
            A = " ".join(str(j) for j in self.serving_aps(k))
            yield k, int(self.pilot_of[k]), int(self.master_of[k]), A

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["ue", "pilot", "master", "serving_aps"])
            w.writerows(self.rows())


def assign(beta, config: NetworkConfig) -> ServingAssignment:
    """Sequential pilot assignment followed by per-pilot cluster formation.

    1. UE ``k`` (in index order) takes the AP with the largest gain as master.
    2. It picks the pilot with the least received pilot power from earlier
       holders at that master (ties: lowest pilot index).
    3. Each AP serves, on every pilot it is not already master for, the
       holder of that pilot with the largest gain (ties: lowest UE index).
    """
    beta = np.asarray(beta, dtype=float)
    if config.tau_p < 1:
        raise ConfigurationError("tau_p must be >= 1")
    if not np.all(np.isfinite(beta)) or np.any(beta <= 0):
        raise StatisticsError("large-scale gains must be finite and positive")
    L, K = beta.shape
    tau_p = config.tau_p

    master = np.argmax(beta, axis=0)
    pilot = np.full(K, -1)
    weight = config.p * tau_p
    for k in range(K):
        interference = np.zeros(tau_p)
        for i in range(k):
            interference[pilot[i]] += weight * beta[master[k], i]
        pilot[k] = int(np.argmin(interference))

    serves = np.zeros((L, K), dtype=bool)
    serves[master, np.arange(K)] = True
    for t in range(tau_p):
        holders = np.flatnonzero(pilot == t)
        if holders.size == 0:
            continue
        for j in range(L):
            if np.any(master[holders] == j):
                continue
            serves[j, holders[np.argmax(beta[j, holders])]] = True

    return ServingAssignment(pilot, master, serves, tau_p)


def partner_set(assignment: ServingAssignment, k: int) -> frozenset:
    """UEs sharing at least one serving AP with ``k`` (always contains ``k``)."""
    return frozenset(assignment.partners(k).tolist())
