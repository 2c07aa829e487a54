"""Master-assisted distributed uplink operation.

Each UE ``k`` has a master AP ``l`` and additional serving APs (ASAPs)
``A_k \\ {l}``. Every ASAP combines locally, then sends the master its soft
estimate, its fused CSI ``v^H h_hat[j, i]`` and the scalar ``mu`` (error plus
noise power seen through its combiner). The master stacks its own antennas
with the ASAP soft estimates and combines with ``B^-1 z_hat``, which
maximizes the resulting generalized Rayleigh quotient.

In the scalable variant the ASAPs use LP-MMSE, report fused CSI and ``mu``
only over their own served UEs, and the master only uses its served UEs'
estimates. Missing fused CSI entries are completed with zeros.

ASAP rows are always in ascending AP index order.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .assignment import ServingAssignment
from .channel import ALL_UES, SERVED_ONLY, SCOPES, ChannelEstimates
from .combining import LocalCombiners, l_mmse, lp_mmse
from .config import NetworkConfig
from .errors import ProtocolError
from .linalg import hpd_solve

_HEADER = struct.Struct("<II")
_COMPLEX = struct.Struct("<dd")
_REAL = struct.Struct("<d")


@dataclass(frozen=True)
class AsapMessage:
    ue: int
    asap: int
    soft_estimate: complex | None  # None for a CSI-only message
    fused_ues: np.ndarray  # ascending UE indices covered by fused_csi
    fused_csi: np.ndarray  # v^H h_hat[asap, i] for i in fused_ues
    mu: float

    @property
    def omega(self) -> int:
        return len(self.fused_ues)

    def fused(self, i: int) -> complex:
        pos = np.searchsorted(self.fused_ues, i)
        if pos == len(self.fused_ues) or self.fused_ues[pos] != i:
            raise LookupError(f"ASAP {self.asap} sent no fused CSI for UE {i}")
        return complex(self.fused_csi[pos])

    def to_bytes(self) -> bytes:
        """[k: u32][j: u32][soft: 2 f64][omega x 2 f64][mu: f64], little endian."""
        soft = complex("nan+nanj") if self.soft_estimate is None else self.soft_estimate
        parts = [_HEADER.pack(self.ue, self.asap), _COMPLEX.pack(soft.real, soft.imag)]
        parts += [_COMPLEX.pack(c.real, c.imag) for c in self.fused_csi]
        parts.append(_REAL.pack(self.mu))
        return b"".join(parts)

    @classmethod
    def from_bytes(cls, blob: bytes, fused_ues) -> "AsapMessage":
        """Decode; ``fused_ues`` is known to the master from the assignment."""
        omega = wire_csi_count(blob) - 1
        fused_ues = np.asarray(fused_ues)
        if len(fused_ues) != omega:
            raise ProtocolError(f"message carries {omega} fused entries, expected {len(fused_ues)}")
        ue, asap = _HEADER.unpack_from(blob, 0)
        off = _HEADER.size
        re, im = _COMPLEX.unpack_from(blob, off)
        soft = None if np.isnan(re) else complex(re, im)
        off += _COMPLEX.size
        fused = np.array(
            [complex(*_COMPLEX.unpack_from(blob, off + n * _COMPLEX.size)) for n in range(omega)]
        )
        (mu,) = _REAL.unpack_from(blob, off + omega * _COMPLEX.size)
        return cls(ue, asap, soft, fused_ues, fused, mu)


def wire_csi_count(blob: bytes) -> int:
    """Per-block CSI scalars in an encoded message: omega fused entries plus mu."""
    body = len(blob) - _HEADER.size - _COMPLEX.size - _REAL.size
    if body < 0 or body % _COMPLEX.size:
        raise ProtocolError(f"malformed message of {len(blob)} bytes")
    return body // _COMPLEX.size + 1


def _scope_ues(assignment, j, scope):
    if scope == ALL_UES:
        return np.arange(assignment.K)
    if scope == SERVED_ONLY:
        return assignment.served_ues(j)
    raise ValueError(f"unknown scope {scope!r}")


def _csum(est: ChannelEstimates, j, scope):
    return est.errors.csum_all[j] if scope == ALL_UES else est.errors.csum_served[j]


def hermitian_product(v, csum, config: NetworkConfig) -> float:
    """mu = v^H (p sum C + sigma^2 I) v."""
    Q = config.p * csum + config.noise_power * np.eye(len(v))
    return float(np.vdot(v, Q @ v).real)


def asap_message(
    est: ChannelEstimates,
    assignment: ServingAssignment,
    config: NetworkConfig,
    j: int,
    k: int,
    scope: str = ALL_UES,
    y_j=None,
    v=None,
) -> AsapMessage:
    """Message from ASAP ``j`` to the master of ``k``.

    ``v`` defaults to L-MMSE (``scope='all_ues'``) or LP-MMSE
    (``'served_only'``).
    """
    if scope not in SCOPES:
        raise ValueError(f"unknown scope {scope!r}")
    if j == assignment.master_of[k]:
        raise ValueError(f"AP {j} is the master of UE {k}; masters do not message themselves")
    if not assignment.serves[j, k]:
        raise LookupError(f"AP {j} does not serve UE {k}")
    if v is None:
        v = (l_mmse if scope == ALL_UES else lp_mmse)(est, assignment, config, j, k)
    ues = _scope_ues(assignment, j, scope)
    if not est.in_scope[j, ues].all():
        raise LookupError(f"AP {j} lacks estimates required by scope {scope!r}")
    fused = est.h_hat[j, ues] @ np.conj(v)
    soft = None if y_j is None else complex(np.vdot(v, y_j))
    return AsapMessage(k, j, soft, ues, fused, hermitian_product(v, _csum(est, j, scope), config))


@dataclass(frozen=True)
class MapProblem:
    """The master's combining problem for one UE.

    ``B`` is the covariance of the interference-plus-noise part of the
    stacked observation [y_l; s_hat_asaps] given the channel estimates.
    """

    ue: int
    master: int
    asaps: np.ndarray
    z_hat: np.ndarray  # (M,)
    B: np.ndarray  # (M, M)
    H_master: np.ndarray  # (N, K-1)
    G: np.ndarray  # (|A_k|-1, K-1)
    F: np.ndarray  # (|A_k|-1,) real

    @property
    def N(self) -> int:
        return self.H_master.shape[0]

    @property
    def M(self) -> int:
        return len(self.z_hat)


def assemble_map_problem(k, master, asaps, h_master, csum_master, fused, mu, config) -> MapProblem:
    """Build z_hat and B from the master's CSI and the ASAP reports.

    ``h_master`` is (N, K) and ``fused`` is (|asaps|, K); both zero where the
    corresponding value is not available.
    """
    p = config.p
    N, K = h_master.shape
    others = np.arange(K) != k
    Hm = h_master[:, others]
    G = fused[:, others]
    mu = np.asarray(mu, dtype=float)
    top = p * (Hm @ Hm.conj().T + csum_master) + config.noise_power * np.eye(N)
    cross = p * Hm @ G.conj().T
    bottom = p * G @ G.conj().T + np.diag(mu)
    B = np.block([[top, cross], [cross.conj().T, bottom]])
    z = np.concatenate([h_master[:, k], fused[:, k]])
    return MapProblem(k, master, np.asarray(asaps), z, B, Hm, G, mu)


def build_map_problem(
    est: ChannelEstimates,
    messages,
    assignment: ServingAssignment,
    config: NetworkConfig,
    k: int,
    scope: str = ALL_UES,
) -> MapProblem:
    """Assemble the master's problem from its own estimates and ASAP messages."""
    l = int(assignment.master_of[k])
    asaps = assignment.asaps(k)
    by_ap = {m.asap: m for m in messages}
    if set(by_ap) != set(asaps.tolist()):
        raise ProtocolError(
            f"UE {k}: expected messages from ASAPs {asaps.tolist()}, got {sorted(by_ap)}"
        )
    K = assignment.K
    fused = np.zeros((len(asaps), K), dtype=complex)
    mu = np.zeros(len(asaps))
    for r, j in enumerate(asaps):
        msg = by_ap[j]
        if msg.ue != k:
            raise ProtocolError(f"message from AP {j} concerns UE {msg.ue}, not {k}")
        if not np.array_equal(msg.fused_ues, _scope_ues(assignment, j, scope)):
            raise ProtocolError(f"AP {j}: fused CSI domain does not match scope {scope!r}")
        fused[r, msg.fused_ues] = msg.fused_csi
        mu[r] = msg.mu
    ues = _scope_ues(assignment, l, scope)
    if not est.in_scope[l, ues].all():
        raise LookupError(f"master AP {l} lacks estimates required by scope {scope!r}")
    h_master = np.zeros((est.h_hat.shape[-1], K), dtype=complex)
    h_master[:, ues] = est.h_hat[l, ues].T
    return assemble_map_problem(k, l, asaps, h_master, _csum(est, l, scope), fused, mu, config)


def problem_from_combiners(
    est: ChannelEstimates,
    local: LocalCombiners,
    assignment: ServingAssignment,
    config: NetworkConfig,
    k: int,
    scope: str = ALL_UES,
) -> MapProblem:
    """Same result as messages + build_map_problem, without message objects."""
    l = int(assignment.master_of[k])
    asaps = assignment.asaps(k)
    K = assignment.K
    V = local.V[asaps, k]  # (R, N)
    if scope == ALL_UES:
        if not est.in_scope[np.append(asaps, l)].all():
            raise LookupError("all-UE scope needs all-UE estimates")
        fused = np.einsum("rn,rin->ri", V.conj(), est.h_hat[asaps])
        csum = est.errors.csum_all
        h_master = est.h_hat[l].T
    else:
        mask = assignment.serves[asaps]
        fused = np.einsum("rn,rin->ri", V.conj(), est.h_hat[asaps]) * mask
        csum = est.errors.csum_served
        h_master = (est.h_hat[l] * assignment.serves[l][:, None]).T
    Q = config.p * csum[asaps] + config.noise_power * np.eye(V.shape[-1])
    mu = np.einsum("rn,rnm,rm->r", V.conj(), Q, V).real
    return assemble_map_problem(k, l, asaps, h_master, csum[l], fused, mu, config)


@dataclass(frozen=True)
class MaduoCombiner:
    v_local: np.ndarray  # acts on y_l
    a: np.ndarray  # acts on ASAP soft estimates

    @property
    def stacked(self) -> np.ndarray:
        return np.concatenate([self.v_local, self.a])


def map_combiner(problem: MapProblem) -> MaduoCombiner:
    """v_k = B^-1 z_hat, split into the local and ASAP parts."""
    v = hpd_solve(problem.B, problem.z_hat)
    return MaduoCombiner(v[: problem.N], v[problem.N :])


def rayleigh_sinr(v, z, B, p: float) -> float:
    """p |v^H z|^2 / (v^H B v)."""
    v = np.asarray(v)
    if not np.any(v):
        raise ValueError("combiner must be nonzero")
    return float(p * abs(np.vdot(v, z)) ** 2 / np.vdot(v, B @ v).real)


def maduo_sinr(problem: MapProblem, combiner, config: NetworkConfig) -> float:
    v = combiner.stacked if isinstance(combiner, MaduoCombiner) else combiner
    return rayleigh_sinr(v, problem.z_hat, problem.B, config.p)


def optimal_sinr(problem: MapProblem, config: NetworkConfig) -> float:
    """p z^H B^-1 z, the SINR attained by ``map_combiner``."""
    return float(config.p * np.vdot(problem.z_hat, hpd_solve(problem.B, problem.z_hat)).real)


def master_only_sinr(problem: MapProblem, config: NetworkConfig) -> float:
    """SINR when the master ignores the ASAPs (a = 0)."""
    N = problem.N
    h = problem.z_hat[:N]
    return float(config.p * np.vdot(h, hpd_solve(problem.B[:N, :N], h)).real)


def final_estimate(combiner: MaduoCombiner, y_l, messages) -> complex:
    """v_local^H y_l + sum_j a_j^* s_hat_j over ASAPs in ascending order."""
    msgs = sorted(messages, key=lambda m: m.asap)
    if len(msgs) != len(combiner.a):
        raise ProtocolError(f"{len(msgs)} messages for {len(combiner.a)} ASAP weights")
    soft = np.array([m.soft_estimate for m in msgs], dtype=complex)
    return complex(np.vdot(combiner.v_local, y_l) + np.vdot(combiner.a, soft))
