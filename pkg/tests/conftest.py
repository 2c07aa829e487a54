import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from cfmaduo.assignment import ServingAssignment
from cfmaduo.channel import ALL_UES, ChannelEstimates, ErrorStatistics
from cfmaduo.config import NetworkConfig
from cfmaduo.evaluation import prepare_setup

settings.register_profile("default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def desk_config(seed=0, **kw):
    base = dict(L=4, N=2, K=3, tau_p=2, side_length=500.0, num_setups=1, num_realizations=1, seed=seed)
    base.update(kw)
    return NetworkConfig(**base)


def desk_instance(seed, **kw):
    """A random small setup and one channel realization."""
    cfg = desk_config(seed, **kw)
    setup = prepare_setup(cfg, 0)
    return setup, setup.realization(0)


def crandn(rng, *shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def random_psd(rng, N, scale=1.0, rank=None):
    X = crandn(rng, N, rank or N)
    return scale * (X @ X.conj().T) / (rank or N)


def hand_assignment(serves, master_of, pilot_of=None, tau_p=None):
    serves = np.asarray(serves, dtype=bool)
    K = serves.shape[1]
    pilot_of = np.arange(K) if pilot_of is None else np.asarray(pilot_of)
    return ServingAssignment(pilot_of, np.asarray(master_of), serves, tau_p or int(pilot_of.max()) + 1)


def hand_estimates(h_hat, C, assignment, in_scope=None):
    """ChannelEstimates from hand-set values (no pilot model behind them)."""
    h_hat = np.asarray(h_hat, dtype=complex)
    C = np.asarray(C, dtype=complex)
    L, K, N = h_hat.shape
    served = assignment.serves.astype(float)
    errors = ErrorStatistics(
        Psi=np.zeros((L, 1, N, N)),
        C=C,
        filt=np.zeros((L, K, N, N)),
        csum_all=C.sum(axis=1),
        csum_served=np.einsum("jk,jknm->jnm", served, C),
    )
    mask = np.ones((L, K), dtype=bool) if in_scope is None else in_scope
    return ChannelEstimates(h_hat * mask[..., None], mask, errors, ALL_UES)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
