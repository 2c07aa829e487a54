"""Random network drops on a torus and their large-scale channel statistics."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import NetworkConfig
from .linalg import psd_sqrt

SETUP_STREAM = 0


def wrap_offsets(side: float) -> np.ndarray:
    """The 9 translations (3x3 grid of copies) implementing the torus."""
    steps = np.array([-side, 0.0, side])
    return np.array([(dx, dy) for dx in steps for dy in steps])


def wrap_displacement(a, b, side):
    """Shortest displacement vector from ``a`` to ``b`` on the torus.

    Broadcasts over leading dimensions of ``a`` and ``b`` (last axis = x, y).
    """
    d = np.asarray(b, dtype=float) - np.asarray(a, dtype=float)
    return d - side * np.round(d / side)


def wrap_distance(a, b, side):
    """Minimum Euclidean distance between ``a`` and the 9 shifted copies of ``b``."""
    return np.linalg.norm(wrap_displacement(a, b, side), axis=-1)


def local_scattering_correlation(nominal_angle, asd_deg, N, antenna_spacing=0.5):
    """Normalized spatial correlation of a uniform linear array.

    Gaussian local scattering around ``nominal_angle`` (radians), using the
    small-angle closed form. Entry ``(m, n)`` depends only on ``m - n`` and
    the diagonal is one. ``nominal_angle`` may be an array, in which case
    the result has shape ``angle.shape + (N, N)``.
    """
    theta = np.asarray(nominal_angle, dtype=float)[..., None, None]
    asd = np.deg2rad(asd_deg)
    lag = np.subtract.outer(np.arange(N), np.arange(N))
    arg = 2 * np.pi * antenna_spacing * lag
    return np.exp(1j * arg * np.sin(theta)) * np.exp(-0.5 * asd**2 * (arg * np.cos(theta)) ** 2)


@dataclass(frozen=True)
class Geometry:
    ap_positions: np.ndarray  # (L, 2)
    ue_positions: np.ndarray  # (K, 2)
    side_length: float

    @property
    def wrap_offsets(self):
        return wrap_offsets(self.side_length)

    def distances(self) -> np.ndarray:
        """Horizontal wrap-around AP-to-UE distances, shape (L, K)."""
        return wrap_distance(self.ap_positions[:, None, :], self.ue_positions[None, :, :], self.side_length)

    def angles(self) -> np.ndarray:
        """Azimuth from each AP to each UE (nearest copy), shape (L, K)."""
        d = wrap_displacement(self.ap_positions[:, None, :], self.ue_positions[None, :, :], self.side_length)
        return np.arctan2(d[..., 1], d[..., 0])


@dataclass(frozen=True)
class ChannelStatistics:
    beta: np.ndarray  # (L, K) linear gains
    R: np.ndarray  # (L, K, N, N)

    @property
    def shape(self):
        L, K, N, _ = self.R.shape
        return L, K, N

    def sqrt_R(self) -> np.ndarray:
        return psd_sqrt(self.R)


def setup_rng(config: NetworkConfig, setup_index: int) -> np.random.Generator:
    return np.random.default_rng([config.seed, SETUP_STREAM, setup_index])


def shadowing_db(rng, geometry: Geometry, config: NetworkConfig) -> np.ndarray:
    """Log-normal shadowing terms in dB, shape (L, K).

    At each AP, the terms of different UEs are correlated as
    ``2 ** (-distance / shadow_decorr_m)``; different APs are independent.
    """
    L, K = len(geometry.ap_positions), len(geometry.ue_positions)
    white = rng.standard_normal((L, K))
    if config.shadow_decorr_m > 0 and K > 1:
        ue = geometry.ue_positions
        d = wrap_distance(ue[:, None, :], ue[None, :, :], config.side_length)
        corr = 2.0 ** (-d / config.shadow_decorr_m)
        white = white @ psd_sqrt(corr).real.T
    return config.shadow_std_db * white


def generate_setup(config: NetworkConfig, setup_index: int) -> tuple[Geometry, ChannelStatistics]:
    """Drop APs and UEs uniformly on the square and compute ``beta`` and ``R``.

    Deterministic in ``(config.seed, setup_index)``.
    """
    config.validate()
    rng = setup_rng(config, setup_index)
    side = config.side_length
    ap = rng.uniform(0.0, side, size=(config.L, 2))
    ue = rng.uniform(0.0, side, size=(config.K, 2))
    geometry = Geometry(ap, ue, side)

    d3 = np.sqrt(geometry.distances() ** 2 + config.height_diff_m**2)
    gain_db = config.pathloss_const_db - 10 * config.pathloss_exp * np.log10(d3)
    gain_db = gain_db + shadowing_db(rng, geometry, config)
    beta = 10.0 ** (gain_db / 10.0)

    R = beta[..., None, None] * local_scattering_correlation(
        geometry.angles(), config.asd_deg, config.N, config.antenna_spacing_wavelengths
    )
    return geometry, ChannelStatistics(beta, R)

