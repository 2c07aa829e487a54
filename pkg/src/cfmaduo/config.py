"""Network and campaign parameters."""

from __future__ import annotations

import configparser
import dataclasses
import math
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigurationError


def dbm_to_watt(dbm: float) -> float:
    return 10.0 ** ((dbm - 30.0) / 10.0)


@dataclass(frozen=True)
class NetworkConfig:
    """All scalar parameters of a simulation.

    Powers are in Watts, distances in meters. Defaults reproduce the
    100-AP / 4-antenna / 2x2 km scenario with 200-sample coherence blocks.
    """

    L: int = 100
    N: int = 4
    K: int = 40
    side_length: float = 2000.0
    tau_c: int = 200
    tau_p: int = 10
    p: float = 0.1
    noise_power: float = field(default_factory=lambda: dbm_to_watt(-94.0))
    pathloss_const_db: float = -30.5
    pathloss_exp: float = 3.67
    shadow_std_db: float = 4.0
    shadow_decorr_m: float = 9.0
    height_diff_m: float = 10.0
    asd_deg: float = 15.0
    antenna_spacing_wavelengths: float = 0.5
    num_setups: int = 50
    num_realizations: int = 100
    seed: int = 0

    def __post_init__(self):
        self.validate()

    @property
    def tau_u(self) -> int:
        return self.tau_c - self.tau_p

    @property
    def prelog(self) -> float:
        return self.tau_u / self.tau_c

    def validate(self) -> None:
        for name in ("L", "N", "K", "tau_c", "num_setups", "num_realizations"):
            if getattr(self, name) < 1:
                raise ConfigurationError(f"{name} must be >= 1, got {getattr(self, name)}")
        if self.tau_p < 1:
            raise ConfigurationError(f"tau_p must be >= 1, got {self.tau_p}")
        if self.tau_u <= 0:
            raise ConfigurationError(
                f"tau_c - tau_p must be positive, got {self.tau_c} - {self.tau_p}"
            )
        if self.L * self.N < self.K:
            raise ConfigurationError(
                f"L*N = {self.L * self.N} antennas cannot serve K = {self.K} UEs"
            )
        for name in ("p", "noise_power", "side_length", "antenna_spacing_wavelengths"):
            value = getattr(self, name)
            if not (value > 0 and math.isfinite(value)):
                raise ConfigurationError(f"{name} must be positive and finite, got {value}")
        for name in ("shadow_std_db", "shadow_decorr_m", "height_diff_m", "asd_deg"):
            if getattr(self, name) < 0:
                raise ConfigurationError(f"{name} must be non-negative")
        if not 0 <= self.seed < 2**64:
            raise ConfigurationError("seed must be an unsigned 64-bit integer")

    def replace(self, **changes) -> "NetworkConfig":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


_FIELD_TYPES = {f.name: f.type for f in dataclasses.fields(NetworkConfig)}
_SECTION = "network"


def _coerce(key: str, raw: str):
    kind = _FIELD_TYPES[key]
    try:
        if kind == "int":
            return int(raw, 0)
        return float(raw)
    except ValueError as exc:
        raise ConfigurationError(f"{key}: cannot parse {raw!r} as {kind}") from exc


def parse_config_text(text: str, source: str = "<string>") -> dict:
    """Parse flat ``key = value`` lines into typed overrides.

    Comments start with ``#``. Unknown keys are rejected with the offending
    line number so typos do not silently fall back to defaults.
    """
    parser = configparser.ConfigParser(
        comment_prefixes=("#",), inline_comment_prefixes=("#",), delimiters=("=",)
    )
    parser.optionxform = str
    try:
        parser.read_string(f"[{_SECTION}]\n" + text, source=source)
    except configparser.Error as exc:
        raise ConfigurationError(f"{source}: {exc}") from exc
    lines = text.splitlines()
    values = {}
    for key, raw in parser.items(_SECTION):
        if key not in _FIELD_TYPES:
            lineno = next(
                (i + 1 for i, ln in enumerate(lines) if ln.split("=")[0].strip() == key), "?"
            )
            raise ConfigurationError(f"{source}:{lineno}: unknown key {key!r}")
        values[key] = _coerce(key, raw.strip())
    return values


def load_config(path: str | Path | None = None, **overrides) -> NetworkConfig:
    values = {}
    if path is not None:
        path = Path(path)
        try:
            text = path.read_text()
        except OSError as exc:
            raise ConfigurationError(f"{path}: {exc.strerror}") from exc
        if path.suffix == ".json":
            import json

            data = json.loads(text)
            values = dict(data.get("config", data))
        else:
            values = parse_config_text(text, source=str(path))
    values.update({k: v for k, v in overrides.items() if v is not None})
    try:
        return NetworkConfig(**values)
    except TypeError as exc:
        raise ConfigurationError(str(exc)) from exc


def format_config(config: NetworkConfig) -> str:
    """Serialize a config in the same flat format ``load_config`` reads."""
    out = []
    for key, value in config.to_dict().items():
        out.append(f"{key} = {value!r}")
    return "\n".join(out) + "\n"
