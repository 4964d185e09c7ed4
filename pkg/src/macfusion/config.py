"""Experiment configuration: JSON file, environment, then command-line flags."""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Optional

from .channel import ChannelConfig, PowerMode
from .montecarlo import McConfig
from .sensors import SensorEnsemble, make_iid, make_inid

ENV_SEED = "MACFUSION_SEED"
ENV_WORKERS = "MACFUSION_WORKERS"


class ConfigError(ValueError):
    pass


@dataclass
class EnsembleSpec:
    # exactly one of (k, pd, pf) scalars or (pd_list, pf_list)
    k: Optional[int] = None
    pd: Optional[float] = None
    pf: Optional[float] = None
    pd_list: Optional[list[float]] = None
    pf_list: Optional[list[float]] = None

    def build(self) -> SensorEnsemble:
        iid = self.k is not None or self.pd is not None or self.pf is not None
        explicit = self.pd_list is not None or self.pf_list is not None
        if iid == explicit:
            raise ConfigError("give either an iid ensemble {k, pd, pf} or explicit pd/pf lists, not both")
        try:
            if iid:
                if None in (self.k, self.pd, self.pf):
                    raise ConfigError("iid ensemble needs k, pd and pf")
                return make_iid(int(self.k), float(self.pd), float(self.pf))
            if self.pd_list is None or self.pf_list is None:
                raise ConfigError("explicit ensemble needs both pd and pf lists")
            return make_inid(self.pd_list, self.pf_list)
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc


@dataclass
class ChannelSpec:
    n_div: int = 1
    snr_db: Optional[float] = None
    sigma_h2: Optional[float] = None
    sigma_w2: Optional[float] = None
    power_mode: str = "raw"

    def build(self) -> ChannelConfig:
        try:
            mode = PowerMode(self.power_mode)
            if self.snr_db is not None:
                if self.sigma_h2 is not None:
                    raise ConfigError("give snr_db or sigma_h2, not both")
                return ChannelConfig.from_snr_db(self.n_div, self.snr_db, mode, self.sigma_w2 or 1.0)
            return ChannelConfig(self.n_div, self.sigma_h2 or 1.0, self.sigma_w2 or 1.0, mode)
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc


@dataclass
class McSpec:
    trials: int = 10_000
    seed: int = 0
    workers: int = 1
    block_size: int = 1024
    threshold_levels: int = 512

    def build(self) -> McConfig:
        try:
            return McConfig(self.trials, self.seed, self.threshold_levels, self.workers, self.block_size)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc


@dataclass
class SweepSpec:
    gamma: Optional[list[float]] = None
    gamma_points: int = 400
    k_list: Optional[list[int]] = None
    n_list: Optional[list[int]] = None
    mode: str = "ipc"


@dataclass
class ExperimentConfig:
    ensemble: EnsembleSpec = field(default_factory=EnsembleSpec)
    channel: ChannelSpec = field(default_factory=ChannelSpec)
    mc: McSpec = field(default_factory=McSpec)
    sweep: SweepSpec = field(default_factory=SweepSpec)
    output: Optional[str] = None

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


_SECTIONS = {"ensemble": EnsembleSpec, "channel": ChannelSpec, "mc": McSpec, "sweep": SweepSpec}


def from_dict(data: dict[str, Any]) -> ExperimentConfig:
    cfg = ExperimentConfig()
    for key, value in data.items():
        if key == "output":
            cfg.output = value
            continue
        if key not in _SECTIONS:
            raise ConfigError(f"unknown config section {key!r}")
        if not isinstance(value, dict):
            raise ConfigError(f"section {key!r} must be a mapping")
        if key == "ensemble" and "iid" in value:
            value = dict(value.pop("iid"), **value)
        try:
            setattr(cfg, key, _SECTIONS[key](**value))
        except TypeError as exc:
            raise ConfigError(f"bad keys in section {key!r}: {exc}") from exc
    return cfg


def load(path: Optional[str | Path]) -> ExperimentConfig:
    if path is None:
        return ExperimentConfig()
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config root must be a JSON object")
    return from_dict(data)


def apply_env(cfg: ExperimentConfig, env=None) -> ExperimentConfig:
    env = os.environ if env is None else env
    try:
        if env.get(ENV_SEED):
            cfg.mc.seed = int(env[ENV_SEED])
        if env.get(ENV_WORKERS):
            cfg.mc.workers = int(env[ENV_WORKERS])
    except ValueError as exc:
        raise ConfigError(f"bad environment override: {exc}") from exc
    return cfg
