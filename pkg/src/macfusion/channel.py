"""Rayleigh-fading diversity MAC simulator.

The receiver sees ``y = H x + w`` with ``H`` an N x K matrix of CN(0, sigma_h2)
gains and ``w`` ~ CN(0, sigma_w2 I_N). A CN(0, s) draw has independent real and
imaginary parts of variance s / 2 each. Under the power-constrained modes
the observable is rescaled:

* ``IPC``: ``(H x / sqrt(N) + w) / sqrt(P_F K sigma_h2)``
* ``TPC``: ``(H x / sqrt(K N) + w) / sqrt(P_F sigma_h2)``

Both scalings are only defined for identical sensors, since they use the
common false-alarm rate P_F.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum
from typing import Iterator, Optional

import numpy as np

from .montecarlo import McConfig, run_blocks
from .sensors import Hypothesis, SensorEnsemble, sample_decision_block


class PowerMode(str, Enum):
    RAW = "raw"
    IPC = "ipc"
    TPC = "tpc"


@dataclass(frozen=True)
class ChannelConfig:
    n_div: int = 1
    sigma_h2: float = 1.0
    sigma_w2: float = 1.0
    power_mode: PowerMode = PowerMode.RAW

    def __post_init__(self):
        if int(self.n_div) != self.n_div or self.n_div < 1:
            raise ValueError(f"diversity order must be a positive integer, got {self.n_div}")
        if not (self.sigma_h2 > 0 and self.sigma_w2 > 0):
            raise ValueError("channel and noise powers must be positive")
        object.__setattr__(self, "n_div", int(self.n_div))
        object.__setattr__(self, "power_mode", PowerMode(self.power_mode))

    @classmethod
    def from_snr_db(cls, n_div: int, snr_db: float, power_mode=PowerMode.RAW, sigma_w2: float = 1.0):
        return cls(n_div, sigma_w2 * 10.0 ** (snr_db / 10.0), sigma_w2, power_mode)

    @property
    def snr(self) -> float:
        return self.sigma_h2 / self.sigma_w2

    def signal_scale(self, k: int) -> float:
        """Amplitude multiplying H x before the noise is added."""
        if self.power_mode is PowerMode.IPC:
            return 1.0 / np.sqrt(self.n_div)
        if self.power_mode is PowerMode.TPC:
            return 1.0 / np.sqrt(k * self.n_div)
        return 1.0

    def output_power_scale(self, k: int, pf: Optional[float]) -> float:
        """Factor multiplying ||signal + noise||^2 to give the reported energy."""
        if self.power_mode is PowerMode.RAW:
            return 1.0
        if pf is None:
            raise ValueError("IPC/TPC scaling needs the common false-alarm rate")
        if self.power_mode is PowerMode.IPC:
            return 1.0 / (pf * k * self.sigma_h2)
        return 1.0 / (pf * self.sigma_h2)

    def effective_variances(self, k: int, pf: Optional[float] = None) -> tuple[float, float]:
        """(per-sensor, noise) variances of the reported observable.

        Given l active sensors each branch of the reported observable is
        CN(0, noise + l * per_sensor).
        """
        g = self.output_power_scale(k, pf)
        a = self.signal_scale(k)
        return self.sigma_h2 * a * a * g, self.sigma_w2 * g


@dataclass(frozen=True)
class EnergySample:
    psi: float
    ell: int
    hypothesis: Optional[Hypothesis]


@dataclass(frozen=True, eq=False)
class EnergyBatch:
    """Columnar batch of energy samples drawn under one hypothesis."""

    psi: np.ndarray
    ell: np.ndarray
    hypothesis: Hypothesis

    def __len__(self) -> int:
        return self.psi.size

    def __getitem__(self, i) -> EnergySample:
        return EnergySample(float(self.psi[i]), int(self.ell[i]), self.hypothesis)

    def __iter__(self) -> Iterator[EnergySample]:
        for i in range(len(self)):
            yield self[i]


def _mode_pf(e: SensorEnsemble, c: ChannelConfig) -> Optional[float]:
    if c.power_mode is PowerMode.RAW:
        return None
    if not e.is_iid:
        raise ValueError(f"{c.power_mode.value} scaling is only defined for identical sensors")
    return e.pf[0]


def _complex_normal(rng: np.random.Generator, shape, var: float) -> tuple[np.ndarray, np.ndarray]:
    g = rng.standard_normal(tuple(shape) + (2,))
    sd = np.sqrt(var / 2.0)
    return sd * g[..., 0], sd * g[..., 1]


def _simulate_block(e: SensorEnsemble, c: ChannelConfig, h: Hypothesis, n: int, rng: np.random.Generator):
    pf = _mode_pf(e, c)
    x = sample_decision_block(e, h, n, rng).astype(float)
    h_re, h_im = _complex_normal(rng, (n, c.n_div, e.k), c.sigma_h2)
    w_re, w_im = _complex_normal(rng, (n, c.n_div), c.sigma_w2)
    a = c.signal_scale(e.k)
    y_re = a * np.einsum("nmk,nk->nm", h_re, x) + w_re
    y_im = a * np.einsum("nmk,nk->nm", h_im, x) + w_im
    psi = c.output_power_scale(e.k, pf) * np.sum(y_re**2 + y_im**2, axis=1)
    return psi, x.sum(axis=1).astype(np.int64)


def simulate_received(e: SensorEnsemble, c: ChannelConfig, h: Hypothesis, rng: np.random.Generator) -> EnergySample:
    """One end-to-end draw: decisions, fading gains, noise, energy."""
    h = Hypothesis.parse(h)
    psi, ell = _simulate_block(e, c, h, 1, rng)
    return EnergySample(float(psi[0]), int(ell[0]), h)


def energies_given_ell(
    ell: int, c: ChannelConfig, k_total: int, pf: Optional[float], n: int, rng: np.random.Generator
) -> np.ndarray:
    """``n`` energies with exactly ``ell`` of ``k_total`` sensors active."""
    if not 0 <= ell <= k_total:
        raise ValueError(f"ell must lie in [0, {k_total}], got {ell}")
    h_re, h_im = _complex_normal(rng, (n, c.n_div, ell), c.sigma_h2)
    w_re, w_im = _complex_normal(rng, (n, c.n_div), c.sigma_w2)
    a = c.signal_scale(k_total)
    y_re = a * h_re.sum(axis=2) + w_re
    y_im = a * h_im.sum(axis=2) + w_im
    return c.output_power_scale(k_total, pf) * np.sum(y_re**2 + y_im**2, axis=1)


def simulate_given_ell(
    ell: int, c: ChannelConfig, k_total: int, pf: Optional[float], rng: np.random.Generator
) -> EnergySample:
    psi = energies_given_ell(ell, c, k_total, pf, 1, rng)
    return EnergySample(float(psi[0]), int(ell), None)


def batch_energies(
    e: SensorEnsemble, c: ChannelConfig, h: Hypothesis, trials: int, mc: McConfig
) -> EnergyBatch:
    """``trials`` independent draws; hypothesis value selects the stream tag."""
    h = Hypothesis.parse(h)
    if trials < 1:
        raise ValueError("trials must be >= 1")
    _mode_pf(e, c)
    cfg = replace(mc, trials=int(trials))
    parts = run_blocks(cfg, int(h), lambda n, rng: _simulate_block(e, c, h, n, rng))
    psi = np.concatenate([p for p, _ in parts])
    ell = np.concatenate([l for _, l in parts])
    return EnergyBatch(psi, ell, h)
