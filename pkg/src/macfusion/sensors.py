"""Heterogeneous sensor ensembles and local decision sampling."""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum
from typing import Sequence

import numpy as np


class Hypothesis(IntEnum):
    H0 = 0
    H1 = 1

    @classmethod
    def parse(cls, value) -> "Hypothesis":
        if isinstance(value, Hypothesis):
            return value
        if isinstance(value, str):
            key = value.strip().upper()
            if key in ("H0", "0"):
                return cls.H0
            if key in ("H1", "1"):
                return cls.H1
            raise ValueError(f"unknown hypothesis {value!r}")
        return cls(int(value))


def _check_open_unit(name: str, values: np.ndarray) -> None:
    if not np.all(np.isfinite(values)) or np.any(values <= 0.0) or np.any(values >= 1.0):
        raise ValueError(f"{name} entries must lie strictly inside (0, 1), got {values.tolist()}")


@dataclass(frozen=True)
class SensorEnsemble:
    """Per-sensor detection and false-alarm probabilities.

    Both tuples have length K >= 1 and every entry is strictly inside (0, 1).
    """

    pd: tuple[float, ...]
    pf: tuple[float, ...]

    def __post_init__(self):
        pd = np.asarray(self.pd, dtype=float).ravel()
        pf = np.asarray(self.pf, dtype=float).ravel()
        if pd.size == 0:
            raise ValueError("ensemble needs at least one sensor")
        if pd.size != pf.size:
            raise ValueError(f"pd has {pd.size} entries but pf has {pf.size}")
        _check_open_unit("pd", pd)
        _check_open_unit("pf", pf)
        object.__setattr__(self, "pd", tuple(float(v) for v in pd))
        object.__setattr__(self, "pf", tuple(float(v) for v in pf))

    @property
    def k(self) -> int:
        return len(self.pd)

    def probs(self, h: Hypothesis) -> np.ndarray:
        """P(x_k = 1 | h) for every sensor."""
        return np.array(self.pd if Hypothesis.parse(h) == Hypothesis.H1 else self.pf)

    @property
    def is_iid(self) -> bool:
        return len(set(self.pd)) == 1 and len(set(self.pf)) == 1

    def append(self, pd: float, pf: float) -> "SensorEnsemble":
        return SensorEnsemble(self.pd + (pd,), self.pf + (pf,))


def make_iid(k: int, pd: float, pf: float) -> SensorEnsemble:
    if int(k) != k or k < 1:
        raise ValueError(f"k must be a positive integer, got {k}")
    return SensorEnsemble((float(pd),) * int(k), (float(pf),) * int(k))


def make_inid(pd: Sequence[float], pf: Sequence[float]) -> SensorEnsemble:
    return SensorEnsemble(tuple(pd), tuple(pf))


def sample_decisions(e: SensorEnsemble, h: Hypothesis, rng: np.random.Generator) -> np.ndarray:
    """Draw one decision vector x in {0,1}^K.

    Consumes exactly K uniforms from ``rng``, in sensor-index order.
    """
    return sample_decision_block(e, h, 1, rng)[0]


def sample_decision_block(
    e: SensorEnsemble, h: Hypothesis, n: int, rng: np.random.Generator
) -> np.ndarray:
    """``n`` decision vectors as an (n, K) uint8 array, row by row."""
    u = rng.random((n, e.k))
    return (u < e.probs(h)).astype(np.uint8)


def active_count(x) -> int:
    return int(np.sum(x))
