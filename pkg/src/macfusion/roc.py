"""Empirical and closed-form ROC curves and their comparison."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional, Sequence, Union

import numpy as np

from .channel import ChannelConfig, EnergyBatch, batch_energies
from .fusion import FusionModel, llr_of_energy
from .montecarlo import McConfig
from .poibin import PmfEngine, pmf_pair
from .sensors import Hypothesis, SensorEnsemble

CSV_COLUMNS = ("threshold", "pf0", "pd0", "pf0_stderr", "pd0_stderr")


@dataclass(frozen=True)
class MonteCarlo:
    trials: int
    seed: int


@dataclass(frozen=True)
class ClosedForm:
    mode: str


Provenance = Union[MonteCarlo, ClosedForm]


@dataclass(frozen=True, eq=False)
class RocCurve:
    """Operating points ordered by increasing threshold."""

    threshold: np.ndarray
    pf0: np.ndarray
    pd0: np.ndarray
    provenance: Provenance
    pf0_stderr: np.ndarray = field(default=None)
    pd0_stderr: np.ndarray = field(default=None)

    def __post_init__(self):
        arrs = {}
        for name in ("threshold", "pf0", "pd0"):
            arrs[name] = np.asarray(getattr(self, name), dtype=float).ravel()
        n = arrs["threshold"].size
        if n == 0 or any(a.size != n for a in arrs.values()):
            raise ValueError("ROC needs equal-length, nonempty columns")
        if np.any(np.diff(arrs["threshold"]) < 0):
            raise ValueError("thresholds must be nondecreasing")
        for name in ("pf0", "pd0"):
            a = arrs[name]
            if np.any(a < 0) or np.any(a > 1):
                raise ValueError(f"{name} outside [0, 1]")
            if np.any(np.diff(a) > 0):
                raise ValueError(f"{name} must be nonincreasing in the threshold")
        for name in ("pf0_stderr", "pd0_stderr"):
            v = getattr(self, name)
            arrs[name] = np.zeros(n) if v is None else np.asarray(v, dtype=float).ravel()
        for name, a in arrs.items():
            a.setflags(write=False)
            object.__setattr__(self, name, a)

    @classmethod
    def from_points(cls, pts: Sequence[tuple[float, float, float]], provenance: Provenance) -> "RocCurve":
        arr = np.asarray(pts, dtype=float).reshape(-1, 3)
        return cls(arr[:, 0], arr[:, 1], arr[:, 2], provenance)

    def __len__(self) -> int:
        return self.threshold.size

    def rows(self):
        return zip(self.threshold, self.pf0, self.pd0, self.pf0_stderr, self.pd0_stderr)


def _as_psi(samples) -> np.ndarray:
    if isinstance(samples, EnergyBatch):
        return samples.psi
    if isinstance(samples, np.ndarray):
        return samples.astype(float).ravel()
    return np.array([s.psi if hasattr(s, "psi") else s for s in samples], dtype=float)


def quantile_thresholds(pooled: np.ndarray, levels: int = 512) -> np.ndarray:
    """Pooled-sample quantiles at evenly spaced probability levels.

    Uses order statistics (no interpolation), so every threshold is a sample
    value and a strictly increasing transform of the statistic maps the grid
    onto the transformed statistic's grid.
    """
    return np.quantile(pooled, np.linspace(0.0, 1.0, levels), method="inverted_cdf")


def _exceed_fraction(sorted_x: np.ndarray, thresholds: np.ndarray) -> np.ndarray:
    n = sorted_x.size
    return (n - np.searchsorted(sorted_x, thresholds, side="left")) / n


def empirical_roc(
    h0_samples,
    h1_samples,
    thresholds=None,
    levels: int = 512,
    provenance: Optional[Provenance] = None,
) -> RocCurve:
    """Fraction of samples at or above each threshold, under each hypothesis."""
    x0 = np.sort(_as_psi(h0_samples))
    x1 = np.sort(_as_psi(h1_samples))
    if x0.size == 0 or x1.size == 0:
        raise ValueError("empirical ROC needs nonempty sample sets under both hypotheses")
    if thresholds is None:
        thresholds = quantile_thresholds(np.concatenate([x0, x1]), levels)
    t = np.asarray(thresholds, dtype=float)
    pf0 = _exceed_fraction(x0, t)
    pd0 = _exceed_fraction(x1, t)
    if provenance is None:
        provenance = MonteCarlo(int(min(x0.size, x1.size)), -1)
    return RocCurve(
        t,
        pf0,
        pd0,
        provenance,
        np.sqrt(pf0 * (1 - pf0) / x0.size),
        np.sqrt(pd0 * (1 - pd0) / x1.size),
    )


# --- comparison -------------------------------------------------------------


def _envelope(curve: RocCurve):
    """Unique pf0 values with the [min, max] pd0 band observed at each."""
    order = np.lexsort((curve.pd0, curve.pf0))
    x, y = curve.pf0[order], curve.pd0[order]
    ux, start = np.unique(x, return_index=True)
    lo = y[start]
    hi = np.maximum.reduceat(y, start)
    return ux, lo, hi


def _band_at(ux, lo, hi, xq):
    """Vertical extent of the piecewise-linear ROC path at each query pf0."""
    j = np.searchsorted(ux, xq, side="left")
    j = np.clip(j, 0, ux.size - 1)
    exact = ux[j] == xq
    blo = np.empty_like(xq)
    bhi = np.empty_like(xq)
    blo[exact], bhi[exact] = lo[j[exact]], hi[j[exact]]
    k = np.flatnonzero(~exact)
    if k.size:
        right = j[k]
        left = right - 1
        x0, x1 = ux[left], ux[right]
        y0, y1 = hi[left], lo[right]
        w = (xq[k] - x0) / (x1 - x0)
        v = y0 + w * (y1 - y0)
        blo[k] = v
        bhi[k] = v
    return blo, bhi


def roc_deviation(
    a: RocCurve, b: RocCurve, pf0_min: Optional[float] = None, pf0_max: Optional[float] = None
) -> float:
    """Sup over matched pf0 of the vertical gap between two ROC paths.

    Each curve is the piecewise-linear path through its points ordered by pf0.
    Where a curve has several points at one pf0 (a vertical step) its value
    there is the whole step, and the gap to a point inside the step is zero.
    The comparison runs over the shared pf0 range, optionally clipped.
    """
    ea, eb = _envelope(a), _envelope(b)
    lo_x = max(ea[0][0], eb[0][0])
    hi_x = min(ea[0][-1], eb[0][-1])
    if pf0_min is not None:
        lo_x = max(lo_x, pf0_min)
    if pf0_max is not None:
        hi_x = min(hi_x, pf0_max)
    if lo_x > hi_x:
        raise ValueError("ROC curves have no overlapping false-alarm range")
    xq = np.concatenate([ea[0], eb[0], [lo_x, hi_x]])
    xq = np.unique(xq[(xq >= lo_x) & (xq <= hi_x)])
    alo, ahi = _band_at(*ea, xq)
    blo, bhi = _band_at(*eb, xq)
    gap = np.maximum(0.0, np.maximum(alo - bhi, blo - ahi))
    return float(gap.max())


def sample_pair(e: SensorEnsemble, c: ChannelConfig, mc: McConfig) -> tuple[EnergyBatch, EnergyBatch]:
    """``mc.trials`` draws under each hypothesis, on separate stream tags."""
    h0 = batch_energies(e, c, Hypothesis.H0, mc.trials, mc)
    h1 = batch_energies(e, c, Hypothesis.H1, mc.trials, mc)
    return h0, h1


def mc_roc(e: SensorEnsemble, c: ChannelConfig, mc: McConfig) -> RocCurve:
    h0, h1 = sample_pair(e, c, mc)
    return empirical_roc(h0, h1, levels=mc.threshold_levels, provenance=MonteCarlo(mc.trials, mc.master_seed))


def fusion_model_for(e: SensorEnsemble, c: ChannelConfig, engine: PmfEngine | str = PmfEngine.CONVOLVE) -> FusionModel:
    """Fusion LLR model matching the energy the channel simulator reports."""
    pf = e.pf[0] if e.is_iid else None
    sh2, sw2 = c.effective_variances(e.k, pf)
    d1, d0 = pmf_pair(e, engine)
    return FusionModel(d1, d0, c.n_div, sh2, sw2)


def llr_vs_energy_roc(
    e: SensorEnsemble, c: ChannelConfig, mc: McConfig, engine: PmfEngine | str = PmfEngine.CONVOLVE
) -> tuple[RocCurve, RocCurve]:
    """ROC of the energy test and of the exact LLR test on the same draws.

    Both use order-statistic thresholds from their own pooled statistic.
    """
    h0, h1 = sample_pair(e, c, mc)
    prov = MonteCarlo(mc.trials, mc.master_seed)
    energy_curve = empirical_roc(h0, h1, levels=mc.threshold_levels, provenance=prov)
    model = fusion_model_for(e, c, engine)
    l0 = llr_of_energy(model, h0.psi)
    l1 = llr_of_energy(model, h1.psi)
    llr_curve = empirical_roc(l0, l1, levels=mc.threshold_levels, provenance=prov)
    return energy_curve, llr_curve
