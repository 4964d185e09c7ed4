"""Large-system (K -> infinity) ROC for identical sensors.

As K grows the scaled observable becomes CN(0, v I_N) under each hypothesis.
Its energy is then v/2 times a chi-square with 2N degrees of freedom, so every
operating point is a finite Poisson sum
``Q(N, m) = exp(-m) * sum_{n<N} m^n / n!`` at a hypothesis-specific argument m:

==========  ==========================  ==================================
mode        false alarm argument        detection argument
==========  ==========================  ==================================
IPC         g N                         g N pf / pd
TPC         g N alpha_F                 g N alpha_D pf / pd
==========  ==========================  ==================================

with ``alpha_X = P_X snr / (P_X snr + N)``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .channel import PowerMode
from .roc import ClosedForm, RocCurve

MAX_DIVERSITY = 64


@dataclass(frozen=True)
class LargeSystemParams:
    pd: float
    pf: float
    n_div: int = 1
    snr: float = 10.0**1.5

    def __post_init__(self):
        for name in ("pd", "pf"):
            v = getattr(self, name)
            if not 0.0 < v < 1.0:
                raise ValueError(f"{name} must lie strictly inside (0, 1), got {v}")
        _check_n(self.n_div)
        if not self.snr > 0:
            raise ValueError("snr must be positive")
        if self.pd <= self.pf:
            warnings.warn("pd <= pf: the large-system ROC lies on or below the diagonal", stacklevel=3)

    @property
    def alpha_f(self) -> float:
        return alpha(self.pf, self.snr, self.n_div)

    @property
    def alpha_d(self) -> float:
        return alpha(self.pd, self.snr, self.n_div)

    @property
    def reduction_factor(self) -> float:
        """alpha_F / alpha_D: TPC loss relative to IPC."""
        return self.alpha_f / self.alpha_d


def _check_n(n) -> int:
    if int(n) != n or n < 1:
        raise ValueError(f"diversity order must be a positive integer, got {n}")
    if n > MAX_DIVERSITY:
        raise ValueError(f"diversity order capped at {MAX_DIVERSITY}, got {n}")
    return int(n)


def alpha(p: float, snr: float, n: int) -> float:
    return p * snr / (p * snr + n)


def poisson_tail_sum(m: float, n: int) -> float:
    """exp(-m) * sum_{j<n} m^j / j!, terms built by t_{j+1} = t_j m / (j+1)."""
    n = _check_n(n)
    if m < 0:
        raise ValueError("argument must be nonnegative")
    if m < n:
        return 1.0 - _poisson_upper(m, n)
    if m < 700.0:
        term = math.exp(-m)
        total = term
        for j in range(1, n):
            term *= m / j
            total += term
        return min(total, 1.0)
    # exp(-m) underflows; run the same recurrence on log terms
    logs = [-m]
    for j in range(1, n):
        logs.append(logs[-1] + math.log(m / j))
    top = max(logs)
    return min(math.exp(top) * math.fsum(math.exp(v - top) for v in logs), 1.0)


def _poisson_upper(m: float, n: int) -> float:
    """exp(-m) * sum_{j>=n} m^j / j! for m < n, where the terms shrink geometrically."""
    term = math.exp(-m)
    for j in range(1, n + 1):
        term *= m / j
    total = 0.0
    j = n
    while term > 1e-17 * total or total == 0.0:
        total += term
        j += 1
        term *= m / j
        if term == 0.0:
            break
    return total


def chi2_upper_tail(x: float, dof: int) -> float:
    """P(xi >= x) for xi ~ chi-square with an even number of degrees of freedom."""
    if dof < 2 or dof % 2:
        raise ValueError(f"dof must be an even positive integer, got {dof}")
    if x < 0:
        raise ValueError("x must be nonnegative")
    half = 0.5 * x
    term = math.exp(-half)
    total = term
    for n in range(1, dof // 2):
        term = term * half / n
        total += term
    return min(total, 1.0)


def pf0_ipc(g: float, n: int) -> float:
    return poisson_tail_sum(g * n, n)


def pd0_ipc(g: float, n: int, pd: float, pf: float) -> float:
    return poisson_tail_sum(g * n * (pf / pd), n)


def pf0_tpc(g: float, n: int, pf: float, snr: float) -> float:
    return poisson_tail_sum(g * n * alpha(pf, snr, n), n)


def pd0_tpc(g: float, n: int, pd: float, pf: float, snr: float) -> float:
    return poisson_tail_sum(g * n * alpha(pd, snr, n) * (pf / pd), n)


def operating_point(params: LargeSystemParams, mode: PowerMode | str, g: float) -> tuple[float, float]:
    """(pf0, pd0) at scaled threshold ``g``."""
    mode = PowerMode(mode)
    p = params
    if mode is PowerMode.IPC:
        return pf0_ipc(g, p.n_div), pd0_ipc(g, p.n_div, p.pd, p.pf)
    if mode is PowerMode.TPC:
        return pf0_tpc(g, p.n_div, p.pf, p.snr), pd0_tpc(g, p.n_div, p.pd, p.pf, p.snr)
    raise ValueError("closed-form ROC exists only for IPC and TPC")


def roc_closed_form(params: LargeSystemParams, mode: PowerMode | str, grid: Iterable[float]) -> RocCurve:
    grid = np.asarray(list(grid), dtype=float)
    if np.any(grid < 0) or np.any(np.diff(grid) < 0):
        raise ValueError("threshold grid must be nonnegative and increasing")
    pts = [(float(g), *operating_point(params, mode, g)) for g in grid]
    return RocCurve.from_points(pts, ClosedForm(PowerMode(mode).value))


def default_gamma_grid(params: LargeSystemParams, mode: PowerMode | str, points: int = 400) -> np.ndarray:
    """Thresholds spanning pf0 from 1 down to about 1e-6."""
    hi = threshold_for_pf0(params, mode, 1e-6)
    return np.linspace(0.0, hi, points)


def threshold_for_pf0(params: LargeSystemParams, mode: PowerMode | str, target: float, tol: float = 1e-12) -> float:
    """Scaled threshold g with pf0(g) = target, by bisection in probability."""
    if not 0.0 < target <= 1.0:
        raise ValueError("target false-alarm rate must lie in (0, 1]")
    f = lambda g: operating_point(params, mode, g)[0]
    if target >= 1.0:
        return 0.0
    hi = 1.0
    while f(hi) > target:
        hi *= 2.0
    lo = 0.0
    for _ in range(400):
        mid = 0.5 * (lo + hi)
        val = f(mid)
        if abs(val - target) <= tol:
            return mid
        if val > target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def pd0_at_pf0(params: LargeSystemParams, mode: PowerMode | str, target: float) -> float:
    return operating_point(params, mode, threshold_for_pf0(params, mode, target))[1]


def optimal_diversity(
    pd: float, pf: float, snr: float, target_pf0: float, n_grid: Sequence[int] = tuple(range(1, 17))
) -> tuple[int, list[float]]:
    """Diversity order maximizing TPC detection at a fixed false-alarm rate."""
    values = [pd0_at_pf0(LargeSystemParams(pd, pf, n, snr), PowerMode.TPC, target_pf0) for n in n_grid]
    return int(n_grid[int(np.argmax(values))]), values


def j_divergence(params: LargeSystemParams, mode: PowerMode | str) -> float:
    """Symmetrized KL divergence between the two limiting Gaussian laws."""
    mode = PowerMode(mode)
    if mode is PowerMode.IPC:
        rho = params.pd / params.pf
    elif mode is PowerMode.TPC:
        rho = params.pd * params.alpha_f / (params.pf * params.alpha_d)
    else:
        raise ValueError("J-divergence is defined for IPC and TPC only")
    return params.n_div * ((rho + 1.0 / rho) - 2.0)
