"""Figure-reproduction experiments shared by the CLI and scripts."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .asymptotics import LargeSystemParams, default_gamma_grid, optimal_diversity, pd0_at_pf0, roc_closed_form
from .channel import ChannelConfig, PowerMode
from .montecarlo import McConfig
from .roc import RocCurve, mc_roc, roc_deviation
from .sensors import make_iid

FIG_PD, FIG_PF, FIG_SNR_DB = 0.5, 0.05, 15.0
FIG1_N = (1, 2, 4, 8)
FIG23_K = (50, 100, 500)
FIG23_N = (1, 2)


def snr_from_db(snr_db: float) -> float:
    return 10.0 ** (snr_db / 10.0)


def closed_form_curve(pd, pf, n, snr, mode, points=400) -> RocCurve:
    params = LargeSystemParams(pd, pf, n, snr)
    return roc_closed_form(params, mode, default_gamma_grid(params, mode, points))


def fig1(pd=FIG_PD, pf=FIG_PF, snr_db=FIG_SNR_DB, n_list: Sequence[int] = FIG1_N, points=400):
    """{(mode, N): closed-form curve} for both power constraints."""
    snr = snr_from_db(snr_db)
    return {
        (mode, n): closed_form_curve(pd, pf, n, snr, mode, points)
        for mode in (PowerMode.IPC, PowerMode.TPC)
        for n in n_list
    }


@dataclass(frozen=True)
class ConvergenceRun:
    mode: PowerMode
    k: int
    n_div: int
    mc: RocCurve
    closed: RocCurve
    deviation: float
    deviation_full: float
    pf0_floor: float


def convergence(
    mode: PowerMode | str,
    k_list: Sequence[int] = FIG23_K,
    n_list: Sequence[int] = FIG23_N,
    mc: McConfig = McConfig(trials=100_000),
    pd=FIG_PD,
    pf=FIG_PF,
    snr_db=FIG_SNR_DB,
    min_exceedances: int = 100,
) -> list[ConvergenceRun]:
    """Finite-K Monte Carlo ROC against the large-system curve.

    ``deviation`` is taken over pf0 >= min_exceedances / trials, where the
    empirical false-alarm rate has roughly 10% relative error or better;
    ``deviation_full`` uses the whole shared range and is dominated by the
    few-sample tail.
    """
    mode = PowerMode(mode)
    floor = min(1.0, min_exceedances / mc.trials)
    snr = snr_from_db(snr_db)
    runs = []
    for n in n_list:
        closed = closed_form_curve(pd, pf, n, snr, mode, points=4000)
        for k in k_list:
            chan = ChannelConfig.from_snr_db(n, snr_db, mode)
            # distinct but reproducible seeds per (K, N) cell
            cell = replace(mc, master_seed=int(np.random.SeedSequence([mc.master_seed, k, n]).generate_state(1)[0]))
            curve = mc_roc(make_iid(k, pd, pf), chan, cell)
            dev = roc_deviation(curve, closed, pf0_min=floor)
            runs.append(ConvergenceRun(mode, k, n, curve, closed, dev, roc_deviation(curve, closed), floor))
    return runs


def diversity_sweep(pd=FIG_PD, pf=FIG_PF, snr_db=FIG_SNR_DB, target_pf0=0.05, n_grid=tuple(range(1, 17))):
    """Detection probability at a fixed false-alarm rate versus N, both modes."""
    snr = snr_from_db(snr_db)
    ipc = [pd0_at_pf0(LargeSystemParams(pd, pf, n, snr), PowerMode.IPC, target_pf0) for n in n_grid]
    best, tpc = optimal_diversity(pd, pf, snr, target_pf0, n_grid)
    return {"n": list(n_grid), "ipc": ipc, "tpc": tpc, "tpc_best_n": best}
