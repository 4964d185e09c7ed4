"""Exact finite-K ROC versus the large-system curve, without Monte Carlo noise.

Given l active sensors the scaled energy is Gamma(N, v_l) with
v_l = noise + l * per_sensor, so P(psi >= t | H) = sum_l P(l | H) Q(N, t / v_l).
The sup-deviation printed here is the floor that any Monte Carlo estimate of
the same curve fluctuates around.

    python3 scripts/finite_k_gap.py --k 50 100 500 --n 1 2
"""

import argparse

import numpy as np
from scipy.special import gammaincc

from macfusion.channel import ChannelConfig, PowerMode
from macfusion.experiments import FIG_PD, FIG_PF, FIG_SNR_DB, closed_form_curve, snr_from_db
from macfusion.poibin import pmf_pair
from macfusion.roc import ClosedForm, RocCurve, roc_deviation
from macfusion.sensors import make_iid


def exact_curve(k, n, mode, pd=FIG_PD, pf=FIG_PF, snr_db=FIG_SNR_DB, points=20_000):
    c = ChannelConfig.from_snr_db(n, snr_db, mode)
    per, noise = c.effective_variances(k, pf)
    v = noise + per * np.arange(k + 1)
    d1, d0 = pmf_pair(make_iid(k, pd, pf))
    t = np.concatenate([[0.0], np.logspace(-4, 3, points)])
    tail = gammaincc(n, t[:, None] / v[None, :])
    pf0 = np.minimum.accumulate(np.clip(tail @ d0.p, 0, 1))
    pd0 = np.minimum.accumulate(np.clip(tail @ d1.p, 0, 1))
    return RocCurve(t, pf0, pd0, ClosedForm(f"finite-{k}"))


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--k", type=int, nargs="+", default=[50, 100, 500])
    p.add_argument("--n", type=int, nargs="+", default=[1, 2])
    p.add_argument("--mode", nargs="+", default=["ipc", "tpc"], choices=["ipc", "tpc"])
    p.add_argument("--floors", type=float, nargs="+", default=[0.0, 1e-4, 1e-3, 1e-2])
    args = p.parse_args(argv)
    print("mode,k,n_div," + ",".join(f"dev_pf0_ge_{f:g}" for f in args.floors))
    for mode in map(PowerMode, args.mode):
        for n in args.n:
            closed = closed_form_curve(FIG_PD, FIG_PF, n, snr_from_db(FIG_SNR_DB), mode, points=4000)
            for k in args.k:
                cur = exact_curve(k, n, mode)
                devs = [roc_deviation(cur, closed, pf0_min=f or None) for f in args.floors]
                print(f"{mode.value},{k},{n}," + ",".join(f"{d:.4f}" for d in devs))


if __name__ == "__main__":
    main()
