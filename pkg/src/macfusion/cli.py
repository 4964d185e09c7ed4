"""Command-line entry point: ``macfusion <subcommand> [--config FILE] [flags]``.

Each subcommand writes one CSV (header line, 17 significant digits) to
``--output`` plus a ``<output>.meta.json`` sidecar, or the CSV alone to stdout
when no output path is given.

Exit codes: 0 ok, 1 configuration error, 2 optimality not certified
(check-optimality), 3 numerical singularity.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import __version__
from .asymptotics import LargeSystemParams, default_gamma_grid, j_divergence, roc_closed_form
from .channel import PowerMode, batch_energies
from .config import ConfigError, ExperimentConfig, apply_env, load
from .experiments import FIG1_N, FIG23_K, FIG23_N, FIG_PD, FIG_PF, FIG_SNR_DB, convergence, diversity_sweep, fig1
from .fusion import llr_of_energy
from .optimality import SingularDistributionError, check_prop1, check_theorem2, ell_llr
from .poibin import CountDistribution, PmfEngine, pmf_pair
from .roc import CSV_COLUMNS, fusion_model_for, mc_roc
from .sensors import Hypothesis

EXIT_OK, EXIT_CONFIG, EXIT_NOT_CERTIFIED, EXIT_SINGULAR = 0, 1, 2, 3


def fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return "" if v is None else str(v)


def render_csv(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    return buf.getvalue()


def emit(body: str, cfg: ExperimentConfig, subcommand: str, extra=None) -> None:
    if not cfg.output:
        sys.stdout.write(body)
        return
    path = Path(cfg.output)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(body)
    meta = {
        "subcommand": subcommand,
        "version": __version__,
        "seed": cfg.mc.seed,
        "workers": cfg.mc.workers,
        "config": cfg.to_dict(),
        "created": datetime.now(timezone.utc).isoformat(),
    }
    if extra:
        meta["results"] = extra
    Path(str(path) + ".meta.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")


# --- subcommands ------------------------------------------------------------


def cmd_pmf(cfg, args):
    d1, d0 = pmf_pair(cfg.ensemble.build(), args.engine)
    rows = ((ell, d0[ell], d1[ell]) for ell in range(len(d1)))
    emit(render_csv(("ell", "prob_h0", "prob_h1"), rows), cfg, "pmf")
    return EXIT_OK


def read_counts_csv(path: str) -> tuple[CountDistribution, CountDistribution]:
    """Load ``ell,prob_h0,prob_h1`` (the ``pmf`` output format)."""
    try:
        with open(path, newline="") as fh:
            rows = sorted(csv.DictReader(fh), key=lambda r: int(r["ell"]))
        p0 = [float(r["prob_h0"]) for r in rows]
        p1 = [float(r["prob_h1"]) for r in rows]
        if [int(r["ell"]) for r in rows] != list(range(len(rows))):
            raise ConfigError("counts CSV must list ell = 0..K exactly once")
        return CountDistribution.from_weights(p1), CountDistribution.from_weights(p0)
    except (OSError, KeyError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"cannot read counts CSV {path}: {exc}") from exc


def cmd_check_optimality(cfg, args):
    if args.counts:
        d1, d0 = read_counts_csv(args.counts)
        thm2 = None
    else:
        e = cfg.ensemble.build()
        d1, d0 = pmf_pair(e, args.engine)
        thm2 = check_theorem2(e)
    try:
        llr = ell_llr(d1, d0)
        report = check_prop1(d1, d0, args.eps, theorem2_applicable=bool(thm2))
    except SingularDistributionError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_SINGULAR
    out = sys.stderr if not cfg.output else sys.stdout
    print(f"count-LLR strictly increasing: {report.increasing} ({report.verdict})", file=out)
    print(f"min margin: {report.min_margin:.6g}", file=out)
    if report.failing_indices:
        print(f"failing l: {list(report.failing_indices)}", file=out)
    if report.flat_indices:
        print(f"numerically flat l: {list(report.flat_indices)}", file=out)
    if thm2 is not None:
        print(f"all sensors P_D > P_F: {thm2}", file=out)
    print("   l        lambda(l)", file=out)
    for ell, v in enumerate(llr.lam):
        print(f"{ell:4d}  {v: .10f}", file=out)
    margins = [None, *llr.margins.tolist()]
    rows = ((ell, d0[ell], d1[ell], llr.lam[ell], margins[ell]) for ell in range(len(d1)))
    emit(
        render_csv(("ell", "prob_h0", "prob_h1", "lambda", "margin"), rows),
        cfg,
        "check-optimality",
        {"increasing": report.increasing, "min_margin": report.min_margin},
    )
    return EXIT_OK if report.increasing else EXIT_NOT_CERTIFIED


def cmd_llr_curve(cfg, args):
    model = fusion_model_for(cfg.ensemble.build(), cfg.channel.build(), args.engine)
    grid = np.asarray(cfg.sweep.gamma) if cfg.sweep.gamma else model.default_grid(cfg.sweep.gamma_points)
    vals = llr_of_energy(model, grid)
    emit(render_csv(("psi", "llr"), zip(grid, vals)), cfg, "llr-curve")
    return EXIT_OK


def cmd_sample(cfg, args):
    e, c, mc = cfg.ensemble.build(), cfg.channel.build(), cfg.mc.build()
    rows = []
    for h in (Hypothesis.H0, Hypothesis.H1):
        b = batch_energies(e, c, h, mc.trials, mc)
        rows.extend((i, h.name, b.ell[i], b.psi[i]) for i in range(len(b)))
    emit(render_csv(("trial", "hypothesis", "ell", "psi"), rows), cfg, "sample")
    return EXIT_OK


def cmd_roc_mc(cfg, args):
    curve = mc_roc(cfg.ensemble.build(), cfg.channel.build(), cfg.mc.build())
    emit(render_csv(CSV_COLUMNS, curve.rows()), cfg, "roc-mc")
    return EXIT_OK


def _large_system(cfg) -> LargeSystemParams:
    e = cfg.ensemble.build()
    if not e.is_iid:
        raise ConfigError("large-system results need an iid ensemble")
    c = cfg.channel.build()
    return LargeSystemParams(e.pd[0], e.pf[0], c.n_div, c.snr)


def _closed_mode(cfg) -> PowerMode:
    mode = PowerMode(cfg.channel.power_mode)
    if mode is PowerMode.RAW:
        mode = PowerMode(cfg.sweep.mode)
    if mode is PowerMode.RAW:
        raise ConfigError("closed-form results need power_mode ipc or tpc")
    return mode


def cmd_roc_asymptotic(cfg, args):
    p, mode = _large_system(cfg), _closed_mode(cfg)
    grid = cfg.sweep.gamma or default_gamma_grid(p, mode, cfg.sweep.gamma_points)
    curve = roc_closed_form(p, mode, grid)
    emit(render_csv(("gamma", "pf0", "pd0"), zip(curve.threshold, curve.pf0, curve.pd0)), cfg, "roc-asymptotic")
    return EXIT_OK


def cmd_jdiv(cfg, args):
    p, mode = _large_system(cfg), _closed_mode(cfg)
    j = j_divergence(p, mode)
    if cfg.output:
        emit(render_csv(("mode", "n_div", "jdiv"), [(mode.value, p.n_div, j)]), cfg, "jdiv")
    print(j)
    return EXIT_OK


def cmd_reproduce(cfg, args):
    fig = args.figure
    if cfg.output is None:
        cfg.output = f"{fig}.csv"
    summary = {}
    if fig == "fig1":
        curves = fig1(n_list=cfg.sweep.n_list or FIG1_N, points=cfg.sweep.gamma_points)
        rows = [
            (mode.value, n, g, pf, pd)
            for (mode, n), cur in curves.items()
            for g, pf, pd in zip(cur.threshold, cur.pf0, cur.pd0)
        ]
        sweep = diversity_sweep()
        summary = {"pd0_at_pf0_0.05": sweep}
        body = render_csv(("mode", "n_div", "gamma", "pf0", "pd0"), rows)
    else:
        mode = PowerMode.IPC if fig == "fig2" else PowerMode.TPC
        mc = cfg.mc.build()
        runs = convergence(mode, cfg.sweep.k_list or FIG23_K, cfg.sweep.n_list or FIG23_N, mc)
        rows = []
        seen_closed = set()
        for r in runs:
            rows.extend(("mc", r.k, r.n_div, *row) for row in r.mc.rows())
            if r.n_div not in seen_closed:
                seen_closed.add(r.n_div)
                rows.extend(("large_system", None, r.n_div, *row) for row in r.closed.rows())
            summary[f"K={r.k},N={r.n_div}"] = {"deviation": r.deviation, "deviation_full": r.deviation_full, "pf0_floor": r.pf0_floor}
            print(
                f"{mode.value} K={r.k} N={r.n_div} sup-deviation={r.deviation:.4f} "
                f"(pf0 >= {r.pf0_floor:.0e}; full range {r.deviation_full:.4f})",
                file=sys.stderr,
            )
        body = render_csv(("source", "k", "n_div", *CSV_COLUMNS), rows)
    summary["figure_parameters"] = {
        "pd": FIG_PD,
        "pf": FIG_PF,
        "snr_db": FIG_SNR_DB,
        "k_list": list(cfg.sweep.k_list or FIG23_K) if fig != "fig1" else None,
        "n_list": list(cfg.sweep.n_list or (FIG1_N if fig == "fig1" else FIG23_N)),
    }
    emit(body, cfg, f"reproduce {fig}", summary)
    return EXIT_OK


COMMANDS = {
    "pmf": cmd_pmf,
    "check-optimality": cmd_check_optimality,
    "llr-curve": cmd_llr_curve,
    "sample": cmd_sample,
    "roc-mc": cmd_roc_mc,
    "roc-asymptotic": cmd_roc_asymptotic,
    "jdiv": cmd_jdiv,
    "reproduce": cmd_reproduce,
}


def _float_list(s: str) -> list[float]:
    return [float(v) for v in s.split(",") if v.strip()]


def _int_list(s: str) -> list[int]:
    return [int(v) for v in s.split(",") if v.strip()]


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON experiment config")
    common.add_argument("--output", "-o", help="CSV path (sidecar metadata written next to it)")
    g = common.add_argument_group("ensemble")
    g.add_argument("--k", type=int)
    g.add_argument("--pd", type=float)
    g.add_argument("--pf", type=float)
    g.add_argument("--pd-list", type=_float_list, help="comma-separated per-sensor P_D")
    g.add_argument("--pf-list", type=_float_list, help="comma-separated per-sensor P_F")
    g = common.add_argument_group("channel")
    g.add_argument("--n-div", type=int)
    g.add_argument("--snr-db", type=float)
    g.add_argument("--sigma-h2", type=float)
    g.add_argument("--sigma-w2", type=float)
    g.add_argument("--power-mode", choices=[m.value for m in PowerMode])
    g = common.add_argument_group("monte carlo")
    g.add_argument("--trials", type=int)
    g.add_argument("--seed", type=int)
    g.add_argument("--workers", type=int)
    g = common.add_argument_group("sweep")
    g.add_argument("--gamma", type=_float_list, help="comma-separated threshold grid")
    g.add_argument("--gamma-points", type=int)
    g.add_argument("--k-list", type=_int_list)
    g.add_argument("--n-list", type=_int_list)
    g.add_argument("--mode", choices=["ipc", "tpc"], help="closed-form mode when power_mode is raw")
    common.add_argument("--engine", default="convolve", choices=[e.value for e in PmfEngine])

    parser = argparse.ArgumentParser(prog="macfusion", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name, parents=[common])
        if name == "check-optimality":
            p.add_argument("--counts", help="CSV ell,prob_h0,prob_h1 (e.g. correlated-sensor pmfs)")
            p.add_argument("--eps", type=float, default=1e-12)
        if name == "reproduce":
            p.add_argument("figure", choices=["fig1", "fig2", "fig3"])
    return parser


_OVERRIDES = {
    "k": ("ensemble", "k"),
    "pd": ("ensemble", "pd"),
    "pf": ("ensemble", "pf"),
    "pd_list": ("ensemble", "pd_list"),
    "pf_list": ("ensemble", "pf_list"),
    "n_div": ("channel", "n_div"),
    "snr_db": ("channel", "snr_db"),
    "sigma_h2": ("channel", "sigma_h2"),
    "sigma_w2": ("channel", "sigma_w2"),
    "power_mode": ("channel", "power_mode"),
    "trials": ("mc", "trials"),
    "seed": ("mc", "seed"),
    "workers": ("mc", "workers"),
    "gamma": ("sweep", "gamma"),
    "gamma_points": ("sweep", "gamma_points"),
    "k_list": ("sweep", "k_list"),
    "n_list": ("sweep", "n_list"),
    "mode": ("sweep", "mode"),
}


def resolve_config(args) -> ExperimentConfig:
    cfg = apply_env(load(args.config))
    if args.command == "reproduce" and args.trials is None and not args.config:
        cfg.mc.trials = 100_000
    for attr, (section, key) in _OVERRIDES.items():
        value = getattr(args, attr, None)
        if value is not None:
            setattr(getattr(cfg, section), key, value)
    if args.output is not None:
        cfg.output = args.output
    return cfg


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
        return COMMANDS[args.command](cfg, args)
    except (SingularDistributionError, FloatingPointError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_SINGULAR
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
