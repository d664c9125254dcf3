"""Command-line entry point.

Subcommands:
    gmi-sweep  --config FILE --out CSV    GMI vs SNR for the configured channel
    lfit-eval  --config FILE --lambda-grid LIST --out CSV
                                          loss metrics per regularization value
    awgn-demo  --out CSV [--trials N] [--seed S]
                                          rate CDFs for the scalar AWGN example
    clt-rate   --config FILE              one sample-split run with the
                                          guaranteed rate

All outputs are CSV with 6 significant digits; identical config and seed give
byte-identical files.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from .channel import ChannelConfigError, make_model
from .config import ConfigError, load_config
from .harness import (
    ExperimentConfig,
    cdf_export,
    format_csv,
    gmi_sweep,
    mmse_reference,
    over_estimation_probability,
    receding_level,
    run_clt_trial,
    run_experiment,
    run_trial,
)
from .lfit import RegressorSpec

LN2 = np.log(2.0)


def _write(path: str, text: str) -> None:
    with open(path, "w", newline="") as f:
        f.write(text)


def cmd_gmi_sweep(args) -> int:
    cfg = load_config(args.config)
    if not cfg.snr_list:
        raise ConfigError("gmi-sweep needs sweep.snr_db in the config")
    rows = gmi_sweep(cfg.model.kind, cfg.model.h, cfg.model.sigma2, cfg.alpha, cfg.snr_list)
    _write(args.out, format_csv(("snr_db", "gmi_lmmse_nats", "gmi_mmse_nats"), rows))
    return 0


def cmd_lfit_eval(args) -> int:
    cfg = load_config(args.config)
    grid = [float(s) for s in args.lambda_grid.split(",") if s.strip()]
    if not grid:
        raise ConfigError("empty lambda grid")
    i_mmse = mmse_reference(cfg.model)
    rows = []
    for lam in grid:
        reg = RegressorSpec(cfg.regressor.kind, lam, cfg.regressor.kernel)
        cfg_l = ExperimentConfig(
            model=cfg.model, alpha=cfg.alpha, L=cfg.L, Q=cfg.Q, xi1=cfg.xi1,
            xi2=cfg.xi2, regressor=reg, trials=cfg.trials, seed=cfg.seed,
            eval_samples=cfg.eval_samples, nu=cfg.nu, target_poe=cfg.target_poe,
        )
        records = run_experiment(cfg_l, run_trial)
        rows.append(
            (
                lam,
                100.0 * over_estimation_probability(records),
                100.0 * receding_level(records, i_mmse, "A"),
                cfg.trials,
            )
        )
    _write(args.out, format_csv(("lambda", "p_oe_pct", "l_r_pct", "trials"), rows))
    return 0


def awgn_demo_config(trials: int, seed: int) -> ExperimentConfig:
    """The scalar AWGN reference experiment: P = 100, ridge lambda = 0,
    L = 800, Q = 5, (xi1, xi2) = (1.002, 0.998)."""
    model = make_model("awgn", [1.0], 1.0, 100.0)
    return ExperimentConfig(
        model=model, alpha=0.0, L=800, Q=5, xi1=1.002, xi2=0.998,
        regressor=RegressorSpec("ridge", 0.0), trials=trials, seed=seed,
    )


def cmd_awgn_demo(args) -> int:
    cfg = awgn_demo_config(args.trials, args.seed)
    records = run_experiment(cfg, run_trial)
    rows = []
    for name, vals in (
        ("r_t_bits", [r.r_t / LN2 for r in records]),
        ("i_a_bits", [r.i_a / LN2 for r in records]),
        ("i_b_bits", [r.i_b / LN2 for r in records]),
        ("i_a_minus_r_t_nats", [r.i_a - r.r_t for r in records]),
    ):
        rows.extend((name, v, c) for v, c in cdf_export(vals))
    _write(args.out, format_csv(("series", "value", "cdf"), rows))
    return 0


def cmd_clt_rate(args) -> int:
    cfg = load_config(args.config)
    rec = run_clt_trial(cfg, 0)
    print(f"a-scenario GMI (oracle): {rec.i_a:.6g} nats")
    print(f"guaranteed rate R_T:     {rec.r_t:.6g} nats ({rec.r_t / LN2:.6g} bits)")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gmitx", description=__doc__)
    sub = p.add_subparsers(dest="cmd", required=True)

    s = sub.add_parser("gmi-sweep", help="GMI vs SNR sweep")
    s.add_argument("--config", required=True)
    s.add_argument("--out", required=True)
    s.set_defaults(fn=cmd_gmi_sweep)

    s = sub.add_parser("lfit-eval", help="loss metrics over a lambda grid")
    s.add_argument("--config", required=True)
    s.add_argument("--lambda-grid", required=True)
    s.add_argument("--out", required=True)
    s.set_defaults(fn=cmd_lfit_eval)

    s = sub.add_parser("awgn-demo", help="rate CDFs for the AWGN example")
    s.add_argument("--out", required=True)
    s.add_argument("--trials", type=int, default=2000)
    s.add_argument("--seed", type=int, default=20240801)
    s.set_defaults(fn=cmd_awgn_demo)

    s = sub.add_parser("clt-rate", help="sample-split guaranteed rate")
    s.add_argument("--config", required=True)
    s.set_defaults(fn=cmd_clt_rate)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (ConfigError, ChannelConfigError, ValueError, OSError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
