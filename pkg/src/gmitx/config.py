"""YAML experiment configuration.

Layout (all sections optional except `channel`):

    channel:   {kind, h, sigma2, alpha, P}
    train:     {L, Q}
    lfit:      {xi1, xi2}
    regressor: {kind, lambda, kernel}
    mc:        {trials, seed}
    eval:      {samples}
    clt:       {nu, target_poe}
    sweep:     {snr_db: [...]}

Dither biases are always derived from alpha, never user-supplied.
"""

from __future__ import annotations

import yaml

from .channel import make_model
from .harness import ExperimentConfig
from .lfit import RegressorSpec


class ConfigError(ValueError):
    """Malformed or incomplete configuration."""


def _section(data: dict, name: str) -> dict:
    sec = data.get(name, {})
    if not isinstance(sec, dict):
        raise ConfigError(f"section {name!r} must be a mapping")
    return sec


def config_from_dict(data: dict) -> ExperimentConfig:
    if not isinstance(data, dict) or "channel" not in data:
        raise ConfigError("config must be a mapping with a 'channel' section")
    ch = _section(data, "channel")
    try:
        kind = ch["kind"]
        h = ch.get("h", [1.0])
        sigma2 = float(ch.get("sigma2", 1.0))
        P = float(ch["P"])
        alpha = float(ch.get("alpha", 0.0))
        model = make_model(kind, h, sigma2, P, alpha)
    except KeyError as exc:
        raise ConfigError(f"channel section missing key {exc}") from exc

    train = _section(data, "train")
    lf = _section(data, "lfit")
    reg = _section(data, "regressor")
    mc = _section(data, "mc")
    ev = _section(data, "eval")
    clt = _section(data, "clt")
    sweep = _section(data, "sweep")

    regressor = RegressorSpec(
        kind=reg.get("kind", "ridge"),
        lam=float(reg.get("lambda", 0.0)),
        kernel=reg.get("kernel", "gaussian"),
    )
    return ExperimentConfig(
        model=model,
        alpha=alpha,
        L=int(train.get("L", 800)),
        Q=int(train.get("Q", 5)),
        xi1=float(lf.get("xi1", 1.002)),
        xi2=float(lf.get("xi2", 0.998)),
        regressor=regressor,
        trials=int(mc.get("trials", 2000)),
        seed=int(mc.get("seed", 0)),
        eval_samples=int(ev.get("samples", 100_000)),
        nu=float(clt.get("nu", 0.5)),
        target_poe=float(clt.get("target_poe", 0.05)),
        snr_list=tuple(float(s) for s in sweep.get("snr_db", ())),
    )


def load_config(path: str) -> ExperimentConfig:
    with open(path) as f:
        data = yaml.safe_load(f)
    return config_from_dict(data)
