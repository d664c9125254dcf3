"""Monte Carlo experiment driver: per-trial learning runs, loss metrics,
CDF/CSV export, and the GMI-vs-SNR sweep.

Every trial derives its own random stream from (mc.seed, trial_index) through
a splitmix64-style mixer, so results do not depend on execution order and the
trial loop can be parallelized (set GMITX_WORKERS > 1).
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .channel import ChannelModel, draw_training_set, make_model
from .gmi import delta_of_predictor, gmi_lmmse, gmi_mmse, gmi_scenario_A, gmi_scenario_B
from .lfit import LfitConfig, RegressorSpec, clt_rate, lfit_run

_MASK = (1 << 64) - 1


class NoValidTrialsError(RuntimeError):
    """Every trial over-estimated; receding level undefined."""


def mix64(seed: int, index: int) -> int:
    """Derive a per-trial 64-bit seed: splitmix64 finalizer over the
    golden-ratio sequence started at `seed`."""
    z = (seed + (index + 1) * 0x9E3779B97F4A7C15) & _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


@dataclass(frozen=True)
class TrialRecord:
    r_t: float  # learnt code rate, nats
    i_a: float  # oracle scenario-A GMI at the learnt scaling, nats
    i_b: float  # oracle scenario-B GMI, nats
    seed: int


@dataclass(frozen=True)
class ExperimentConfig:
    model: ChannelModel
    alpha: float
    L: int
    Q: int
    xi1: float
    xi2: float
    regressor: RegressorSpec
    trials: int = 2000
    seed: int = 0
    eval_samples: int = 100_000
    nu: float = 0.5
    target_poe: float = 0.05
    snr_list: tuple = ()

    def __post_init__(self):
        if min(self.L, self.Q, self.trials, self.eval_samples) < 1:
            raise ValueError("all counts must be >= 1")

    def lfit_config(self) -> LfitConfig:
        return LfitConfig(self.Q, self.xi1, self.xi2, self.regressor)


def run_trial(cfg: ExperimentConfig, trial_index: int) -> TrialRecord:
    """One learning trial: draw a training set, run the CV learner, then judge
    the learnt predictor against fresh channel samples."""
    trial_seed = mix64(cfg.seed, trial_index)
    rng = np.random.default_rng(trial_seed)
    t = draw_training_set(cfg.model, cfg.L, rng)
    out = lfit_run(t, cfg.lfit_config())
    m, _ = delta_of_predictor(cfg.model, out.g_T, cfg.eval_samples, rng)
    i_b = gmi_scenario_B(m).gmi_nats
    i_a = gmi_scenario_A(m, out.a_T).gmi_nats if out.a_T != 0.0 else 0.0
    return TrialRecord(r_t=out.r_t, i_a=i_a, i_b=i_b, seed=trial_seed)


def run_clt_trial(cfg: ExperimentConfig, trial_index: int) -> TrialRecord:
    """One sample-split trial using the CLT-guaranteed rate."""
    trial_seed = mix64(cfg.seed, trial_index)
    rng = np.random.default_rng(trial_seed)
    t = draw_training_set(cfg.model, cfg.L, rng)
    g, a, r = clt_rate(t, cfg.nu, cfg.target_poe, cfg.regressor, cfg.model.P)
    m, _ = delta_of_predictor(cfg.model, g, cfg.eval_samples, rng)
    i_b = gmi_scenario_B(m).gmi_nats
    i_a = gmi_scenario_A(m, a).gmi_nats if a != 0.0 else 0.0
    return TrialRecord(r_t=r, i_a=i_a, i_b=i_b, seed=trial_seed)


def _worker_count() -> int:
    try:
        return max(1, int(os.environ.get("GMITX_WORKERS", "1")))
    except ValueError:
        return 1


def run_experiment(cfg: ExperimentConfig, trial_fn=run_trial) -> list:
    """Run cfg.trials independent trials; deterministic regardless of workers."""
    indices = range(cfg.trials)
    workers = _worker_count()
    if workers == 1:
        return [trial_fn(cfg, i) for i in indices]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        chunk = max(1, cfg.trials // (8 * workers))
        return list(pool.map(trial_fn, [cfg] * cfg.trials, indices, chunksize=chunk))


def over_estimation_probability(records) -> float:
    """Fraction of trials whose learnt rate exceeds the achievable GMI."""
    if not records:
        raise ValueError("no records")
    return sum(1 for r in records if r.r_t > r.i_a) / len(records)


def receding_level(records, i_mmse: float, scenario: str = "A") -> float:
    """Mean relative shortfall from the known-channel optimum.

    Scenario A conditions on the no-over-estimation event; scenario B uses
    the mean achieved GMI directly.
    """
    if not records:
        raise ValueError("no records")
    if not i_mmse > 0:
        raise ValueError("i_mmse must be > 0")
    if scenario == "B":
        return 1.0 - float(np.mean([r.i_b for r in records])) / i_mmse
    good = [r.r_t for r in records if r.i_a - r.r_t >= 0.0]
    if not good:
        raise NoValidTrialsError("every trial over-estimated")
    return 1.0 - float(np.mean(good)) / i_mmse


def cdf_export(values):
    """Empirical CDF: sorted (value, i/n) pairs."""
    v = sorted(float(x) for x in values)
    if not v:
        raise ValueError("no values")
    n = len(v)
    return [(x, (i + 1) / n) for i, x in enumerate(v)]


def gmi_sweep(kind: str, h, sigma2: float, alpha: float, snr_db_list):
    """(snr_db, gmi_lmmse, gmi_mmse) rows; P rescaled per SNR point, dither
    biases recomputed alongside."""
    h = np.atleast_1d(np.asarray(h, dtype=float))
    rows = []
    for snr in snr_db_list:
        P = 10.0 ** (snr / 10.0) * sigma2 / float(h @ h)
        model = make_model(kind, h, sigma2, P, alpha)
        rows.append((float(snr), gmi_lmmse(model).gmi_nats, gmi_mmse(model).gmi_nats))
    return rows


def format_csv(header, rows) -> str:
    """CSV text with 6 significant digits and one header row."""
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(f"{v:.6g}" if isinstance(v, float) else str(v) for v in row))
    return "\n".join(lines) + "\n"


def mmse_reference(model: ChannelModel) -> float:
    """The known-channel optimum rate used by the receding level."""
    return gmi_mmse(model).gmi_nats
