"""Cross-validated learning of (g, a, R): the rate-selection algorithm and the
CLT-guaranteed sample-split rate.

The CV path partitions the training set into Q folds, fits one predictor per
held-out fold, estimates the needed moments on the held-out data, and picks
the code rate by maximizing the gamma-objective with slightly biased moment
estimates (xi1 inflates E[g^2], xi2 deflates E[x g] toward under-estimation).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import erfcinv

from .channel import TrainingSet
from .gmi import MomentPair, ZeroPredictorError, golden_section_max, scenario_A_objective
from .regress import EnsemblePredictor, fit_kernel, fit_ridge


class FoldCountError(ValueError):
    """More folds than training pairs."""


class TooFewSamplesError(ValueError):
    """Sample variance needs at least two samples."""


@dataclass(frozen=True)
class RegressorSpec:
    kind: str  # "ridge" or "kernel"
    lam: float
    kernel: str = "gaussian"

    def __post_init__(self):
        if self.kind not in ("ridge", "kernel"):
            raise ValueError(f"unknown regressor kind {self.kind!r}")

    def fit(self, t: TrainingSet):
        if self.kind == "ridge":
            return fit_ridge(t, self.lam)
        return fit_kernel(t, self.lam, self.kernel)


@dataclass(frozen=True)
class LfitConfig:
    Q: int
    xi1: float
    xi2: float
    regressor: RegressorSpec
    shuffle: bool = False  # seeded shuffle before contiguous partitioning

    def __post_init__(self):
        if self.Q < 2:
            raise ValueError("Q must be >= 2")
        if not self.xi1 > 1.0:
            raise ValueError("xi1 must exceed 1")


@dataclass(frozen=True)
class LfitOutput:
    g_T: EnsemblePredictor
    a_T: float
    r_t: float
    moments: MomentPair
    degenerate: bool = False
    xi2_mirrored: bool = False


def partition(t: TrainingSet, Q: int):
    """Q disjoint contiguous folds of size floor(L/Q); leftover pairs dropped."""
    if Q < 2:
        raise ValueError("Q must be >= 2")
    if Q > t.L:
        raise FoldCountError(f"Q = {Q} exceeds L = {t.L}")
    m = t.L // Q
    return [slice(q * m, (q + 1) * m) for q in range(Q)]


def empirical_variance(samples) -> float:
    """Unbiased sample variance with divisor (n - 1)."""
    s = np.asarray(samples, dtype=float)
    if s.size < 2:
        raise TooFewSamplesError("need at least two samples")
    return float(np.var(s, ddof=1))


def _rate_from_biased_moments(e_xg, e_g2, a, p_hat, xi1, xi2) -> float:
    m = MomentPair(xi2 * e_xg, xi1 * e_g2, p_hat)
    gamma, val = golden_section_max(scenario_A_objective(m, a))
    return max(val, 0.0)


def lfit_run(t: TrainingSet, cfg: LfitConfig, rng: np.random.Generator | None = None) -> LfitOutput:
    """Full CV learning pass: (g_T, a_T, R_T) from a training set."""
    x, y = t.x, t.y
    if cfg.shuffle:
        perm = (rng or np.random.default_rng(0)).permutation(t.L)
        x, y = x[perm], y[perm]
    folds = partition(TrainingSet(x, y), cfg.Q)
    trunc = cfg.Q * (t.L // cfg.Q)
    x, y = x[:trunc], y[:trunc]

    members = []
    exg_q = np.empty(cfg.Q)
    eg2_q = np.empty(cfg.Q)
    for q, fold in enumerate(folds):
        mask = np.ones(trunc, dtype=bool)
        mask[fold] = False
        g_q = cfg.regressor.fit(TrainingSet(x[mask], y[mask]))
        gv = g_q.predict_many(y[fold])
        exg_q[q] = np.mean(x[fold] * gv)
        eg2_q[q] = np.mean(gv**2)
        members.append(g_q)

    e_xg = float(np.mean(exg_q))
    e_g2 = float(np.mean(eg2_q))
    p_hat = float(np.mean(x**2))
    if e_g2 < 1e-300:
        raise ZeroPredictorError("CV estimate of E[g(y)^2] below 1e-300")
    a_T = e_xg / p_hat
    g_T = EnsemblePredictor(tuple(members))
    moments = MomentPair(e_xg, e_g2, p_hat)

    if a_T == 0.0:
        return LfitOutput(g_T, 0.0, 0.0, moments, degenerate=True)

    # keep the bias pointed toward under-estimation if a_T flips sign
    xi2, mirrored = cfg.xi2, False
    if (a_T > 0) != (xi2 < 1.0):
        xi2, mirrored = 2.0 - xi2, True
    r_t = _rate_from_biased_moments(e_xg, e_g2, a_T, p_hat, cfg.xi1, xi2)
    return LfitOutput(g_T, a_T, r_t, moments, xi2_mirrored=mirrored)


def clt_rate(
    t: TrainingSet,
    nu: float,
    target_poe: float,
    regressor: RegressorSpec,
    P: float,
):
    """Sample-split rate with an asymptotic over-estimation guarantee.

    Fits g and a on the first (1 - nu) L pairs; the held-out nu L pairs give
    CLT-biased estimates of the two moments. P is the configured input power
    (the guarantee assumes x ~ N(0, P)). Returns (g, a, R_T).
    """
    if not 0.0 < nu < 1.0:
        raise ValueError("nu must lie in (0, 1)")
    if not 0.0 < target_poe <= 1.0:
        raise ValueError("target_poe must lie in (0, 1]")
    n_hold = int(round(nu * t.L))
    n_fit = t.L - n_hold
    if n_hold < 30:
        raise ValueError("nu * L must be >= 30 for the CLT regime")
    if n_fit < 1:
        raise ValueError("no pairs left for fitting")

    fit_part = TrainingSet(t.x[:n_fit], t.y[:n_fit])
    g = regressor.fit(fit_part)
    gv_fit = g.predict_many(fit_part.y)
    p_hat = float(np.mean(fit_part.x**2))
    a = float(np.mean(fit_part.x * gv_fit)) / p_hat
    if a == 0.0:
        return g, 0.0, 0.0

    xh, yh = t.x[n_fit:], t.y[n_fit:]
    gv = g.predict_many(yh)
    z = float(erfcinv(target_poe))
    g2 = gv**2
    xg = xh * gv
    f_y = (np.mean(g2) + np.sqrt(2.0 * empirical_variance(g2) / n_hold) * z) / (
        2.0 * a**2 * P
    )
    f_xy = (np.mean(xg) - np.sign(a) * np.sqrt(2.0 * empirical_variance(xg) / n_hold) * z) / (
        a * P
    )

    def f(gamma):
        return (
            0.5 * np.log1p(gamma) - gamma / 2.0 - gamma**2 / (1.0 + gamma) * f_y + gamma * f_xy
        )

    _, val = golden_section_max(f)
    return g, a, max(val, 0.0)
