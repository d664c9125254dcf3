"""Model-aware MMSE / LMMSE output estimators and their variances.

For linear channels everything is closed form. For one-bit channels the
conditional mean is a ratio of 1-D integrals of normal-CDF products against
the N(0, P) input density, evaluated with a quadrature rule; the variance of
the conditional mean enumerates all 2^p sign patterns.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import log_ndtr

from .channel import ChannelModel
from .quadrature import QuadratureRule, cdf_product_rule
from .regress import LinearPredictor, _as_matrix, _dedup_sign_rows

MAX_ENUM_DIM = 20

_LOG_UNDERFLOW = np.log(1e-300)


class SingularMomentError(np.linalg.LinAlgError):
    """E[y y^T] too ill-conditioned to invert."""


class DegeneratePosteriorError(ArithmeticError):
    """Posterior normalizer underflowed; the observed pattern has ~zero probability."""


class DimensionTooLargeError(ValueError):
    """2^p enumeration requested for p > 20."""


def default_rule(model: ChannelModel) -> QuadratureRule:
    """Quadrature rule adapted to the model's CDF-product integrands."""
    return cdf_product_rule(model.P, np.sqrt(model.sigma2), model.h)


def _log_cdf_tables(model: ChannelModel, rule: QuadratureRule):
    """log F(+(h_i u + b_i)/sigma) and log F(-(...)) at the quadrature nodes."""
    arg = (np.outer(rule.nodes, model.h) + model.b[None, :]) / np.sqrt(model.sigma2)
    return log_ndtr(arg), log_ndtr(-arg)


def _pattern_integrals(model: ChannelModel, patterns: np.ndarray, rule: QuadratureRule):
    """Numerator/denominator integrals of the conditional-mean ratio for each
    +/-1 pattern row; returns (num, den) arrays."""
    lp, lm = _log_cdf_tables(model, rule)
    mask = (patterns > 0).astype(float)
    logprod = mask @ lp.T + (1.0 - mask) @ lm.T  # (n_patterns, n_nodes)
    shift = logprod.max(axis=1, keepdims=True)
    e = np.exp(logprod - shift)
    scale = np.exp(shift[:, 0])
    den = (e @ rule.weights) * scale
    num = (e @ (rule.weights * rule.nodes)) * scale
    return num, den


def linear_moments(model: ChannelModel):
    """Closed-form (E[x y], E[y y^T]) for the unquantized channel."""
    e_xy = model.P * model.h
    e_yy = model.P * np.outer(model.h, model.h) + model.sigma2 * np.eye(model.p)
    return e_xy, e_yy


def quantized_moments(model: ChannelModel, rule: QuadratureRule | None = None):
    """Exact (E[x y], E[y y^T]) for one-bit outputs via 1-D quadrature.

    Components are conditionally independent given x, so every entry reduces
    to an integral of (2 F_i(u) - 1) factors against N(0, P).
    """
    rule = rule or default_rule(model)
    u, w = rule.nodes, rule.weights
    arg = (np.outer(u, model.h) + model.b[None, :]) / np.sqrt(model.sigma2)
    m = 2.0 * np.exp(log_ndtr(arg)) - 1.0  # E[y_i | x = u], shape (nodes, p)
    e_xy = (w * u) @ m
    e_yy = (m * w[:, None]).T @ m
    np.fill_diagonal(e_yy, 1.0)
    return e_xy, e_yy


def mc_moments(model: ChannelModel, M: int, rng: np.random.Generator):
    """Monte Carlo (E[x y], E[y y^T]) oracle with M samples."""
    from .channel import sample_many

    x = rng.normal(0.0, np.sqrt(model.P), size=M)
    y = sample_many(model, x, rng)
    e_xy = (x @ y) / M
    e_yy = (y.T @ y) / M
    return e_xy, e_yy


def moments_of(model: ChannelModel, rule: QuadratureRule | None = None):
    if model.is_linear:
        return linear_moments(model)
    return quantized_moments(model, rule)


def lmmse_predictor(model: ChannelModel, moment_oracle=None):
    """Optimal linear processor g(y) = E[xy]^T E[yy^T]^-1 y and its Delta.

    moment_oracle, if given, is a callable model -> (E[xy], E[yy^T]);
    defaults to closed form (linear) / quadrature (quantized).
    """
    e_xy, e_yy = (moment_oracle or moments_of)(model)
    if np.linalg.cond(e_yy) > 1e12:
        raise SingularMomentError("E[y y^T] condition number exceeds 1e12")
    beta = np.linalg.solve(e_yy, e_xy)
    delta = float(e_xy @ beta) / model.P
    return LinearPredictor(beta), delta


@dataclass(frozen=True)
class MmsePredictor:
    """Conditional-expectation processor g(y) = E[x | y]."""

    model: ChannelModel
    rule: QuadratureRule = None

    def __post_init__(self):
        if self.rule is None and self.model.is_quantized:
            object.__setattr__(self, "rule", default_rule(self.model))

    @property
    def p(self) -> int:
        return self.model.p

    def predict_many(self, y) -> np.ndarray:
        Y = _as_matrix(y, self.p)
        model = self.model
        if model.is_linear:
            gain = model.P / (model.sigma2 + model.P * float(model.h @ model.h))
            return gain * (Y @ model.h)
        dedup = _dedup_sign_rows(Y)
        if dedup is not None:
            uniq, inv = dedup
            return self._ratio(uniq)[inv]
        return self._ratio(Y)

    def _ratio(self, patterns: np.ndarray) -> np.ndarray:
        num, den = _pattern_integrals(self.model, patterns, self.rule)
        if np.any(den < 1e-300):
            raise DegeneratePosteriorError("posterior normalizer underflowed below 1e-300")
        return num / den


def mmse_estimate(model: ChannelModel, y, rule: QuadratureRule | None = None) -> float:
    """E[x | y] for a single output vector."""
    return float(MmsePredictor(model, rule).predict_many(y)[0])


def _sign_patterns(p: int) -> np.ndarray:
    return np.array(
        [[1.0 if (k >> i) & 1 else -1.0 for i in range(p)] for k in range(2**p)]
    )


def predictor_moments(model: ChannelModel, g, rule: QuadratureRule | None = None):
    """Exact (E[x g(y)], E[g(y)^2]) of a predictor under x ~ N(0, P), or None
    when no closed/quadrature form applies.

    Linear channels admit a closed form for (ensembles of) linear predictors;
    quantized channels have a finite output alphabet, so any predictor reduces
    to a sum over the 2^p patterns weighted by the pattern integrals.
    """
    if model.is_linear:
        beta = _effective_beta(g)
        if beta is None:
            return None
        e_xy, e_yy = linear_moments(model)
        return float(beta @ e_xy), float(beta @ e_yy @ beta)
    if model.p > MAX_ENUM_DIM:
        return None
    rule = rule or default_rule(model)
    patterns = _sign_patterns(model.p)
    num, den = _pattern_integrals(model, patterns, rule)
    gv = g.predict_many(patterns)
    return float(gv @ num), float(gv**2 @ den)


def _effective_beta(g):
    """Coefficient vector of a linear predictor or a flat-linear ensemble."""
    beta = getattr(g, "beta", None)
    if beta is not None:
        return beta
    members = getattr(g, "members", None)
    if members is None:
        return None
    betas = [getattr(m, "beta", None) for m in members]
    if any(b is None for b in betas):
        return None
    return np.mean(betas, axis=0)


def var_conditional_mean(model: ChannelModel, rule: QuadratureRule | None = None) -> float:
    """var E[x | y]; exact enumeration of sign patterns for quantized kinds."""
    if model.is_linear:
        _, delta = lmmse_predictor(model)
        return model.P * delta
    if model.p > MAX_ENUM_DIM:
        raise DimensionTooLargeError(f"2^p enumeration infeasible for p = {model.p}")
    rule = rule or default_rule(model)
    num, den = _pattern_integrals(model, _sign_patterns(model.p), rule)
    ratio = np.where(den > 1e-300, num / np.where(den > 0, den, 1.0), 0.0)
    return float(np.sum(ratio**2 * den))
