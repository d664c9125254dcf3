"""Generalized-mutual-information computations.

Rates are in nats. The core quantity is Delta_g, the squared correlation
between the channel input and the processed output; the achievable rate is
0.5 * log(1 / (1 - Delta_g)). Scenario A fixes a learnt scaling parameter and
maximizes over the exponent variable gamma; scenario B uses the optimal
scaling and reduces to the closed form.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import ChannelModel
from .estimator import lmmse_predictor, var_conditional_mean
from .quadrature import QuadratureRule

DELTA_CLAMP = 1.0 - 1e-12

LN2 = np.log(2.0)


class ZeroPredictorError(ArithmeticError):
    """E[g(y)^2] vanished; the predictor carries no signal."""


@dataclass(frozen=True)
class MomentPair:
    """E[x g(y)], E[g(y)^2] and the input second moment they were taken under."""

    e_xg: float
    e_g2: float
    p_hat: float

    def __post_init__(self):
        if not self.p_hat > 0:
            raise ValueError("p_hat must be > 0")
        if self.e_g2 < 0:
            raise ValueError("e_g2 must be >= 0")

    @property
    def delta(self) -> float:
        """Squared correlation e_xg^2 / (p_hat e_g2); may exceed 1 for noisy
        empirical moments (Cauchy-Schwarz holds only for true expectations)."""
        if self.e_g2 < 1e-300:
            raise ZeroPredictorError("E[g(y)^2] below 1e-300")
        return self.e_xg**2 / (self.p_hat * self.e_g2)


@dataclass(frozen=True)
class GmiResult:
    delta: float
    gmi_nats: float
    a_opt: float
    gamma_opt: float
    clamped: bool = False

    @property
    def gmi_bits(self) -> float:
        return self.gmi_nats / LN2


def clamp_delta(delta: float):
    """Pull a noisy delta estimate back below 1; returns (delta, clamped)."""
    if delta >= 1.0:
        return DELTA_CLAMP, True
    return delta, False


def gmi_from_delta(delta: float) -> float:
    """0.5 * ln(1 / (1 - delta)); delta >= 1 is clamped to 1 - 1e-12."""
    if delta < 0:
        raise ValueError("delta must be >= 0")
    delta, _ = clamp_delta(delta)
    return 0.5 * np.log(1.0 / (1.0 - delta))


def optimal_scaling(m: MomentPair) -> float:
    """a = E[x g(y)] / P."""
    return m.e_xg / m.p_hat


_INVPHI = (np.sqrt(5.0) - 1.0) / 2.0


def golden_section_max(f, tol: float = 1e-10, bracket_cap: float = 2.0**60):
    """Maximize a unimodal f over gamma >= 0.

    The bracket [0, B] expands by doubling until the maximizer is interior
    (f(B) < f(B/2)); golden-section then shrinks to tolerance tol in gamma.
    Returns (gamma_star, f(gamma_star)).
    """
    b = 1.0
    while b < bracket_cap and f(b) >= f(b / 2.0):
        b *= 2.0
    a = 0.0
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = f(c), f(d)
    # 300 shrinks by ~0.618 exhaust float64 resolution from any bracket;
    # guards against stalling when (b - a) > tol is below the float spacing
    for _ in range(300):
        if (b - a) <= tol:
            break
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = f(d)
    g = 0.5 * (a + b)
    return g, f(g)


def scenario_A_objective(m: MomentPair, a: float):
    """The gamma-objective whose max over gamma >= 0 is the scenario-A GMI."""
    cy = m.e_g2 / (2.0 * a**2 * m.p_hat)
    cx = m.e_xg / (a * m.p_hat)

    def f(gamma):
        return (
            0.5 * np.log1p(gamma)
            - gamma / 2.0
            - gamma**2 / (1.0 + gamma) * cy
            + gamma * cx
        )

    return f


def gmi_scenario_A(m: MomentPair, a: float, tol: float = 1e-10) -> GmiResult:
    """GMI with a fixed (learnt) scaling parameter a."""
    if a == 0.0:
        raise ValueError("scaling parameter a must be nonzero")
    clamped = False
    if m.delta > DELTA_CLAMP:
        # noisy empirical moments can break Cauchy-Schwarz, which makes the
        # gamma-objective unbounded; pull e_xg back to the feasible boundary
        cap = np.sqrt(m.p_hat * m.e_g2 * DELTA_CLAMP)
        m = MomentPair(np.copysign(cap, m.e_xg), m.e_g2, m.p_hat)
        clamped = True
    gamma, val = golden_section_max(scenario_A_objective(m, a), tol=tol)
    if val <= 0.0:
        gamma, val = 0.0, 0.0  # gamma = 0 is always feasible with value 0
    delta_a = a * m.e_xg / m.e_g2
    return GmiResult(delta=delta_a, gmi_nats=val, a_opt=a, gamma_opt=gamma, clamped=clamped)


def gmi_scenario_B(m: MomentPair) -> GmiResult:
    """GMI with the optimal scaling a = E[x g(y)] / P."""
    delta, clamped = clamp_delta(m.delta)
    return GmiResult(
        delta=delta,
        gmi_nats=gmi_from_delta(delta),
        a_opt=optimal_scaling(m),
        gamma_opt=delta / (1.0 - delta),
        clamped=clamped,
    )


def lower_bound_A(delta_A: float, delta_B: float) -> float:
    """Closed-form lower bound on the scenario-A GMI, tight at delta_A = delta_B."""
    if not 0.0 < delta_A < 1.0:
        raise ValueError("delta_A must lie in (0, 1)")
    return 0.5 * np.log(1.0 / (1.0 - delta_A)) - (delta_A - delta_B) / (2.0 * (1.0 - delta_A))


def gmi_lmmse(model: ChannelModel, moment_oracle=None) -> GmiResult:
    """GMI of the best linear processor; a_opt equals Delta_LMMSE."""
    _, delta = lmmse_predictor(model, moment_oracle)
    return GmiResult(
        delta=delta,
        gmi_nats=gmi_from_delta(delta),
        a_opt=delta,
        gamma_opt=delta / (1.0 - delta),
    )


def gmi_mmse(model: ChannelModel, rule: QuadratureRule | None = None) -> GmiResult:
    """GMI of the conditional-expectation processor; a_opt equals Delta_MMSE."""
    delta = var_conditional_mean(model, rule) / model.P
    return GmiResult(
        delta=delta,
        gmi_nats=gmi_from_delta(delta),
        a_opt=delta,
        gamma_opt=delta / (1.0 - delta),
    )


def bussgang_snr(model: ChannelModel) -> float:
    """Effective SNR of the Bussgang linearization, scalar-output models only."""
    if model.p != 1:
        raise ValueError("Bussgang SNR is defined for scalar outputs")
    if model.is_linear:
        e_xy = model.P * model.h[0]
        e_y2 = model.P * model.h[0] ** 2 + model.sigma2
    else:
        from .estimator import quantized_moments

        e_xy_v, e_yy = quantized_moments(model)
        e_xy, e_y2 = float(e_xy_v[0]), float(e_yy[0, 0])
    return e_xy**2 / (model.P * e_y2 - e_xy**2)


def delta_of_predictor(
    model: ChannelModel, g, eval_samples: int, rng: np.random.Generator
):
    """True (MomentPair, delta) of a predictor under x ~ N(0, P) through the
    channel. Exact where the model admits it: quantized outputs have a finite
    alphabet, so the expectations reduce to sums over the 2^p patterns, and
    linear predictors on linear channels are closed form. Otherwise (data-
    dependent non-smooth predictors on continuous outputs) fresh Monte Carlo
    with eval_samples draws."""
    if eval_samples < 1000:
        raise ValueError("eval_samples must be >= 1e3")
    from .estimator import predictor_moments

    exact = predictor_moments(model, g)
    if exact is not None:
        e_xg, e_g2 = exact
    else:
        from .channel import sample_many

        x = rng.normal(0.0, np.sqrt(model.P), size=eval_samples)
        y = sample_many(model, x, rng)
        gv = g.predict_many(y)
        e_xg = float(np.mean(x * gv))
        e_g2 = float(np.mean(gv**2))
    if e_g2 < 1e-300:
        raise ZeroPredictorError("E[g(y)^2] below 1e-300")
    m = MomentPair(e_xg, e_g2, model.P)
    delta, _ = clamp_delta(m.delta)
    return m, delta
