"""Statistical channel models: linear SIMO, one-bit quantized, dithered one-bit.

All models take a real scalar input x and emit a real p-dimensional output.
Quantized outputs live in {-1, +1}^p with sign(0) = +1.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtr

KINDS = ("awgn", "simo_linear", "simo_onebit", "simo_onebit_dithered")
QUANTIZED_KINDS = ("simo_onebit", "simo_onebit_dithered")


class ChannelConfigError(ValueError):
    """Invalid channel parameters."""


@dataclass(frozen=True)
class ChannelModel:
    """Immutable channel law y = h*x + z, optionally one-bit quantized with dither b."""

    kind: str
    h: np.ndarray
    sigma2: float
    P: float
    b: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ChannelConfigError(f"unknown channel kind {self.kind!r}")
        h = np.atleast_1d(np.asarray(self.h, dtype=float))
        if h.ndim != 1 or h.size < 1:
            raise ChannelConfigError("h must be a nonempty 1-D vector")
        object.__setattr__(self, "h", h)
        if not self.sigma2 > 0:
            raise ChannelConfigError("sigma2 must be > 0")
        if not self.P > 0:
            raise ChannelConfigError("P must be > 0")
        b = self.b
        if b is None:
            b = np.zeros_like(h)
        b = np.atleast_1d(np.asarray(b, dtype=float))
        if b.shape != h.shape:
            raise ChannelConfigError("b must match h in length")
        if self.kind != "simo_onebit_dithered" and np.any(b != 0.0):
            raise ChannelConfigError("dither biases require kind simo_onebit_dithered")
        if self.kind == "awgn" and not (h.size == 1 and h[0] == 1.0):
            raise ChannelConfigError("awgn is simo_linear with p=1, h=[1]")
        object.__setattr__(self, "b", b)

    @property
    def p(self) -> int:
        return self.h.size

    @property
    def is_quantized(self) -> bool:
        return self.kind in QUANTIZED_KINDS

    @property
    def is_linear(self) -> bool:
        return self.kind in ("awgn", "simo_linear")

    def with_power(self, P: float, alpha: float = 0.0) -> "ChannelModel":
        """Return a copy at a new input power, recomputing dither biases."""
        b = None
        if self.kind == "simo_onebit_dithered":
            b = dither_biases(self.h, P, alpha)
        return ChannelModel(self.kind, self.h, self.sigma2, P, b)


@dataclass(frozen=True)
class TrainingSet:
    """L i.i.d. (x, y) pairs; x has shape (L,), y has shape (L, p)."""

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        y = np.asarray(self.y, dtype=float)
        if x.ndim != 1 or y.ndim != 2 or y.shape[0] != x.shape[0]:
            raise ValueError("x must be (L,), y must be (L, p)")
        if x.shape[0] < 1:
            raise ValueError("need at least one pair")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @property
    def L(self) -> int:
        return self.x.shape[0]

    @property
    def p(self) -> int:
        return self.y.shape[1]


def normal_quantile(level: float, tol: float = 1e-12) -> float:
    """Standard-normal quantile by bisection on the CDF to absolute tolerance tol."""
    if not 0.0 < level < 1.0:
        raise ValueError("level must lie in (0, 1)")
    lo, hi = -40.0, 40.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if ndtr(mid) < level:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def dither_biases(h, P: float, alpha: float) -> np.ndarray:
    """Heuristic dither design b_i = alpha * sqrt(P) * h_i * u_i, u_i the
    standard-normal quantile at level i/(p+1)."""
    if not P > 0:
        raise ValueError("P must be > 0")
    h = np.atleast_1d(np.asarray(h, dtype=float))
    p = h.size
    u = np.array([normal_quantile((i + 1) / (p + 1)) for i in range(p)])
    return alpha * np.sqrt(P) * h * u


def make_model(kind: str, h, sigma2: float, P: float, alpha: float = 0.0) -> ChannelModel:
    """Build a ChannelModel; dither biases are derived from alpha, never user-supplied."""
    b = None
    if kind == "simo_onebit_dithered":
        b = dither_biases(h, P, alpha)
    return ChannelModel(kind, h, sigma2, P, b)


def sample_many(model: ChannelModel, x: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Push an array of inputs through the channel; returns shape (n, p)."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    z = rng.normal(0.0, np.sqrt(model.sigma2), size=(x.size, model.p))
    v = x[:, None] * model.h[None, :] + z
    if model.is_linear:
        return v
    v = v + model.b[None, :]
    return np.where(v >= 0.0, 1.0, -1.0)


def sample(model: ChannelModel, x: float, rng: np.random.Generator) -> np.ndarray:
    """One channel use: returns h*x + z, or its (dithered) componentwise sign."""
    return sample_many(model, np.array([float(x)]), rng)[0]


def draw_training_set(model: ChannelModel, L: int, rng: np.random.Generator) -> TrainingSet:
    """Draw L i.i.d. pairs with Gaussian training inputs x ~ N(0, P)."""
    if L < 1:
        raise ValueError("L must be >= 1")
    x = rng.normal(0.0, np.sqrt(model.P), size=L)
    y = sample_many(model, x, rng)
    return TrainingSet(x, y)


def snr_db(model: ChannelModel) -> float:
    """SNR measured as ||h||^2 P / sigma^2, in dB."""
    return 10.0 * np.log10(np.dot(model.h, model.h) * model.P / model.sigma2)
