"""1-D quadrature rules against the N(0, P) weight.

Two builders are provided. ``gauss_hermite_rule`` is the classical choice and
is exact for polynomial integrands. The integrands arising from one-bit
quantized channels are products of unit-width normal CDFs under a width
sqrt(P) Gaussian envelope; at high SNR the two scales separate and
Gauss-Hermite converges poorly, so ``cdf_product_rule`` builds a composite
Gauss-Legendre rule whose panel width resolves the narrower scale.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import roots_hermite, roots_legendre

DEFAULT_ORDER = 200


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes and weights such that sum(w * f(u)) ~ E[f(U)], U ~ N(0, P)."""

    nodes: np.ndarray
    weights: np.ndarray
    P: float

    def __post_init__(self):
        if np.shape(self.nodes) != np.shape(self.weights):
            raise ValueError("nodes and weights must have matching shapes")

    def integrate(self, f) -> float:
        """E[f(U)], U ~ N(0, P); f is a callable or values at the nodes."""
        values = f(self.nodes) if callable(f) else f
        return float(np.dot(self.weights, values))


def gauss_hermite_rule(order: int = DEFAULT_ORDER, P: float = 1.0) -> QuadratureRule:
    """Gauss-Hermite rule rescaled to the N(0, P) weight."""
    if order < 2:
        raise ValueError("order must be >= 2")
    if not P > 0:
        raise ValueError("P must be > 0")
    t, w = roots_hermite(order)
    return QuadratureRule(np.sqrt(2.0 * P) * t, w / np.sqrt(np.pi), P)


def cdf_product_rule(
    P: float,
    sigma: float = 1.0,
    h=None,
    nodes_per_panel: int = 16,
    halfwidth: float = 12.0,
) -> QuadratureRule:
    """Composite Gauss-Legendre rule on [-halfwidth*sqrt(P), +halfwidth*sqrt(P)]
    with the N(0, P) density folded into the weights.

    Panel width is capped at ~3 sigma / max|h_i| so that each normal-CDF
    transition is resolved by a full panel.
    """
    if not P > 0:
        raise ValueError("P must be > 0")
    hmax = np.max(np.abs(h)) if h is not None and np.size(h) else 0.0
    feature = 3.0 * sigma / hmax if hmax > 0 else np.inf
    panel = min(np.sqrt(P) / 2.0, feature)
    radius = halfwidth * np.sqrt(P)
    n_panels = int(np.ceil(2.0 * radius / panel))
    edges = np.linspace(-radius, radius, n_panels + 1)
    t, w = roots_legendre(nodes_per_panel)
    mid = 0.5 * (edges[:-1] + edges[1:])
    half = 0.5 * (edges[1:] - edges[:-1])
    u = (mid[:, None] + half[:, None] * t[None, :]).ravel()
    wq = (half[:, None] * w[None, :]).ravel()
    pdf = np.exp(-(u**2) / (2.0 * P)) / np.sqrt(2.0 * np.pi * P)
    return QuadratureRule(u, wq * pdf, P)
