"""Output-processing predictors: linear/ridge fits, Nadaraya-Watson kernel
smoothers, and cross-validation ensembles.

Every predictor maps a p-dimensional channel output to a real scalar and is
immutable after construction. ``predict_many`` is the batch entry point; it
collapses duplicate rows before evaluating expensive predictors, which makes
quantized-output workloads (at most 2^p distinct patterns) cheap.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .channel import TrainingSet

KERNELS = ("gaussian", "tricube")

# all-weights-below-1e-300 rule for the nearest-anchor fallback
_LOG_UNDERFLOW = np.log(1e-300)

_CHUNK = 4096


class SingularSystemError(np.linalg.LinAlgError):
    """Ridge system is singular (lambda = 0 with rank-deficient outputs)."""


class DimensionMismatchError(ValueError):
    """Query dimension does not match the predictor."""


def _as_matrix(y, p: int) -> np.ndarray:
    Y = np.asarray(y, dtype=float)
    if Y.ndim == 1:
        Y = Y[None, :]
    if Y.ndim != 2 or Y.shape[1] != p:
        raise DimensionMismatchError(f"expected output dimension {p}, got shape {Y.shape}")
    return Y


def _dedup_sign_rows(Y: np.ndarray):
    """If Y is a +/-1 pattern matrix with p <= 20, return (unique_rows, inverse)."""
    n, p = Y.shape
    if p > 20 or n < 64:
        return None
    if not np.all(np.abs(Y) == 1.0):
        return None
    codes = ((Y > 0).astype(np.int64) @ (1 << np.arange(p, dtype=np.int64)))
    _, idx, inv = np.unique(codes, return_index=True, return_inverse=True)
    if idx.size > n // 4:
        return None
    return Y[idx], inv


@dataclass(frozen=True)
class LinearPredictor:
    """g(y) = beta^T y."""

    beta: np.ndarray
    lam: float = 0.0

    def __post_init__(self):
        beta = np.atleast_1d(np.asarray(self.beta, dtype=float))
        if not np.all(np.isfinite(beta)):
            raise ValueError("beta must be finite")
        object.__setattr__(self, "beta", beta)

    @property
    def p(self) -> int:
        return self.beta.size

    def predict_many(self, y) -> np.ndarray:
        return _as_matrix(y, self.p) @ self.beta


@dataclass(frozen=True)
class KernelPredictor:
    """Nadaraya-Watson smoother over a memorized training set."""

    anchors: TrainingSet
    lam: float
    kernel: str = "gaussian"

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError("kernel width lam must be > 0")
        if self.kernel not in KERNELS:
            raise ValueError(f"unknown kernel {self.kernel!r}")

    @property
    def p(self) -> int:
        return self.anchors.p

    def predict_many(self, y) -> np.ndarray:
        Y = _as_matrix(y, self.p)
        dedup = _dedup_sign_rows(Y)
        if dedup is not None:
            uniq, inv = dedup
            return self._predict_block(uniq)[inv]
        out = np.empty(Y.shape[0])
        for lo in range(0, Y.shape[0], _CHUNK):
            out[lo : lo + _CHUNK] = self._predict_block(Y[lo : lo + _CHUNK])
        return out

    def _predict_block(self, Y: np.ndarray) -> np.ndarray:
        ax, ay = self.anchors.x, self.anchors.y
        d2 = np.maximum(
            np.sum(Y**2, axis=1)[:, None]
            - 2.0 * (Y @ ay.T)
            + np.sum(ay**2, axis=1)[None, :],
            0.0,
        )
        if self.kernel == "gaussian":
            # 1/(sqrt(2 pi) lam) prefactor cancels in the ratio
            logw = -d2 / (2.0 * self.lam**2)
            shift = logw.max(axis=1)
            w = np.exp(logw - shift[:, None])
            num = w @ ax
            den = w.sum(axis=1)
            vals = num / den
            dead = shift < _LOG_UNDERFLOW
        else:
            r = np.sqrt(d2) / self.lam
            w = np.where(r < 1.0, (1.0 - r**3) ** 3, 0.0)
            den = w.sum(axis=1)
            ok = den > 0.0
            vals = np.zeros(Y.shape[0])
            vals[ok] = (w[ok] @ ax) / den[ok]
            dead = ~ok
        if np.any(dead):
            vals[dead] = ax[np.argmin(d2[dead], axis=1)]
        return vals


@dataclass(frozen=True)
class EnsemblePredictor:
    """Arithmetic mean of member predictors (the CV ensemble g_T)."""

    members: tuple

    def __post_init__(self):
        members = tuple(self.members)
        if not members:
            raise ValueError("ensemble needs at least one member")
        if len({m.p for m in members}) != 1:
            raise DimensionMismatchError("ensemble members disagree on dimension")
        object.__setattr__(self, "members", members)

    @property
    def p(self) -> int:
        return self.members[0].p

    def predict_many(self, y) -> np.ndarray:
        Y = _as_matrix(y, self.p)
        dedup = _dedup_sign_rows(Y)
        if dedup is not None:
            uniq, inv = dedup
            return np.mean([m.predict_many(uniq) for m in self.members], axis=0)[inv]
        return np.mean([m.predict_many(Y) for m in self.members], axis=0)


def predict(g, y) -> float:
    """Evaluate any predictor at a single output vector."""
    return float(g.predict_many(np.atleast_1d(np.asarray(y, dtype=float)))[0])


def fit_ridge(t: TrainingSet, lam: float) -> LinearPredictor:
    """beta = (Y^T Y + lam I)^-1 Y^T x via a Cholesky solve."""
    if lam < 0:
        raise ValueError("lam must be >= 0")
    Y, x = t.y, t.x
    G = Y.T @ Y + lam * np.eye(t.p)
    rhs = Y.T @ x
    try:
        c = cho_factor(G)
    except np.linalg.LinAlgError as exc:
        raise SingularSystemError(
            "ridge system singular; lambda = 0 with rank-deficient outputs"
        ) from exc
    beta = cho_solve(c, rhs)
    if not np.all(np.isfinite(beta)):
        raise SingularSystemError("ridge solve produced non-finite coefficients")
    return LinearPredictor(beta, lam=lam)


def fit_kernel(t: TrainingSet, lam: float, kernel: str = "gaussian") -> KernelPredictor:
    """Memorize the training set for Nadaraya-Watson prediction."""
    return KernelPredictor(t, lam, kernel)
