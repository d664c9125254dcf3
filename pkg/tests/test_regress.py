import numpy as np
import pytest

from gmitx.channel import TrainingSet, draw_training_set, make_model
from gmitx.estimator import lmmse_predictor, mmse_estimate
from gmitx.regress import (
    DimensionMismatchError,
    EnsemblePredictor,
    KernelPredictor,
    LinearPredictor,
    SingularSystemError,
    _dedup_sign_rows,
    fit_kernel,
    fit_ridge,
    predict,
)

H8 = np.array([0.3615, 0.2151, 0.2205, 0.6767, 0.5014, 0.1129, 0.1763, 0.1456])


def make_data(rng, L=300, p=4):
    beta_true = rng.normal(size=p)
    y = rng.normal(size=(L, p))
    x = y @ beta_true + 0.3 * rng.normal(size=L)
    return TrainingSet(x, y)


def naive_ridge(t, lam):
    return np.linalg.solve(t.y.T @ t.y + lam * np.eye(t.p), t.y.T @ t.x)


def naive_nw_gaussian(t, lam, Y):
    out = np.empty(Y.shape[0])
    for i, q in enumerate(Y):
        w = np.exp(-np.sum((q - t.y) ** 2, axis=1) / (2 * lam**2))
        out[i] = np.dot(w, t.x) / np.sum(w)
    return out


def test_ridge_matches_direct_solve():
    rng = np.random.default_rng(20)
    t = make_data(rng)
    for lam in (0.0, 0.5, 10.0):
        g = fit_ridge(t, lam)
        assert np.allclose(g.beta, naive_ridge(t, lam), rtol=1e-10)
    with pytest.raises(ValueError):
        fit_ridge(t, -1.0)


def test_ridge_zero_lambda_is_least_squares():
    rng = np.random.default_rng(21)
    t = make_data(rng)
    beta_ls, *_ = np.linalg.lstsq(t.y, t.x, rcond=None)
    assert np.allclose(fit_ridge(t, 0.0).beta, beta_ls, rtol=1e-8)


def test_ridge_shrinkage_monotone():
    rng = np.random.default_rng(22)
    t = make_data(rng)
    norms = [np.linalg.norm(fit_ridge(t, lam).beta) for lam in (0.0, 1.0, 10.0, 100.0, 1e4)]
    assert all(a >= b - 1e-12 for a, b in zip(norms, norms[1:]))


def test_ridge_singular_system():
    y = np.ones((50, 2))  # duplicated column, rank 1
    t = TrainingSet(np.arange(50.0), y)
    with pytest.raises(SingularSystemError):
        fit_ridge(t, 0.0)
    fit_ridge(t, 1e-6)  # regularized solve succeeds


def test_ridge_consistency_vs_lmmse():
    m = make_model("simo_linear", H8, 1.0, 100.0)
    t = draw_training_set(m, 400_000, np.random.default_rng(23))
    g = fit_ridge(t, 0.0)
    g_star, _ = lmmse_predictor(m)
    assert np.allclose(g.beta, g_star.beta, rtol=1e-2, atol=2e-3)


def test_kernel_matches_naive_nw():
    rng = np.random.default_rng(24)
    t = make_data(rng, L=100, p=3)
    q = rng.normal(size=(17, 3))
    for lam in (0.5, 2.0):
        g = fit_kernel(t, lam)
        assert np.allclose(g.predict_many(q), naive_nw_gaussian(t, lam, q), rtol=1e-10)


def test_kernel_onebit_converges_to_posterior_mean():
    m = make_model("simo_onebit", H8[:3], 1.0, 100.0)
    t = draw_training_set(m, 100_000, np.random.default_rng(25))
    g = fit_kernel(t, 0.1)  # narrow: effectively per-pattern empirical mean of x
    y = np.array([1.0, 1.0, -1.0])
    assert predict(g, y) == pytest.approx(mmse_estimate(m, y), rel=5e-2)


def test_kernel_underflow_falls_back_to_nearest_anchor():
    t = TrainingSet(np.array([1.0, -2.0]), np.array([[0.0, 0.0], [100.0, 100.0]]))
    g = fit_kernel(t, 0.01)
    assert predict(g, [0.1, 0.2]) == 1.0  # all weights underflow; nearest anchor wins
    gt = fit_kernel(t, 0.5, kernel="tricube")
    assert predict(gt, [50.0, 50.0]) in (1.0, -2.0)  # compact support, no mass


def test_kernel_validation():
    t = TrainingSet(np.zeros(2), np.zeros((2, 1)))
    with pytest.raises(ValueError):
        fit_kernel(t, 0.0)
    with pytest.raises(ValueError):
        fit_kernel(t, 1.0, kernel="sinc")


def test_dedup_sign_rows_roundtrip():
    rng = np.random.default_rng(26)
    Y = rng.choice([-1.0, 1.0], size=(400, 5))
    uniq, inv = _dedup_sign_rows(Y)
    assert np.array_equal(uniq[inv], Y)
    assert _dedup_sign_rows(rng.normal(size=(400, 5))) is None


def test_dedup_path_matches_direct_path():
    rng = np.random.default_rng(27)
    t = TrainingSet(rng.normal(size=60), rng.choice([-1.0, 1.0], size=(60, 4)))
    g = fit_kernel(t, 1.0)
    Y = rng.choice([-1.0, 1.0], size=(500, 4))  # big batch triggers dedup
    assert np.allclose(g.predict_many(Y), g._predict_block(Y), rtol=1e-12)


def test_ensemble_is_member_mean():
    g1 = LinearPredictor(np.array([1.0, 0.0]))
    g2 = LinearPredictor(np.array([0.0, 3.0]))
    ens = EnsemblePredictor((g1, g2))
    y = np.array([[2.0, 2.0]])
    assert ens.predict_many(y)[0] == pytest.approx(0.5 * (2.0 + 6.0))
    with pytest.raises(ValueError):
        EnsemblePredictor(())
    with pytest.raises(DimensionMismatchError):
        EnsemblePredictor((g1, LinearPredictor(np.ones(3))))


def test_dimension_mismatch_on_predict():
    g = LinearPredictor(np.ones(3))
    with pytest.raises(DimensionMismatchError):
        g.predict_many(np.ones((4, 2)))
