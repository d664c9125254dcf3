import numpy as np
import pytest
from scipy.special import ndtr

from gmitx.channel import make_model
from gmitx.estimator import (
    DimensionTooLargeError,
    SingularMomentError,
    lmmse_predictor,
    mc_moments,
    mmse_estimate,
    MmsePredictor,
    predictor_moments,
    quantized_moments,
    var_conditional_mean,
)
from gmitx.quadrature import QuadratureRule, cdf_product_rule, gauss_hermite_rule
from gmitx.regress import LinearPredictor

H8 = np.array([0.3615, 0.2151, 0.2205, 0.6767, 0.5014, 0.1129, 0.1763, 0.1456])


def trapz_oracle(f, P, n=400_001, half=10.0):
    """Independent integration oracle: trapezoid of f(u)*N(0,P) over +-half*sqrt(P)."""
    u = np.linspace(-half * np.sqrt(P), half * np.sqrt(P), n)
    pdf = np.exp(-(u**2) / (2 * P)) / np.sqrt(2 * np.pi * P)
    return np.trapezoid(f(u) * pdf, u)


def test_gauss_hermite_moments():
    rule = gauss_hermite_rule(50, P=1.0)
    assert rule.integrate(lambda u: u**2) == pytest.approx(1.0, abs=1e-10)
    assert rule.integrate(lambda u: u**4) == pytest.approx(3.0, abs=1e-8)
    assert rule.integrate(lambda u: u**4) == pytest.approx(
        trapz_oracle(lambda u: u**4, 1.0), abs=1e-6
    )


def test_cdf_product_rule_matches_trapezoid():
    P, sig = 100.0, 1.0
    rule = cdf_product_rule(P, sig, np.array([1.0]))
    assert rule.integrate(lambda u: u**2) == pytest.approx(P, rel=1e-10)
    f = lambda u: u * (2.0 * ndtr(u / sig) - 1.0)  # E[x sign(x+z)] integrand
    assert rule.integrate(f) == pytest.approx(trapz_oracle(f, P), rel=1e-8)
    # analytic value sqrt(2/pi) P / sqrt(P + sigma^2)
    assert rule.integrate(f) == pytest.approx(np.sqrt(2 / np.pi) * P / np.sqrt(P + 1), rel=1e-9)


def test_quadrature_rule_validation():
    with pytest.raises(ValueError):
        QuadratureRule(np.zeros(3), np.zeros(4), 1.0)
    with pytest.raises(ValueError):
        gauss_hermite_rule(0, 1.0)


def test_lmmse_onebit_scalar_closed_form():
    m = make_model("simo_onebit", [1.0], 1.0, 100.0)
    _, delta = lmmse_predictor(m)
    assert delta == pytest.approx((2 / np.pi) * 100 / 101, abs=1e-6)


def test_lmmse_linear_closed_form():
    m = make_model("simo_linear", H8, 1.0, 100.0)
    g, delta = lmmse_predictor(m)
    # for linear channels Delta = hhT P /(sigma2 + P||h||^2) contracted: P||h||^2/(sigma2+P||h||^2)
    nh2 = float(H8 @ H8)
    assert delta == pytest.approx(100 * nh2 / (1 + 100 * nh2), rel=1e-12)
    beta_oracle = np.linalg.solve(100 * np.outer(H8, H8) + np.eye(8), 100 * H8)
    assert np.allclose(g.beta, beta_oracle)


def test_quantized_moments_vs_trapezoid():
    m = make_model("simo_onebit_dithered", H8[:3], 1.0, 100.0, alpha=1.34)
    e_xy, e_yy = quantized_moments(m)
    for i in range(3):
        f = lambda u: u * (2.0 * ndtr(m.h[i] * u + m.b[i]) - 1.0)
        assert e_xy[i] == pytest.approx(trapz_oracle(f, 100.0), rel=1e-7)
    f01 = lambda u: (2 * ndtr(m.h[0] * u + m.b[0]) - 1) * (2 * ndtr(m.h[1] * u + m.b[1]) - 1)
    assert e_yy[0, 1] == pytest.approx(trapz_oracle(f01, 100.0), rel=1e-7)
    assert np.all(np.diag(e_yy) == 1.0)
    assert np.allclose(e_yy, e_yy.T)


def test_quantized_moments_vs_monte_carlo():
    m = make_model("simo_onebit", H8, 1.0, 100.0)
    e_xy, e_yy = quantized_moments(m)
    mc_xy, mc_yy = mc_moments(m, 400_000, np.random.default_rng(3))
    assert np.allclose(e_xy, mc_xy, atol=0.1)
    assert np.allclose(e_yy, mc_yy, atol=0.02)


def test_mmse_onebit_scalar():
    m = make_model("simo_onebit", [1.0], 1.0, 100.0)
    val = mmse_estimate(m, [1.0])
    assert val == pytest.approx(np.sqrt(2 / np.pi) * 100 / np.sqrt(101), rel=1e-9)
    assert mmse_estimate(m, [-1.0]) == pytest.approx(-val, rel=1e-9)


def test_mmse_linear_is_lmmse():
    m = make_model("simo_linear", H8, 1.0, 100.0)
    g_l, _ = lmmse_predictor(m)
    y = np.random.default_rng(4).normal(size=(5, 8))
    assert np.allclose(MmsePredictor(m).predict_many(y), g_l.predict_many(y), rtol=1e-10)


def test_var_conditional_mean_scalar():
    m = make_model("simo_onebit", [1.0], 1.0, 100.0)
    assert var_conditional_mean(m) == pytest.approx((2 / np.pi) * 100**2 / 101, rel=1e-8)


def test_var_conditional_mean_total_variance():
    # var E[x|y] <= var x, and for linear channels equals P * Delta
    m = make_model("simo_linear", H8, 1.0, 100.0)
    _, delta = lmmse_predictor(m)
    assert var_conditional_mean(m) == pytest.approx(100 * delta, rel=1e-12)
    mq = make_model("simo_onebit", H8, 1.0, 100.0)
    v = var_conditional_mean(mq)
    assert 0 < v < 100.0


def test_mmse_orthogonality():
    # E[(x - g(y)) g(y)] = 0 for the conditional mean (checked by Monte Carlo)
    m = make_model("simo_onebit", H8, 1.0, 100.0)
    rng = np.random.default_rng(5)
    from gmitx.channel import sample_many

    x = rng.normal(0, 10, size=200_000)
    y = sample_many(m, x, rng)
    g = MmsePredictor(m).predict_many(y)
    resid = np.mean((x - g) * g)
    assert abs(resid) < 3 * np.std((x - g) * g) / np.sqrt(x.size)


def test_dimension_guard():
    m = make_model("simo_onebit", np.ones(21) / np.sqrt(21), 1.0, 100.0)
    with pytest.raises(DimensionTooLargeError):
        var_conditional_mean(m)


def test_singular_moment_matrix():
    m = make_model("simo_linear", [1.0, 1.0], 1.0, 100.0)

    def bad_oracle(model):
        return np.array([1.0, 1.0]), np.ones((2, 2))  # rank one

    with pytest.raises(SingularMomentError):
        lmmse_predictor(m, bad_oracle)


def test_predictor_moments_quantized_exact_vs_mc():
    m = make_model("simo_onebit", H8[:4], 1.0, 100.0)
    g = LinearPredictor(np.array([0.5, -0.2, 1.0, 0.3]))
    e_xg, e_g2 = predictor_moments(m, g)
    rng = np.random.default_rng(6)
    from gmitx.channel import sample_many

    x = rng.normal(0, 10, size=500_000)
    gv = g.predict_many(sample_many(m, x, rng))
    assert e_xg == pytest.approx(np.mean(x * gv), abs=4 * np.std(x * gv) / np.sqrt(x.size))
    assert e_g2 == pytest.approx(np.mean(gv**2), rel=1e-2)


def test_predictor_moments_linear_closed_form():
    m = make_model("simo_linear", H8, 1.0, 100.0)
    g, delta = lmmse_predictor(m)
    e_xg, e_g2 = predictor_moments(m, g)
    # LMMSE self-consistency: E[x g] = E[g^2] = P * Delta
    assert e_xg == pytest.approx(100 * delta, rel=1e-12)
    assert e_g2 == pytest.approx(100 * delta, rel=1e-12)


def test_predictor_moments_none_for_kernel_on_linear():
    from gmitx.channel import draw_training_set
    from gmitx.regress import fit_kernel

    m = make_model("simo_linear", H8, 1.0, 100.0)
    t = draw_training_set(m, 100, np.random.default_rng(7))
    assert predictor_moments(m, fit_kernel(t, 1.0)) is None
