import math

import numpy as np
import pytest
from scipy import integrate, stats

from rankcorr import copulas
from rankcorr.copulas import FGM, BivariateNormal, BivariatePareto, make_model
from rankcorr.errors import ParameterOutOfRange
from rankcorr.quadrature import coefficient_by_quadrature
from rankcorr import rankstats

MODELS = [FGM(-1.0), FGM(0.4), FGM(1.0), BivariateNormal(-0.6), BivariateNormal(0.0),
          BivariateNormal(0.95), BivariatePareto(0.3), BivariatePareto(1.0), BivariatePareto(12.0)]
IDS = [repr(m) for m in MODELS]


def bvn_by_arcsine_integral(h, k, rho):
    """Phi2 via d/d rho Phi2 = phi2(h, k; rho), integrated from 0."""
    def dens(s):
        return math.exp(-(h * h - 2 * h * k * s + k * k) / (2 * (1 - s * s))) / (2 * math.pi * math.sqrt(1 - s * s))
    val, _ = integrate.quad(dens, 0.0, rho, epsabs=1e-14, epsrel=1e-12)
    return stats.norm.cdf(h) * stats.norm.cdf(k) + val


@pytest.mark.parametrize("rho", [-0.95, -0.5, 0.0, 0.3, 0.8, 0.99])
def test_bvn_against_integral_oracle(rho):
    for h, k in [(0.0, 0.0), (-1.2, 0.4), (2.0, -0.3), (0.0, 1.1), (-2.5, -2.5), (3.0, 3.0)]:
        got = copulas.bivariate_normal_cdf(h, k, rho)
        assert got == pytest.approx(bvn_by_arcsine_integral(h, k, rho), abs=1e-12)


def test_bvn_limits():
    assert copulas.bivariate_normal_cdf(0.0, 0.0, 0.5) == pytest.approx(0.25 + math.asin(0.5) / (2 * math.pi))
    assert copulas.bivariate_normal_cdf(np.inf, 0.7, 0.3) == pytest.approx(stats.norm.cdf(0.7))
    assert copulas.bivariate_normal_cdf(-np.inf, 0.7, 0.3) == 0.0


@pytest.mark.parametrize("model", MODELS, ids=IDS)
def test_copula_margins(model):
    u = np.linspace(0.01, 0.99, 23)
    assert np.allclose(model.copula_cdf(u, 1.0), u, atol=1e-12)
    assert np.allclose(model.copula_cdf(1.0, u), u, atol=1e-12)
    assert np.allclose(model.copula_cdf(u, 0.0), 0.0, atol=1e-12)
    # Frechet bounds
    uu, vv = np.meshgrid(u, u)
    c = model.copula_cdf(uu, vv)
    assert np.all(c <= np.minimum(uu, vv) + 1e-12)
    assert np.all(c >= np.maximum(uu + vv - 1, 0) - 1e-12)


@pytest.mark.parametrize("model", MODELS, ids=IDS)
def test_survival_identity(model):
    u = np.linspace(0.05, 0.95, 9)
    x = model.quantile_x(u)
    y = model.quantile_y(u[::-1])
    xx, yy = np.meshgrid(x, y)
    lhs = model.survival(xx, yy)
    rhs = 1 - model.marginal_cdf_x(xx) - model.marginal_cdf_y(yy) + model.cdf(xx, yy)
    assert np.allclose(lhs, rhs, atol=1e-12)


@pytest.mark.parametrize("model", MODELS, ids=IDS)
def test_original_scale_matches_copula(model):
    u = np.linspace(0.05, 0.95, 7)
    uu, vv = np.meshgrid(u, u)
    x, y = model.quantile_x(uu), model.quantile_y(vv)
    assert np.allclose(model.marginal_cdf_x(x), uu, atol=1e-10)
    assert np.allclose(model.cdf(x, y), model.copula_cdf(uu, vv), atol=1e-10)


@pytest.mark.parametrize("model", MODELS, ids=IDS)
def test_density_integrates_to_copula(model):
    u0, v0 = 0.37, 0.62
    val, _ = integrate.dblquad(lambda v, u: float(model.copula_density(u, v)), 0, u0, 0, v0, epsabs=1e-10)
    assert val == pytest.approx(float(model.copula_cdf(u0, v0)), abs=1e-7)


@pytest.mark.parametrize("model", MODELS, ids=IDS)
def test_conditional_quantile_inverts_partial_derivative(model):
    u = np.array([0.03, 0.2, 0.5, 0.81, 0.97])[:, None]
    w = np.array([0.01, 0.3, 0.5, 0.9, 0.995])[None, :]
    v = model.conditional_quantile(u, w)
    h = 1e-6
    dc = (model.copula_cdf(u + h, v) - model.copula_cdf(u - h, v)) / (2 * h)
    assert np.allclose(dc, w, atol=1e-6)


@pytest.mark.parametrize("model", MODELS, ids=IDS)
def test_sampler_margins_uniform_on_copula_scale(model):
    x, y = model.sample_arrays(4000, np.random.default_rng(11))
    for p in (stats.kstest(model.marginal_cdf_x(x), "uniform").pvalue,
              stats.kstest(model.marginal_cdf_y(y), "uniform").pvalue):
        assert p > 1e-3


@pytest.mark.parametrize("model", MODELS, ids=IDS)
def test_sampler_dependence_matches_theory(model):
    x, y = model.sample_arrays(20000, np.random.default_rng(3))
    est = rankstats.estimate_all(rankstats.PairedSample(x, y), ties="jitter")
    th = copulas.theoretical_coefficients(model)
    # kendall's SE at n=20000 is below 0.005
    assert est.kendall == pytest.approx(th.tau, abs=0.02)
    assert est.spearman == pytest.approx(th.rho_s, abs=0.03)


def test_fgm_closed_forms_and_symmetry():
    for t in (-1.0, -0.3, 0.0, 0.5, 1.0):
        m = FGM(t)
        tc = copulas.theoretical_coefficients(m)
        assert (tc.rho_s, tc.tau, tc.r) == pytest.approx((t / 3, 2 * t / 9, t / 6))
        u = np.linspace(0.1, 0.9, 5)
        uu, vv = np.meshgrid(u, u)
        assert np.allclose(m.copula_cdf(uu, vv), m.copula_cdf(vv, uu))


def test_normal_closed_forms():
    t = 0.7
    tc = copulas.theoretical_coefficients(BivariateNormal(t))
    assert tc.tau == pytest.approx(2 / math.pi * math.asin(t))
    assert tc.rho_s == pytest.approx(6 / math.pi * math.asin(t / 2))
    assert tc.rho == t
    assert tc.r == pytest.approx((3 * tc.tau - tc.rho_s) / 2)


def test_pareto_closed_forms():
    for t in (0.05, 1.0, 2.1, 10.0):
        tc = copulas.theoretical_coefficients(BivariatePareto(t))
        assert tc.tau == pytest.approx(1 / (2 * t + 1))
        assert tc.rho == (pytest.approx(1 / t) if t > 2 else None)


@pytest.mark.parametrize("model", [FGM(0.8), BivariateNormal(0.5), BivariateNormal(-0.9)], ids=repr)
def test_quadrature_reproduces_closed_forms(model):
    closed = model.closed_form_coefficients()
    for key in ("rho_s", "tau", "r"):
        assert coefficient_by_quadrature(model, key) == pytest.approx(closed[key], abs=1e-9)


def test_pareto_tau_by_quadrature():
    for t in (0.05, 1.0, 10.0):
        assert coefficient_by_quadrature(BivariatePareto(t), "tau", tol=1e-9) == pytest.approx(1 / (2 * t + 1), abs=1e-8)


def test_parameter_validation():
    for fam, t in [("fgm", 1.5), ("normal", 1.0), ("normal", -1.0), ("pareto", 0.0), ("pareto", -2.0)]:
        with pytest.raises(ParameterOutOfRange):
            make_model(fam, t)
    with pytest.raises(ParameterOutOfRange):
        make_model("gumbel", 1.0)
    assert make_model("fgm", 0.3) == FGM(0.3)
    assert hash(make_model("fgm", 0.3)) == hash(FGM(0.3))


def test_pareto_extreme_parameters_stay_finite():
    for t in (0.01, 500.0):
        m = BivariatePareto(t)
        u = np.array([1e-12, 0.5, 1 - 1e-12])[:, None]
        w = np.array([1e-12, 0.5, 1 - 1e-12])[None, :]
        v = m.conditional_quantile(u, w)
        assert np.all(np.isfinite(v)) and np.all((v >= 0) & (v <= 1))
        assert np.all(np.isfinite(m.copula_cdf(u, v)))
