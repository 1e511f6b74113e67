import math

import numpy as np
import pytest

from rankcorr import asymptotics
from rankcorr.asymptotics import KernelGrids, converged_moments, var_r_leading, var_tau_leading
from rankcorr.copulas import FGM, BivariateNormal, BivariatePareto
from rankcorr.errors import ParameterOutOfRange


def test_fgm_closed_form_values():
    assert asymptotics.fgm_var_tau_closed(0.0) == pytest.approx(4 / 9)
    assert asymptotics.fgm_var_r_closed(0.0) == 0.25
    assert asymptotics.fgm_var_r_closed(0.7) == pytest.approx(0.2309444, abs=1e-7)
    # the tau coefficient assembled from its own moments
    for t in (-1.0, 0.3, 1.0):
        c = asymptotics.fgm_components(t)
        assert asymptotics.fgm_var_tau_closed(t) == pytest.approx(
            16 * (c["E_F_plus_Fbar_sq"] - 4 * c["E_F"] ** 2)
        )


@pytest.mark.parametrize("t", [-0.8, 0.25, 1.0])
def test_fgm_quadrature_components(t):
    mo = KernelGrids(FGM(t), 48).moments()
    closed = asymptotics.fgm_components(t)
    for key in ("E_F", "E_F_plus_Fbar_sq", "main", "Q1", "Q2", "Q3", "Q4"):
        assert mo[key] == pytest.approx(closed[key], abs=1e-12), key


def test_a_plus_minus_split():
    g = KernelGrids(BivariatePareto(1.0), 64)
    assert np.allclose(g.A_plus - g.A_minus, g.A, atol=1e-13)


def test_independence_limits():
    for model in (FGM(0.0), BivariateNormal(0.0)):
        assert var_tau_leading(model, method="quadrature").leading_coeff == pytest.approx(4 / 9, abs=1e-8)
        assert var_r_leading(model, method="quadrature").leading_coeff == pytest.approx(0.25, abs=1e-8)


def test_normal_tau_quadrature_matches_closed_form():
    m = BivariateNormal(-0.5)
    quad = var_tau_leading(m, method="quadrature")
    assert quad.method == "quadrature"
    assert quad.leading_coeff == pytest.approx(asymptotics.normal_var_tau_closed(-0.5), abs=1e-6)


def test_pearson_and_crossover():
    assert asymptotics.var_pearson_normal(0.5).leading_coeff == pytest.approx(0.5625)
    t_star = asymptotics.are_crossover_normal()
    assert (1 - t_star**2) ** 2 == pytest.approx(asymptotics.normal_var_tau_closed(t_star), abs=1e-9)
    # pearson wins above the crossover, kendall below
    assert asymptotics.var_pearson_normal(0.9).leading_coeff < asymptotics.normal_var_tau_closed(0.9)
    assert asymptotics.var_pearson_normal(0.3).leading_coeff > asymptotics.normal_var_tau_closed(0.3)


def test_method_selection():
    assert var_tau_leading(FGM(0.5)).method == "closed_form"
    assert var_r_leading(BivariateNormal(0.5)).method == "quadrature"
    with pytest.raises(ValueError):
        var_r_leading(BivariatePareto(1.0), method="closed_form")
    with pytest.raises(ValueError):
        var_tau_leading(FGM(0.5), method="spline")


def test_variance_report_scaling():
    rep = var_r_leading(FGM(0.5))
    assert rep.variance(1000) == pytest.approx(rep.leading_coeff / 1000)
    d = rep.as_dict()
    assert d["family"] == "fgm" and set(d["components"]) >= {"Q1", "Q2", "Q3", "Q4", "main"}


def test_expected_r_n_closed_forms():
    t, n = 0.6, 10
    d = 2 * n - 1
    expected = (1 - 3 / d) * t / 6 - 3 / d + 12 * (0.25 + t / 18) / d
    assert asymptotics.expected_r_n(FGM(t), n) == pytest.approx(expected)
    assert asymptotics.expected_r_n(FGM(0.0), 7) == pytest.approx(0.0, abs=1e-15)
    with pytest.raises(ParameterOutOfRange):
        asymptotics.expected_r_n(FGM(0.1), 1)


@pytest.mark.parametrize("model", [FGM(1.0), BivariatePareto(0.7)], ids=repr)
def test_small_n_expectations_by_simulation(model):
    # exact finite-n means, checked where O(1/n) terms are large
    n, reps = 5, 40000
    from rankcorr.montecarlo import SimulationConfig, run

    res = run(SimulationConfig(model.family, (model.t,), n=n, reps=reps, seed=9,
                               coefficients=("r_new", "r_tilde")))
    for coef, fn in (("r_new", asymptotics.expected_r_n), ("r_tilde", asymptotics.expected_r_tilde)):
        cell = res.cell(model.t, coef)
        assert abs(cell.mean - fn(model, n)) < 4 * cell.std_error, coef


def test_moment_convergence_and_cache():
    mo1, m1 = converged_moments(BivariatePareto(1.0))
    mo2, m2 = converged_moments(BivariatePareto(1.0))
    assert m1 == m2 and mo1 == mo2
    # the report functions reuse one converged set per model
    assert var_r_leading(BivariatePareto(1.0)).m == var_tau_leading(BivariatePareto(1.0)).m == m1
    assert mo1["tau"] == pytest.approx(1 / 3, abs=1e-7)
