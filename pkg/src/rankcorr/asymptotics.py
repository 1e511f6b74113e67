"""Expected values and leading variance coefficients of the rank estimators.

Variance results are reported as the constant ``c`` in ``Var ~ c / n``.

For ``tau_n``: ``c = 16 (E[(F + Fbar)^2] - 4 (E F)^2)``.

For ``r_n``::

    c = 36 (E[((1 + H) Fbar + (1 - H) F)^2] - ((tau + 1)/2 - (rho_S + 1)/4)^2)
        + 36 (Q1 + Q2 + Q3 + Q4)

with, in copula scale (``U = H(X)``, ``V = G(Y)``, ``C = F``)::

    A(u, v) = int_{u1<=u, v1<=v} u1 dC - int_{u1>=u, v1>=v} u1 dC
            = v - (1 - u^2)/2 - int_0^1 C(s, v) ds
    B(u)    = int_{u1>=u} C(u, v1) dC(u1, v1)
            = int_0^1 C(u, s) ds - u^2 / 2

    Q1 = -4 E[C B(U)]
    Q2 =  4 E[U (C - Fbar) B(U)] - 2 E[B(U) A(U, V)]
    Q3 =  2 E[(C + Fbar) A(U, V)]
    Q4 =  E[A^2] + 2 E[U (Fbar - C) A(U, V)]

The closed forms of ``A`` and ``B`` follow from integrating the quadrant
integrals by parts; they reduce every term to an expectation of bounded
functions, which :class:`~rankcorr.quadrature.ConditionalGrid` evaluates.
``Q3`` carries the factor 2 that makes ``Q3 = Q1`` for the FGM family and
reproduces its closed-form variance ``1/4 - 7 t^2 / 180``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .copulas import (
    CLOSED_FORM,
    FGM,
    QUADRATURE,
    BivariateModel,
    BivariateNormal,
    theoretical_coefficients,
)
from .errors import ParameterOutOfRange, QuadratureNotConverged
from .quadrature import DEFAULT_GRADING, ConditionalGrid, gauss_legendre

ESTIMATORS = ("pearson", "kendall", "r_new")
METHODS = ("auto", CLOSED_FORM, QUADRATURE)

VARIANCE_TOL = 1e-6
M_START = 64
M_MAX = 512


@dataclass(frozen=True)
class VarianceReport:
    estimator: str
    model: BivariateModel
    leading_coeff: float
    method: str
    components: dict = field(default_factory=dict, compare=False)
    m: int | None = None

    def variance(self, n: int) -> float:
        """Leading-order variance at sample size ``n``."""
        return self.leading_coeff / n

    def as_dict(self) -> dict:
        return {
            "estimator": self.estimator,
            "family": self.model.family,
            "t": self.model.t,
            "leading_coeff": self.leading_coeff,
            "method": self.method,
            "components": dict(self.components),
            "m": self.m,
        }


class KernelGrids:
    """Copula-scale quantities on a :class:`ConditionalGrid` of size ``m``.

    Attributes ``C``, ``Fbar``, ``A`` and ``B`` are ``(m, m)`` arrays at the
    grid points ``(u[i], v[i, j])``; ``L[i] = int_0^1 C(u[i], s) ds``.
    ``A_plus`` and ``A_minus`` (the two quadrant integrals of ``u1 dC``)
    are computed on first access.
    """

    def __init__(self, model: BivariateModel, m: int, inner: int | None = None):
        self.model = model
        self.m = int(m)
        self.grid = ConditionalGrid(model, self.m)
        self.inner = gauss_legendre(int(inner or self.m), DEFAULT_GRADING)
        g = self.grid
        self.U = g.U
        self.V = g.v
        self.C = np.asarray(model.copula_cdf(g.U, g.v), dtype=float)
        self.Fbar = np.asarray(model.copula_survival(g.U, g.v), dtype=float)
        s, ws = self.inner.nodes, self.inner.weights
        self.L = np.asarray(model.copula_cdf(g.u[:, None], s[None, :]), dtype=float) @ ws
        self.K = self._row_integrals(lambda row_v, i: model.copula_cdf(s[None, :], row_v[:, None]))
        self.A = self.V - (1.0 - self.U**2) / 2.0 - self.K
        self.B = np.broadcast_to((self.L - g.u**2 / 2.0)[:, None], (self.m, self.m))

    def _row_integrals(self, fn) -> np.ndarray:
        ws = self.inner.weights
        out = np.empty((self.m, self.m))
        for i in range(self.m):
            out[i] = np.asarray(fn(self.V[i], i), dtype=float) @ ws
        return out

    def expect(self, values) -> float:
        return self.grid.expect(values)

    @cached_property
    def A_plus(self) -> np.ndarray:
        """``int_{u1<=u, v1<=v} u1 dC = u C(u, v) - int_0^u C(s, v) ds``."""
        s = self.inner.nodes
        u = self.grid.u
        part = self._row_integrals(
            lambda row_v, i: self.model.copula_cdf(u[i] * s[None, :], row_v[:, None])
        )
        return self.U * self.C - self.U * part

    @cached_property
    def A_minus(self) -> np.ndarray:
        return self.A_plus - self.A

    def moments(self) -> dict:
        """Every expectation entering the two variance formulas."""
        E = self.expect
        U, C, Fb, A, B = self.U, self.C, self.Fbar, self.A, self.B
        e_f = E(C)
        e_uv = E(U * self.V)
        return {
            "E_F": e_f,
            "E_HG": e_uv,
            "tau": 4 * e_f - 1,
            "rho_s": 12 * e_uv - 3,
            "E_F_plus_Fbar_sq": E((C + Fb) ** 2),
            "main": E(((1 + U) * Fb + (1 - U) * C) ** 2),
            "Q1": -4 * E(C * B),
            "Q2": 4 * E(U * (C - Fb) * B) - 2 * E(B * A),
            "Q3": 2 * E((C + Fb) * A),
            "Q4": E(A * A) + 2 * E(U * (Fb - C) * A),
        }


def _tau_from_moments(mo: dict) -> float:
    return 16.0 * (mo["E_F_plus_Fbar_sq"] - 4.0 * mo["E_F"] ** 2)


def _r_from_moments(mo: dict) -> float:
    shift = (mo["tau"] + 1) / 2 - (mo["rho_s"] + 1) / 4
    q = mo["Q1"] + mo["Q2"] + mo["Q3"] + mo["Q4"]
    return 36.0 * (mo["main"] - shift**2) + 36.0 * q


def converged_moments(
    model: BivariateModel, tol: float = VARIANCE_TOL, m_start: int = M_START, m_max: int = M_MAX
) -> tuple[dict, int]:
    """Moments from a grid doubled until both variance coefficients and every
    component change by less than ``tol``. Returns ``(moments, m)``."""

    def collect(m):
        mo = KernelGrids(model, m).moments()
        mo["var_tau"] = _tau_from_moments(mo)
        mo["var_r"] = _r_from_moments(mo)
        return mo

    m = m_start
    prev = collect(m)
    while m < m_max:
        m *= 2
        cur = collect(m)
        delta = max(abs(cur[k] - prev[k]) for k in cur)
        if delta < tol:
            return cur, m
        prev = cur
    raise QuadratureNotConverged(
        f"variance moments for {model!r} changed by {delta:.3g} at m={m}; tolerance {tol}"
    )


_MOMENT_CACHE: dict = {}


def _moments(model, tol):
    key = (model, tol)
    if key not in _MOMENT_CACHE:
        _MOMENT_CACHE[key] = converged_moments(model, tol)
    return _MOMENT_CACHE[key]


def _check_method(method: str) -> None:
    if method not in METHODS:
        raise ValueError(f"method must be one of {METHODS}")


def fgm_var_tau_closed(t: float) -> float:
    # 16 (5/18 + t/9 + t^2/150 - 4 (1/4 + t/18)^2)
    return 4.0 / 9.0 - 184.0 * t * t / 2025.0


def fgm_var_r_closed(t: float) -> float:
    return 0.25 - 7.0 * t * t / 180.0


def fgm_components(t: float) -> dict:
    """FGM closed forms of every moment in the variance formulas."""
    return {
        "E_F": 0.25 + t / 18,
        "E_HG": 0.25 + t / 36,
        "tau": 2 * t / 9,
        "rho_s": t / 3,
        "E_F_plus_Fbar_sq": 5 / 18 + t / 9 + t * t / 150,
        "main": 41 / 180 + t / 12 + t * t / 180,
        "Q1": -1 / 12 - 2 * t / 45 - t * t / 180,
        "Q2": 1 / 30 + 23 * t / 1080 + 11 * t * t / 3240,
        "Q3": -1 / 12 - 2 * t / 45 - t * t / 180,
        "Q4": -1 / 40 - t / 540 + t * t / 540,
    }


def normal_var_tau_closed(t: float) -> float:
    return 4.0 * (1.0 / 9.0 - 4.0 * math.asin(t / 2.0) ** 2 / math.pi**2)


def var_tau_leading(model: BivariateModel, method: str = "auto", tol: float = VARIANCE_TOL) -> VarianceReport:
    """Leading coefficient of ``Var(tau_n)``.

    Closed forms exist for FGM and the bivariate normal; ``method="auto"``
    uses them when available and quadrature otherwise.
    """
    _check_method(method)
    closed = None
    if isinstance(model, FGM):
        closed = fgm_var_tau_closed(model.t)
        comps = {k: v for k, v in fgm_components(model.t).items() if k in ("E_F", "E_F_plus_Fbar_sq")}
    elif isinstance(model, BivariateNormal):
        closed = normal_var_tau_closed(model.t)
        comps = {}
    if method == CLOSED_FORM and closed is None:
        raise ValueError(f"no closed form for Var(tau_n) under {model!r}")
    if closed is not None and method != QUADRATURE:
        return VarianceReport("kendall", model, closed, CLOSED_FORM, comps)
    mo, m = _moments(model, tol)
    comps = {k: mo[k] for k in ("E_F", "E_F_plus_Fbar_sq")}
    return VarianceReport("kendall", model, mo["var_tau"], QUADRATURE, comps, m)


def var_r_leading(model: BivariateModel, method: str = "auto", tol: float = VARIANCE_TOL) -> VarianceReport:
    """Leading coefficient of ``Var(r_n)`` with its ``main`` and ``Q1..Q4`` parts."""
    _check_method(method)
    is_fgm = isinstance(model, FGM)
    if method == CLOSED_FORM and not is_fgm:
        raise ValueError(f"no closed form for Var(r_n) under {model!r}")
    names = ("main", "Q1", "Q2", "Q3", "Q4")
    if is_fgm and method != QUADRATURE:
        comps = fgm_components(model.t)
        return VarianceReport(
            "r_new", model, fgm_var_r_closed(model.t), CLOSED_FORM, {k: comps[k] for k in names}
        )
    mo, m = _moments(model, tol)
    return VarianceReport("r_new", model, mo["var_r"], QUADRATURE, {k: mo[k] for k in names}, m)


def var_pearson_normal(t: float) -> VarianceReport:
    """``(1 - t^2)^2``, the leading coefficient of the sample Pearson variance under normality."""
    model = BivariateNormal(t)
    return VarianceReport("pearson", model, (1.0 - t * t) ** 2, CLOSED_FORM)


def _pearson_minus_kendall(t: float) -> float:
    return (1.0 - t * t) ** 2 - normal_var_tau_closed(t)


def are_crossover_normal(lo: float = 0.3, hi: float = 0.95, xtol: float = 1e-10) -> float:
    """Positive ``t`` where Pearson's and Kendall's leading variances cross
    under normality (Pearson is smaller above it)."""
    f_lo = _pearson_minus_kendall(lo)
    if f_lo * _pearson_minus_kendall(hi) >= 0:
        raise ValueError("bracket does not contain a sign change")
    while hi - lo > xtol:
        mid = 0.5 * (lo + hi)
        f_mid = _pearson_minus_kendall(mid)
        if (f_mid > 0) == (f_lo > 0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def expected_F(model: BivariateModel) -> float:
    """``E F(X, Y) = (tau + 1) / 4``."""
    return (theoretical_coefficients(model).tau + 1.0) / 4.0


def expected_r_n(model: BivariateModel, n: int) -> float:
    """Exact ``E r_n = (1 - 3/(2n-1)) r - 3/(2n-1) + 12 E F / (2n-1)``."""
    if n < 2:
        raise ParameterOutOfRange(f"n must be >= 2, got {n}")
    coef = theoretical_coefficients(model)
    d = 2 * n - 1
    e_f = (coef.tau + 1.0) / 4.0
    return (1.0 - 3.0 / d) * coef.r - 3.0 / d + 12.0 * e_f / d


def expected_r_tilde(model: BivariateModel, n: int) -> float:
    """``E r_tilde_n = (3 n tau - (n - 2) rho_S) / (2 (n + 1))``."""
    if n < 2:
        raise ParameterOutOfRange(f"n must be >= 2, got {n}")
    coef = theoretical_coefficients(model)
    return (3 * n * coef.tau - (n - 2) * coef.rho_s) / (2 * (n + 1))
