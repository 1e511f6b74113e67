"""Parametric bivariate laws: Farlie-Gumbel-Morgenstern, bivariate normal, bivariate Pareto.

Each model exposes its joint and marginal distribution functions on the
original scale, the copula ``C(u, v)`` with density ``c(u, v)`` on the unit
square, the conditional quantile of ``V`` given ``U = u`` (used both for
sampling and for quadrature), and a sampler.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.special import ndtr, ndtri, owens_t

from .errors import ParameterOutOfRange
from .rankstats import PairedSample

FAMILIES = ("fgm", "normal", "pareto")

CLOSED_FORM = "closed_form"
QUADRATURE = "quadrature"


def bivariate_normal_cdf(h, k, rho: float):
    """``P(Z1 <= h, Z2 <= k)`` for standard normals with correlation ``rho``.

    Uses the Owen's T representation

        Phi2(h, k) = (Phi(h) + Phi(k)) / 2 - T(h, a_h) - T(k, a_k) - beta

    with ``a_h = (k - rho h) / (h sqrt(1 - rho^2))`` (and symmetrically
    ``a_k``), ``beta = 1/2`` when ``h k < 0`` or ``h k = 0`` with
    ``h + k < 0``. Absolute error is at the level of double rounding.
    """
    if not -1.0 < rho < 1.0:
        raise ParameterOutOfRange(f"correlation must lie in (-1, 1), got {rho}")
    h, k = np.broadcast_arrays(np.asarray(h, dtype=float), np.asarray(k, dtype=float))
    s = math.sqrt((1.0 - rho) * (1.0 + rho))
    with np.errstate(divide="ignore", invalid="ignore"):
        a_h = (k - rho * h) / (h * s)
        a_k = (h - rho * k) / (k * s)
        t_h = owens_t(h, a_h)
        t_k = owens_t(k, a_k)
        hk = h * k  # 0 * inf only where an infinite limit overrides below
    # T(0, +-inf) = +-1/4; the sign of a_h at h = 0 follows k.
    t_h = np.where(h == 0.0, 0.25 * np.sign(k), t_h)
    t_k = np.where(k == 0.0, 0.25 * np.sign(h), t_k)
    beta = np.where((hk < 0) | ((hk == 0) & (h + k < 0)), 0.5, 0.0)
    out = 0.5 * (ndtr(h) + ndtr(k)) - t_h - t_k - beta
    both_zero = (h == 0.0) & (k == 0.0)
    out = np.where(both_zero, 0.25 + math.asin(rho) / (2 * math.pi), out)
    # infinite limits
    out = np.where(np.isposinf(h), ndtr(k), out)
    out = np.where(np.isposinf(k), ndtr(h), out)
    out = np.where(np.isneginf(h) | np.isneginf(k), 0.0, out)
    out = np.clip(out, 0.0, 1.0)
    return out[()] if out.ndim == 0 else out


@dataclass(frozen=True)
class TheoreticalCoefficients:
    rho: Optional[float]
    rho_s: float
    tau: float
    r: float
    methods: dict = field(default_factory=dict, compare=False)

    def as_dict(self) -> dict:
        return {
            "rho": self.rho,
            "rho_s": self.rho_s,
            "tau": self.tau,
            "r": self.r,
            "methods": dict(self.methods),
        }


@dataclass(frozen=True)
class Copula:
    """The copula of a model as plain callables on ``(0, 1)^2``."""

    cdf: Callable
    density: Callable
    survival: Callable
    conditional_quantile: Callable


class BivariateModel(ABC):
    """Absolutely continuous bivariate law with a scalar dependence parameter ``t``."""

    family: str = ""

    def __init__(self, t: float):
        t = float(t)
        if not math.isfinite(t) or not self._param_ok(t):
            raise ParameterOutOfRange(f"{self.family}: parameter t={t} outside {self.param_range}")
        self._t = t

    @property
    def t(self) -> float:
        return self._t

    param_range: str = ""

    @staticmethod
    @abstractmethod
    def _param_ok(t: float) -> bool: ...

    def __repr__(self) -> str:
        return f"{type(self).__name__}(t={self._t!r})"

    def __eq__(self, other) -> bool:
        return type(self) is type(other) and self._t == other._t

    def __hash__(self) -> int:
        return hash((self.family, self._t))

    # original scale
    @abstractmethod
    def cdf(self, x, y): ...

    @abstractmethod
    def pdf(self, x, y): ...

    @abstractmethod
    def marginal_cdf_x(self, x): ...

    @abstractmethod
    def marginal_pdf_x(self, x): ...

    @abstractmethod
    def quantile_x(self, u): ...

    # every model here is exchangeable
    def marginal_cdf_y(self, y):
        return self.marginal_cdf_x(y)

    def marginal_pdf_y(self, y):
        return self.marginal_pdf_x(y)

    def quantile_y(self, v):
        return self.quantile_x(v)

    def survival(self, x, y):
        """``P(X > x, Y > y) = 1 - H(x) - G(y) + F(x, y)``."""
        return 1.0 - self.marginal_cdf_x(x) - self.marginal_cdf_y(y) + self.cdf(x, y)

    # copula scale
    @abstractmethod
    def copula_cdf(self, u, v): ...

    @abstractmethod
    def copula_density(self, u, v): ...

    def copula_survival(self, u, v):
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        return 1.0 - u - v + self.copula_cdf(u, v)

    @abstractmethod
    def conditional_quantile(self, u, w):
        """``v`` solving ``P(V <= v | U = u) = w``."""

    @abstractmethod
    def _draw(self, n: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]: ...

    def sample(self, n: int, rng=None) -> PairedSample:
        return PairedSample(*self.sample_arrays(n, rng))

    def sample_arrays(self, n: int, rng=None) -> tuple[np.ndarray, np.ndarray]:
        if n < 1:
            raise ValueError(f"n must be >= 1, got {n}")
        return self._draw(int(n), np.random.default_rng(rng))

    def closed_form_coefficients(self) -> dict:
        """Coefficients available in closed form, keyed by name."""
        return {}


class FGM(BivariateModel):
    """Farlie-Gumbel-Morgenstern copula ``C(u,v) = uv + t(u - u^2)(v - v^2)`` on ``[0,1]^2``."""

    family = "fgm"
    param_range = "[-1, 1]"

    @staticmethod
    def _param_ok(t):
        return -1.0 <= t <= 1.0

    def copula_cdf(self, u, v):
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        return u * v + self.t * (u - u * u) * (v - v * v)

    def copula_density(self, u, v):
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        return 1.0 + self.t * (1.0 - 2.0 * u) * (1.0 - 2.0 * v)

    def conditional_quantile(self, u, w):
        # root in [0, 1] of a v^2 - (1 + a) v + w = 0, a = t(1 - 2u), in the
        # rationalized form that needs no a != 0 branch
        u = np.asarray(u, dtype=float)
        w = np.asarray(w, dtype=float)
        a = self.t * (1.0 - 2.0 * u)
        disc = np.maximum((1.0 + a) ** 2 - 4.0 * a * w, 0.0)
        return 2.0 * w / ((1.0 + a) + np.sqrt(disc))

    def cdf(self, x, y):
        return self.copula_cdf(np.clip(x, 0.0, 1.0), np.clip(y, 0.0, 1.0))

    def pdf(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        inside = (x >= 0) & (x <= 1) & (y >= 0) & (y <= 1)
        return np.where(inside, self.copula_density(x, y), 0.0)

    def marginal_cdf_x(self, x):
        return np.clip(np.asarray(x, dtype=float), 0.0, 1.0)

    def marginal_pdf_x(self, x):
        x = np.asarray(x, dtype=float)
        return np.where((x >= 0) & (x <= 1), 1.0, 0.0)

    def quantile_x(self, u):
        return np.asarray(u, dtype=float)

    def _draw(self, n, rng):
        u = rng.random(n)
        w = rng.random(n)
        return u, self.conditional_quantile(u, w)

    def closed_form_coefficients(self):
        t = self.t
        return {"rho": t / 3, "rho_s": t / 3, "tau": 2 * t / 9, "r": t / 6}


class BivariateNormal(BivariateModel):
    """Standard bivariate normal with correlation ``t``."""

    family = "normal"
    param_range = "(-1, 1)"

    @staticmethod
    def _param_ok(t):
        return -1.0 < t < 1.0

    @property
    def _s(self) -> float:
        return math.sqrt((1.0 - self.t) * (1.0 + self.t))

    def cdf(self, x, y):
        return bivariate_normal_cdf(x, y, self.t)

    def survival(self, x, y):
        return bivariate_normal_cdf(-np.asarray(x, dtype=float), -np.asarray(y, dtype=float), self.t)

    def pdf(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        t, s = self.t, self._s
        q = (x * x - 2 * t * x * y + y * y) / (s * s)
        return np.exp(-0.5 * q) / (2 * math.pi * s)

    def marginal_cdf_x(self, x):
        return ndtr(np.asarray(x, dtype=float))

    def marginal_pdf_x(self, x):
        x = np.asarray(x, dtype=float)
        return np.exp(-0.5 * x * x) / math.sqrt(2 * math.pi)

    def quantile_x(self, u):
        return ndtri(np.asarray(u, dtype=float))

    def copula_cdf(self, u, v):
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        with np.errstate(divide="ignore"):
            return bivariate_normal_cdf(ndtri(u), ndtri(v), self.t)

    def copula_density(self, u, v):
        h = ndtri(np.asarray(u, dtype=float))
        k = ndtri(np.asarray(v, dtype=float))
        t, s2 = self.t, self._s**2
        with np.errstate(invalid="ignore", over="ignore"):
            expo = -(t * t * (h * h + k * k) - 2 * t * h * k) / (2 * s2)
            return np.exp(expo) / math.sqrt(s2)

    def conditional_quantile(self, u, w):
        with np.errstate(invalid="ignore"):
            return ndtr(self.t * ndtri(np.asarray(u, dtype=float)) + self._s * ndtri(np.asarray(w, dtype=float)))

    def _draw(self, n, rng):
        z1 = rng.standard_normal(n)
        z2 = rng.standard_normal(n)
        return z1, self.t * z1 + self._s * z2

    def closed_form_coefficients(self):
        t = self.t
        return {
            "rho": t,
            "rho_s": 6 / math.pi * math.asin(t / 2),
            "tau": 2 / math.pi * math.asin(t),
            "r": 3 / math.pi * (math.asin(t) - math.asin(t / 2)),
        }


class BivariatePareto(BivariateModel):
    """``F(x,y) = 1 - (1+x)^-t - (1+y)^-t + (1+x+y)^-t`` on ``x, y > 0``.

    Its copula is the survival Clayton copula with ``theta = 1/t``::

        C(u, v) = u + v - 1 + ((1-u)^(-1/t) + (1-v)^(-1/t) - 1)^(-t)

    Everything below is written in terms of the complements ``a = 1 - u``,
    ``b = 1 - v`` and in log form, because ``a^(-1/t)`` overflows for small
    ``t`` near the upper corner.
    """

    family = "pareto"
    param_range = "(0, inf)"

    @staticmethod
    def _param_ok(t):
        return t > 0.0

    def _clayton(self, a, b):
        """Clayton CDF ``(a^-theta + b^-theta - 1)^(-1/theta)`` in stable form."""
        th = 1.0 / self.t
        lo = np.minimum(a, b)
        hi = np.maximum(a, b)
        with np.errstate(divide="ignore", invalid="ignore", under="ignore"):
            x = (lo / hi) ** th - lo**th
            out = lo * np.exp(-self.t * np.log1p(x))
        return np.where(hi > 0, out, 0.0)

    def _log_clayton_base(self, a, b):
        """``log(a^-theta + b^-theta - 1)``."""
        th = 1.0 / self.t
        lo = np.minimum(a, b)
        hi = np.maximum(a, b)
        with np.errstate(divide="ignore", invalid="ignore", under="ignore"):
            return -th * np.log(lo) + np.log1p((lo / hi) ** th - lo**th)

    def copula_cdf(self, u, v):
        a = 1.0 - np.asarray(u, dtype=float)
        b = 1.0 - np.asarray(v, dtype=float)
        return 1.0 - a - b + self._clayton(a, b)

    def copula_survival(self, u, v):
        return self._clayton(1.0 - np.asarray(u, dtype=float), 1.0 - np.asarray(v, dtype=float))

    def copula_density(self, u, v):
        a = 1.0 - np.asarray(u, dtype=float)
        b = 1.0 - np.asarray(v, dtype=float)
        th = 1.0 / self.t
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            logc = (
                math.log1p(th)
                - (th + 1.0) * (np.log(a) + np.log(b))
                - (self.t + 2.0) * self._log_clayton_base(a, b)
            )
            return np.exp(logc)

    def conditional_quantile(self, u, w):
        # 1 - v = (1 + q (1-u)^(-1/t))^(-t) with q = (1-w)^(-1/(t+1)) - 1
        a = 1.0 - np.asarray(u, dtype=float)
        w = np.asarray(w, dtype=float)
        t = self.t
        with np.errstate(divide="ignore", invalid="ignore"):
            q = np.expm1(-np.log1p(-w) / (t + 1.0))
            z = np.log(q) - np.log(a) / t
            b = np.exp(-t * np.logaddexp(0.0, z))
        return 1.0 - b

    def cdf(self, x, y):
        x = np.maximum(np.asarray(x, dtype=float), 0.0)
        y = np.maximum(np.asarray(y, dtype=float), 0.0)
        t = self.t
        return 1.0 - (1.0 + y) ** -t - (1.0 + x) ** -t + (1.0 + x + y) ** -t

    def survival(self, x, y):
        x = np.maximum(np.asarray(x, dtype=float), 0.0)
        y = np.maximum(np.asarray(y, dtype=float), 0.0)
        return (1.0 + x + y) ** -self.t

    def pdf(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        t = self.t
        inside = (x > 0) & (y > 0)
        with np.errstate(invalid="ignore"):
            dens = t * (t + 1.0) * (1.0 + np.abs(x) + np.abs(y)) ** (-t - 2.0)
        return np.where(inside, dens, 0.0)

    def marginal_cdf_x(self, x):
        x = np.maximum(np.asarray(x, dtype=float), 0.0)
        return -np.expm1(-self.t * np.log1p(x))

    def marginal_pdf_x(self, x):
        x = np.asarray(x, dtype=float)
        with np.errstate(invalid="ignore"):
            dens = self.t * (1.0 + np.abs(x)) ** (-self.t - 1.0)
        return np.where(x > 0, dens, 0.0)

    def quantile_x(self, u):
        u = np.asarray(u, dtype=float)
        with np.errstate(divide="ignore"):
            return np.expm1(-np.log1p(-u) / self.t)

    def _draw(self, n, rng):
        t = self.t
        u1 = rng.random(n)
        u2 = rng.random(n)
        # U and 1 - U have the same law; the complement form avoids log(0)
        x = np.expm1(-np.log1p(-u1) / t)
        y = (1.0 + x) * np.expm1(-np.log1p(-u2) / (t + 1.0))
        return x, y

    def closed_form_coefficients(self):
        t = self.t
        out = {"tau": 1.0 / (2.0 * t + 1.0)}
        if t > 2.0:
            out["rho"] = 1.0 / t
        return out


_CLASSES = {"fgm": FGM, "normal": BivariateNormal, "pareto": BivariatePareto}


def make_model(family: str, t: float) -> BivariateModel:
    try:
        cls = _CLASSES[family.lower()]
    except KeyError:
        raise ParameterOutOfRange(f"unknown family {family!r}; choose from {FAMILIES}") from None
    return cls(t)


def copula_of(model: BivariateModel) -> Copula:
    return Copula(
        cdf=model.copula_cdf,
        density=model.copula_density,
        survival=model.copula_survival,
        conditional_quantile=model.conditional_quantile,
    )


def sample(model: BivariateModel, n: int, rng=None) -> PairedSample:
    """``n`` i.i.d. draws from ``model``; ``rng`` is a Generator or a seed."""
    return model.sample(n, rng)


def theoretical_coefficients(model: BivariateModel, m: int | None = None) -> TheoreticalCoefficients:
    """Population Pearson, Spearman, Kendall and ``r = 6 E[F - HG]`` for ``model``.

    Closed forms are used where they exist. The remaining Spearman and ``r``
    values (Pareto) come from copula-scale quadrature. Pearson is ``None``
    where it is undefined (Pareto with ``t <= 2``).
    """
    closed = model.closed_form_coefficients()
    methods = {}
    values = {}
    need = [k for k in ("rho_s", "tau", "r") if k not in closed]
    if need:
        from .quadrature import coefficient_by_quadrature

        for key in need:
            values[key] = coefficient_by_quadrature(model, key, m=m)
            methods[key] = QUADRATURE
    for key, val in closed.items():
        values[key] = val
        methods[key] = CLOSED_FORM
    if "rho" not in values:
        values["rho"] = None
    else:
        methods.setdefault("rho", CLOSED_FORM)
    return TheoreticalCoefficients(
        rho=values["rho"], rho_s=values["rho_s"], tau=values["tau"], r=values["r"], methods=methods
    )
