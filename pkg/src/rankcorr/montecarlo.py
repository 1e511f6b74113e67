"""Seeded Monte Carlo experiments on the sampling variance of the coefficients.

Replication ``k`` at parameter index ``i`` draws from its own Philox stream
keyed by ``(seed, i, k)``, so results do not depend on how replications are
spread over worker threads. Per-replication values are stored by index and
reduced in a fixed order.
"""

from __future__ import annotations

import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import chi2

from . import rankstats
from .copulas import make_model
from .errors import MismatchedConfig, ParameterOutOfRange

COEFFICIENTS = ("pearson", "spearman", "kendall", "r_new", "r_tilde")
DEFAULT_BAND = (0.8, 1.25)


def resolve_threads(threads: int | None = None) -> int:
    """Worker count: ``RANKCORR_THREADS`` overrides the argument; default 1."""
    env = os.environ.get("RANKCORR_THREADS")
    if env:
        threads = int(env)
    threads = int(threads or 1)
    if threads < 1:
        raise ValueError("thread count must be positive")
    return threads


def substream(seed: int, t_index: int, k: int) -> np.random.Generator:
    """Independent generator for replication ``k`` of parameter ``t_index``."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), int(t_index), int(k)])))


@dataclass(frozen=True)
class SimulationConfig:
    family: str
    ts: tuple
    n: int = 1000
    reps: int = 1000
    seed: int = 0
    coefficients: tuple = COEFFICIENTS

    def __post_init__(self):
        object.__setattr__(self, "ts", tuple(float(t) for t in np.atleast_1d(self.ts)))
        object.__setattr__(self, "coefficients", tuple(self.coefficients))
        if self.n < 2:
            raise ParameterOutOfRange(f"n must be >= 2, got {self.n}")
        if self.reps < 2:
            raise ParameterOutOfRange(f"reps must be >= 2, got {self.reps}")
        unknown = set(self.coefficients) - set(COEFFICIENTS)
        if unknown:
            raise ValueError(f"unknown coefficients {sorted(unknown)}")
        if not 0 <= int(self.seed) < 2**64:
            raise ParameterOutOfRange("seed must fit in 64 bits")
        if len(set(self.ts)) != len(self.ts):
            raise ParameterOutOfRange(f"duplicate parameter values in {self.ts}")
        for t in self.ts:
            make_model(self.family, t)  # validates family and parameter

    def as_dict(self) -> dict:
        return {
            "family": self.family,
            "ts": list(self.ts),
            "n": self.n,
            "reps": self.reps,
            "seed": int(self.seed),
            "coefficients": list(self.coefficients),
        }


@dataclass(frozen=True)
class CellStats:
    mean: float
    variance: float
    reps: int

    @property
    def std_error(self) -> float:
        return math.sqrt(self.variance / self.reps)


@dataclass
class SimulationResult:
    config: SimulationConfig
    cells: dict
    values: dict = field(repr=False)
    wall_time: float = 0.0

    def cell(self, t: float, coefficient: str) -> CellStats:
        return self.cells[(float(t), coefficient)]

    def as_dict(self) -> dict:
        return {
            "config": self.config.as_dict(),
            "cells": [
                {"t": t, "coefficient": c, "mean": s.mean, "variance": s.variance, "reps": s.reps}
                for (t, c), s in self.cells.items()
            ],
        }


def replicate(x: np.ndarray, y: np.ndarray, coefficients=COEFFICIENTS) -> dict:
    """Requested coefficients of one simulated sample; ties broken in input order."""
    sample = rankstats.PairedSample(x, y)
    out = {}
    ranks = rankstats.concomitant_ranks(sample, ties="jitter")
    need_tau = "kendall" in coefficients or "r_tilde" in coefficients
    need_rho = "spearman" in coefficients or "r_tilde" in coefficients
    tau = rankstats.kendall(ranks) if need_tau else None
    rho_s = rankstats.spearman(ranks) if need_rho else None
    for name in coefficients:
        if name == "pearson":
            out[name] = rankstats.pearson(sample)
        elif name == "spearman":
            out[name] = rho_s
        elif name == "kendall":
            out[name] = tau
        elif name == "r_new":
            out[name] = rankstats.r_new(ranks)
        elif name == "r_tilde":
            out[name] = (3 * tau - rho_s) / 2
    return out


def _run_block(config, model, t_index, ks, store):
    for k in ks:
        x, y = model.sample_arrays(config.n, substream(config.seed, t_index, k))
        vals = replicate(x, y, config.coefficients)
        for name, value in vals.items():
            store[name][k] = value


def run(config: SimulationConfig, threads: int | None = None) -> SimulationResult:
    """Draw ``config.reps`` samples per parameter and summarize each coefficient.

    Sample variances use divisor ``reps - 1``.
    """
    workers = resolve_threads(threads)
    start = time.perf_counter()
    values = {}
    cells = {}
    for t_index, t in enumerate(config.ts):
        model = make_model(config.family, t)
        store = {name: np.empty(config.reps) for name in config.coefficients}
        blocks = np.array_split(np.arange(config.reps), max(workers * 4, 1))
        if workers == 1:
            for ks in blocks:
                _run_block(config, model, t_index, ks, store)
        else:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                futures = [pool.submit(_run_block, config, model, t_index, ks, store) for ks in blocks]
                for fut in futures:
                    fut.result()
        for name, arr in store.items():
            values[(t, name)] = arr
            cells[(t, name)] = CellStats(float(np.mean(arr)), float(np.var(arr, ddof=1)), config.reps)
    return SimulationResult(config, cells, values, time.perf_counter() - start)


@dataclass(frozen=True)
class ComparisonRow:
    t: float
    coefficient: str
    observed: float
    theory: float
    ratio: float
    band: tuple
    flagged: bool

    def as_dict(self) -> dict:
        return {
            "t": self.t,
            "coefficient": self.coefficient,
            "observed": self.observed,
            "theory": self.theory,
            "ratio": self.ratio,
            "band": list(self.band),
            "flagged": self.flagged,
        }


def chi2_band(reps: int, level: float = 0.99) -> tuple:
    """Two-sided band for ``S^2 / sigma^2`` under normal sampling with ``reps - 1`` df."""
    df = reps - 1
    alpha = 1.0 - level
    return (float(chi2.ppf(alpha / 2, df) / df), float(chi2.ppf(1 - alpha / 2, df) / df))


def compare_with_theory(
    result: SimulationResult, reports: dict, strict: bool = False, band: tuple = DEFAULT_BAND
) -> list:
    """Observed sample variance against ``c / n`` for each ``(t, coefficient)`` in ``reports``.

    ``reports`` maps ``(t, coefficient)`` to a
    :class:`~rankcorr.asymptotics.VarianceReport` (or a bare leading
    coefficient). Cells whose ratio leaves ``band`` are flagged;
    ``strict=True`` replaces the band by the exact 99% chi-square interval.
    """
    cfg = result.config
    if strict:
        band = chi2_band(cfg.reps)
    rows = []
    for (t, coefficient), rep in reports.items():
        key = (float(t), coefficient)
        if key not in result.cells:
            raise MismatchedConfig(f"no simulated cell for t={t}, coefficient={coefficient}")
        coeff = getattr(rep, "leading_coeff", rep)
        model = getattr(rep, "model", None)
        if model is not None and (model.family != cfg.family or model.t != float(t)):
            raise MismatchedConfig(f"report for {model!r} does not match {cfg.family} t={t}")
        observed = result.cells[key].variance
        theory = float(coeff) / cfg.n
        ratio = observed / theory if theory > 0 else math.inf
        rows.append(
            ComparisonRow(float(t), coefficient, observed, theory, ratio, tuple(band),
                          not band[0] <= ratio <= band[1])
        )
    return rows
