"""Sample correlation coefficients computed from paired observations.

All rank coefficients are functions of the concomitant ranks: sort the pairs
by ``x`` and record the rank of each ``y`` in that order. For that
permutation ``r_1..r_n``:

* Kendall ``tau_n = 4 P / (n(n-1)) - 1`` with ``P`` the number of pairs
  ``j < i`` with ``r_j < r_i``;
* Spearman ``rho_S = 1 - 6 sum (r_i - i)^2 / (n^3 - n)``;
* the weighted coefficient ``r_n = 12 T_n / (n(n-1)(2n-1)) - 1`` where
  ``T_n = sum_{j<i} (n - i + j) [r_j <= r_i]`` weights neighbouring
  concomitants by ``n - 1`` and the most distant pair by ``1``;
* ``r_tilde = (3 tau_n - rho_S) / 2``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import DegenerateSample, LengthMismatch, TiesPresent

#: Below this size the quadratic loops beat the O(n log n) paths.
NAIVE_THRESHOLD = 64

TIE_POLICIES = ("reject", "jitter")


def _has_duplicates(a: np.ndarray) -> bool:
    s = np.sort(a)
    return bool(np.any(s[1:] == s[:-1]))


@dataclass(frozen=True)
class PairedSample:
    """Paired observations ``(x_i, y_i)``, ``i = 1..n``, ``n >= 2``."""

    xs: np.ndarray
    ys: np.ndarray

    def __post_init__(self):
        xs = np.asarray(self.xs, dtype=float).ravel()
        ys = np.asarray(self.ys, dtype=float).ravel()
        if xs.shape != ys.shape:
            raise LengthMismatch(f"xs has {xs.size} values but ys has {ys.size}")
        if xs.size < 2:
            raise DegenerateSample(f"need at least 2 pairs, got {xs.size}")
        if not (np.all(np.isfinite(xs)) and np.all(np.isfinite(ys))):
            raise DegenerateSample("sample contains NaN or infinite values")
        xs.flags.writeable = False
        ys.flags.writeable = False
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "ys", ys)

    @property
    def n(self) -> int:
        return int(self.xs.size)

    @property
    def x_has_ties(self) -> bool:
        return _has_duplicates(self.xs)

    @property
    def y_has_ties(self) -> bool:
        return _has_duplicates(self.ys)

    @property
    def has_ties(self) -> bool:
        return self.x_has_ties or self.y_has_ties

    def __len__(self) -> int:
        return self.n


@dataclass(frozen=True)
class ConcomitantRanks:
    """Ranks of the concomitants ``Y_[1..n]`` among all ``y``; a permutation of ``1..n``."""

    ranks: np.ndarray

    def __post_init__(self):
        r = np.asarray(self.ranks)
        if r.ndim != 1 or r.size < 2:
            raise ValueError("ranks must be a 1-d sequence of length >= 2")
        if not np.issubdtype(r.dtype, np.integer):
            if not np.all(r == np.round(r)):
                raise ValueError("ranks must be integers")
        r = r.astype(np.int64)
        seen = np.zeros(r.size + 1, dtype=bool)
        if r.min() < 1 or r.max() > r.size:
            raise ValueError(f"ranks must be a permutation of 1..{r.size}")
        seen[r] = True
        if not seen[1:].all():
            raise ValueError(f"ranks must be a permutation of 1..{r.size}")
        r.flags.writeable = False
        object.__setattr__(self, "ranks", r)

    @property
    def n(self) -> int:
        return int(self.ranks.size)

    def reversed_y(self) -> "ConcomitantRanks":
        """Ranks after negating ``y``: ``r_i -> n + 1 - r_i``."""
        return ConcomitantRanks(self.n + 1 - self.ranks)

    def __len__(self) -> int:
        return self.n


@dataclass(frozen=True)
class CorrelationEstimates:
    pearson: float
    spearman: float
    kendall: float
    r_new: float
    r_tilde: float
    n: int
    weighted_t: int = field(default=0, compare=False)

    def as_dict(self) -> dict:
        return {
            "n": self.n,
            "pearson": self.pearson,
            "spearman": self.spearman,
            "kendall": self.kendall,
            "r_new": self.r_new,
            "r_tilde": self.r_tilde,
            "weighted_t": self.weighted_t,
        }


def _ordinal_ranks(values: np.ndarray, tiebreak: np.ndarray | None) -> np.ndarray:
    if tiebreak is None:
        order = np.argsort(values, kind="stable")
    else:
        order = np.lexsort((tiebreak, values))
    ranks = np.empty(values.size, dtype=np.int64)
    ranks[order] = np.arange(1, values.size + 1)
    return ranks


def concomitant_ranks(
    sample: PairedSample, ties: str = "reject", seed: int | None = None
) -> ConcomitantRanks:
    """Rank of each concomitant ``Y_[i]`` (the ``y`` paired with the i-th smallest ``x``).

    Parameters
    ----------
    sample : PairedSample
    ties : {"reject", "jitter"}
        ``"reject"`` raises :class:`TiesPresent` on any duplicate value.
        ``"jitter"`` breaks ties as if an infinitesimal perturbation had been
        added: in input order when ``seed`` is None, otherwise in the order of
        a permutation drawn from ``seed``. The coefficient formulas are exact
        only for tie-free data.
    seed : int, optional
        Seed of the tie-breaking permutation.
    """
    if ties not in TIE_POLICIES:
        raise ValueError(f"ties must be one of {TIE_POLICIES}, got {ties!r}")
    xs, ys = sample.xs, sample.ys
    if ties == "reject":
        if sample.x_has_ties:
            raise TiesPresent("tied x values; rerun with jitter to break ties")
        if sample.y_has_ties:
            raise TiesPresent("tied y values; rerun with jitter to break ties")
        tiebreak = None
    elif seed is None:
        tiebreak = np.arange(sample.n)
    else:
        tiebreak = np.random.default_rng(seed).permutation(sample.n)
    if tiebreak is None:
        order = np.argsort(xs, kind="stable")
    else:
        order = np.lexsort((tiebreak, xs))
    y_ranks = _ordinal_ranks(ys, tiebreak)
    return ConcomitantRanks(y_ranks[order])


def _use_naive(n: int, method: str) -> bool:
    if method == "auto":
        return n < NAIVE_THRESHOLD
    if method in ("naive", "fast"):
        return method == "naive"
    raise ValueError(f"method must be 'auto', 'naive' or 'fast', got {method!r}")


def _ranks_of(ranks) -> ConcomitantRanks:
    return ranks if isinstance(ranks, ConcomitantRanks) else ConcomitantRanks(ranks)


def concordant_pairs(ranks, method: str = "auto") -> int:
    """Number of pairs ``j < i`` whose concomitant ranks are in increasing order."""
    cr = _ranks_of(ranks)
    if _use_naive(cr.n, method):
        return kernels.concordant_count_naive(cr.ranks)
    return kernels.concordant_count(cr.ranks)


def weighted_T(ranks, method: str = "auto") -> int:
    """Exact weighted concordance sum ``T_n``; ``0 <= T_n <= n(n-1)(2n-1)/6``."""
    cr = _ranks_of(ranks)
    if _use_naive(cr.n, method):
        return kernels.weighted_t_naive(cr.ranks)
    return kernels.weighted_t(cr.ranks)


def kendall(ranks, method: str = "auto") -> float:
    cr = _ranks_of(ranks)
    n = cr.n
    return 4 * concordant_pairs(cr, method) / (n * (n - 1)) - 1


def spearman(ranks) -> float:
    cr = _ranks_of(ranks)
    n = cr.n
    d = cr.ranks - np.arange(1, n + 1, dtype=np.int64)
    ssd = int(np.dot(d, d))
    return 1 - 6 * ssd / (n**3 - n)


def r_new(ranks, method: str = "auto") -> float:
    """Weighted rank correlation ``12 T_n / (n(n-1)(2n-1)) - 1``; in ``[-1, 1]``."""
    cr = _ranks_of(ranks)
    n = cr.n
    # int / int true division is correctly rounded even past 2**53
    return 12 * weighted_T(cr, method) / (n * (n - 1) * (2 * n - 1)) - 1


def r_tilde(ranks, method: str = "auto") -> float:
    cr = _ranks_of(ranks)
    return (3 * kendall(cr, method) - spearman(cr)) / 2


def pearson(sample: PairedSample) -> float:
    """Sample Pearson correlation from centered cross products."""
    x = sample.xs - sample.xs.mean()
    y = sample.ys - sample.ys.mean()
    sxx = float(np.dot(x, x))
    syy = float(np.dot(y, y))
    if sxx == 0.0 or syy == 0.0:
        raise DegenerateSample("pearson correlation undefined: a coordinate is constant")
    value = float(np.dot(x, y)) / np.sqrt(sxx * syy)
    return float(min(1.0, max(-1.0, value)))


def estimate_all(
    sample: PairedSample, ties: str = "reject", seed: int | None = None, method: str = "auto"
) -> CorrelationEstimates:
    """All five coefficients from a single ranking pass."""
    cr = concomitant_ranks(sample, ties=ties, seed=seed)
    n = cr.n
    tau = kendall(cr, method)
    rho_s = spearman(cr)
    t_n = weighted_T(cr, method)
    return CorrelationEstimates(
        pearson=pearson(sample),
        spearman=rho_s,
        kendall=tau,
        r_new=12 * t_n / (n * (n - 1) * (2 * n - 1)) - 1,
        r_tilde=(3 * tau - rho_s) / 2,
        n=n,
        weighted_t=t_n,
    )
