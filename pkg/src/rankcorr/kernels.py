"""Backend selection for the rank-counting kernels.

The compiled extension is used when it was built; otherwise the pure-Python
module is used. Both expose ``concordant_count``, ``concordant_count_naive``,
``weighted_t`` and ``weighted_t_naive`` with identical results.
"""

from __future__ import annotations

from contextlib import contextmanager

from . import _kernels_py

try:
    from . import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None

BACKENDS = {"python": _kernels_py}
if _compiled is not None:
    BACKENDS["compiled"] = _compiled

_active = "compiled" if _compiled is not None else "python"


def available_backends() -> list[str]:
    return sorted(BACKENDS)


def active_backend() -> str:
    return _active


def set_backend(name: str) -> None:
    global _active
    if name not in BACKENDS:
        raise ValueError(f"unknown or unavailable backend {name!r}; have {available_backends()}")
    _active = name


@contextmanager
def using_backend(name: str):
    previous = _active
    set_backend(name)
    try:
        yield
    finally:
        set_backend(previous)


def _call(fname: str, ranks, backend: str | None):
    module = BACKENDS[backend or _active]
    try:
        return getattr(module, fname)(ranks)
    except OverflowError:
        return getattr(_kernels_py, fname)(ranks)


def concordant_count(ranks, backend: str | None = None) -> int:
    return _call("concordant_count", ranks, backend)


def concordant_count_naive(ranks, backend: str | None = None) -> int:
    return _call("concordant_count_naive", ranks, backend)


def weighted_t(ranks, backend: str | None = None) -> int:
    return _call("weighted_t", ranks, backend)


def weighted_t_naive(ranks, backend: str | None = None) -> int:
    return _call("weighted_t_naive", ranks, backend)
