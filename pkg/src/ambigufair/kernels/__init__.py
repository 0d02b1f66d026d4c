"""Kernel backend selection.

The compiled extension is preferred when importable; set AMBIGUFAIR_NO_EXT=1
to force the NumPy fallback. ``set_backend`` exists for tests and the
benchmark script; both backends produce bit-identical results.
"""

from __future__ import annotations

import os

from . import numpy_impl

_backends = {"numpy": numpy_impl}

try:
    from . import _histcore

    _backends["cython"] = _histcore
except ImportError:
    _histcore = None

if os.environ.get("AMBIGUFAIR_NO_EXT") == "1" or "cython" not in _backends:
    _active = _backends["numpy"]
else:
    _active = _backends["cython"]


def available_backends() -> tuple[str, ...]:
    return tuple(sorted(_backends))


def active_backend() -> str:
    return _active.NAME


def set_backend(name: str) -> None:
    global _active
    if name not in _backends:
        raise ValueError(f"unknown backend {name!r}; available: {available_backends()}")
    _active = _backends[name]


def build_histograms(codes, idx, grad, hess, n_bins):
    return _active.build_histograms(codes, idx, grad, hess, n_bins)


def predict_tree(codes, feature, split_bin, left, right, value, out):
    return _active.predict_tree(codes, feature, split_bin, left, right, value, out)
