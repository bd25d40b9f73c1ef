"""Hot-kernel backend selection.

Prefers the compiled extension (`_core`, built from _core.pyx) and falls
back to the pure-Python implementation. Both produce bit-identical results;
the compiled one is orders of magnitude faster (see benchmarks/).

Set INSTANCE_FORGE_BACKEND=pure or =compiled to force a backend.
"""
import os

import numpy as np

from . import pure

try:
    from . import _core
    HAVE_COMPILED = True
except ImportError:
    _core = None
    HAVE_COMPILED = False

_requested = os.environ.get("INSTANCE_FORGE_BACKEND", "").strip().lower()
if _requested == "pure":
    _active = pure
elif _requested == "compiled":
    if not HAVE_COMPILED:
        raise ImportError(
            "INSTANCE_FORGE_BACKEND=compiled but the extension is not built; "
            "run `pip install -e . --no-build-isolation` or `python setup.py build_ext --inplace`"
        )
    _active = _core
elif _requested:
    raise ImportError(f"unknown INSTANCE_FORGE_BACKEND {_requested!r} (use 'pure' or 'compiled')")
else:
    _active = _core if HAVE_COMPILED else pure

BACKEND = _active.BACKEND


def tour_length(dist: np.ndarray, order: np.ndarray) -> float:
    return _active.tour_length(dist, order)


def two_opt(dist: np.ndarray, order: np.ndarray) -> np.ndarray:
    return _active.two_opt(dist, order)


def held_karp(dist: np.ndarray) -> float:
    return _active.held_karp(dist)
