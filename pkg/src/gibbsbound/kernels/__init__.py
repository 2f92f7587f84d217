"""Hot-path kernels with a compiled core and a pure numpy fallback.

The Cython extension `_native` is used when it is importable; otherwise the
numpy implementation `_numpy` serves the same contract. Set
GIBBSBOUND_KERNELS=numpy or =native to force a backend (forcing `native`
raises if the extension is missing rather than silently falling back).
"""

import os

from . import _numpy

KIND_BBCE = _numpy.KIND_BBCE
KIND_SAVAGE = _numpy.KIND_SAVAGE

_requested = os.environ.get("GIBBSBOUND_KERNELS", "").strip().lower()
if _requested not in ("", "native", "numpy"):
    raise ValueError(f"GIBBSBOUND_KERNELS must be 'native' or 'numpy', got {_requested!r}")

if _requested == "numpy":
    _native = None
else:
    try:
        from . import _native
    except ImportError:
        if _requested == "native":
            raise
        _native = None

_active = _native if _native is not None else _numpy
BACKEND = "native" if _native is not None else "numpy"

forward_scores = _active.forward_scores
evaluate = _active.evaluate
evaluate_with_grad = _active.evaluate_with_grad
loss_and_grad = _active.loss_and_grad
langevin_update = _active.langevin_update


def available_backends():
    """Importable kernel implementations keyed by name."""
    out = {"numpy": _numpy}
    if _native is not None:
        out["native"] = _native
    return out
