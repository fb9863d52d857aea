"""Backend selection for the tree kernels.

The compiled extension is used when it imports; set ``LQE_PURE_PYTHON=1``
to force the NumPy implementation.
"""
import os

from . import _kernels_py

_BACKENDS = {"python": _kernels_py}

try:
    from . import _ckernels
except ImportError:  # extension not built
    _ckernels = None
else:
    _BACKENDS["cython"] = _ckernels

if os.environ.get("LQE_PURE_PYTHON") or _ckernels is None:
    _impl = _kernels_py
else:
    _impl = _ckernels

BACKEND = _impl.NAME
best_split = _impl.best_split
tree_apply = _impl.tree_apply


def available_backends():
    return sorted(_BACKENDS)


def get_backend(name):
    try:
        return _BACKENDS[name]
    except KeyError:
        raise ValueError(f"kernel backend {name!r} unavailable; have {available_backends()}") from None
