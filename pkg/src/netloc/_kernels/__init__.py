"""Traversal kernels, compiled when available.

The Cython extension ``_ckernels`` is used if it was built; otherwise the
pure-Python ``_pykernels`` twin. Set ``NETLOC_PURE_PYTHON=1`` to force the
fallback.
"""

import os

from . import _pykernels

if os.environ.get("NETLOC_PURE_PYTHON"):
    _impl = _pykernels
else:
    try:
        from . import _ckernels as _impl
    except ImportError:  # extension not built
        _impl = _pykernels

BACKEND = _impl.BACKEND


def get_backend(name=None):
    """Kernel module by name (``"cython"`` or ``"python"``); default is the active one."""
    if name is None:
        return _impl
    if name == "python":
        return _pykernels
    if name == "cython":
        from . import _ckernels
        return _ckernels
    raise ValueError(f"unknown kernel backend {name!r}")
