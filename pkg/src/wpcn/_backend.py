"""Kernel backend selection.

The compiled extension is preferred.  Setting ``WPCN_PURE_PYTHON=1`` in the
environment forces the pure-Python kernels, which is how the benchmark and
the backend-equivalence tests reach both.
"""
import os

if os.environ.get("WPCN_PURE_PYTHON", "") not in ("", "0"):
    from wpcn import _pykernels as kernels
else:
    try:
        from wpcn import _ckernels as kernels
    except ImportError:
        from wpcn import _pykernels as kernels

BACKEND = "cython" if kernels.__name__.endswith("_ckernels") else "python"


def available_backends():
    """Return ``{name: module}`` for every kernel backend importable here."""
    from wpcn import _pykernels

    found = {"python": _pykernels}
    try:
        from wpcn import _ckernels
    except ImportError:
        pass
    else:
        found["cython"] = _ckernels
    return found
