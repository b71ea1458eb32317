"""Hot numerical kernels.

The compiled extension ``_ckernels`` is used when it was built; otherwise the
numpy fallback in ``_pykernels`` is selected at import. Setting the
environment variable ``MTOBENCH_PURE_PYTHON=1`` forces the fallback.
"""

import os

from . import _pykernels

BACKEND = "python"

if os.environ.get("MTOBENCH_PURE_PYTHON") != "1":
    try:
        from . import _ckernels as _impl
    except ImportError:
        _impl = _pykernels
    else:
        BACKEND = "cython"
else:
    _impl = _pykernels

nondominated_ranks = _impl.nondominated_ranks
hv2d = _impl.hv2d
min_distances = _impl.min_distances

__all__ = ["BACKEND", "nondominated_ranks", "hv2d", "min_distances"]
