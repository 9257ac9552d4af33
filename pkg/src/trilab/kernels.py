"""Kernel backend selection: compiled extension if importable, numpy otherwise.

Set TRILAB_FORCE_PY=1 to force the pure-python backend (used by the
benchmark and the backend-equivalence tests).
"""

import os

from . import _ref

if os.environ.get("TRILAB_FORCE_PY"):
    _impl = _ref
else:
    try:
        from . import _core as _impl
    except ImportError:
        _impl = _ref

BACKEND = _impl.BACKEND

expsum = _impl.expsum
triangle_geom = _impl.triangle_geom
pairwise_geom = _impl.pairwise_geom
sigma_pair_phase = _impl.sigma_pair_phase
disk_envelope = _ref.disk_envelope  # scalar helper, numpy everywhere


def disk_strat_eval(pts, etap, kap, eta_sq, sin_alpha, d):
    if d > 5:
        return _ref.disk_strat_eval(pts, etap, kap, eta_sq, sin_alpha, d)
    return _impl.disk_strat_eval(pts, etap, kap, eta_sq, sin_alpha, d)


def backend_info():
    return {"backend": BACKEND}
