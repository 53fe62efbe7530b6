"""Backend selection for the hot loops.

The compiled ``_rk4`` extension is used when it was built; otherwise the
numpy implementation in ``_rk4_py`` is used.  Set the environment variable
``QUANTUMLIKE_PURE_PYTHON=1`` to force the fallback.
"""
import os

from . import _rk4_py

BACKENDS = {"python": _rk4_py.rk4_integrate}

try:
    from . import _rk4
except ImportError:  # extension not built
    _rk4 = None
else:
    BACKENDS["compiled"] = _rk4.rk4_integrate

if _rk4 is not None and os.environ.get("QUANTUMLIKE_PURE_PYTHON", "") in ("", "0"):
    BACKEND = "compiled"
else:
    BACKEND = "python"

rk4_integrate = BACKENDS[BACKEND]


def get_rk4(backend=None):
    """Integrator for ``backend`` (``"compiled"``, ``"python"`` or the default)."""
    if backend is None:
        return rk4_integrate
    try:
        return BACKENDS[backend]
    except KeyError:
        raise ValueError(f"backend {backend!r} unavailable; have {sorted(BACKENDS)}") from None
