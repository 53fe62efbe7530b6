"""Numerical tolerances shared across modules.

The defaults live in :data:`DEFAULTS`.  Use :func:`override` as a context
manager to change them temporarily (the CLI does this for ``--tolerance``).
"""
import contextlib
import dataclasses


@dataclasses.dataclass(frozen=True)
class Tolerances:
    hermiticity: float = 1e-10
    psd_floor: float = -1e-10
    trace: float = 1e-10
    normalization: float = 1e-12
    eig_hermitian: float = 1e-8
    degeneracy: float = 1e-9
    idempotence: float = 1e-9
    phase: float = 1e-10
    completeness: float = 1e-10
    unitarity: float = 1e-10
    null_event: float = 1e-12
    event: float = 1e-9
    lattice: float = 1e-8
    commute: float = 1e-9
    qq_certify: float = 1e-6
    decoherence: float = 1e-6
    clip_floor: float = -1e-8
    dim_cap: int = 4096


DEFAULTS = Tolerances()
_current = DEFAULTS


def get() -> Tolerances:
    return _current


@contextlib.contextmanager
def override(**changes):
    """Temporarily replace tolerance fields, e.g. ``override(lattice=1e-6)``."""
    global _current
    saved = _current
    _current = dataclasses.replace(_current, **changes)
    try:
        yield _current
    finally:
        _current = saved
