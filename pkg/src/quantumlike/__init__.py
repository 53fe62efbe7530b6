"""Quantum-like modeling toolkit.

Quantum logic on projectors, quantum instruments and sequential-measurement
effects, GKSL entropy dynamics and contextuality tests on finite-dimensional
Hilbert spaces.
"""
__version__ = "0.1.0"

from .errors import QuantumLikeError  # noqa: E402
from .hilbert import (  # noqa: E402
    DensityOperator,
    HermitianObservable,
    Projector,
    StateVector,
    density_from_pure,
    eig_hermitian,
    make_pure_state,
    partial_trace,
    tensor,
    validate_density,
)
from .kernels import BACKEND  # noqa: E402

__all__ = [
    "__version__",
    "BACKEND",
    "QuantumLikeError",
    "DensityOperator",
    "HermitianObservable",
    "Projector",
    "StateVector",
    "density_from_pure",
    "eig_hermitian",
    "make_pure_state",
    "partial_trace",
    "tensor",
    "validate_density",
]
