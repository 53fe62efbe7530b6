"""Finite-dimensional Hilbert-space substrate.

States, operators, tensor products, partial traces and Hermitian spectral
decompositions on ``C^n``.  Matrices are plain ``numpy`` complex arrays;
the small wrapper classes (:class:`StateVector`, :class:`DensityOperator`,
:class:`Projector`, :class:`HermitianObservable`) validate once at
construction and hold read-only copies, so they can be shared freely.

Tensor products use the Kronecker convention of :func:`numpy.kron`: for
``A`` of size ``dA`` and ``B`` of size ``dB`` the entry
``(iA*dB + iB, jA*dB + jB)`` of ``A (x) B`` is ``A[iA, jA] * B[iB, jB]``.

Matrix literal format
---------------------
Configs and reports carry matrices as nested lists of ``[re, im]`` pairs in
row-major order, e.g. the Pauli Y matrix is ``[[[0, 0], [0, -1]], [[0, 1],
[0, 0]]]``.  Vectors are flat lists of ``[re, im]`` pairs.  Plain real
numbers are accepted in place of a pair on input.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from . import config
from .errors import (
    DegenerateStateError,
    DimensionError,
    HermiticityViolation,
    NonFiniteError,
    NotHermitianError,
    NotProjectorError,
    PositivityViolation,
    TraceViolation,
)

__all__ = [
    "as_matrix",
    "StateVector",
    "DensityOperator",
    "Projector",
    "HermitianObservable",
    "EigenDecomposition",
    "make_pure_state",
    "density_from_pure",
    "tensor",
    "partial_trace",
    "eig_hermitian",
    "spectral_groups",
    "validate_density",
    "spectrum_additivity_report",
    "same_state",
    "max_abs",
    "matrix_to_literal",
    "matrix_from_literal",
    "vector_to_literal",
    "vector_from_literal",
]


def max_abs(a) -> float:
    """Largest absolute entry (the ``inf``-norm on entries used throughout)."""
    a = np.asarray(a)
    return float(np.max(np.abs(a))) if a.size else 0.0


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex, copy=True)
    a.setflags(write=False)
    return a


def as_matrix(m, name: str = "matrix") -> np.ndarray:
    """Coerce ``m`` to a finite square complex array (a new array)."""
    if isinstance(m, (DensityOperator, Projector, HermitianObservable)):
        m = m.matrix
    a = np.array(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise DimensionError(f"{name} must be a non-empty square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise NonFiniteError(f"non-finite input in {name}")
    return a


def _as_vector(v) -> np.ndarray:
    if isinstance(v, StateVector):
        return v.amplitudes
    a = np.array(v, dtype=complex).reshape(-1)
    if a.size < 1:
        raise DimensionError("state vector must have at least one amplitude")
    if not np.all(np.isfinite(a)):
        raise NonFiniteError("non-finite input")
    return a


def _herm_dev(a: np.ndarray) -> float:
    return max_abs(a - a.conj().T)


# --------------------------------------------------------------------------
# value types


class StateVector:
    """Unit-norm pure state. Global phase is kept; compare with :func:`same_state`."""

    __slots__ = ("amplitudes",)

    def __init__(self, amplitudes):
        a = _as_vector(amplitudes)
        if abs(np.linalg.norm(a) - 1.0) > config.get().normalization:
            raise DegenerateStateError("state vector is not normalized; use make_pure_state")
        object.__setattr__(self, "amplitudes", _frozen(a))

    def __setattr__(self, key, value):
        raise AttributeError("StateVector is immutable")

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.amplitudes, dtype=dtype)

    def __repr__(self):
        return f"StateVector({np.array2string(self.amplitudes, precision=6)})"


class DensityOperator:
    """Hermitian, positive semidefinite, unit-trace matrix.

    Construction runs :func:`validate_density`; pass ``validate=False`` only
    for matrices already known to be valid (e.g. freshly normalised updates).
    """

    __slots__ = ("matrix",)

    def __init__(self, matrix, validate: bool = True):
        if validate:
            matrix = _check_density(as_matrix(matrix, "density"))
        object.__setattr__(self, "matrix", _frozen(matrix))

    def __setattr__(self, key, value):
        raise AttributeError("DensityOperator is immutable")

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.matrix, dtype=dtype)

    def __repr__(self):
        return f"DensityOperator(dim={self.dim})"


class Projector:
    """Orthogonal projector (Hermitian and idempotent)."""

    __slots__ = ("matrix",)

    def __init__(self, matrix, validate: bool = True):
        a = as_matrix(matrix, "projector")
        if validate:
            tol = config.get()
            if _herm_dev(a) > tol.hermiticity:
                raise NotProjectorError("projector is not Hermitian")
            if max_abs(a @ a - a) > tol.idempotence:
                raise NotProjectorError("projector is not idempotent")
        object.__setattr__(self, "matrix", _frozen(a))

    def __setattr__(self, key, value):
        raise AttributeError("Projector is immutable")

    @classmethod
    def onto(cls, vectors) -> "Projector":
        """Projector onto the span of the given vectors (rows or 1-D)."""
        v = np.atleast_2d(np.array(vectors, dtype=complex))
        if v.shape[0] == 0:
            raise DimensionError("need at least one vector")
        q, r = np.linalg.qr(v.T)
        keep = np.abs(np.diag(r)) > 1e-12
        q = q[:, keep]
        return cls(q @ q.conj().T, validate=False)

    @classmethod
    def from_basis(cls, basis: np.ndarray) -> "Projector":
        """Projector from a matrix whose columns are orthonormal."""
        basis = np.asarray(basis, dtype=complex)
        return cls(basis @ basis.conj().T, validate=False)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def rank(self) -> int:
        return int(round(np.trace(self.matrix).real))

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.matrix, dtype=dtype)

    def __repr__(self):
        return f"Projector(dim={self.dim}, rank={self.rank})"


class HermitianObservable:
    """Hermitian matrix together with its grouped spectral decomposition.

    ``spectral`` is a tuple of ``(eigenvalue, Projector)`` pairs in ascending
    eigenvalue order; degenerate eigenvalues share one projector.
    """

    __slots__ = ("matrix", "spectral")

    def __init__(self, matrix):
        a = as_matrix(matrix, "observable")
        if _herm_dev(a) > config.get().eig_hermitian:
            raise NotHermitianError("observable is not Hermitian")
        a = (a + a.conj().T) / 2
        object.__setattr__(self, "matrix", _frozen(a))
        groups = spectral_groups(a)
        object.__setattr__(
            self, "spectral", tuple((lam, Projector.from_basis(vecs)) for lam, vecs in groups)
        )

    def __setattr__(self, key, value):
        raise AttributeError("HermitianObservable is immutable")

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.matrix, dtype=dtype)


# --------------------------------------------------------------------------
# operations


def make_pure_state(amplitudes) -> StateVector:
    """Normalise ``amplitudes`` into a :class:`StateVector`.

    >>> make_pure_state([3j, 4]).amplitudes
    array([0. +0.6j, 0.8+0.j ])
    """
    a = _as_vector(amplitudes)
    n = np.linalg.norm(a)
    if n == 0.0:
        raise DegenerateStateError("degenerate state: zero vector")
    return StateVector(a / n)


def density_from_pure(psi) -> DensityOperator:
    """Rank-one density ``|psi><psi|``."""
    if not isinstance(psi, StateVector):
        psi = StateVector(psi)
    v = psi.amplitudes
    rho = np.outer(v, v.conj())
    return DensityOperator(rho, validate=False)


def tensor(a, b, dim_cap: int | None = None) -> np.ndarray:
    """Kronecker product ``a (x) b`` (row-major block layout)."""
    a = as_matrix(a, "left factor")
    b = as_matrix(b, "right factor")
    cap = config.get().dim_cap if dim_cap is None else dim_cap
    d = a.shape[0] * b.shape[0]
    if d > cap:
        raise DimensionError(f"tensor dimension {d} exceeds cap {cap}")
    return np.kron(a, b)


def _keep_index(keep) -> int:
    if keep in (0, "A", "a"):
        return 0
    if keep in (1, "B", "b"):
        return 1
    raise DimensionError(f"keep must be 'A'/'B' (or 0/1), got {keep!r}")


def partial_trace(m, dims: Sequence[int], keep="A") -> np.ndarray:
    """Trace out one factor of a bipartite operator.

    Parameters
    ----------
    m : array_like
        Operator on ``C^dA (x) C^dB``.
    dims : (int, int)
        ``(dA, dB)``.
    keep : {"A", "B"}
        Which subsystem survives.
    """
    a = as_matrix(m)
    da, db = (int(d) for d in dims)
    if da < 1 or db < 1 or da * db != a.shape[0]:
        raise DimensionError(f"dims {tuple(dims)} do not match operator dimension {a.shape[0]}")
    t = a.reshape(da, db, da, db)
    if _keep_index(keep) == 0:
        return np.einsum("ijkj->ik", t)
    return np.einsum("ijil->jl", t)


class EigenDecomposition(NamedTuple):
    values: np.ndarray
    vectors: np.ndarray


def eig_hermitian(m) -> EigenDecomposition:
    """Eigenvalues (ascending) and orthonormal eigenvectors (columns)."""
    a = as_matrix(m)
    if _herm_dev(a) > config.get().eig_hermitian:
        raise NotHermitianError("not Hermitian")
    a = (a + a.conj().T) / 2
    w, v = np.linalg.eigh(a)
    return EigenDecomposition(w, v)


def spectral_groups(m) -> list:
    """Group eigenpairs whose eigenvalues differ by at most the degeneracy gap.

    The gap is relative: ``degeneracy * max(1, ||m||)``.  Returns a list of
    ``(mean eigenvalue, column-orthonormal basis)`` in ascending order.
    """
    w, v = eig_hermitian(m)
    gap = config.get().degeneracy * max(1.0, float(np.max(np.abs(w))))
    groups = []
    start = 0
    for i in range(1, len(w) + 1):
        if i == len(w) or w[i] - w[i - 1] > gap:
            groups.append((float(np.mean(w[start:i])), v[:, start:i]))
            start = i
    return groups


def _check_density(a: np.ndarray) -> np.ndarray:
    tol = config.get()
    violations = []
    herm = _herm_dev(a)
    if herm > tol.hermiticity:
        violations.append(("hermiticity", herm))
    h = (a + a.conj().T) / 2
    lam_min = float(np.linalg.eigvalsh(h)[0])
    if lam_min < tol.psd_floor:
        violations.append(("positivity", lam_min))
    tr = complex(np.trace(a))
    if abs(tr - 1.0) > tol.trace:
        violations.append(("trace", tr.real))
    if violations:
        kind, value = violations[0]
        detail = "; ".join(_describe(k, v) for k, v in violations)
        cls = {"hermiticity": HermiticityViolation, "positivity": PositivityViolation,
               "trace": TraceViolation}[kind]
        raise cls(detail, violations)
    return h


def _describe(kind: str, value: float) -> str:
    if kind == "hermiticity":
        return f"hermiticity violated (max |M - M^dagger| = {value:.3g})"
    if kind == "positivity":
        return f"positivity violated (eigenvalue {value:.6g})"
    return f"trace violated (trace {value:.12g}, deviation {value - 1:.3g})"


def validate_density(m) -> DensityOperator:
    """Return ``m`` as a :class:`DensityOperator` or raise.

    All three conditions are checked; the raised exception's class matches
    the first failure and ``.violations`` lists every failure.
    """
    return DensityOperator(m)


def same_state(a, b) -> bool:
    """Phase-insensitive equality of pure states: ``|<a|b>| = 1``."""
    va, vb = _as_vector(a), _as_vector(b)
    if va.shape != vb.shape:
        return False
    return abs(abs(np.vdot(va, vb)) - 1.0) <= config.get().phase


@dataclass(frozen=True)
class AdditivityReport:
    spec_a: np.ndarray
    spec_b: np.ndarray
    spec_sum: np.ndarray
    pairwise_sums: np.ndarray
    commuting: bool
    # None when the pairing search was skipped (noncommuting, dim > 8)
    additive: bool | None

    def as_dict(self) -> dict:
        return {
            "spec_a": self.spec_a.tolist(),
            "spec_b": self.spec_b.tolist(),
            "spec_sum": self.spec_sum.tolist(),
            "pairwise_sums": self.pairwise_sums.tolist(),
            "commuting": self.commuting,
            "additive": self.additive,
        }


_MAX_PERMUTATION_DIM = 8


def spectrum_additivity_report(a, b, tol: float = 1e-9) -> AdditivityReport:
    """Compare the spectrum of ``A + B`` with sums of eigenvalues of ``A`` and ``B``.

    ``additive`` is true when some pairing ``a_i + b_pi(i)`` reproduces the
    spectrum of the sum.  Commuting pairs are additive by simultaneous
    diagonalisation.  For noncommuting pairs the pairing is searched
    exhaustively up to dimension 8; beyond that ``additive`` is None.
    """
    ma, mb = as_matrix(a, "A"), as_matrix(b, "B")
    if ma.shape != mb.shape:
        raise DimensionError(f"dimension mismatch: {ma.shape[0]} vs {mb.shape[0]}")
    sa = eig_hermitian(ma).values
    sb = eig_hermitian(mb).values
    ssum = eig_hermitian(ma + mb).values
    pairwise = np.sort(np.add.outer(sa, sb).ravel())
    scale = max(1.0, float(np.max(np.abs(ssum))))
    commuting = max_abs(ma @ mb - mb @ ma) <= tol * scale
    if commuting:
        additive = True
    elif ma.shape[0] <= _MAX_PERMUTATION_DIM:
        additive = any(
            np.allclose(np.sort(sa + sb[list(p)]), ssum, rtol=0, atol=1e-8 * scale)
            for p in itertools.permutations(range(len(sb)))
        )
    else:
        additive = None
    return AdditivityReport(sa, sb, ssum, pairwise, bool(commuting),
                            None if additive is None else bool(additive))


# --------------------------------------------------------------------------
# literal format


def _entry(x) -> complex:
    if isinstance(x, (int, float)) and not isinstance(x, bool):
        return complex(x, 0.0)
    if isinstance(x, (list, tuple)) and len(x) == 2 and all(
        isinstance(p, (int, float)) and not isinstance(p, bool) for p in x
    ):
        return complex(x[0], x[1])
    raise ValueError("entry must be a number or an [re, im] pair")


def matrix_to_literal(m) -> list:
    a = np.asarray(m, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in a]


def vector_to_literal(v) -> list:
    a = np.asarray(v, dtype=complex).reshape(-1)
    return [[float(z.real), float(z.imag)] for z in a]


def matrix_from_literal(obj) -> np.ndarray:
    """Parse a matrix literal; raises ``ValueError`` describing the first problem."""
    if not isinstance(obj, (list, tuple)) or not obj:
        raise ValueError("matrix literal must be a non-empty list of rows")
    n = len(obj)
    out = np.empty((n, n), dtype=complex)
    for i, row in enumerate(obj):
        if not isinstance(row, (list, tuple)):
            raise ValueError(f"row {i} is not a list")
        if len(row) != n:
            raise ValueError(f"matrix is not square: row {i} has {len(row)} entries, expected {n}")
        for j, x in enumerate(row):
            try:
                out[i, j] = _entry(x)
            except ValueError as exc:
                raise ValueError(f"entry [{i}][{j}]: {exc}") from None
    if not np.all(np.isfinite(out)):
        raise ValueError("non-finite entry")
    return out


def vector_from_literal(obj) -> np.ndarray:
    if not isinstance(obj, (list, tuple)) or not obj:
        raise ValueError("vector literal must be a non-empty list")
    out = np.empty(len(obj), dtype=complex)
    for i, x in enumerate(obj):
        try:
            out[i] = _entry(x)
        except ValueError as exc:
            raise ValueError(f"entry [{i}]: {exc}") from None
    if not np.all(np.isfinite(out)):
        raise ValueError("non-finite entry")
    return out
