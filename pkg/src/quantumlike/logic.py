"""Quantum logic on orthogonal projectors.

Negation is the orthogonal complement, conjunction the projector onto the
intersection of ranges and disjunction the projector onto their span.  Both
binary operations are commutative even when the projectors are not.

Intersections are read off the spectrum of ``P + Q``: a vector lies in both
ranges exactly when it is an eigenvector of ``P + Q`` with eigenvalue 2, and
the span of both ranges is the support of ``P + Q``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from . import config
from .errors import DimensionError
from .hilbert import Projector, StateVector, eig_hermitian, max_abs

__all__ = [
    "Projector",
    "Violation",
    "complement",
    "meet",
    "join",
    "commute",
    "distributivity_violations",
    "state_distributivity",
    "state_distributivity_failures",
]


def _proj(p) -> Projector:
    return p if isinstance(p, Projector) else Projector(p)


def _same_dim(*ps):
    dims = {p.dim for p in ps}
    if len(dims) != 1:
        raise DimensionError(f"projectors have different dimensions {sorted(dims)}")


def complement(p) -> Projector:
    p = _proj(p)
    return Projector(np.eye(p.dim) - p.matrix, validate=False)


def _eigenspace_projector(m: np.ndarray, select) -> Projector:
    w, v = eig_hermitian(m)
    basis = v[:, select(w)]
    return Projector.from_basis(basis)


def meet(p, q) -> Projector:
    """Projector onto ``range(p) & range(q)``."""
    p, q = _proj(p), _proj(q)
    _same_dim(p, q)
    window = config.get().lattice
    return _eigenspace_projector(p.matrix + q.matrix, lambda w: np.abs(w - 2.0) <= window)


def join(p, q) -> Projector:
    """Projector onto the span of ``range(p)`` and ``range(q)``."""
    p, q = _proj(p), _proj(q)
    _same_dim(p, q)
    floor = config.get().lattice
    return _eigenspace_projector(p.matrix + q.matrix, lambda w: w > floor)


def commute(p, q, tol: float | None = None) -> bool:
    p, q = _proj(p), _proj(q)
    _same_dim(p, q)
    tol = config.get().commute if tol is None else tol
    pm, qm = p.matrix, q.matrix
    return max_abs(pm @ qm - qm @ pm) <= tol


@dataclass(frozen=True, order=True)
class Violation:
    """One ordered triple where ``X & (Y | Z) != (X & Y) | (X & Z)``."""

    X: str
    Y: str
    Z: str
    deviation: float

    def as_dict(self) -> dict:
        return {"X": self.X, "Y": self.Y, "Z": self.Z, "deviation": self.deviation}


def _lattice_elements(named):
    out = {}
    for name, p in named:
        out[name] = p
    for name, p in named:
        out[name + "c"] = complement(p)
    return out


def _distributivity_table(elements: dict):
    """Yield ``(x, y, z, lhs, rhs)`` for every ordered triple of names."""
    names = list(elements)
    joins = {}
    meets = {}
    for y, z in itertools.product(names, repeat=2):
        if (z, y) in joins:
            joins[y, z] = joins[z, y]
        else:
            joins[y, z] = join(elements[y], elements[z])
    for x, y in itertools.product(names, repeat=2):
        if (y, x) in meets:
            meets[x, y] = meets[y, x]
        else:
            meets[x, y] = meet(elements[x], elements[y])
    for x, y, z in itertools.product(names, repeat=3):
        lhs = meet(elements[x], joins[y, z])
        rhs = join(meets[x, y], meets[x, z])
        yield x, y, z, lhs.matrix, rhs.matrix


def distributivity_violations(p, q, r, threshold: float | None = None) -> list:
    """All ordered triples from ``{P, Q, R, Pc, Qc, Rc}`` violating distributivity.

    ``Pc`` names the complement of ``P``.  The list is sorted and is empty
    exactly when ``p``, ``q`` and ``r`` pairwise commute.
    """
    p, q, r = _proj(p), _proj(q), _proj(r)
    _same_dim(p, q, r)
    threshold = config.get().lattice if threshold is None else threshold
    elements = _lattice_elements([("P", p), ("Q", q), ("R", r)])
    found = []
    for x, y, z, lhs, rhs in _distributivity_table(elements):
        dev = max_abs(lhs - rhs)
        if dev > threshold:
            found.append(Violation(x, y, z, dev))
    return sorted(found)


def state_distributivity_failures(p, q, psi, threshold: float | None = None) -> list:
    """Triples from ``{P, Q, Pc, Qc}`` where distributivity fails on ``psi``."""
    p, q = _proj(p), _proj(q)
    _same_dim(p, q)
    v = psi.amplitudes if isinstance(psi, StateVector) else np.asarray(psi, dtype=complex)
    if v.shape != (p.dim,):
        raise DimensionError(f"state has dimension {v.shape}, projectors {p.dim}")
    threshold = config.get().lattice if threshold is None else threshold
    elements = _lattice_elements([("P", p), ("Q", q)])
    found = []
    for x, y, z, lhs, rhs in _distributivity_table(elements):
        dev = float(np.linalg.norm(lhs @ v - rhs @ v))
        if dev > threshold:
            found.append(Violation(x, y, z, dev))
    return sorted(found)


def state_distributivity(p, q, psi) -> bool:
    """True iff distributivity holds on the vector ``psi`` for all 64 triples."""
    return not state_distributivity_failures(p, q, psi)
