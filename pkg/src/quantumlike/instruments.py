"""Quantum instruments in Kraus form.

An instrument assigns to every outcome ``x`` a completely positive map
``rho -> sum_k K[x,k] rho K[x,k]^dagger``; summed over outcomes the maps must
preserve trace, i.e. ``sum_{x,k} K[x,k]^dagger K[x,k] = I``.  Outcome
probabilities follow the Born rule ``Tr[I(x) rho]`` and the post-measurement
state is ``I(x) rho`` divided by that probability.
"""
from __future__ import annotations

import itertools
from typing import Hashable, Iterable, Mapping, Sequence

import numpy as np

from . import config
from .errors import (
    CompletenessError,
    DimensionError,
    NotHermitianError,
    NotUnitaryError,
    NullEventError,
    UnknownOutcomeError,
)
from .hilbert import (
    DensityOperator,
    HermitianObservable,
    Projector,
    as_matrix,
    matrix_from_literal,
    matrix_to_literal,
    max_abs,
)

__all__ = [
    "Effect",
    "Superoperator",
    "QuantumInstrument",
    "projection_instrument",
    "yes_no_instrument",
    "instrument_from_kraus",
    "outcome_probability",
    "outcome_probabilities",
    "state_update",
    "povm_of",
    "indirect_instrument",
    "dilation",
    "sequential_distribution",
    "instrument_to_json",
    "instrument_from_json",
]


def _rho(rho) -> np.ndarray:
    if isinstance(rho, DensityOperator):
        return rho.matrix
    return DensityOperator(rho).matrix


class Effect:
    """POVM element: Hermitian with spectrum in ``[0, 1]``."""

    __slots__ = ("matrix",)

    def __init__(self, matrix):
        a = as_matrix(matrix, "effect")
        if max_abs(a - a.conj().T) > config.get().hermiticity:
            raise NotHermitianError("effect is not Hermitian")
        a = (a + a.conj().T) / 2
        w = np.linalg.eigvalsh(a)
        if w[0] < -1e-10 or w[-1] > 1 + 1e-10:
            raise ValueError(f"effect spectrum [{w[0]:.3g}, {w[-1]:.3g}] outside [0, 1]")
        a.setflags(write=False)
        object.__setattr__(self, "matrix", a)

    def __setattr__(self, key, value):
        raise AttributeError("Effect is immutable")

    def expectation(self, rho) -> float:
        return float(np.real(np.trace(self.matrix @ _rho(rho))))

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.matrix, dtype=dtype)


class Superoperator:
    """Completely positive map given by Kraus operators."""

    __slots__ = ("kraus_ops",)

    def __init__(self, kraus_ops: Iterable):
        ops = [as_matrix(k, "Kraus operator") for k in kraus_ops]
        if not ops:
            raise ValueError("a superoperator needs at least one Kraus operator")
        if len({k.shape for k in ops}) != 1:
            raise DimensionError("Kraus operators have different shapes")
        stack = np.stack(ops)
        stack.setflags(write=False)
        object.__setattr__(self, "kraus_ops", stack)

    def __setattr__(self, key, value):
        raise AttributeError("Superoperator is immutable")

    @property
    def dim(self) -> int:
        return self.kraus_ops.shape[1]

    def __call__(self, rho: np.ndarray) -> np.ndarray:
        k = self.kraus_ops
        return np.einsum("kij,jl,kml->im", k, rho, k.conj())

    def effect(self) -> np.ndarray:
        k = self.kraus_ops
        return np.einsum("kji,kjl->il", k.conj(), k)

    def matrix(self) -> np.ndarray:
        """``dim^2 x dim^2`` matrix acting on row-major ``vec(rho)``."""
        return sum(np.kron(k, k.conj()) for k in self.kraus_ops)


class QuantumInstrument:
    """Finite-outcome instrument; ``maps[x]`` is the :class:`Superoperator` for ``x``.

    Construction checks completeness and raises :class:`CompletenessError`
    with the deviation ``max|sum K^dagger K - I|`` when it fails.
    """

    __slots__ = ("outcomes", "maps")

    def __init__(self, maps: Mapping[Hashable, Superoperator], check: bool = True):
        if not maps:
            raise ValueError("an instrument needs at least one outcome")
        maps = {x: m if isinstance(m, Superoperator) else Superoperator(m) for x, m in maps.items()}
        if len({m.dim for m in maps.values()}) != 1:
            raise DimensionError("instrument maps act on different dimensions")
        object.__setattr__(self, "outcomes", tuple(maps))
        object.__setattr__(self, "maps", dict(maps))
        if check:
            dev = self.completeness_deviation()
            if dev > config.get().completeness:
                raise CompletenessError(
                    f"instrument is not complete: max|sum K^dagger K - I| = {dev:.3g}", dev
                )

    def __setattr__(self, key, value):
        raise AttributeError("QuantumInstrument is immutable")

    @property
    def dim(self) -> int:
        return next(iter(self.maps.values())).dim

    def completeness_deviation(self) -> float:
        total = sum(m.effect() for m in self.maps.values())
        return max_abs(total - np.eye(self.dim))

    def kraus(self, x) -> np.ndarray:
        return self._map(x).kraus_ops

    def _map(self, x) -> Superoperator:
        try:
            return self.maps[x]
        except KeyError:
            raise UnknownOutcomeError(
                f"unknown outcome {x!r}; instrument outcomes are {list(self.outcomes)}"
            ) from None

    def apply(self, x, rho: np.ndarray) -> np.ndarray:
        """Unnormalised ``I(x) rho``."""
        return self._map(x)(np.asarray(rho, dtype=complex))

    def channel(self, rho) -> np.ndarray:
        """Unconditional state ``sum_x I(x) rho``."""
        r = _rho(rho)
        return sum(m(r) for m in self.maps.values())

    def __repr__(self):
        return f"QuantumInstrument(dim={self.dim}, outcomes={list(self.outcomes)})"


def projection_instrument(observable) -> QuantumInstrument:
    """Lüders instrument ``rho -> P_x rho P_x`` over the distinct eigenvalues.

    Outcome labels are the eigenvalues (ascending); degenerate eigenvalues
    are grouped into one outcome with a higher-rank projector.
    """
    if not isinstance(observable, HermitianObservable):
        observable = HermitianObservable(observable)
    maps = {}
    for lam, proj in observable.spectral:
        label = float(np.round(lam, 12)) + 0.0
        maps[label] = Superoperator([proj.matrix])
    return QuantumInstrument(maps)


def yes_no_instrument(p, yes="yes", no="no") -> QuantumInstrument:
    """Two-outcome projection instrument with ``P`` for yes and ``I - P`` for no."""
    p = p if isinstance(p, Projector) else Projector(p)
    q = np.eye(p.dim) - p.matrix
    return QuantumInstrument({yes: Superoperator([p.matrix]), no: Superoperator([q])})


def instrument_from_kraus(table: Mapping[Hashable, Sequence]) -> QuantumInstrument:
    """Build and validate an instrument from ``{outcome: [K1, K2, ...]}``."""
    return QuantumInstrument({x: Superoperator(ops) for x, ops in table.items()})


def outcome_probability(instrument: QuantumInstrument, x, rho) -> float:
    """Born rule ``Tr[I(x) rho]``, clamped to ``[0, 1]``."""
    p = float(np.real(np.trace(instrument.apply(x, _rho(rho)))))
    return min(1.0, max(0.0, p))


def outcome_probabilities(instrument: QuantumInstrument, rho) -> dict:
    r = _rho(rho)
    return {x: outcome_probability(instrument, x, r) for x in instrument.outcomes}


def state_update(instrument: QuantumInstrument, x, rho, threshold: float | None = None
                 ) -> DensityOperator:
    """Post-measurement state ``I(x) rho / Tr[I(x) rho]``."""
    threshold = config.get().null_event if threshold is None else threshold
    out = instrument.apply(x, _rho(rho))
    p = float(np.real(np.trace(out)))
    if p <= threshold:
        raise NullEventError(f"conditioning on null event: P({x!r}) = {p:.3g}")
    out = out / p
    return DensityOperator((out + out.conj().T) / 2, validate=False)


def povm_of(instrument: QuantumInstrument) -> dict:
    """Effects ``E(x) = sum_k K^dagger K`` keyed by outcome."""
    return {x: Effect(m.effect()) for x, m in instrument.maps.items()}


def _check_unitary(u: np.ndarray, tol: float):
    dev = max_abs(u.conj().T @ u - np.eye(u.shape[0]))
    if dev > tol:
        raise NotUnitaryError(f"interaction is not unitary: max|U^dagger U - I| = {dev:.3g}")


def indirect_instrument(probe, unitary, meter: Sequence, labels: Sequence | None = None
                        ) -> QuantumInstrument:
    """Instrument realised by coupling the system to a probe and reading a meter.

    ``I(x) rho = Tr_probe[(I (x) M_x) U (rho (x) sigma) U^dagger (I (x) M_x)]``
    with the system as the first tensor factor.  Kraus operators are
    ``sqrt(s_k) <f_xj| U |e_k>`` where ``sigma = sum_k s_k |e_k><e_k|`` and
    ``{f_xj}`` is an orthonormal basis of ``range(M_x)``.

    Parameters
    ----------
    probe : DensityOperator or array_like
        Initial probe state ``sigma``.
    unitary : array_like
        Interaction on system (x) probe.
    meter : sequence of projectors
        Orthogonal projectors on the probe summing to the identity.
    labels : sequence, optional
        Outcome labels; defaults to ``0, 1, ...``.
    """
    tol = config.get()
    sigma = _rho(probe)
    dp = sigma.shape[0]
    u = as_matrix(unitary, "interaction unitary")
    if u.shape[0] % dp:
        raise DimensionError(f"unitary dimension {u.shape[0]} not divisible by probe dimension {dp}")
    ds = u.shape[0] // dp
    _check_unitary(u, tol.unitarity)

    ms = [m.matrix if isinstance(m, Projector) else Projector(m).matrix for m in meter]
    if any(m.shape[0] != dp for m in ms):
        raise DimensionError("meter projectors must act on the probe")
    dev = max_abs(sum(ms) - np.eye(dp))
    if dev > tol.completeness:
        raise CompletenessError(f"meter projectors do not sum to identity (deviation {dev:.3g})", dev)
    for i, j in itertools.combinations(range(len(ms)), 2):
        if max_abs(ms[i] @ ms[j]) > tol.completeness:
            raise CompletenessError(f"meter projectors {i} and {j} are not orthogonal")
    labels = list(range(len(ms))) if labels is None else list(labels)
    if len(labels) != len(ms):
        raise ValueError("one label per meter projector required")

    s, e = np.linalg.eigh((sigma + sigma.conj().T) / 2)
    # U as a block array: u4[i, a, j, b] = <i a| U |j b>
    u4 = u.reshape(ds, dp, ds, dp)
    maps = {}
    for label, m in zip(labels, ms):
        w, f = np.linalg.eigh(m)
        basis = f[:, w > 0.5]
        ops = []
        for k in range(dp):
            if s[k] <= 1e-15:
                continue
            for j in range(basis.shape[1]):
                kop = np.einsum("a,iajb,b->ij", basis[:, j].conj(), u4, e[:, k])
                ops.append(np.sqrt(s[k]) * kop)
        if not ops:
            ops.append(np.zeros((ds, ds), dtype=complex))
        maps[label] = Superoperator(ops)
    return QuantumInstrument(maps)


def dilation(instrument: QuantumInstrument):
    """Indirect-measurement realisation of an instrument.

    Returns ``(unitary, probe, meter, labels)`` such that
    ``indirect_instrument(probe, unitary, meter, labels)`` reproduces
    ``instrument``.  The probe has one basis state per Kraus operator and
    starts in ``|0>``; the isometry ``|psi>|0> -> sum_j K_j|psi>|j>`` is
    completed to a unitary by Gram-Schmidt.
    """
    labels = list(instrument.outcomes)
    kraus = [(x, k) for x in labels for k in instrument.kraus(x)]
    ds, dp = instrument.dim, len(kraus)
    # column (i, 0) of U holds sum_j K_j e_i (x) e_j
    iso = np.zeros((ds * dp, ds), dtype=complex)
    for j, (_, k) in enumerate(kraus):
        for i in range(ds):
            iso[j::dp, i] = k[:, i]
    rng = np.random.default_rng(0)
    fill = rng.normal(size=(ds * dp, ds * dp - ds)) + 1j * rng.normal(size=(ds * dp, ds * dp - ds))
    fill -= iso @ (iso.conj().T @ fill)
    q, _ = np.linalg.qr(fill)
    u = np.zeros((ds * dp, ds * dp), dtype=complex)
    first = [i * dp for i in range(ds)]
    rest = [c for c in range(ds * dp) if c not in set(first)]
    u[:, first] = iso
    u[:, rest] = q
    probe = np.zeros((dp, dp), dtype=complex)
    probe[0, 0] = 1.0
    meter = []
    for x in labels:
        m = np.zeros((dp, dp), dtype=complex)
        for j, (lab, _) in enumerate(kraus):
            if lab == x:
                m[j, j] = 1.0
        meter.append(m)
    return u, DensityOperator(probe), meter, labels


def sequential_distribution(instruments: Sequence[QuantumInstrument], rho) -> dict:
    """Joint distribution of applying ``instruments`` in order.

    ``p(x1, ..., xn) = Tr[I_n(x_n) ... I_1(x_1) rho]`` keyed by outcome tuples
    in lexicographic outcome order.
    """
    r = _rho(rho)
    if any(inst.dim != r.shape[0] for inst in instruments):
        raise DimensionError("instrument and state dimensions differ")
    out = {}

    def branch(depth, prefix, state):
        if depth == len(instruments):
            out[prefix] = max(0.0, float(np.real(np.trace(state))))
            return
        inst = instruments[depth]
        for x in inst.outcomes:
            branch(depth + 1, prefix + (x,), inst.apply(x, state))

    branch(0, (), r)
    return out


def instrument_to_json(instrument: QuantumInstrument) -> dict:
    """``{"outcomes": [...], "kraus": {label: [matrix literal, ...]}}``."""
    return {
        "outcomes": list(instrument.outcomes),
        "kraus": {str(x): [matrix_to_literal(k) for k in instrument.kraus(x)]
                  for x in instrument.outcomes},
    }


def instrument_from_json(obj: Mapping) -> QuantumInstrument:
    outcomes = list(obj["outcomes"])
    kraus = obj["kraus"]
    table = {}
    for x in outcomes:
        key = str(x)
        if key not in kraus:
            raise ValueError(f"no Kraus operators for outcome {x!r}")
        table[x] = [matrix_from_literal(k) for k in kraus[key]]
    return instrument_from_kraus(table)
