"""CHSH correlations, three-slit Sorkin residual and emotional conditioning."""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from . import config
from .errors import DimensionError, NullEventError, QuantumLikeError
from .hilbert import (
    DensityOperator,
    Projector,
    StateVector,
    as_matrix,
    max_abs,
    partial_trace,
)
from .instruments import Effect, QuantumInstrument

__all__ = [
    "CLASSICAL_BOUND",
    "TSIRELSON_BOUND",
    "DichotomicObservable",
    "SlitConfiguration",
    "ChshReport",
    "spin_observable",
    "singlet",
    "correlation",
    "chsh",
    "chsh_report",
    "chsh_sampled",
    "slit_probabilities",
    "sorkin_residual",
    "two_slit_interference",
    "contextual_conditioning",
]

CLASSICAL_BOUND = 2.0
TSIRELSON_BOUND = 2.0 * np.sqrt(2.0)


class DichotomicObservable:
    """Hermitian observable with eigenvalues +-1 (``A @ A = I``)."""

    __slots__ = ("matrix",)

    def __init__(self, matrix):
        a = as_matrix(matrix, "dichotomic observable")
        if max_abs(a - a.conj().T) > 1e-9:
            raise QuantumLikeError("dichotomic observable is not Hermitian")
        if max_abs(a @ a - np.eye(a.shape[0])) > 1e-9:
            raise QuantumLikeError("dichotomic observable must square to the identity")
        a.setflags(write=False)
        object.__setattr__(self, "matrix", a)

    def __setattr__(self, key, value):
        raise AttributeError("DichotomicObservable is immutable")

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


def spin_observable(theta: float) -> DichotomicObservable:
    """``cos(theta) Z + sin(theta) X``, a spin measurement in the x-z plane."""
    z = np.diag([1.0, -1.0])
    x = np.array([[0.0, 1.0], [1.0, 0.0]])
    return DichotomicObservable(np.cos(theta) * z + np.sin(theta) * x)


def singlet() -> DensityOperator:
    """``(|01> - |10>)/sqrt 2`` as a density operator."""
    v = np.array([0, 1, -1, 0]) / np.sqrt(2)
    return DensityOperator(np.outer(v, v))


def _obs(a) -> DichotomicObservable:
    return a if isinstance(a, DichotomicObservable) else DichotomicObservable(a)


def _rho(rho) -> np.ndarray:
    return rho.matrix if isinstance(rho, DensityOperator) else DensityOperator(rho).matrix


def correlation(rho, a, b, dims=None) -> float:
    """``E = Tr[(A (x) B) rho]``."""
    r = _rho(rho)
    a, b = _obs(a), _obs(b)
    if dims is None:
        dims = (a.dim, b.dim)
    da, db = dims
    if (da, db) != (a.dim, b.dim) or da * db != r.shape[0]:
        raise DimensionError(
            f"dims {tuple(dims)} inconsistent with observables ({a.dim}, {b.dim}) "
            f"and state dimension {r.shape[0]}"
        )
    e = float(np.real(np.trace(np.kron(a.matrix, b.matrix) @ r)))
    if abs(e) > 1 + 1e-10:
        raise QuantumLikeError(f"correlation {e} outside [-1, 1]")
    return e


@dataclass(frozen=True)
class ChshReport:
    E11: float
    E12: float
    E21: float
    E22: float
    S: float

    def as_dict(self) -> dict:
        return {
            "E11": self.E11,
            "E12": self.E12,
            "E21": self.E21,
            "E22": self.E22,
            "S": self.S,
            "bound_classical": CLASSICAL_BOUND,
            "bound_tsirelson": 2.8284271247,
        }


def _check_tsirelson(s: float):
    if s > TSIRELSON_BOUND + 1e-9:
        raise QuantumLikeError(f"CHSH value {s} exceeds the Tsirelson bound")


def chsh_report(rho, a1, a2, b1, b2, dims=None) -> ChshReport:
    e11 = correlation(rho, a1, b1, dims)
    e12 = correlation(rho, a1, b2, dims)
    e21 = correlation(rho, a2, b1, dims)
    e22 = correlation(rho, a2, b2, dims)
    s = abs(e11 + e12 + e21 - e22)
    _check_tsirelson(s)
    return ChshReport(e11, e12, e21, e22, s)


def chsh(rho, a1, a2, b1, b2, dims=None) -> float:
    """``S = |E(A1,B1) + E(A1,B2) + E(A2,B1) - E(A2,B2)|``."""
    return chsh_report(rho, a1, a2, b1, b2, dims).S


def chsh_sampled(rho, a1, a2, b1, b2, shots: int, rng=None, dims=None) -> ChshReport:
    """CHSH estimate from ``shots`` simulated trials per setting pair.

    Each trial draws a joint outcome ``(+-1, +-1)`` from the Born
    probabilities of the product eigenprojectors.
    """
    rng = np.random.default_rng(rng)
    r = _rho(rho)
    es = []
    for a, b in ((a1, b1), (a1, b2), (a2, b1), (a2, b2)):
        a, b = _obs(a), _obs(b)
        if a.dim * b.dim != r.shape[0]:
            raise DimensionError("observable dimensions do not match the state")
        pa = {s: (np.eye(a.dim) + s * a.matrix) / 2 for s in (1, -1)}
        pb = {s: (np.eye(b.dim) + s * b.matrix) / 2 for s in (1, -1)}
        signs = list(itertools.product((1, -1), repeat=2))
        probs = np.array([max(0.0, np.real(np.trace(np.kron(pa[x], pb[y]) @ r))) for x, y in signs])
        counts = rng.multinomial(shots, probs / probs.sum())
        es.append(float(sum(c * x * y for c, (x, y) in zip(counts, signs)) / shots))
    s = abs(es[0] + es[1] + es[2] - es[3])
    return ChshReport(*es, s)


class SlitConfiguration:
    """Mutually orthogonal slit projectors, a detector effect and a source state."""

    __slots__ = ("slits", "detector", "source")

    def __init__(self, slits, detector, source):
        ps = [s if isinstance(s, Projector) else Projector(s) for s in slits]
        det = detector if isinstance(detector, Effect) else Effect(detector)
        src = source if isinstance(source, StateVector) else StateVector(source)
        dims = {p.dim for p in ps} | {det.matrix.shape[0], src.dim}
        if len(dims) != 1:
            raise DimensionError(f"slits, detector and source disagree on dimension {sorted(dims)}")
        for i, j in itertools.combinations(range(len(ps)), 2):
            if max_abs(ps[i].matrix @ ps[j].matrix) > 1e-10:
                raise QuantumLikeError(f"slits {i + 1} and {j + 1} are not orthogonal")
        object.__setattr__(self, "slits", tuple(ps))
        object.__setattr__(self, "detector", det)
        object.__setattr__(self, "source", src)

    def __setattr__(self, key, value):
        raise AttributeError("SlitConfiguration is immutable")


def slit_probabilities(cfg: SlitConfiguration) -> dict:
    """``p_S = <psi| P_S D P_S |psi>`` for every nonempty subset ``S`` of slits.

    Keys are tuples of 1-based slit indices.
    """
    psi = cfg.source.amplitudes
    d = cfg.detector.matrix
    out = {}
    n = len(cfg.slits)
    for size in range(1, n + 1):
        for subset in itertools.combinations(range(n), size):
            ps = sum(cfg.slits[i].matrix for i in subset)
            v = ps @ psi
            out[tuple(i + 1 for i in subset)] = float(np.real(np.vdot(v, d @ v)))
    return out


def sorkin_residual(cfg: SlitConfiguration) -> float:
    """Third-order interference ``p123 - p12 - p13 - p23 + p1 + p2 + p3``."""
    if len(cfg.slits) != 3:
        raise QuantumLikeError(f"Sorkin residual needs exactly 3 slits, got {len(cfg.slits)}")
    p = slit_probabilities(cfg)
    return (p[1, 2, 3] - p[1, 2] - p[1, 3] - p[2, 3]) + (p[1,] + p[2,] + p[3,])


def two_slit_interference(cfg: SlitConfiguration, i: int = 1, j: int = 2) -> float:
    """Second-order term ``p_ij - p_i - p_j`` (1-based slit indices)."""
    p = slit_probabilities(cfg)
    return p[tuple(sorted((i, j)))] - p[i,] - p[j,]


def contextual_conditioning(rho, emotion_instrument: QuantumInstrument, outcome, dims
                            ) -> DensityOperator:
    """Experience state after observing ``outcome`` on the emotion factor.

    The instrument acts as ``I (x) K`` on experience (x) emotion; the
    updated joint state is normalised and the emotion factor traced out.
    """
    r = _rho(rho)
    de, dm = (int(x) for x in dims)
    if de * dm != r.shape[0]:
        raise DimensionError(f"dims {tuple(dims)} do not match state dimension {r.shape[0]}")
    if emotion_instrument.dim != dm:
        raise DimensionError("instrument does not act on the emotion factor")
    eye = np.eye(de)
    out = np.zeros_like(r)
    for k in emotion_instrument.kraus(outcome):
        big = np.kron(eye, k)
        out += big @ r @ big.conj().T
    p = float(np.real(np.trace(out)))
    if p <= config.get().null_event:
        raise NullEventError(f"conditioning on null event: P({outcome!r}) = {p:.3g}")
    red = partial_trace(out / p, (de, dm), keep="A")
    return DensityOperator((red + red.conj().T) / 2, validate=False)
