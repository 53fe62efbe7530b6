"""Markovian open-system dynamics and entropy analytics.

The generator is the diagonal GKSL form (hbar = 1)::

    d rho/dt = -i[H, rho] + sum_k (L_k rho L_k^dagger - 1/2 {L_k^dagger L_k, rho})

integrated with fixed-step RK4.  States are re-symmetrised every step;
if an eigenvalue drops below the clipping floor the state is clipped,
renormalised and the event counted.  Entropies are in nats.
"""
from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.signal import find_peaks

from . import config, kernels
from .errors import (
    DecoherenceError,
    DimensionError,
    IntegrationError,
    NotHermitianError,
    StationaryStateError,
)
from .hilbert import (
    DensityOperator,
    HermitianObservable,
    as_matrix,
    matrix_to_literal,
    max_abs,
)

log = logging.getLogger(__name__)

__all__ = [
    "GkslGenerator",
    "Trajectory",
    "HumpReport",
    "StationaryState",
    "OrderStabilityReport",
    "gksl_rhs",
    "evolve",
    "von_neumann_entropy",
    "linear_entropy",
    "hump_profile",
    "stationary_state",
    "decision_distribution",
    "order_stability_report",
    "amplitude_damping",
    "dephasing",
    "local_depolarizing",
    "write_trajectory_csv",
]


class GkslGenerator:
    """Hamiltonian plus jump operators; all share one dimension."""

    __slots__ = ("hamiltonian", "jump_ops")

    def __init__(self, hamiltonian, jump_ops: Sequence = ()):
        h = as_matrix(hamiltonian, "hamiltonian")
        if max_abs(h - h.conj().T) > config.get().hermiticity:
            raise NotHermitianError("hamiltonian is not Hermitian")
        ls = [as_matrix(l, "jump operator") for l in jump_ops]
        if any(l.shape != h.shape for l in ls):
            raise DimensionError("jump operators and hamiltonian differ in dimension")
        d = h.shape[0]
        stack = np.stack(ls) if ls else np.zeros((0, d, d), dtype=complex)
        h.setflags(write=False)
        stack.setflags(write=False)
        object.__setattr__(self, "hamiltonian", h)
        object.__setattr__(self, "jump_ops", stack)

    def __setattr__(self, key, value):
        raise AttributeError("GkslGenerator is immutable")

    @property
    def dim(self) -> int:
        return self.hamiltonian.shape[0]

    def superoperator(self) -> np.ndarray:
        """Generator as a ``d^2 x d^2`` matrix on row-major ``vec(rho)``."""
        d = self.dim
        eye = np.eye(d)
        h = self.hamiltonian
        out = -1j * (np.kron(h, eye) - np.kron(eye, h.T))
        for l in self.jump_ops:
            ldl = l.conj().T @ l
            out += np.kron(l, l.conj()) - 0.5 * np.kron(ldl, eye) - 0.5 * np.kron(eye, ldl.T)
        return out


def amplitude_damping(gamma: float, hamiltonian=None) -> GkslGenerator:
    """Qubit decay ``|1> -> |0>`` at rate ``gamma`` (``|1>`` is excited)."""
    lower = np.array([[0, 1], [0, 0]], dtype=complex)
    h = np.zeros((2, 2)) if hamiltonian is None else hamiltonian
    return GkslGenerator(h, [np.sqrt(gamma) * lower])


def dephasing(gamma: float, dim: int = 2) -> GkslGenerator:
    """Pure dephasing in the computational basis, coherences decay as ``exp(-2 gamma t)``."""
    z = np.diag(np.where(np.arange(dim) == 0, 1.0, -1.0)) if dim == 2 else np.diag(np.arange(dim))
    return GkslGenerator(np.zeros((dim, dim)), [np.sqrt(gamma) * z])


def local_depolarizing(gamma: float, dims=(2, 2), hamiltonian=None) -> GkslGenerator:
    """Independent Pauli-X/Y/Z noise of rate ``gamma`` on each qubit factor."""
    if tuple(dims) != (2, 2):
        raise DimensionError("local_depolarizing is defined for two qubits")
    paulis = [np.array([[0, 1], [1, 0]]), np.array([[0, -1j], [1j, 0]]), np.diag([1, -1])]
    eye = np.eye(2)
    jumps = [np.sqrt(gamma) * np.kron(p, eye) for p in paulis]
    jumps += [np.sqrt(gamma) * np.kron(eye, p) for p in paulis]
    h = np.zeros((4, 4)) if hamiltonian is None else hamiltonian
    return GkslGenerator(h, jumps)


def _rho(rho) -> np.ndarray:
    return rho.matrix if isinstance(rho, DensityOperator) else DensityOperator(rho).matrix


def gksl_rhs(gen: GkslGenerator, rho) -> np.ndarray:
    """Right-hand side of the GKSL equation at ``rho``."""
    r = _rho(rho)
    if r.shape[0] != gen.dim:
        raise DimensionError(f"state dimension {r.shape[0]} != generator dimension {gen.dim}")
    h = gen.hamiltonian
    out = -1j * (h @ r - r @ h)
    for l in gen.jump_ops:
        ldl = l.conj().T @ l
        out = out + l @ r @ l.conj().T - 0.5 * (ldl @ r + r @ ldl)
    return out


def von_neumann_entropy(rho) -> float:
    """``-Tr rho ln rho`` in nats, with ``0 ln 0 = 0``."""
    w = np.linalg.eigvalsh(_rho(rho))
    return float(_vn_from_eigs(w[None, :])[0])


def linear_entropy(rho) -> float:
    """``1 - Tr rho^2``."""
    r = _rho(rho)
    return float(1.0 - np.real(np.einsum("ij,ji->", r, r)))


def _vn_from_eigs(w: np.ndarray) -> np.ndarray:
    w = np.clip(w, 0.0, None)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(w > 0, -w * np.log(w), 0.0)
    return np.maximum(terms.sum(axis=-1), 0.0)


def _batched_entropies(states: np.ndarray):
    w = np.linalg.eigvalsh(states)
    vn = _vn_from_eigs(w)
    lin = 1.0 - np.real(np.einsum("tij,tji->t", states, states))
    return vn, lin, w[:, 0]


@dataclass
class Trajectory:
    """States on a uniform time grid with their entropies.

    ``states`` is an array of shape ``(n, d, d)``; :meth:`state` wraps one
    entry as a validated :class:`DensityOperator`.
    """

    times: np.ndarray
    states: np.ndarray
    von_neumann: np.ndarray
    linear: np.ndarray
    min_eigenvalues: np.ndarray
    clip_events: int = 0
    backend: str = ""

    def __len__(self):
        return len(self.times)

    def state(self, i: int) -> DensityOperator:
        with config.override(psd_floor=config.get().clip_floor, trace=1e-9):
            return DensityOperator(self.states[i])

    @property
    def trace_drift(self) -> float:
        return float(np.max(np.abs(np.trace(self.states, axis1=1, axis2=2) - 1.0)))


_UNSTABLE = -1e-6


def _clip(state: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(state)
    w = np.clip(w, 0.0, None)
    out = (v * w) @ v.conj().T
    return out / np.real(np.trace(out))


def evolve(gen: GkslGenerator, rho0, t_end: float, dt: float, backend: str | None = None,
           chunk: int = 4096) -> Trajectory:
    """Integrate from ``rho0`` to ``t_end`` with fixed step ``dt``.

    The number of steps is ``round(t_end / dt)``.  Raises
    :class:`IntegrationError` if the trace drifts by more than ``1e-6``,
    an eigenvalue falls below ``-1e-6`` or the state stops being finite,
    which means ``dt`` is too large.
    """
    if not t_end > 0 or not dt > 0:
        raise ValueError("t_end and dt must be positive")
    r0 = _rho(rho0)
    if r0.shape[0] != gen.dim:
        raise DimensionError(f"state dimension {r0.shape[0]} != generator dimension {gen.dim}")
    n = int(round(t_end / dt))
    if n < 1:
        raise ValueError("t_end shorter than one step")
    step = kernels.get_rk4(backend)
    floor = config.get().clip_floor

    states = np.empty((n + 1, gen.dim, gen.dim), dtype=complex)
    states[0] = r0
    done, clips = 0, 0
    while done < n:
        m = min(chunk, n - done)
        block = step(gen.hamiltonian, gen.jump_ops, states[done], dt, m)
        if not np.all(np.isfinite(block)):
            raise IntegrationError(f"non-finite state near t={(done + m) * dt:g}; use a smaller dt")
        lam_min = np.linalg.eigvalsh(block[1:])[:, 0]
        bad = np.flatnonzero(lam_min < floor)
        k = int(bad[0]) + 1 if bad.size else m
        # drift is judged before clipping, which would hide it by renormalising
        drift = float(np.max(np.abs(np.trace(block[1:k + 1], axis1=1, axis2=2) - 1.0)))
        if drift > 1e-6:
            raise IntegrationError(f"trace drift {drift:.3g} near t={(done + k) * dt:g}; use a smaller dt")
        # RK4 keeps the trace exactly, so an unstable step shows up as lost positivity
        if bad.size and lam_min[k - 1] < _UNSTABLE:
            raise IntegrationError(
                f"eigenvalue {lam_min[k - 1]:.3g} near t={(done + k) * dt:g}; use a smaller dt")
        states[done + 1:done + k + 1] = block[1:k + 1]
        if bad.size:
            states[done + k] = _clip(block[k])
            clips += 1
        done += k
    if clips:
        log.warning("eigenvalue clipping applied %d time(s)", clips)
    times = dt * np.arange(n + 1)
    vn, lin, lam = _batched_entropies(states)
    return Trajectory(times, states, vn, lin, lam, clips,
                      backend or kernels.BACKEND)


@dataclass
class HumpReport:
    hump_count: int
    peak_times: list
    peak_heights: list
    rise_start_times: list
    fall_end_times: list
    camel: bool

    def as_dict(self) -> dict:
        return {
            "hump_count": self.hump_count,
            "peak_times": self.peak_times,
            "peak_heights": self.peak_heights,
            "rise_start_times": self.rise_start_times,
            "fall_end_times": self.fall_end_times,
            "camel": self.camel,
        }


def _smooth(x: np.ndarray, window: int) -> np.ndarray:
    if window <= 1:
        return x.copy()
    half = window // 2
    c = np.concatenate([[0.0], np.cumsum(x)])
    idx = np.arange(len(x))
    lo = np.maximum(idx - half, 0)
    hi = np.minimum(idx + half + 1, len(x))
    return (c[hi] - c[lo]) / (hi - lo)


def hump_profile(traj: Trajectory, window: int = 5, noise_floor: float = 1e-6) -> HumpReport:
    """Interior maxima of the von Neumann entropy ("humps").

    The entropy is smoothed by a centred moving average of ``window``
    samples.  A maximum counts when the entropy rises by more than
    ``noise_floor`` before it and falls by more than ``noise_floor`` after
    it (its topographic prominence exceeds the floor).  Peak heights are
    reported from the unsmoothed series.
    """
    if len(traj.times) < 3:
        raise ValueError("hump_profile needs at least 3 time points")
    s = _smooth(np.asarray(traj.von_neumann, dtype=float), window)
    peaks, props = find_peaks(s, prominence=noise_floor)
    t = traj.times
    return HumpReport(
        hump_count=len(peaks),
        peak_times=[float(t[i]) for i in peaks],
        peak_heights=[float(traj.von_neumann[i]) for i in peaks],
        rise_start_times=[float(t[i]) for i in props["left_bases"]],
        fall_end_times=[float(t[i]) for i in props["right_bases"]],
        camel=len(peaks) >= 1,
    )


@dataclass
class StationaryState:
    state: DensityOperator
    unique: bool
    null_dim: int
    residual: float


def stationary_state(gen: GkslGenerator, tol: float = 1e-9) -> StationaryState:
    """Stationary density of the generator.

    Computes the kernel of the vectorised generator.  If it is
    one-dimensional the kernel vector is normalised to unit trace;
    otherwise the maximally mixed state is projected onto the kernel and the
    result is flagged non-unique.
    """
    d = gen.dim
    sup = gen.superoperator()
    _, sv, vh = np.linalg.svd(sup)
    scale = max(1.0, float(sv[0]))
    null = vh[sv <= 1e-10 * scale].conj().T
    if null.shape[1] == 0:
        raise StationaryStateError("generator has no kernel")
    if null.shape[1] == 1:
        v = null[:, 0]
    else:
        mixed = (np.eye(d) / d).reshape(-1)
        v = null @ (null.conj().T @ mixed)
    r = v.reshape(d, d)
    r = (r + r.conj().T) / 2
    tr = np.real(np.trace(r))
    if abs(tr) < 1e-12:
        raise StationaryStateError("stationary kernel vector is traceless")
    r = r / tr
    lam = np.linalg.eigvalsh(r)[0]
    if lam < -1e-8:
        raise StationaryStateError(f"stationary candidate not positive (eigenvalue {lam:.3g})")
    if lam < 0:
        r = _clip(r)
    residual = max_abs(gksl_rhs(gen, DensityOperator(r, validate=False)))
    if residual > tol:
        raise StationaryStateError(f"stationary residual {residual:.3g} exceeds {tol:g}")
    return StationaryState(DensityOperator(r), null.shape[1] == 1, int(null.shape[1]), residual)


def decision_distribution(rho, basis, threshold: float | None = None) -> dict:
    """Decision probabilities ``{eigenvalue: Tr[P rho]}`` of a decohered state.

    Off-diagonal mass, the largest entry of ``rho - sum_x P_x rho P_x``, must
    not exceed the decoherence threshold.
    """
    r = _rho(rho)
    if not isinstance(basis, HermitianObservable):
        basis = HermitianObservable(basis)
    if basis.dim != r.shape[0]:
        raise DimensionError("observable and state dimensions differ")
    threshold = config.get().decoherence if threshold is None else threshold
    blocks = sum(p.matrix @ r @ p.matrix for _, p in basis.spectral)
    mass = max_abs(r - blocks)
    if mass > threshold:
        raise DecoherenceError(
            f"state not decohered in decision basis (off-diagonal mass {mass:.3g})"
        )
    probs = {lam: float(np.real(np.trace(p.matrix @ r))) for lam, p in basis.spectral}
    total = sum(probs.values())
    return {lam: p / total for lam, p in probs.items() if p > 1e-15}


@dataclass
class OrderStabilityReport:
    times: np.ndarray
    global_entropy: np.ndarray
    entropy_a: np.ndarray
    entropy_b: np.ndarray
    global_increase: float
    max_local_increase: float
    order_stable: bool
    trajectory: Trajectory = field(repr=False, default=None)

    def as_dict(self) -> dict:
        return {
            "global_increase": self.global_increase,
            "max_local_increase": self.max_local_increase,
            "max_global_entropy": float(np.max(self.global_entropy)),
            "order_stable": self.order_stable,
        }


def order_stability_report(gen: GkslGenerator, rho0, dims, t_end: float, dt: float,
                           backend: str | None = None) -> OrderStabilityReport:
    """Global vs subsystem entropy along a compound-system trajectory.

    Order-stable means the global entropy grows by at most ``1e-6`` nat
    while some subsystem entropy grows by at least ``0.1`` nat.
    """
    da, db = (int(x) for x in dims)
    if da * db != gen.dim:
        raise DimensionError(f"dims {tuple(dims)} do not match generator dimension {gen.dim}")
    traj = evolve(gen, rho0, t_end, dt, backend=backend)
    t4 = traj.states.reshape(-1, da, db, da, db)
    ra = np.einsum("tijkj->tik", t4)
    rb = np.einsum("tijil->tjl", t4)
    sa = _vn_from_eigs(np.linalg.eigvalsh(ra))
    sb = _vn_from_eigs(np.linalg.eigvalsh(rb))
    sg = traj.von_neumann
    g_inc = float(np.max(sg) - sg[0])
    l_inc = float(max(np.max(sa) - sa[0], np.max(sb) - sb[0]))
    stable = g_inc <= 1e-6 and l_inc >= 0.1
    return OrderStabilityReport(traj.times, sg, sa, sb, g_inc, l_inc, stable, traj)


def write_trajectory_csv(path, traj: Trajectory, subsystem: tuple | None = None,
                         dump_states: bool = False, footer: Sequence[str] = ()):
    """CSV with ``time,S_vonNeumann,S_linear`` (plus ``S_A,S_B`` when given).

    ``footer`` lines are appended as ``#`` comments.  With ``dump_states``
    each row carries the state as a JSON matrix literal.  ``path`` may be
    an open text stream.
    """
    if hasattr(path, "write"):
        _write_csv(path, traj, subsystem, dump_states, footer)
    else:
        with open(path, "w", newline="") as fh:
            _write_csv(fh, traj, subsystem, dump_states, footer)


def _write_csv(fh, traj, subsystem, dump_states, footer):
    import json

    w = csv.writer(fh)
    header = ["time", "S_vonNeumann", "S_linear"]
    if subsystem is not None:
        header += ["S_A", "S_B"]
    if dump_states:
        header.append("state")
    w.writerow(header)
    for i, t in enumerate(traj.times):
        row = [repr(float(t)), repr(float(traj.von_neumann[i])), repr(float(traj.linear[i]))]
        if subsystem is not None:
            row += [repr(float(subsystem[0][i])), repr(float(subsystem[1][i]))]
        if dump_states:
            row.append(json.dumps(matrix_to_literal(traj.states[i])))
        w.writerow(row)
    for line in footer:
        fh.write(f"# {line}\n")
