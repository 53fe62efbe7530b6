"""Order, replicability and QQ diagnostics for pairs of instruments.

Given instruments ``A`` and ``B`` and a state ``rho``:

* :func:`qoe_gap` measures the question order effect
  ``max |p_AB(x, y) - p_BA(y, x)|``;
* :func:`rre_report` checks A-A, A-B-A and B-A-B response replicability;
* :func:`qq_residual` returns the signed QQ-equality residual
  ``p_AB(y,n) + p_AB(n,y) - p_BA(y,n) - p_BA(n,y)``.

:func:`recording_pair` builds a parameterised family of non-projective
instruments that exhibit the order effect together with response
replicability and the QQ-equality; :func:`search_profile` is the harness that
scans its parameters.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from . import config
from .hilbert import DensityOperator, density_from_pure, make_pure_state
from .instruments import QuantumInstrument, Superoperator, sequential_distribution

__all__ = [
    "RREVerdict",
    "EffectProfile",
    "qoe_gap",
    "rre_report",
    "qq_residual",
    "verify_effect_profile",
    "euler_unitary",
    "recording_pair",
    "recording_state",
    "search_profile",
    "load_profile_fixture",
]

YES, NO = "yes", "no"


def _check_shared_dim(ia: QuantumInstrument, ib: QuantumInstrument, rho):
    from .errors import DimensionError

    d = rho.dim if isinstance(rho, DensityOperator) else np.shape(rho)[0]
    if ia.dim != d or ib.dim != d:
        raise DimensionError(f"instrument dimensions ({ia.dim}, {ib.dim}) differ from state {d}")


def qoe_gap(ia: QuantumInstrument, ib: QuantumInstrument, rho) -> float:
    """Largest difference between the two orderings' joint distributions."""
    _check_shared_dim(ia, ib, rho)
    p_ab = sequential_distribution([ia, ib], rho)
    p_ba = sequential_distribution([ib, ia], rho)
    return max(abs(p_ab[x, y] - p_ba[y, x]) for x in ia.outcomes for y in ib.outcomes)


@dataclass(frozen=True)
class RREVerdict:
    aa: bool
    aba: bool
    bab: bool
    # worst conditional repeat probability seen in each check
    aa_min: float = 1.0
    aba_min: float = 1.0
    bab_min: float = 1.0

    @property
    def rre_holds(self) -> bool:
        return self.aa and self.aba and self.bab

    def as_dict(self) -> dict:
        return {"aa": self.aa, "aba": self.aba, "bab": self.bab}


def _repeat_min(first, middle, rho, event):
    """Smallest P(third = first | first, middle) over non-null histories.

    With ``middle=None`` this is the plain repeat ``first -> first``.
    """
    seq = [first] if middle is None else [first, middle]
    joint = sequential_distribution(seq + [first], rho)
    prefix = {}
    for key, p in joint.items():
        prefix[key[:-1]] = prefix.get(key[:-1], 0.0) + p
    worst = 1.0
    for hist, p_hist in prefix.items():
        if p_hist <= event:
            continue
        worst = min(worst, joint[hist + (hist[0],)] / p_hist)
    return worst


def rre_report(ia: QuantumInstrument, ib: QuantumInstrument, rho) -> RREVerdict:
    """Response replicability of the pair in state ``rho``.

    A check passes when every history with probability above the event
    threshold repeats the first answer with conditional probability at least
    ``1 - 1e-9``.
    """
    _check_shared_dim(ia, ib, rho)
    event = config.get().event
    aa = _repeat_min(ia, None, rho, event)
    aba = _repeat_min(ia, ib, rho, event)
    bab = _repeat_min(ib, ia, rho, event)
    ok = 1.0 - 1e-9
    return RREVerdict(aa >= ok, aba >= ok, bab >= ok, aa, aba, bab)


def qq_residual(ia: QuantumInstrument, ib: QuantumInstrument, rho) -> float:
    """Signed QQ-equality residual; both instruments need outcomes yes/no."""
    for inst in (ia, ib):
        if set(inst.outcomes) != {YES, NO}:
            raise ValueError(f"qq_residual needs outcomes {{'yes', 'no'}}, got {list(inst.outcomes)}")
    _check_shared_dim(ia, ib, rho)
    p_ab = sequential_distribution([ia, ib], rho)
    p_ba = sequential_distribution([ib, ia], rho)
    return p_ab[YES, NO] + p_ab[NO, YES] - p_ba[YES, NO] - p_ba[NO, YES]


@dataclass(frozen=True)
class EffectProfile:
    qoe_present: bool
    rre_holds: bool
    qq_residual: float
    qoe_gap: float
    rre: RREVerdict
    details: dict = field(default_factory=dict)
    passed: bool = True

    def as_dict(self) -> dict:
        return {
            "qoe_gap": self.qoe_gap,
            "rre": self.rre.as_dict(),
            "qq_residual": self.qq_residual,
            "pass": self.passed,
        }


def verify_effect_profile(ia, ib, rho, expectations: dict | None = None) -> EffectProfile:
    """Compute all three diagnostics and compare with ``expectations``.

    ``expectations`` may contain ``qoe`` (bool), ``rre`` (bool), ``qqe``
    (bool), ``qoe_threshold`` (default 1e-3) and ``qq_tolerance`` (default
    the configured certification tolerance).  Keys left out are not checked.
    """
    expectations = dict(expectations or {})
    qoe_threshold = expectations.get("qoe_threshold", 1e-3)
    qq_tol = expectations.get("qq_tolerance", config.get().qq_certify)

    gap = qoe_gap(ia, ib, rho)
    rre = rre_report(ia, ib, rho)
    two_outcome = {YES, NO} == set(ia.outcomes) == set(ib.outcomes)
    q = qq_residual(ia, ib, rho) if two_outcome else float("nan")
    details = {
        "p_ab": {"|".join(map(str, k)): v for k, v in sequential_distribution([ia, ib], rho).items()},
        "p_ba": {"|".join(map(str, k)): v for k, v in sequential_distribution([ib, ia], rho).items()},
        "rre_min": {"aa": rre.aa_min, "aba": rre.aba_min, "bab": rre.bab_min},
    }
    qoe_present = gap > qoe_threshold
    checks = []
    if "qoe" in expectations:
        checks.append(qoe_present == bool(expectations["qoe"]))
    if "rre" in expectations:
        checks.append(rre.rre_holds == bool(expectations["rre"]))
    if "qqe" in expectations:
        checks.append((abs(q) <= qq_tol) == bool(expectations["qqe"]))
    return EffectProfile(qoe_present, rre.rre_holds, q, gap, rre, details, all(checks))


# --------------------------------------------------------------------------
# recording instruments: a belief qubit plus one answer register per question


def euler_unitary(alpha: float, beta: float, gamma: float) -> np.ndarray:
    """``Rz(alpha) Ry(beta) Rz(gamma)`` on a qubit."""
    def rz(t):
        return np.diag([np.exp(-0.5j * t), np.exp(0.5j * t)])

    c, s = np.cos(beta / 2), np.sin(beta / 2)
    ry = np.array([[c, -s], [s, c]], dtype=complex)
    return rz(alpha) @ ry @ rz(gamma)


# register levels: 0 = blank, 1 = answered yes, 2 = answered no
_BLANK, _LEVEL = 0, {YES: 1, NO: 2}


def _recording_instrument(basis: np.ndarray, slot: int) -> QuantumInstrument:
    """Measure the belief qubit in ``basis`` unless the register already holds an answer.

    Space layout: belief (2) (x) register A (3) (x) register B (3); ``slot``
    picks which register this question writes and reads.
    """
    regs = [np.eye(3), np.eye(3)]
    maps = {}
    for k, answer in enumerate((YES, NO)):
        level = _LEVEL[answer]
        v = basis[:, k]
        belief_proj = np.outer(v, v.conj())
        write = np.zeros((3, 3))
        write[level, _BLANK] = 1.0
        read = np.zeros((3, 3))
        read[level, level] = 1.0
        ops = []
        for belief_op, reg_op in ((belief_proj, write), (np.eye(2), read)):
            parts = list(regs)
            parts[slot] = reg_op
            ops.append(np.kron(belief_op, np.kron(parts[0], parts[1])))
        maps[answer] = Superoperator(ops)
    return QuantumInstrument(maps)


def recording_pair(angles_a, angles_b):
    """Instruments for questions A and B on belief qubit (x) two answer registers.

    Each question measures the belief qubit in the basis given by the Euler
    angles, writes the answer into its own register and, when asked again,
    reads the register back instead of re-measuring.  The pair is complete
    and non-projective; asked from blank registers it shows the order effect
    of the two bases while repeating answers with certainty.
    """
    ua = euler_unitary(*angles_a)
    ub = euler_unitary(*angles_b)
    return _recording_instrument(ua, 0), _recording_instrument(ub, 1)


def recording_state(belief) -> DensityOperator:
    """Belief state with both answer registers blank (dimension 18)."""
    psi = make_pure_state(belief).amplitudes
    blank = np.zeros(3)
    blank[_BLANK] = 1.0
    return density_from_pure(np.kron(psi, np.kron(blank, blank)))


def search_profile(n_trials: int = 200, seed: int = 0, min_gap: float = 0.1):
    """Random search over angles and initial belief for a certified profile.

    Returns the parameter record with the largest order-effect gap among
    candidates passing ``verify_effect_profile`` with QOE present, RRE
    holding and the QQ-equality satisfied.
    """
    rng = np.random.default_rng(seed)
    best = None
    expect = {"qoe": True, "rre": True, "qqe": True}
    for _ in range(n_trials):
        angles_a = rng.uniform(0, 2 * np.pi, 3)
        angles_b = rng.uniform(0, 2 * np.pi, 3)
        theta, phi = rng.uniform(0, np.pi), rng.uniform(0, 2 * np.pi)
        belief = [np.cos(theta / 2), np.exp(1j * phi) * np.sin(theta / 2)]
        ia, ib = recording_pair(angles_a, angles_b)
        profile = verify_effect_profile(ia, ib, recording_state(belief), expect)
        if profile.passed and profile.qoe_gap >= min_gap and (
            best is None or profile.qoe_gap > best["qoe_gap"]
        ):
            best = {
                "angles_a": angles_a.tolist(),
                "angles_b": angles_b.tolist(),
                "belief": [[float(np.real(z)), float(np.imag(z))] for z in belief],
                "qoe_gap": profile.qoe_gap,
                "qq_residual": profile.qq_residual,
            }
    return best


def load_profile_fixture():
    """Stored parameters found by :func:`search_profile`; returns ``(A, B, rho, record)``."""
    text = resources.files("quantumlike.fixtures").joinpath("qoe_rre_qqe.json").read_text()
    record = json.loads(text)
    ia, ib = recording_pair(record["angles_a"], record["angles_b"])
    belief = [complex(re, im) for re, im in record["belief"]]
    return ia, ib, recording_state(belief), record
