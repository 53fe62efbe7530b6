import sys

import numpy as np
import pytest


def random_unitary(rng, d):
    z = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_density(rng, d, rank=None):
    rank = d if rank is None else rank
    g = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_vector(rng, d):
    v = rng.normal(size=d) + 1j * rng.normal(size=d)
    return v / np.linalg.norm(v)


def random_projector(rng, d, rank=None):
    rank = rng.integers(1, d) if rank is None else rank
    u = random_unitary(rng, d)
    return u[:, :rank] @ u[:, :rank].conj().T


def random_commuting_projectors(rng, d, n):
    """``n`` projectors diagonal in one random basis."""
    u = random_unitary(rng, d)
    out = []
    for _ in range(n):
        pattern = rng.integers(0, 2, d)
        out.append(u @ np.diag(pattern) @ u.conj().T)
    return out


PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.diag([1.0, -1.0]).astype(complex)
KET0 = np.array([1, 0], dtype=complex)
KET1 = np.array([0, 1], dtype=complex)
PLUS = np.array([1, 1], dtype=complex) / np.sqrt(2)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_noncommuting_triple(rng, min_commutator=1e-3):
    """Random projector triple in dims 2-4 with ``||[P, Q]|| > min_commutator``."""
    while True:
        d = int(rng.integers(2, 5))
        p, q, r = (random_projector(rng, d) for _ in range(3))
        if np.linalg.norm(p @ q - q @ p, 2) > min_commutator:
            return p, q, r


def bridge_case(rng):
    """Projector pair and pure state for the repeatability/distributivity bridge.

    Mixes generic pairs with pairs that commute on a block holding the state,
    so both verdicts occur often.
    """
    d = int(rng.integers(2, 5))
    mode = int(rng.integers(0, 3)) if d > 2 else int(rng.integers(0, 2))
    if mode == 0:
        return random_projector(rng, d), random_projector(rng, d), random_vector(rng, d)
    u = random_unitary(rng, d)
    if mode == 1:
        p, q = (u @ np.diag(rng.integers(0, 2, d)) @ u.conj().T for _ in range(2))
        return p, q, random_vector(rng, d)
    # commuting on the first d-2 basis vectors, noncommuting 2D block on the rest
    k = d - 2
    dp = np.zeros(d)
    dq = np.zeros(d)
    dp[:k] = rng.integers(0, 2, k)
    dq[:k] = rng.integers(0, 2, k)
    a, b = u[:, k], u[:, k + 1]
    plus = (a + b) / np.sqrt(2)
    p = u @ np.diag(dp) @ u.conj().T + np.outer(a, a.conj())
    q = u @ np.diag(dq) @ u.conj().T + np.outer(plus, plus.conj())
    c = rng.normal(size=k) + 1j * rng.normal(size=k)
    psi = u[:, :k] @ c
    if rng.random() < 0.5:
        psi = psi + 0.3 * (a * rng.normal() + b * rng.normal())
    return p, q, psi / np.linalg.norm(psi)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        ok, detail = mod.RESULTS[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
    passed = sum(ok for ok, _ in mod.RESULTS.values())
    terminalreporter.write_line(f"{passed}/{len(mod.RESULTS)} criteria passed")
