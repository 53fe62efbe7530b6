import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from quantumlike.contextuality import (
    CLASSICAL_BOUND,
    TSIRELSON_BOUND,
    DichotomicObservable,
    SlitConfiguration,
    chsh,
    chsh_report,
    chsh_sampled,
    contextual_conditioning,
    correlation,
    singlet,
    slit_probabilities,
    sorkin_residual,
    spin_observable,
    two_slit_interference,
)
from quantumlike.errors import DimensionError, NullEventError, QuantumLikeError
from quantumlike.instruments import instrument_from_kraus, yes_no_instrument

from conftest import PAULI_X, PAULI_Z, random_density, random_unitary, random_vector


def random_dichotomic(rng, d=2):
    u = random_unitary(rng, d)
    signs = rng.choice([-1.0, 1.0], size=d)
    return u @ np.diag(signs) @ u.conj().T


def random_effect(rng, d):
    u = random_unitary(rng, d)
    return u @ np.diag(rng.uniform(0, 1, d)) @ u.conj().T


def random_slits(rng, d=6, n=3):
    u = random_unitary(rng, d)
    return [np.outer(u[:, i], u[:, i].conj()) for i in range(n)]


def subset_oracle(slits, detector, psi):
    """Brute-force I3 from explicit vectors P_S psi."""
    p = {}
    for r in (1, 2, 3):
        for s in itertools.combinations(range(3), r):
            v = sum(slits[i] @ psi for i in s)
            p[s] = np.real(np.conj(v) @ detector @ v)
    return (p[0, 1, 2] - p[0, 1] - p[0, 2] - p[1, 2]) + p[0,] + p[1,] + p[2,]


class TestCorrelation:
    def test_singlet_zz(self):
        assert correlation(singlet(), PAULI_Z, PAULI_Z) == pytest.approx(-1, abs=1e-15)

    def test_singlet_cosine(self):
        for a, b in [(0.0, 0.3), (1.2, -0.4), (2.0, 2.0)]:
            e = correlation(singlet(), spin_observable(a), spin_observable(b))
            assert e == pytest.approx(-math.cos(a - b), abs=1e-12)

    def test_mixed(self, rng):
        assert abs(correlation(np.eye(4) / 4, random_dichotomic(rng), random_dichotomic(rng))) < 1e-15

    def test_product_factorizes(self, rng):
        for _ in range(20):
            ra, rb = random_density(rng, 2), random_density(rng, 3)
            a, b = random_dichotomic(rng, 2), random_dichotomic(rng, 3)
            e = correlation(np.kron(ra, rb), a, b)
            assert e == pytest.approx(np.trace(a @ ra).real * np.trace(b @ rb).real, abs=1e-12)

    def test_dims_mismatch(self):
        with pytest.raises(DimensionError):
            correlation(singlet(), PAULI_Z, PAULI_Z, dims=(1, 4))

    def test_not_dichotomic(self):
        with pytest.raises(QuantumLikeError, match="identity"):
            DichotomicObservable(np.diag([1.0, 0.5]))


class TestChsh:
    def test_singlet_tsirelson(self):
        a1, a2 = spin_observable(0), spin_observable(math.pi / 2)
        b1, b2 = spin_observable(math.pi / 4), spin_observable(-math.pi / 4)
        assert chsh(singlet(), a1, a2, b1, b2) == pytest.approx(2 * math.sqrt(2), abs=1e-9)

    def test_listed_b_angles_cancel(self):
        # B at pi/4 and 3pi/4 with this sign pattern gives zero on the singlet
        a1, a2 = spin_observable(0), spin_observable(math.pi / 2)
        b1, b2 = spin_observable(math.pi / 4), spin_observable(3 * math.pi / 4)
        assert chsh(singlet(), a1, a2, b1, b2) == pytest.approx(0, abs=1e-12)

    def test_identical_mixed_zero(self, rng):
        a = random_dichotomic(rng)
        assert chsh(np.eye(4) / 4, a, a, a, a) == pytest.approx(0, abs=1e-15)

    def test_report_dict(self):
        rep = chsh_report(singlet(), PAULI_Z, PAULI_X, PAULI_Z, PAULI_X)
        d = rep.as_dict()
        assert set(d) == {"E11", "E12", "E21", "E22", "S", "bound_classical", "bound_tsirelson"}
        assert d["bound_classical"] == 2 and d["bound_tsirelson"] == 2.8284271247

    def test_products_classical(self, rng):
        for _ in range(200):
            rho = np.kron(random_density(rng, 2), random_density(rng, 2))
            obs = [random_dichotomic(rng) for _ in range(4)]
            assert chsh(rho, *obs) <= CLASSICAL_BOUND + 1e-9

    @settings(max_examples=60, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_tsirelson_property(self, seed):
        rng = np.random.default_rng(seed)
        rho = random_density(rng, 4, rank=int(rng.integers(1, 5)))
        obs = [random_dichotomic(rng) for _ in range(4)]
        assert chsh(rho, *obs) <= TSIRELSON_BOUND + 1e-9

    def test_sampled_converges_and_is_seeded(self):
        a1, a2 = spin_observable(0), spin_observable(math.pi / 2)
        b1, b2 = spin_observable(math.pi / 4), spin_observable(-math.pi / 4)
        r1 = chsh_sampled(singlet(), a1, a2, b1, b2, 20000, rng=7)
        r2 = chsh_sampled(singlet(), a1, a2, b1, b2, 20000, rng=7)
        assert r1 == r2
        # four estimates with standard error ~0.005 each
        assert abs(r1.S - 2 * math.sqrt(2)) < 0.05


class TestSorkin:
    def test_identity_detector(self, rng):
        cfg = SlitConfiguration(random_slits(rng), np.eye(6), random_vector(rng, 6))
        assert sorkin_residual(cfg) == pytest.approx(0, abs=1e-15)

    def test_random_configurations(self, rng):
        for _ in range(100):
            slits = random_slits(rng)
            det = random_effect(rng, 6)
            psi = random_vector(rng, 6)
            cfg = SlitConfiguration(slits, det, psi)
            assert abs(sorkin_residual(cfg)) <= 1e-10
            assert abs(subset_oracle(slits, det, psi)) <= 1e-10

    def test_probabilities_match_oracle(self, rng):
        slits = random_slits(rng)
        det = random_effect(rng, 6)
        psi = random_vector(rng, 6)
        p = slit_probabilities(SlitConfiguration(slits, det, psi))
        assert len(p) == 7
        v = (slits[0] + slits[2]) @ psi
        assert p[1, 3] == pytest.approx(np.real(np.conj(v) @ det @ v), abs=1e-14)

    def test_orthogonal_source(self, rng):
        slits = [np.diag(np.eye(4)[i]) for i in range(3)]
        cfg = SlitConfiguration(slits, random_effect(rng, 4), [0, 0, 0, 1])
        assert all(v == 0 for v in slit_probabilities(cfg).values())
        assert sorkin_residual(cfg) == 0

    def test_two_slit_fixture(self):
        cfg = SlitConfiguration([np.diag(np.eye(3)[i]) for i in range(3)],
                                np.ones((3, 3)) / 3, np.ones(3) / math.sqrt(3))
        # p_i = 1/9 and p_12 = 4/9
        assert two_slit_interference(cfg) == pytest.approx(2 / 9, abs=1e-14)
        assert abs(sorkin_residual(cfg)) <= 1e-15

    def test_slit_count(self, rng):
        cfg = SlitConfiguration(random_slits(rng, 6, 2), np.eye(6), random_vector(rng, 6))
        with pytest.raises(QuantumLikeError, match="3 slits"):
            sorkin_residual(cfg)

    def test_non_orthogonal(self):
        with pytest.raises(QuantumLikeError, match="not orthogonal"):
            SlitConfiguration([np.diag([1, 0]), np.ones((2, 2)) / 2], np.eye(2), [1, 0])


def bell():
    v = np.array([1, 0, 0, 1]) / math.sqrt(2)
    return np.outer(v, v)


class TestConditioning:
    def test_product_unchanged(self, rng):
        re, rm = random_density(rng, 2), random_density(rng, 3)
        inst = yes_no_instrument(np.diag([1, 0, 0]))
        out = contextual_conditioning(np.kron(re, rm), inst, "yes", (2, 3))
        np.testing.assert_allclose(out.matrix, re, atol=1e-12)

    def test_bell_gives_pure(self):
        inst = yes_no_instrument(np.diag([0, 1]))
        out = contextual_conditioning(bell(), inst, "yes", (2, 2))
        np.testing.assert_allclose(out.matrix, np.diag([0, 1]), atol=1e-12)

    def test_classical_bayes(self, rng):
        joint = rng.dirichlet(np.ones(6)).reshape(2, 3)
        rho = np.diag(joint.reshape(-1))
        inst = yes_no_instrument(np.diag([0, 1, 0]))
        out = contextual_conditioning(rho, inst, "yes", (2, 3))
        bayes = joint[:, 1] / joint[:, 1].sum()
        np.testing.assert_allclose(out.matrix, np.diag(bayes), atol=1e-12)

    def test_trivial_instrument(self, rng):
        rho = random_density(rng, 6)
        inst = instrument_from_kraus({"any": [np.eye(3)]})
        out = contextual_conditioning(rho, inst, "any", (2, 3))
        reduced = np.einsum("ikjk->ij", rho.reshape(2, 3, 2, 3))
        np.testing.assert_allclose(out.matrix, reduced, atol=1e-10)

    def test_null_event(self):
        inst = yes_no_instrument(np.diag([0, 1]))
        with pytest.raises(NullEventError):
            contextual_conditioning(np.diag([1.0, 0, 0, 0]), inst, "yes", (2, 2))

    def test_dims(self):
        with pytest.raises(DimensionError):
            contextual_conditioning(bell(), yes_no_instrument(np.diag([0, 1])), "yes", (4, 1))
