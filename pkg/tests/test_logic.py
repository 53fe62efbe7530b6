import itertools
import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import null_space, orth

from quantumlike.hilbert import Projector, make_pure_state
from quantumlike.logic import (
    commute,
    complement,
    distributivity_violations,
    join,
    meet,
    state_distributivity,
)

from conftest import (
    KET0,
    PLUS,
    random_commuting_projectors,
    random_projector,
    random_vector,
)

P0 = np.outer(KET0, KET0)
PP = np.outer(PLUS, PLUS)


# independent oracle: subspace intersection / span from range bases via SVD


def _range(p):
    return orth(np.asarray(p), rcond=1e-8)


def oracle_meet(p, q):
    bp, bq = _range(p), _range(q)
    d = np.asarray(p).shape[0]
    if bp.shape[1] == 0 or bq.shape[1] == 0:
        return np.zeros((d, d))
    # x in both ranges iff x = bp a = bq b
    ns = null_space(np.hstack([bp, -bq]), rcond=1e-8)
    if ns.shape[1] == 0:
        return np.zeros((d, d))
    basis = orth(bp @ ns[: bp.shape[1]], rcond=1e-8)
    return basis @ basis.conj().T


def oracle_join(p, q):
    d = np.asarray(p).shape[0]
    stacked = np.hstack([_range(p), _range(q)])
    if stacked.shape[1] == 0:
        return np.zeros((d, d))
    basis = orth(stacked, rcond=1e-8)
    return basis @ basis.conj().T


def oracle_violations(p, q, r):
    eye = np.eye(np.asarray(p).shape[0])
    named = {"P": p, "Q": q, "R": r, "Pc": eye - p, "Qc": eye - q, "Rc": eye - r}
    out = []
    for x, y, z in itertools.product(named, repeat=3):
        lhs = oracle_meet(named[x], oracle_join(named[y], named[z]))
        rhs = oracle_join(oracle_meet(named[x], named[y]), oracle_meet(named[x], named[z]))
        if np.max(np.abs(lhs - rhs)) > 1e-8:
            out.append((x, y, z))
    return sorted(out)


class TestComplement:
    def test_zero(self):
        np.testing.assert_array_equal(complement(np.zeros((2, 2))).matrix, np.eye(2))

    def test_identity(self):
        np.testing.assert_array_equal(complement(np.eye(3)).matrix, np.zeros((3, 3)))

    def test_basis(self):
        np.testing.assert_array_equal(complement(P0).matrix, np.diag([0, 1]))

    def test_orthogonal(self, rng):
        p = random_projector(rng, 4)
        c = complement(p).matrix
        assert np.max(np.abs(p @ c)) < 1e-12
        assert np.max(np.abs(p + c - np.eye(4))) < 1e-12


class TestMeetJoin:
    def test_meet_identity(self, rng):
        p = random_projector(rng, 3)
        np.testing.assert_allclose(meet(p, np.eye(3)).matrix, p, atol=1e-10)

    def test_distinct_lines_meet_trivially(self):
        np.testing.assert_allclose(meet(P0, PP).matrix, oracle_meet(P0, PP), atol=1e-12)
        np.testing.assert_allclose(meet(P0, PP).matrix, np.zeros((2, 2)), atol=1e-12)

    def test_coordinate_planes(self):
        m = meet(np.diag([1, 1, 0]), np.diag([0, 1, 1])).matrix
        np.testing.assert_allclose(m, np.diag([0, 1, 0]), atol=1e-12)

    def test_join_zero(self, rng):
        p = random_projector(rng, 4)
        np.testing.assert_allclose(join(p, np.zeros((4, 4))).matrix, p, atol=1e-10)

    def test_distinct_lines_span_plane(self):
        np.testing.assert_allclose(oracle_join(P0, PP), np.eye(2), atol=1e-12)
        np.testing.assert_allclose(join(P0, PP).matrix, np.eye(2), atol=1e-12)

    def test_coordinate_lines(self):
        np.testing.assert_allclose(join(np.diag([1, 0, 0]), np.diag([0, 1, 0])).matrix,
                                   np.diag([1, 1, 0]), atol=1e-12)

    def test_idempotent_meet(self, rng):
        p = random_projector(rng, 4)
        np.testing.assert_allclose(meet(p, p).matrix, p, atol=1e-10)

    def test_against_oracle_with_shared_subspace(self, rng):
        # P and Q share one random direction and are otherwise generic
        for _ in range(20):
            d = 4
            common = random_vector(rng, d)
            p = Projector.onto([common, random_vector(rng, d)]).matrix
            q = Projector.onto([common, random_vector(rng, d)]).matrix
            np.testing.assert_allclose(meet(p, q).matrix, oracle_meet(p, q), atol=1e-8)
            np.testing.assert_allclose(join(p, q).matrix, oracle_join(p, q), atol=1e-8)

    @settings(max_examples=60, deadline=None)
    @given(st.integers(2, 5), st.integers(0, 2**32 - 1))
    def test_lattice_laws(self, d, seed):
        rng = np.random.default_rng(seed)
        p, q = random_projector(rng, d), random_projector(rng, d)
        mpq, mqp = meet(p, q).matrix, meet(q, p).matrix
        jpq, jqp = join(p, q).matrix, join(q, p).matrix
        assert np.linalg.norm(mpq - mqp, 2) <= 1e-10
        assert np.linalg.norm(jpq - jqp, 2) <= 1e-10
        # meet below both, join above both
        assert np.max(np.abs(p @ mpq - mpq)) <= 1e-9
        assert np.max(np.abs(q @ mpq - mpq)) <= 1e-9
        assert np.max(np.abs(jpq @ p - p)) <= 1e-9
        assert np.max(np.abs(jpq @ q - q)) <= 1e-9
        # De Morgan
        lhs = complement(join(p, q)).matrix
        rhs = meet(complement(p), complement(q)).matrix
        assert np.max(np.abs(lhs - rhs)) <= 1e-9


class TestCommute:
    def test_diagonal(self):
        assert commute(np.diag([1, 0, 1]), np.diag([0, 0, 1]))

    def test_noncommuting_lines(self):
        # [|0><0|, |+><+|] = [[0, 1/2], [-1/2, 0]]
        c = P0 @ PP - PP @ P0
        np.testing.assert_allclose(c, [[0, 0.5], [-0.5, 0]])
        assert not commute(P0, PP)

    def test_with_complement(self, rng):
        p = random_projector(rng, 3)
        assert commute(p, complement(p))


class TestDistributivity:
    def test_diagonal_triple(self):
        assert distributivity_violations(np.diag([1, 0, 0]), np.diag([1, 1, 0]),
                                         np.diag([0, 1, 1])) == []

    def test_noncommuting_pair_matches_exhaustive_oracle(self):
        found = distributivity_violations(P0, PP, np.zeros((2, 2)))
        assert found
        assert [(v.X, v.Y, v.Z) for v in found] == oracle_violations(P0, PP, np.zeros((2, 2)))
        # the textbook witness: P & (Q | Qc) = P but (P & Q) | (P & Qc) = 0
        assert ("P", "Q", "Qc") in {(v.X, v.Y, v.Z) for v in found}

    def test_equal_projectors(self, rng):
        p = random_projector(rng, 3)
        assert distributivity_violations(p, p, p) == []

    def test_random_against_oracle(self, rng):
        for _ in range(5):
            p, q, r = (random_projector(rng, 3) for _ in range(3))
            got = [(v.X, v.Y, v.Z) for v in distributivity_violations(p, q, r)]
            assert got == oracle_violations(p, q, r)

    def test_sorted_and_serializable(self):
        found = distributivity_violations(P0, PP, np.zeros((2, 2)))
        assert found == sorted(found)
        rec = json.loads(json.dumps([v.as_dict() for v in found]))
        assert set(rec[0]) == {"X", "Y", "Z", "deviation"}
        assert {r["X"] for r in rec} <= {"P", "Q", "R", "Pc", "Qc", "Rc"}

    def test_commuting_random_triples(self, rng):
        for _ in range(20):
            d = int(rng.integers(2, 5))
            assert distributivity_violations(*random_commuting_projectors(rng, d, 3)) == []


class TestStateDistributivity:
    def test_commuting_any_state(self, rng):
        p, q = random_commuting_projectors(rng, 3, 2)
        assert state_distributivity(p, q, make_pure_state(random_vector(rng, 3)))

    def test_noncommuting_lines_on_ket0(self):
        assert not state_distributivity(P0, PP, make_pure_state(KET0))

    def test_state_in_meet(self, rng):
        # P and Q share direction c; psi = c lies in range(P & Q)
        c = random_vector(rng, 3)
        p = Projector.onto([c, random_vector(rng, 3)]).matrix
        q = Projector.onto([c, random_vector(rng, 3)]).matrix
        assert not commute(p, q)
        assert state_distributivity(p, q, make_pure_state(c))

    def test_dimension_mismatch(self):
        from quantumlike.errors import DimensionError

        with pytest.raises(DimensionError):
            state_distributivity(P0, PP, [1, 0, 0])
