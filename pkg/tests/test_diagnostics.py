import numpy as np
import pytest

from conftest import random_rate
from markov_embed.diagnostics import (
    check_R_in_alg,
    limit_matrix,
    necessary_conditions,
    structure_flags,
)
from markov_embed.errors import OracleMismatch, PeripheralSpectrum
from markov_embed.kendall2 import log_factor
from markov_embed.matcore import expm, inf_norm


def _items(rep):
    return {int(f.split(":")[0].split(".")[1]) for f in rep.failures}


class TestNecessary:
    def test_swap(self):
        rep = necessary_conditions([[0.0, 1.0], [1.0, 0.0]])
        assert not rep.overall and not rep.det_ok and not rep.negative_real_even_multiplicity
        assert {2, 4} <= _items(rep)

    def test_primitive_not_positive(self):
        rep = necessary_conditions([[0.5, 0.5], [1.0, 0.0]])
        assert not rep.positivity_or_reducible and 5 in _items(rep)

    def test_identity(self):
        rep = necessary_conditions(np.eye(3))
        assert rep.overall and rep.failures == ()

    def test_symmetric_two_state(self):
        a = 0.75
        rep = necessary_conditions([[1 - a, a], [a, 1 - a]])
        assert {2, 4} <= _items(rep)

    def test_det_one_non_identity_impossible_for_markov(self):
        # any non-identity Markov matrix has det < 1; the check still fires on
        # an identity perturbed inside tolerance
        rep = necessary_conditions(np.eye(2) + 1e-12 * np.array([[-1, 1], [1, -1]]))
        assert rep.overall

    def test_transitivity(self):
        M = np.array([[0.5, 0.5, 0.0], [0.0, 0.5, 0.5], [0.0, 0.0, 1.0]])
        rep = necessary_conditions(M)
        assert not rep.transitivity_ok and 6 in _items(rep)
        assert rep.positivity_or_reducible

    def test_elving_borderline_is_a_note(self):
        rep = necessary_conditions([[0.0, 1.0], [1.0, 0.0]])
        assert rep.elving_ok and rep.elving_borderline

    def test_no_false_negatives(self, rng):
        for _ in range(400):
            d = int(rng.integers(2, 5))
            Q = random_rate(rng, d, sparsity=0.4)
            Q *= 2.0 / max(1.0, np.max(np.abs(Q)))
            rep = necessary_conditions(expm(Q))
            assert rep.overall, rep.failures

    def test_sparse_high_dim_no_false_negatives(self, rng):
        for _ in range(50):
            d = int(rng.integers(8, 17))
            rep = necessary_conditions(expm(random_rate(rng, d, scale=1.0 / d, sparsity=0.7)))
            assert rep.overall, rep.failures

    def test_to_dict(self):
        out = necessary_conditions(np.eye(2)).to_dict()
        assert list(out)[:3] == ["det_ok", "det_value", "no_zero_eigenvalue"]
        assert out["failures"] == []


class TestStructure:
    def test_positive(self):
        f = structure_flags(np.full((3, 3), 1 / 3))
        assert f.positive and f.primitive and f.irreducible

    def test_block_diagonal(self):
        M = np.zeros((4, 4))
        M[:2, :2] = [[0.7, 0.3], [0.4, 0.6]]
        M[2:, 2:] = [[0.9, 0.1], [0.2, 0.8]]
        assert not structure_flags(M).irreducible

    def test_primitive_not_positive(self):
        M = np.array([[0.0, 0.5, 0.5], [0.5, 0.0, 0.5], [0.5, 0.5, 0.0]]) @ np.array(
            [[0.5, 0.5, 0.0], [0.0, 0.5, 0.5], [0.5, 0.0, 0.5]])
        M[0, 0] += M[0, 1]
        M[0, 1] = 0.0
        f = structure_flags(M)
        assert f.primitive and not f.positive
        assert np.all(M @ M > 0)

    def test_implications(self, rng):
        for _ in range(100):
            M = rng.random((4, 4)) * (rng.random((4, 4)) < 0.6)
            M += np.eye(4) * (M.sum(axis=1) == 0)[:, None]
            M /= M.sum(axis=1, keepdims=True)
            f = structure_flags(M)
            assert (not f.positive) or f.primitive
            assert (not f.primitive) or f.irreducible


class TestLimit:
    def test_identity(self):
        assert np.array_equal(limit_matrix(np.eye(3)).values, np.eye(3))

    def test_symmetric_two_state(self):
        L = limit_matrix([[0.75, 0.25], [0.25, 0.75]]).values
        assert inf_norm(L - 0.5) <= 1e-12

    def test_peripheral(self):
        with pytest.raises(PeripheralSpectrum):
            limit_matrix([[0.0, 1.0], [1.0, 0.0]])

    def test_semigroup_limit(self, rng):
        for _ in range(20):
            Q = random_rate(rng, 4, sparsity=0.3)
            L = limit_matrix(expm(Q)).values
            assert inf_norm(L @ L - L) <= 1e-8
            R = L - np.eye(4)
            assert inf_norm(R @ R + R) <= 1e-8
            assert inf_norm(L - expm(Q, 200.0)) <= 1e-7
            ev = np.linalg.eigvals(L)
            assert np.all(np.minimum(np.abs(ev), np.abs(ev - 1)) <= 1e-8)

    def test_R_in_alg(self, rng):
        c_vec = np.array([0.2, 0.3, 0.1])
        c = c_vec.sum()
        M = (1 - c) * np.eye(3) + np.tile(c_vec, (3, 1))
        Q = log_factor(c) * (M - np.eye(3))
        assert check_R_in_alg(M, Q)
        a, b = 0.2, 0.3
        M2 = np.array([[1 - a, a], [b, 1 - b]])
        assert check_R_in_alg(M2, log_factor(a + b) * (M2 - np.eye(2)))
        for _ in range(10):
            Q = random_rate(rng, 4)
            assert check_R_in_alg(expm(Q), Q)
        with pytest.raises(OracleMismatch):
            check_R_in_alg(M, 2 * Q[:3, :3] - np.diag((2 * Q[:3, :3]).sum(axis=1)))
