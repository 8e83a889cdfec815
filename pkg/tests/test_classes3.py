import math

import numpy as np
import pytest
import scipy.linalg as sla

from markov_embed.classes3 import (
    DEG1,
    DEG2_SIMPLE1,
    DEG3,
    EXCEPTIONAL_MAX,
    J3,
    PI_SQRT3,
    T,
    DStochParams,
    const_input_exceptional,
    dstoch_embed,
    dstoch_exp,
    dstoch_generator,
    dstoch_matrix,
    min_poly_case,
    multi_embeddings,
    projectors,
    region_sym3,
    sym_embed,
    sym_exp,
    sym_necessary,
)
from markov_embed.circulant import EMBEDDABLE, ENVELOPE, NOT_EMBEDDABLE
from markov_embed.errors import ConstraintViolation, NotDoublyStochastic, OutOfDomain
from markov_embed.matcore import K, expm, inf_norm
from markov_embed.verdict import Verdict

SQRT3 = math.sqrt(3)


def exceptional_matrix():
    d = math.exp(-math.pi * SQRT3) / 3
    a = (1 + 3 * d) / 3
    return dstoch_matrix(a, a, a), d


class TestClosedForms:
    def test_equal_rates(self):
        D = 1.5
        assert inf_norm(sym_exp(D / 3, D / 3, D / 3) - (np.eye(3) + (1 - math.exp(-D)) * J3)) <= 1e-15
        assert inf_norm(sym_exp(0, 0, 0) - np.eye(3)) <= 1e-15

    def test_oracle(self, rng):
        for _ in range(200):
            al, be, ga = rng.uniform(0, 3, 3)
            ep = rng.uniform(-1, 1) * min(al, be, ga)
            Q = dstoch_generator(al, be, ga, ep)
            assert inf_norm(dstoch_exp(al, be, ga, ep) - expm(Q)) <= 1e-11
            assert inf_norm(sym_exp(al, be, ga) - expm(dstoch_generator(al, be, ga))) <= 1e-12

    def test_eps_zero_reduces(self):
        assert np.array_equal(dstoch_exp(0.3, 0.2, 0.5, 0.0), sym_exp(0.3, 0.2, 0.5))

    def test_imaginary_s(self):
        a = PI_SQRT3
        M = dstoch_exp(a, a, a, a)
        assert inf_norm(M - (np.eye(3) + (1 + math.exp(-3 * a)) * J3)) <= 1e-12
        Q = dstoch_generator(a, a, a, a)
        Mc = expm(Q.astype(complex).real)
        assert np.isrealobj(M) and inf_norm(M - Mc) <= 1e-12

    def test_constraint(self):
        with pytest.raises(ConstraintViolation):
            dstoch_exp(0.1, 0.2, 0.3, 0.2)

    def test_T(self):
        assert inf_norm(expm(T) - (np.eye(3) + 2 * J3)) <= 1e-12
        P = np.eye(3) + 2 * J3
        assert inf_norm(P @ P - np.eye(3)) <= 1e-12

    def test_spectrum_and_projectors(self, rng):
        for _ in range(50):
            al, be, ga = rng.uniform(0, 2, 3)
            D = al + be + ga
            s = math.sqrt(al * al + be * be + ga * ga - al * be - be * ga - ga * al)
            assert 0 <= s <= D + 1e-12
            ev = np.sort(np.linalg.eigvalsh(sym_exp(al, be, ga)))
            assert np.allclose(ev, np.sort([1, math.exp(-D + s), math.exp(-D - s)]), atol=1e-10)
            P0, Pp, Pm = projectors(al, be, ga)
            for P in (P0, Pp, Pm):
                assert inf_norm(P @ P - P) <= 1e-10
            assert inf_norm(P0 @ Pp) <= 1e-10 and inf_norm(Pp @ Pm) <= 1e-10
            assert inf_norm(P0 + Pp + Pm - np.eye(3)) <= 1e-10
            Q = dstoch_generator(al, be, ga)
            assert inf_norm(Q @ Pp - (-D + s) * Pp) <= 1e-10


class TestSymmetric:
    def test_block(self):
        v = sym_embed(dstoch_matrix(0, 0, 0.4))
        assert v.embeddable and inf_norm(expm(v.generator) - dstoch_matrix(0, 0, 0.4)) <= 1e-12
        assert sym_embed(dstoch_matrix(0, 0, 0.5)).status is Verdict.NOT_EMBEDDABLE
        assert sym_embed(dstoch_matrix(0, 0.1, 0.2)).status is Verdict.NOT_EMBEDDABLE

    def test_round_trip(self):
        v = sym_embed(sym_exp(0.3, 0.5, 0.2))
        p = v.generators[0].params
        assert np.allclose([p["alpha"], p["beta"], p["gamma"]], [0.3, 0.5, 0.2], atol=1e-10)
        assert v.generators[0].provenance == "symmetric"

    def test_negative_double_eigenvalue_via_doubly_stochastic(self):
        M, _ = exceptional_matrix()
        v = sym_embed(M)
        assert v.embeddable
        assert all(g.provenance == "doubly_stochastic" for g in v.generators)
        assert all(inf_norm(g.matrix - g.matrix.T) > 1e-3 for g in v.generators)

    def test_positive_not_embeddable(self):
        M = dstoch_matrix(0.2, 0.2, 0.01)
        assert np.all(np.linalg.eigvalsh(M) > 0)
        assert sla.logm(M).real[1, 2] < 0
        assert sym_embed(M).status is Verdict.NOT_EMBEDDABLE

    def test_necessary(self, rng):
        assert sym_necessary((0, 0, 0)).overall
        r = sym_necessary((0.35, 0.35, 0.35))
        assert not r.trace_ok
        for _ in range(500):
            M = sym_exp(*rng.uniform(0, 3, 3))
            assert sym_necessary((M[0, 1], M[0, 2], M[1, 2])).overall


class TestConstantInput:
    def test_thresholds(self):
        v = const_input_exceptional(1.004)
        assert v.embeddable and v.generators[0].params["alpha"] >= PI_SQRT3
        c = detect_c(expm(v.generator))
        assert abs(c - 1.004) <= 1e-12
        assert const_input_exceptional(1.005).status is Verdict.NOT_EMBEDDABLE
        assert const_input_exceptional(EXCEPTIONAL_MAX).embeddable
        assert not const_input_exceptional(EXCEPTIONAL_MAX + 1e-9).embeddable
        with pytest.raises(OutOfDomain):
            const_input_exceptional(1.0)

    def test_multi(self):
        assert len(multi_embeddings(0.5, 3)) == 1
        gens = multi_embeddings(1 - math.exp(-2 * math.pi * SQRT3) + 1e-6, 3)
        assert len(gens) >= 2
        assert len(multi_embeddings(1.0043, 3)) == 1
        for Q in gens:
            assert np.allclose(Q.values.sum(axis=0), 0, atol=1e-12)
        with pytest.raises(OutOfDomain):
            multi_embeddings(1.1, 3)


def detect_c(M):
    return 3 * M[0, 1]


class TestDoublyStochastic:
    def test_identity(self):
        v = dstoch_embed(np.eye(3))
        assert v.embeddable and inf_norm(v.generator) == 0

    def test_exceptional_constant_input(self):
        M, d = exceptional_matrix()
        assert round(d, 5) == 0.00144
        assert abs(np.linalg.det(M) / math.exp(-2 * math.pi * SQRT3) - 1) <= 1e-12
        v = dstoch_embed(M)
        assert v.embeddable
        assert inf_norm(v.generator - 2 * PI_SQRT3 * K(3, 1)) <= 1e-9

    def test_round_trip(self):
        v = dstoch_embed(dstoch_exp(1.2, 0.7, 0.9, 0.4))
        assert v.embeddable
        assert any(np.allclose([g.params[k] for k in ("alpha", "beta", "gamma", "eps")],
                               [1.2, 0.7, 0.9, 0.4], atol=1e-7) for g in v.generators)
        for g in v.generators:
            assert np.allclose(g.matrix.sum(axis=0), 0, atol=1e-10)

    def test_cases(self):
        assert min_poly_case(np.eye(3)) == DEG1
        assert min_poly_case(np.eye(3) + (1 - math.exp(-1.2)) * J3) == DEG2_SIMPLE1
        assert min_poly_case(dstoch_exp(1.2, 0.7, 0.9, 0.4)) == DEG3

    def test_not_doubly(self):
        with pytest.raises(NotDoublyStochastic):
            dstoch_embed([[0.5, 0.5, 0.0], [0.5, 0.5, 0.0], [0.2, 0.3, 0.5]])

    def test_negative_eigenvalue(self):
        M = dstoch_matrix(0.05, 0.05, 0.8)
        assert dstoch_embed(M).status is Verdict.NOT_EMBEDDABLE

    def test_params(self):
        p = DStochParams.from_matrix(dstoch_matrix(0.1, 0.2, 0.3, 0.05))
        assert np.allclose([p.a, p.b, p.c, p.e], [0.1, 0.2, 0.3, 0.05])


def test_region_sym3(rng):
    M, _ = exceptional_matrix()
    lab = region_sym3([0.1, 0.0, 0.0, 0.2, M[0, 1]], [0.1, 0.0, 0.0, 0.2, M[0, 1]],
                      [0.1, 0.4, 0.5, 0.01, M[0, 1]])
    assert list(lab) == [EMBEDDABLE, EMBEDDABLE, ENVELOPE, NOT_EMBEDDABLE, EMBEDDABLE]
    pts = rng.uniform(0, 0.5, (100, 3))
    lab = region_sym3(pts[:, 0], pts[:, 1], pts[:, 2])
    for (a, b, c), l in zip(pts, lab):
        assert (l == EMBEDDABLE) == sym_embed(dstoch_matrix(a, b, c)).embeddable
