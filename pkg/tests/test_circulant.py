import math

import numpy as np
import pytest

from markov_embed.circulant import (
    EMBEDDABLE,
    ENVELOPE,
    INVALID,
    NOT_EMBEDDABLE,
    CirculantCoeffs,
    CirculantRates,
    circ3_embed,
    circ3_exp,
    circ4_embed,
    circ4_exp,
    circ_general_embed,
    circ_general_exp,
    circ_jacobian,
    circ_matrix,
    detect_circulant,
    f_all,
    f_char,
    region_circ3,
    region_circ4,
)
from markov_embed.errors import DimensionTooLarge
from markov_embed.logsearch import search_embed
from markov_embed.matcore import K, cyclic_shift, expm, inf_norm
from markov_embed.verdict import Verdict


def taylor_f(d, m, t, terms=400):
    # log-space terms keep large t finite
    total = 0.0
    for ell in range(terms):
        n = ell * d + m
        if n == 0:
            total += 1.0
        elif t > 0:
            total += math.exp(n * math.log(t) - math.lgamma(n + 1))
    return total


def test_detect():
    assert detect_circulant(np.eye(3)).x == (0.0, 0.0)
    assert detect_circulant(cyclic_shift(4)).x == (1.0, 0.0, 0.0)
    M = np.array([[0.5, 0.2, 0.3], [0.2, 0.4, 0.4], [0.3, 0.4, 0.3]])
    assert detect_circulant(M) is None


def test_f_identities():
    assert abs(sum(f_char(5, m, 1.0) for m in range(5)) - math.e) <= 1e-15
    assert abs(f_char(2, 0, 0.7) - math.cosh(0.7)) <= 1e-15
    assert abs(f_char(2, 1, 0.7) - math.sinh(0.7)) <= 1e-15
    lhs = sum(f_char(6, ell * 3 + 1, 0.9) for ell in range(2))
    assert abs(lhs - f_char(3, 1, 0.9)) <= 1e-15
    for d in range(2, 9):
        for t in (0.0, 0.5, 3.0, 10.0):
            f = f_all(d, t)
            for m in range(d):
                want = taylor_f(d, m, t)
                assert abs(f[m] - want) <= 1e-12 * max(1.0, want)
                assert abs(f_char(d, m, t) - want) <= 1e-12 * max(1.0, want)


def test_circ3_exp():
    assert circ3_exp(0, 0) == pytest.approx((0.0, 0.0), abs=1e-15)
    x, y = circ3_exp(0.6, 0.6)
    assert abs(x - (1 - math.exp(-1.8)) / 3) <= 1e-15 and abs(x - y) <= 1e-15
    x, y = circ3_exp(1.0, 0.5)
    g, dl = 1.5 * 1.5, math.sqrt(3) / 2 * 0.5
    assert abs(x + y - 2 / 3 * (1 - math.exp(-g) * math.cos(dl))) <= 1e-15
    rng = np.random.default_rng(3)
    for a, b in rng.uniform(0, 3, (50, 2)):
        M = expm(a * K(3, 1) + b * K(3, 2))
        assert np.max(np.abs(np.array(circ3_exp(a, b)) - M[0, 1:])) <= 1e-12


def test_circ4_exp():
    assert circ4_exp(0, 0, 0) == (0.0, 0.0, 0.0)
    x, y, z = circ4_exp(0.4, 0.2, 0.9)
    assert abs(x + z - 0.5 * (1 - math.exp(-2.6))) <= 1e-15
    x, y, z = circ4_exp(0, 0.7, 0)
    assert (x, z) == (0.0, 0.0) and abs(y - 0.5 * (1 - math.exp(-1.4))) <= 1e-15
    rng = np.random.default_rng(4)
    for a, b, c in rng.uniform(0, 3, (50, 3)):
        M = expm(a * K(4, 1) + b * K(4, 2) + c * K(4, 3))
        assert np.max(np.abs(np.array(circ4_exp(a, b, c)) - M[0, 1:])) <= 1e-12


def test_general_exp(rng):
    assert circ_general_exp(CirculantRates(4, (0.0, 0.0, 0.0))).x == (0.0, 0.0, 0.0)
    for a, b in rng.uniform(0, 2, (20, 2)):
        assert np.allclose(circ_general_exp([a, b]).x, circ3_exp(a, b), atol=1e-14)
    for d in range(2, 13):
        alpha = rng.uniform(0, 1.5, d - 1)
        M = expm(circ_matrix(alpha) - np.eye(d))
        assert np.max(np.abs(np.array(circ_general_exp(alpha).x) - M[0, 1:])) <= 1e-12
        assert np.allclose(M.sum(axis=0), 1.0)
    with pytest.raises(DimensionTooLarge):
        circ_general_exp(np.zeros(12))


def test_jacobians(rng):
    for a, b in rng.uniform(0, 2, (20, 2)):
        assert abs(np.linalg.det(circ_jacobian([a, b])) / math.exp(-3 * (a + b)) - 1) <= 1e-10
    for a, b, c in rng.uniform(0, 2, (20, 3)):
        det = np.linalg.det(circ_jacobian([a, b, c]))
        assert abs(det / math.exp(-4 * (a + b + c)) - 1) <= 1e-10


def test_circ3_embed():
    v = circ3_embed(*circ3_exp(0.8, 0.3))
    assert v.embeddable
    assert np.allclose(v.generators[0].params["alpha"], [0.8, 0.3], atol=1e-8)
    v = circ3_embed(1 / 3, 1 / 3)
    assert v.status is Verdict.NOT_EMBEDDABLE and "envelope-adjacent" in v.notes
    assert circ3_embed(0.5, 0.0).status is Verdict.NOT_EMBEDDABLE


def test_circ4_embed():
    v = circ4_embed(*circ4_exp(0.4, 0.2, 0.9))
    assert v.embeddable
    assert np.allclose(v.generators[0].params["alpha"], [0.4, 0.2, 0.9], atol=1e-8)
    assert circ4_embed(0.25, 0.25, 0.25).status is Verdict.NOT_EMBEDDABLE
    x = (0.3, 0.25, 0.1)
    v = circ4_embed(*x)
    w = search_embed(circ_matrix(x))
    assert v.status is w.status


def test_general_embed(rng):
    for _ in range(10):
        alpha = rng.uniform(0, 1, 4)
        v = circ_general_embed(circ_general_exp(alpha))
        assert v.embeddable
        assert any(np.allclose(g.params["alpha"], alpha, atol=1e-7) for g in v.generators)
    v = circ_general_embed(CirculantCoeffs(5, (0.0,) * 4))
    assert v.embeddable and inf_norm(v.generator) == 0.0
    assert circ_general_embed([0.2] * 4).status is Verdict.NOT_EMBEDDABLE


def test_consistency_with_branch_search(rng):
    for _ in range(40):
        x = rng.dirichlet(np.ones(4))[:3] * rng.uniform(0.2, 1.0)
        M = circ_matrix(x)
        w = search_embed(M)
        if w.embeddable:
            assert circ4_embed(*x).embeddable


def test_regions():
    lab = region_circ3(np.array([circ3_exp(0.8, 0.3)[0], 0.5, 1 / 3, 0.9]),
                       np.array([circ3_exp(0.8, 0.3)[1], 0.0, 1 / 3, 0.9]))
    assert list(lab) == [EMBEDDABLE, NOT_EMBEDDABLE, ENVELOPE, INVALID]
    x, y, z = circ4_exp(0.4, 0.2, 0.9)
    lab = region_circ4([x, 0.25, 0.3], [y, 0.25, 0.25], [z, 0.25, 0.1])
    assert lab[0] == EMBEDDABLE and lab[1] == ENVELOPE


def test_region_matches_solver(rng):
    pts = rng.uniform(0, 0.7, (200, 2))
    pts = pts[pts.sum(axis=1) <= 1]
    lab = region_circ3(pts[:, 0], pts[:, 1])
    for (x, y), l in zip(pts, lab):
        assert (l == EMBEDDABLE) == circ3_embed(x, y).embeddable
