import math

import numpy as np

from conftest import random_rate
from markov_embed.classes3 import dstoch_matrix
from markov_embed.dispatch import embed
from markov_embed.io import dumps
from markov_embed.matcore import K, expm, inf_norm


def test_kendall():
    r = embed([[0.75, 0.25], [0.25, 0.75]])
    assert r.verdict.embeddable and len(r.verdict.generators) == 1
    assert r.verdict.generators[0].provenance == "kendall"
    assert "two_state" in r.classes


def test_exceptional_constant_input():
    d = math.exp(-math.pi * math.sqrt(3)) / 3
    a = (1 + 3 * d) / 3
    r = embed(dstoch_matrix(a, a, a))
    g = r.verdict.generators[0]
    assert g.provenance == "doubly_stochastic"
    assert inf_norm(g.matrix - 2 * math.pi / math.sqrt(3) * K(3, 1)) <= 1e-9
    assert g.residual <= 1e-9


def test_even_equal_input():
    c_vec = np.full(4, 0.3)
    M = -0.2 * np.eye(4) + np.tile(c_vec, (4, 1))
    r = embed(M)
    assert r.verdict.status.value == "not_embeddable"
    assert r.verdict.reasons[0].startswith("equal_input")


def test_swap_reasons():
    r = embed([[0.0, 1.0], [1.0, 0.0]])
    assert r.verdict.status.value == "not_embeddable" and r.verdict.reasons


def test_generic(rng):
    for d in (3, 4, 5, 6):
        Q = random_rate(rng, d)
        r = embed(expm(Q))
        assert r.verdict.embeddable
        for g in r.verdict.generators:
            assert g.residual <= 1e-8


def test_report_deterministic(rng):
    M = expm(random_rate(rng, 4))
    assert dumps(embed(M).to_dict()) == dumps(embed(M).to_dict())
    out = embed(M).to_dict()
    assert list(out) == ["input", "classes", "necessary", "verdict", "reasons", "notes",
                         "generators", "residual"]


def test_undecided_is_possible():
    # a circulant point outside the default branch window cannot be certified
    # with k_max = 0 unless the principal branch decides
    r = embed(expm(K(3, 1) * 6.0), k_max=0)
    assert r.verdict.status.value in ("embeddable", "undecided")
