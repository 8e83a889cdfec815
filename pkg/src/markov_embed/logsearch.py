"""Enumeration of the real logarithms of a cyclic matrix.

For a matrix with simple spectrum every logarithm is a function of the
matrix, fixed by one branch index per conjugate eigenvalue pair; positive
real eigenvalues admit only the principal branch and a negative real
eigenvalue admits no real logarithm at all.  The solutions are therefore a
discrete set and the generator test can be run branch by branch.

For a generator Q with q = max_i(-Q_ii), Gershgorin places every eigenvalue
in the disk |mu + q| <= q, and q <= -tr Q = -log det M.  With Re mu fixed by
|lambda| this caps |Im mu|, so a window that covers the cap makes an empty
search a proof of non-embeddability.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .config import DEFAULT, Tolerances
from .errors import NotCyclic, SingularMatrixError, ValidationError
from .matcore import (
    StochasticMatrix,
    as_square,
    expm,
    inf_norm,
    is_cyclic,
    validate_generator,
)
from .verdict import EmbedVerdict, Generator, embeddable, not_embeddable, undecided

MAX_COMBOS = 100_000


@dataclass(frozen=True)
class BranchWindow:
    k_max: int = 8

    def __post_init__(self):
        if not 0 <= self.k_max <= 64:
            raise ValidationError(f"k_max must lie in [0, 64], got {self.k_max}")


@dataclass(frozen=True)
class _Eigen:
    lam: np.ndarray
    V: np.ndarray
    Vinv: np.ndarray
    pairs: tuple      # (i, j) with lam[j] = conj(lam[i]), Im lam[i] > 0
    negative: bool    # a real negative eigenvalue is present


def _eigen(a: np.ndarray, tol: Tolerances) -> _Eigen:
    lam, V = np.linalg.eig(a)
    scale = 1.0 + float(np.max(np.abs(lam)))
    if np.min(np.abs(lam)) <= tol.envelope:
        raise SingularMatrixError("zero eigenvalue; no logarithm exists")
    V = V / np.linalg.norm(V, axis=0)
    d = a.shape[0]
    real = np.abs(lam.imag) <= tol.cluster * scale
    lam = np.where(real, lam.real + 0j, lam)
    V = V.astype(complex)
    V[:, real] = V[:, real].real
    used, pairs = set(), []
    for i in np.argsort(-lam.imag):
        if real[i] or i in used or lam[i].imag < 0:
            continue
        rest = [j for j in range(d) if j != i and j not in used and not real[j]
                and lam[j].imag < 0]
        j = min(rest, key=lambda j: abs(lam[j] - np.conj(lam[i])))
        used.update((i, j))
        lam[j] = np.conj(lam[i])
        V[:, j] = np.conj(V[:, i])
        pairs.append((int(i), int(j)))
    if np.linalg.cond(V) > tol.max_cond:
        raise NotCyclic("eigenvector basis is numerically singular (defective matrix)")
    negative = bool(np.any(real & (lam.real < 0)))
    return _Eigen(lam, V, np.linalg.inv(V), tuple(pairs), negative)


def _branch_ranges(eg: _Eigen, k_max: int, bounds=None):
    ranges, complete = [], True
    for n, (i, _) in enumerate(eg.pairs):
        th = float(np.angle(eg.lam[i]))
        if bounds is None:
            ranges.append(range(-k_max, k_max + 1))
            complete = False
            continue
        b = bounds[n]
        lo = math.ceil((-b - th) / (2 * math.pi))
        hi = math.floor((b - th) / (2 * math.pi))
        if lo < -k_max or hi > k_max:
            complete = False
        ranges.append(range(max(lo, -k_max), min(hi, k_max) + 1))
    return ranges, complete


def _candidates(a: np.ndarray, eg: _Eigen, ranges, tol: Tolerances):
    mu0 = np.log(eg.lam.astype(complex))
    out = []
    total = math.prod(len(r) for r in ranges) if ranges else 1
    if total > MAX_COMBOS:
        raise ValidationError(f"{total} branch combinations exceed the limit {MAX_COMBOS}")
    for ks in itertools.product(*ranges):
        mu = mu0.copy()
        for (i, j), k in zip(eg.pairs, ks):
            mu[i] = mu0[i] + 2j * math.pi * k
            mu[j] = np.conj(mu[i])
        L = (eg.V * mu) @ eg.Vinv
        if np.max(np.abs(L.imag)) > tol.imag * max(1.0, float(np.max(np.abs(L.real)))) * 1e2:
            continue
        L = L.real
        if inf_norm(expm(L) - a) <= tol.roundtrip:
            out.append((L, tuple(int(k) for k in ks)))
    return out


def real_log_branches(M, w: BranchWindow = BranchWindow(), tol: Tolerances = DEFAULT) -> list:
    """All real logarithms with branch index |k| <= k_max on each conjugate pair.

    Results are ordered by branch index tuple (lexicographic)."""
    a = M.values if isinstance(M, StochasticMatrix) else as_square(M)
    if not is_cyclic(a, tol):
        raise NotCyclic("matrix does not have simple spectrum")
    eg = _eigen(a, tol)
    if eg.negative:
        return []
    ranges, _ = _branch_ranges(eg, w.k_max)
    return [L for L, _ in _candidates(a, eg, ranges, tol)]


def filter_generators(cands, tol: float = DEFAULT.validation) -> list:
    """Keep the candidates that are rate matrices, smallest norm first."""
    keep = []
    for L in cands:
        try:
            keep.append(validate_generator(L, tol))
        except ValidationError:
            continue
    return sorted(keep, key=lambda q: inf_norm(q.values))


def imag_bounds(lam, det: float) -> list:
    """Cap on |Im mu| for each eigenvalue of a generator with e^Q = M."""
    B = -math.log(det)
    out = []
    for x in np.atleast_1d(lam):
        rho = math.log(abs(x))
        out.append(math.sqrt(max(0.0, -rho * (2.0 * B + rho))))
    return out


def search_embed(M, k_max: int = 8, tol: Tolerances = DEFAULT) -> EmbedVerdict:
    """Generators of a cyclic M found by branch enumeration."""
    a = M.values if isinstance(M, StochasticMatrix) else as_square(M)
    if not is_cyclic(a, tol):
        return undecided("branch_search: spectrum is not simple; branch search does not apply")
    det = float(np.linalg.det(a))
    if det <= 0:
        return not_embeddable(f"branch_search: det(M) = {det:.6g} <= 0")
    try:
        eg = _eigen(a, tol)
    except NotCyclic as exc:
        return undecided(f"branch_search: {exc}")
    if eg.negative:
        return not_embeddable("branch_search: simple negative eigenvalue has no real logarithm")
    slack = 1e-9
    bounds = [b + slack for b in imag_bounds(eg.lam[[i for i, _ in eg.pairs]], det)]
    ranges, complete = _branch_ranges(eg, BranchWindow(k_max).k_max, bounds)
    try:
        cands = _candidates(a, eg, ranges, tol)
    except ValidationError as exc:
        return undecided(f"branch_search: {exc}")
    gens = []
    for L, ks in cands:
        try:
            q = validate_generator(L, tol.validation * max(1.0, inf_norm(L)))
        except ValidationError:
            continue
        gens.append(Generator.build(q.values, a, "branch_search", branch=list(ks)))
    if gens:
        gens.sort(key=lambda g: inf_norm(g.matrix))
        return embeddable(gens)
    if complete:
        return not_embeddable("branch_search: no real logarithm inside the Gershgorin "
                              "window is a generator")
    return undecided(f"branch_search: none found with |k| <= {k_max}; window too small "
                     "to certify")

