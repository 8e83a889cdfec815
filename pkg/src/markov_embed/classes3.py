"""Symmetric, constant-input and doubly stochastic 3 x 3 matrices.

Parametrisations used throughout::

    M = [[1-a-b, a+e,   b-e  ],        Q = [[-al-be, al+ep,  be-ep ],
         [a-e,   1-a-c, c+e  ],             [al-ep,  -al-ga, ga+ep ],
         [b+e,   c-e,   1-b-c]]             [be+ep,  ga-ep,  -be-ga]]

with e = 0 (ep = 0) in the symmetric case.  For the generator, with
D = al+be+ga and s^2 = al^2+be^2+ga^2-al*be-be*ga-ga*al-3 ep^2,

    e^Q = (1 - S D e^{-D}) I3 - C e^{-D} J3 + S e^{-D} (Q + D 1)

where I3 = ones/3, J3 = I3 - 1, S = sinh(s)/s and C = cosh(s).  When
s^2 < 0 these become sin/cos of |s|, so the formula stays real.
"""
from __future__ import annotations

import math
from dataclasses import astuple, dataclass

import numpy as np

from .config import DEFAULT, Tolerances
from .equalinput import detect_equal_input
from .errors import (
    ConsistencyError,
    ConstraintViolation,
    DimensionMismatch,
    NotCyclic,
    NotDoublyStochastic,
    OutOfDomain,
    SingularMatrixError,
    SpectrumOnCut,
)
from .logsearch import _candidates, _eigen, _branch_ranges
from .matcore import (
    J,
    StochasticMatrix,
    alg_dimension,
    inf_norm,
    is_generator,
    principal_log,
    residual,
    spectrum,
    validate_generator,
    validate_stochastic,
)
from .newton import damped_newton
from .verdict import EmbedVerdict, Generator, embeddable, not_embeddable, undecided

SQRT3 = math.sqrt(3.0)
PI_SQRT3 = math.pi / SQRT3
EXCEPTIONAL_MAX = 1.0 + math.exp(-math.pi * SQRT3)

I3 = np.full((3, 3), 1.0 / 3.0)
J3 = J(3)
T = PI_SQRT3 * np.array([[0.0, 1.0, -1.0], [-1.0, 0.0, 1.0], [1.0, -1.0, 0.0]])

DEG1, DEG2_DOUBLE1, DEG2_SIMPLE1, DEG3 = "deg1", "deg2_double1", "deg2_simple1", "deg3"


@dataclass(frozen=True)
class SymParams:
    a: float
    b: float
    c: float

    def matrix(self) -> np.ndarray:
        return dstoch_matrix(self.a, self.b, self.c, 0.0)


@dataclass(frozen=True)
class DStochParams:
    a: float
    b: float
    c: float
    e: float = 0.0

    @classmethod
    def from_matrix(cls, M) -> "DStochParams":
        m = np.asarray(M, dtype=float)
        a = 0.5 * (m[0, 1] + m[1, 0])
        b = 0.5 * (m[0, 2] + m[2, 0])
        c = 0.5 * (m[1, 2] + m[2, 1])
        e = (m[0, 1] - m[1, 0] + m[1, 2] - m[2, 1] + m[2, 0] - m[0, 2]) / 6.0
        return cls(float(a), float(b), float(c), float(e))

    def matrix(self) -> np.ndarray:
        return dstoch_matrix(self.a, self.b, self.c, self.e)


def dstoch_matrix(a, b, c, e=0.0) -> np.ndarray:
    return np.array([[1 - a - b, a + e, b - e],
                     [a - e, 1 - a - c, c + e],
                     [b + e, c - e, 1 - b - c]], dtype=float)


def dstoch_generator(alpha, beta, gamma, eps=0.0) -> np.ndarray:
    return np.array([[-alpha - beta, alpha + eps, beta - eps],
                     [alpha - eps, -alpha - gamma, gamma + eps],
                     [beta + eps, gamma - eps, -beta - gamma]], dtype=float)


def generator_params(Q):
    """(alpha, beta, gamma, eps) of a doubly stochastic 3 x 3 generator."""
    p = DStochParams.from_matrix(Q)
    return p.a, p.b, p.c, p.e


def _s2(alpha, beta, gamma, eps=0.0) -> float:
    return (alpha * alpha + beta * beta + gamma * gamma
            - alpha * beta - beta * gamma - gamma * alpha - 3.0 * eps * eps)


def sinhc_cosh(s2: float, delta: float = 0.0):
    """(e^{-delta} sinh(s)/s, e^{-delta} cosh(s)) as functions of s^2.

    Even power series near s = 0; sin/cos for s^2 < 0."""
    if abs(s2) < 0.25:
        sh, ch, term_s, term_c = 0.0, 0.0, 1.0, 1.0
        for k in range(12):
            sh += term_s
            ch += term_c
            term_s *= s2 / ((2 * k + 2) * (2 * k + 3))
            term_c *= s2 / ((2 * k + 1) * (2 * k + 2))
        ed = math.exp(-delta)
        return sh * ed, ch * ed
    if s2 > 0:
        s = math.sqrt(s2)
        up, dn = math.exp(s - delta), math.exp(-s - delta)
        return 0.5 * (up - dn) / s, 0.5 * (up + dn)
    s = math.sqrt(-s2)
    ed = math.exp(-delta)
    return math.sin(s) / s * ed, math.cos(s) * ed


def dstoch_exp(alpha, beta, gamma, eps=0.0, tol: float = DEFAULT.validation) -> np.ndarray:
    """Closed-form exponential of the doubly stochastic generator."""
    if abs(eps) > min(alpha, beta, gamma) + tol:
        raise ConstraintViolation(f"|eps| = {abs(eps):.6g} exceeds min(alpha, beta, gamma)")
    delta = alpha + beta + gamma
    se, ce = sinhc_cosh(_s2(alpha, beta, gamma, eps), delta)
    N = dstoch_generator(alpha, beta, gamma, eps) + delta * np.eye(3)
    return (1.0 - se * delta) * I3 - ce * J3 + se * N


def sym_exp(alpha, beta, gamma) -> np.ndarray:
    """Closed-form exponential of the symmetric generator."""
    return dstoch_exp(alpha, beta, gamma, 0.0)


def dstoch_vector(params) -> np.ndarray:
    """(a, b, c, e) of e^Q for Q with parameters (alpha, beta, gamma, eps)."""
    alpha, beta, gamma, eps = params
    delta = alpha + beta + gamma
    se, ce = sinhc_cosh(_s2(alpha, beta, gamma, eps), delta)
    base = (1.0 - se * delta - ce) / 3.0
    return np.array([base + se * alpha, base + se * beta, base + se * gamma, se * eps])


def projectors(alpha, beta, gamma):
    """Spectral projectors of the symmetric generator for 0, -D+s, -D-s."""
    delta = alpha + beta + gamma
    s = math.sqrt(max(_s2(alpha, beta, gamma), 0.0))
    if s == 0.0:
        raise SingularMatrixError("s = 0: the two non-zero eigenvalues coincide")
    N = dstoch_generator(alpha, beta, gamma) + delta * np.eye(3)
    P0 = I3.copy()
    Pp = -0.5 * J3 - delta / (2 * s) * I3 + N / (2 * s)
    Pm = -0.5 * J3 + delta / (2 * s) * I3 - N / (2 * s)
    return P0, Pp, Pm


# --- symmetric case ---------------------------------------------------------

@dataclass(frozen=True)
class SymNecessity:
    det_ok: bool
    trace_ok: bool
    eigen_ok: bool

    @property
    def overall(self) -> bool:
        return self.det_ok and self.trace_ok and self.eigen_ok


def sym_necessary(p) -> SymNecessity:
    """Three polynomial screens valid for every symmetric generator."""
    a, b, c = (p.a, p.b, p.c) if isinstance(p, (SymParams, DStochParams)) else p
    q = a * b + a * c + b * c
    t = a + b + c
    return SymNecessity(3 * q <= 2 * t < 1 + 3 * q, 0 <= t < 1, 0 <= 3 * q < 1)


def _as_matrix3(M, tol: Tolerances) -> np.ndarray:
    if isinstance(M, (SymParams, DStochParams)):
        M = M.matrix()
    S = M if isinstance(M, StochasticMatrix) else validate_stochastic(M, tol.validation)
    if S.dim != 3:
        raise DimensionMismatch(f"expected d = 3, got {S.dim}")
    return S.values


def _polished_generator(a, Q0, tol: Tolerances, provenance: str):
    """Newton-polish a doubly stochastic generator against the parameter
    equation and return a verified Generator (or None)."""
    target = np.array(astuple(DStochParams.from_matrix(a)), dtype=float)
    x0 = np.array(generator_params(Q0))
    F = lambda x: dstoch_vector(x) - target
    r0 = float(np.max(np.abs(F(x0))))
    x = x0
    if r0 > tol.newton:
        res = damped_newton(F, x0, tol=tol.newton)
        if res.residual < r0:
            x = res.x
    Q = dstoch_generator(*x)
    if not is_generator(Q, tol.validation * max(1.0, inf_norm(Q))):
        Q = Q0
        x = x0
    names = ("alpha", "beta", "gamma", "eps")
    g = Generator.build(Q, a, provenance, **{k: float(v) for k, v in zip(names, x)})
    return g if g.residual <= tol.roundtrip else None


def _fact_zero_pattern(a: np.ndarray, p: DStochParams, tol: Tolerances) -> EmbedVerdict:
    """Symmetric and not positive: exactly one non-zero rate below 1/2."""
    vals = (p.a, p.b, p.c)
    pair_sum = p.a * p.b + p.b * p.c + p.c * p.a
    if pair_sum > tol.validation or max(vals) >= 0.5 - tol.validation:
        return not_embeddable(
            "symmetric: a non-positive symmetric matrix needs ab + bc + ca = 0 and "
            f"max(a, b, c) < 1/2 (got ab+bc+ca = {pair_sum:.3g}, max = {max(vals):.6g})")
    Q = principal_log(a)
    g = _polished_generator(a, Q, tol, "symmetric")
    if g is None:
        return undecided("symmetric: block generator failed to verify")
    return embeddable([g])


def sym_embed(M, tol: Tolerances = DEFAULT, k_max: int = 8) -> EmbedVerdict:
    a = _as_matrix3(M, tol)
    if np.max(np.abs(a - a.T)) > tol.validation:
        raise ConstraintViolation("matrix is not symmetric")
    p = DStochParams.from_matrix(a)
    if np.min(a) <= tol.validation:
        return _fact_zero_pattern(a, p, tol)
    w = np.linalg.eigvalsh(0.5 * (a + a.T))
    if w.min() <= tol.envelope:
        # negative spectrum rules out symmetric generators; others may exist
        return dstoch_embed(a, tol, k_max)
    # exp is injective on symmetric matrices, so the only symmetric
    # candidate is the principal logarithm
    vals, vecs = np.linalg.eigh(0.5 * (a + a.T))
    L = (vecs * np.log(vals)) @ vecs.T
    if not is_generator(L, tol.validation * max(1.0, inf_norm(L))):
        return not_embeddable("symmetric: the unique symmetric logarithm is not a generator")
    g = _polished_generator(a, L, tol, "symmetric")
    if g is None:
        return undecided("symmetric: generator failed to verify", residual=residual(L, a))
    return embeddable([g])


# --- constant-input exceptional case ------------------------------------------

def const_input_exceptional(c_M: float, tol: Tolerances = DEFAULT) -> EmbedVerdict:
    """Constant-input M = 1 + c_M J3 with c_M > 1."""
    if c_M <= 1.0:
        raise OutOfDomain(f"c_M = {c_M} must exceed 1")
    M = np.eye(3) + c_M * J3
    if c_M > EXCEPTIONAL_MAX + tol.boundary:
        return not_embeddable(f"constant_input: c_M = {c_M:.10g} exceeds 1 + e^(-pi sqrt3) "
                              f"= {EXCEPTIONAL_MAX:.10g}")
    alpha = -math.log(c_M - 1.0) / 3.0
    alpha = max(alpha, PI_SQRT3) if alpha >= PI_SQRT3 - tol.boundary else alpha
    Q = 3.0 * alpha * J3 + T
    return embeddable([Generator.build(Q, M, "doubly_stochastic", alpha=alpha, branch=0)])


def multi_embeddings(c_M: float, k_max: int = 8, tol: Tolerances = DEFAULT) -> list:
    """Doubly stochastic generators of the constant-input matrix 1 + c_M J3,
    ascending branch index (non-negative indices only)."""
    M = np.eye(3) + c_M * J3
    out = []
    if 0.0 <= c_M < 1.0:
        alpha = -math.log1p(-c_M) / 3.0
        for m in range(k_max + 1):
            if alpha < 2 * m * PI_SQRT3 - tol.boundary:
                break
            out.append(3.0 * alpha * J3 + 2 * m * T)
    elif 1.0 < c_M <= EXCEPTIONAL_MAX + tol.boundary:
        alpha = max(-math.log(c_M - 1.0) / 3.0, PI_SQRT3)
        for k in range(k_max + 1):
            if alpha < (2 * k + 1) * PI_SQRT3 - tol.boundary:
                break
            out.append(3.0 * alpha * J3 + (2 * k + 1) * T)
    else:
        raise OutOfDomain(f"c_M = {c_M} is outside [0, 1) and (1, 1 + e^(-pi sqrt3)]")
    gens = []
    for Q in out:
        if residual(Q, M) > 1e-9:
            raise ConsistencyError("multi-embedding failed its round trip")
        gens.append(validate_generator(Q, tol.validation * max(1.0, inf_norm(Q))))
    return gens


# --- doubly stochastic case --------------------------------------------------

def min_poly_case(M, tol: Tolerances = DEFAULT) -> str:
    a = _as_matrix3(M, tol)
    A = a - np.eye(3)
    dim = alg_dimension(A, tol)
    if dim == 0 or inf_norm(A) <= tol.validation:
        return DEG1
    if dim == 1:
        # A^2 = -cA: rank 1 means the eigenvalue 1 of M is double
        s = np.linalg.svd(A, compute_uv=False)
        rank = int(np.sum(s > tol.rank * s[0]))
        if rank == 1:
            return DEG2_DOUBLE1
        if detect_equal_input(a, max(tol.validation, 1e-8)) is None:
            raise ConsistencyError("simple eigenvalue 1 with quadratic minimal polynomial "
                                   "but M is not equal-input")
        return DEG2_SIMPLE1
    return DEG3


def _check_doubly(a: np.ndarray, tol: Tolerances):
    if np.max(np.abs(a.sum(axis=0) - 1.0)) > 3 * tol.validation:
        raise NotDoublyStochastic("column sums differ from 1")


def dstoch_embed(M, tol: Tolerances = DEFAULT, k_max: int = 8) -> EmbedVerdict:
    a = _as_matrix3(M, tol)
    _check_doubly(a, tol)
    p = DStochParams.from_matrix(a)
    case = min_poly_case(a, tol)
    if case == DEG1:
        return embeddable([Generator.build(np.zeros((3, 3)), a, "doubly_stochastic",
                                           alpha=0.0, beta=0.0, gamma=0.0, eps=0.0)])
    if case == DEG2_DOUBLE1:
        if abs(p.e) > tol.validation:
            return not_embeddable("doubly_stochastic: double eigenvalue 1 forces e = 0")
        return _fact_zero_pattern(a, p, tol)
    if case == DEG2_SIMPLE1:
        c_M = 3.0 * (a[0, 1] + a[0, 2] + a[1, 2]) / 3.0
        if abs(c_M - 1.0) <= tol.validation:
            return not_embeddable("doubly_stochastic: c_M = 1 gives det(M) = 0")
        if c_M > EXCEPTIONAL_MAX + tol.boundary:
            return not_embeddable(
                f"doubly_stochastic: constant-input c_M = {c_M:.10g} exceeds "
                f"1 + e^(-pi sqrt3) = {EXCEPTIONAL_MAX:.10g}")
        gens = [Generator.build(q.values, a, "doubly_stochastic", branch=n)
                for n, q in enumerate(multi_embeddings(c_M, k_max, tol))]
        return embeddable(gens)
    return _deg3(a, tol, k_max)


def _deg3(a: np.ndarray, tol: Tolerances, k_max: int) -> EmbedVerdict:
    spec = spectrum(a, tol)
    if spec.diagonalizable:
        try:
            eg = _eigen(a, tol)
        except (NotCyclic, SingularMatrixError) as exc:
            return undecided(f"doubly_stochastic: {exc}")
        if eg.negative:
            return not_embeddable("doubly_stochastic: simple negative eigenvalue has no "
                                  "real logarithm")
        bounds = []
        for i, _ in eg.pairs:
            # |Im s_eps| <= Delta / sqrt3 with Delta = -log|lambda|
            bounds.append(-math.log(abs(eg.lam[i])) / SQRT3 + 1e-9)
        ranges, complete = _branch_ranges(eg, max(k_max, 64), bounds)
        gens = []
        for L, ks in _candidates(a, eg, ranges, tol):
            if not is_generator(L, tol.validation * max(1.0, inf_norm(L))):
                continue
            g = _polished_generator(a, L, tol, "doubly_stochastic")
            if g is not None:
                gens.append(g)
        if gens:
            gens.sort(key=lambda g: inf_norm(g.matrix))
            return embeddable(gens)
        if complete:
            return not_embeddable("doubly_stochastic: no logarithm branch with "
                                  "|Im s| <= Delta/sqrt3 is a generator")
        return undecided("doubly_stochastic: branch window too small")
    # one defective real eigenvalue of multiplicity 2
    lam = [v for v, m in spec.eigenvalues if m == 2]
    lam = lam[0].real if lam else None
    if lam is not None and lam < 0:
        return not_embeddable("doubly_stochastic: a Jordan block with negative eigenvalue "
                              "has no real logarithm")
    try:
        L = principal_log(a, tol)
    except (SpectrumOnCut, SingularMatrixError) as exc:
        return not_embeddable(f"doubly_stochastic: {exc}")
    if not is_generator(L, tol.validation * max(1.0, inf_norm(L))):
        return not_embeddable("doubly_stochastic: the only real logarithm (Jordan case) "
                              "is not a generator")
    relaxed = Tolerances(**{**tol.__dict__, "roundtrip": max(tol.roundtrip, 1e-8)})
    g = _polished_generator(a, L, relaxed, "doubly_stochastic")
    return embeddable([g]) if g is not None else undecided(
        "doubly_stochastic: Jordan-case generator failed to verify")


# --- vectorised region test ----------------------------------------------------

def region_sym3(a, b, c, tol: Tolerances = DEFAULT) -> np.ndarray:
    """Labels for the symmetric matrix with off-diagonal entries a, b, c."""
    from .circulant import EMBEDDABLE, ENVELOPE, INVALID, NOT_EMBEDDABLE
    a, b, c = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (a, b, c)))
    shape = a.shape
    a, b, c = a.ravel(), b.ravel(), c.ravel()
    M = np.empty((a.size, 3, 3))
    M[:, 0] = np.stack([1 - a - b, a, b], axis=1)
    M[:, 1] = np.stack([a, 1 - a - c, c], axis=1)
    M[:, 2] = np.stack([b, c, 1 - b - c], axis=1)
    valid = ((np.minimum(np.minimum(a, b), c) >= -tol.validation)
             & (np.maximum(np.maximum(a + b, a + c), b + c) <= 1 + tol.validation))
    w, V = np.linalg.eigh(M)
    env = valid & (np.min(np.abs(w), axis=1) <= tol.envelope)
    pos = valid & ~env & (w.min(axis=1) > 0)
    logw = np.log(np.where(pos[:, None], w, 1.0))
    L = np.einsum("nij,nj,nkj->nik", V, logw, V)
    off = np.array([[0, 1], [0, 2], [1, 2]])
    lmin = L[:, off[:, 0], off[:, 1]].min(axis=1)
    scale = np.maximum(1.0, np.abs(L).max(axis=(1, 2)))
    emb = pos & (lmin >= -tol.validation * scale)
    # negative double eigenvalue: only the exceptional constant-input family
    const = (np.abs(a - b) <= tol.validation) & (np.abs(b - c) <= tol.validation)
    cm = a + b + c
    exc = valid & ~env & const & (cm > 1 + tol.validation) & (cm <= EXCEPTIONAL_MAX + tol.boundary)
    out = np.full(a.size, NOT_EMBEDDABLE, dtype=object)
    out[emb | exc] = EMBEDDABLE
    out[env] = ENVELOPE
    out[~valid] = INVALID
    return out.reshape(shape)
