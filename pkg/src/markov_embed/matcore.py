"""Validated matrix types, exp/log, spectra and algebraic structure probes."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .config import DEFAULT, Tolerances
from .errors import (
    ConvergenceFailure,
    DimensionMismatch,
    MetzlerViolation,
    NegativeEntry,
    RowSumViolation,
    SingularMatrixError,
    SpectrumOnCut,
    ValidationError,
)

MIN_DIM = 2
MAX_DIM = 16

# seeds for the Krylov probes; fixed so that results are reproducible
_KRYLOV_SEEDS = (20240117, 7, 991)


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float, copy=True)
    a.setflags(write=False)
    return a


def as_square(raw, *, check_dim: bool = True) -> np.ndarray:
    """Return ``raw`` as a finite float d x d array (no copy if possible)."""
    if isinstance(raw, (StochasticMatrix, RateMatrix)):
        return raw.values
    a = np.asarray(raw, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {a.shape}")
    if check_dim and not MIN_DIM <= a.shape[0] <= MAX_DIM:
        raise DimensionMismatch(f"dimension {a.shape[0]} outside [{MIN_DIM}, {MAX_DIM}]")
    if not np.all(np.isfinite(a)):
        raise ValidationError("matrix has non-finite entries")
    return a


@dataclass(frozen=True)
class StochasticMatrix:
    """Markov matrix: non-negative entries, unit row sums."""

    values: np.ndarray
    tol: float = DEFAULT.validation

    @property
    def dim(self) -> int:
        return self.values.shape[0]

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.values, dtype=dtype)


@dataclass(frozen=True)
class RateMatrix:
    """Markov generator: Metzler, zero row sums."""

    values: np.ndarray
    tol: float = DEFAULT.validation

    @property
    def dim(self) -> int:
        return self.values.shape[0]

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.values, dtype=dtype)


@dataclass(frozen=True)
class Spectrum:
    """Clustered eigenvalues of a real matrix.

    ``eigenvalues`` holds ``(value, multiplicity)`` pairs, real clusters
    first in descending order, then complex clusters by descending real part.
    """

    eigenvalues: tuple
    diagonalizable: bool
    min_poly_degree: int
    raw: np.ndarray = field(repr=False, default=None)

    @property
    def dim(self) -> int:
        return sum(m for _, m in self.eigenvalues)

    def values(self) -> np.ndarray:
        """Eigenvalues expanded by multiplicity."""
        out = []
        for lam, m in self.eigenvalues:
            out.extend([lam] * m)
        return np.array(out, dtype=complex)

    def is_simple(self) -> bool:
        return all(m == 1 for _, m in self.eigenvalues)


def validate_stochastic(raw, tol: float = DEFAULT.validation) -> StochasticMatrix:
    """Check and clean a Markov matrix.

    Entries in [-tol, 0) are clamped to 0 and rows are renormalised, which
    moves nothing by more than ``tol``.
    """
    a = as_square(raw)
    lo = a.min()
    if lo < -tol:
        i, j = np.unravel_index(np.argmin(a), a.shape)
        raise NegativeEntry(f"entry ({i},{j}) = {lo:.3g} is negative")
    rows = a.sum(axis=1)
    bad = np.abs(rows - 1.0) > tol
    if bad.any():
        i = int(np.argmax(bad))
        raise RowSumViolation(f"row {i} sums to {rows[i]:.17g}, not 1")
    a = np.clip(a, 0.0, 1.0)
    a = a / a.sum(axis=1, keepdims=True)
    return StochasticMatrix(_readonly(a), tol)


def validate_generator(raw, tol: float = DEFAULT.validation) -> RateMatrix:
    """Check and clean a rate matrix (Metzler, zero row sums)."""
    a = as_square(raw)
    d = a.shape[0]
    off = ~np.eye(d, dtype=bool)
    if np.any(a[off] < -tol):
        i, j = np.argwhere((a < -tol) & off)[0]
        raise MetzlerViolation(f"off-diagonal entry ({i},{j}) = {a[i, j]:.3g} is negative")
    rows = a.sum(axis=1)
    bad = np.abs(rows) > tol
    if bad.any():
        i = int(np.argmax(bad))
        raise RowSumViolation(f"row {i} sums to {rows[i]:.17g}, not 0")
    q = np.where(off, np.maximum(a, 0.0), 0.0)
    q[np.diag_indices(d)] = -q.sum(axis=1)
    return RateMatrix(_readonly(q), tol)


def is_generator(raw, tol: float = DEFAULT.validation) -> bool:
    try:
        validate_generator(raw, tol)
    except ValidationError:
        return False
    return True


# --- matrix exponential -------------------------------------------------

_PADE = {
    3: (120.0, 60.0, 12.0, 1.0),
    5: (30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0),
    7: (17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0),
    9: (17643225600.0, 8821612800.0, 2075673600.0, 302702400.0, 30270240.0,
        2162160.0, 110880.0, 3960.0, 90.0, 1.0),
    13: (64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
         1187353796428800.0, 129060195264000.0, 10559470521600.0,
         670442572800.0, 33522128640.0, 1323241920.0, 40840800.0,
         960960.0, 16380.0, 182.0, 1.0),
}
_THETA = {3: 1.495585217958292e-2, 5: 2.539398330063230e-1,
          7: 9.504178996162932e-1, 9: 2.097847961257068, 13: 5.371920351148152}


def _pade_uv(A: np.ndarray, m: int):
    b = _PADE[m]
    ident = np.eye(A.shape[0], dtype=A.dtype)
    A2 = A @ A
    if m < 13:
        pw = [ident, A2]
        for _ in range(2, m // 2 + 1):
            pw.append(pw[-1] @ A2)
        u = sum(b[2 * k + 1] * pw[k] for k in range(len(pw)))
        v = sum(b[2 * k] * pw[k] for k in range(len(pw)))
        return A @ u, v
    A4 = A2 @ A2
    A6 = A4 @ A2
    u = A @ (A6 @ (b[13] * A6 + b[11] * A4 + b[9] * A2)
             + b[7] * A6 + b[5] * A4 + b[3] * A2 + b[1] * ident)
    v = (A6 @ (b[12] * A6 + b[10] * A4 + b[8] * A2)
         + b[6] * A6 + b[4] * A4 + b[2] * A2 + b[0] * ident)
    return u, v


def _expm_array(A: np.ndarray) -> np.ndarray:
    norm1 = np.linalg.norm(A, 1)
    for m in (3, 5, 7, 9):
        if norm1 <= _THETA[m]:
            u, v = _pade_uv(A, m)
            return np.linalg.solve(v - u, v + u)
    s = max(0, int(np.ceil(np.log2(norm1 / _THETA[13])))) if norm1 > 0 else 0
    u, v = _pade_uv(A / 2.0**s, 13)
    X = np.linalg.solve(v - u, v + u)
    for _ in range(s):
        X = X @ X
    return X


def expm(A, t: float = 1.0) -> np.ndarray:
    """e^{tA} by scaling and squaring with diagonal Pade approximants."""
    if not np.isfinite(t):
        raise ValidationError("t must be finite")
    a = as_square(A, check_dim=False) if not np.iscomplexobj(A) else np.asarray(A)
    return _expm_array(t * a)


# --- principal logarithm ------------------------------------------------

def _sqrtm_db(X: np.ndarray, maxiter: int = 100) -> np.ndarray:
    """Principal square root via the determinant-scaled Denman-Beavers iteration."""
    d = X.shape[0]
    Y, Z = X.copy(), np.eye(d, dtype=X.dtype)
    scaled, last = True, np.inf
    for _ in range(maxiter):
        mu = 1.0
        if scaled:
            detyz = abs(np.linalg.det(Y) * np.linalg.det(Z))
            if detyz > 0:
                mu = detyz ** (-1.0 / (2 * d))
        Yi, Zi = np.linalg.inv(Y), np.linalg.inv(Z)
        Yn = 0.5 * (mu * Y + Zi / mu)
        Zn = 0.5 * (mu * Z + Yi / mu)
        delta = np.linalg.norm(Yn - Y, 1) / max(np.linalg.norm(Yn, 1), 1e-300)
        Y, Z = Yn, Zn
        if delta < 1e-2:
            scaled = False
        if not scaled and (delta < 1e-15 or (delta < 1e-11 and delta >= last)):
            return Y
        last = delta if not scaled else np.inf
    raise ConvergenceFailure("Denman-Beavers square root did not converge")


def _log1p_gauss(A: np.ndarray, nodes: int = 10) -> np.ndarray:
    """log(I + A) for ||A|| < 1 by Gauss-Legendre quadrature of
    the integral of A (I + tA)^{-1} over [0, 1] (a diagonal Pade form)."""
    x, w = np.polynomial.legendre.leggauss(nodes)
    t, w = 0.5 * (x + 1.0), 0.5 * w
    ident = np.eye(A.shape[0], dtype=A.dtype)
    out = np.zeros_like(A)
    for tj, wj in zip(t, w):
        out = out + wj * np.linalg.solve(ident + tj * A, A)
    return out


def principal_log(M, tol: Tolerances = DEFAULT) -> np.ndarray:
    """Principal matrix logarithm (eigenvalue imaginary parts in (-pi, pi))."""
    A = as_square(M, check_dim=False)
    w = np.linalg.eigvals(A)
    scale = max(1.0, float(np.max(np.abs(w))))
    if np.min(np.abs(w)) <= 1e3 * np.finfo(float).eps * scale:
        raise SingularMatrixError("matrix is singular; no logarithm exists")
    on_cut = (np.abs(w.imag) <= tol.cluster * scale) & (w.real < 0)
    if on_cut.any():
        lam = w[on_cut][0].real
        raise SpectrumOnCut(f"eigenvalue {lam:.6g} on the negative real axis")
    d = A.shape[0]
    ident = np.eye(d)
    X, k = A.copy(), 0
    while np.linalg.norm(X - ident, 1) >= 0.5:
        if k >= 64:
            raise ConvergenceFailure("too many square roots in inverse scaling")
        X = _sqrtm_db(X)
        k += 1
    return (2.0**k) * _log1p_gauss(X - ident)


# --- spectrum ---------------------------------------------------------

def _krylov_grade(A: np.ndarray, seed: int, tol: float) -> int:
    d = A.shape[0]
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(d)
    basis = [v / np.linalg.norm(v)]
    thresh = tol * max(np.linalg.norm(A), 1.0)
    for _ in range(d - 1):
        w = A @ basis[-1]
        for _pass in range(2):
            for b in basis:
                w = w - (b @ w) * b
        h = np.linalg.norm(w)
        if h <= thresh:
            break
        basis.append(w / h)
    return len(basis)


def _krylov_grades(A: np.ndarray, tol: float) -> list:
    return [_krylov_grade(A, s, tol) for s in _KRYLOV_SEEDS]


class _UnionFind:
    def __init__(self, n):
        self.parent = list(range(n))

    def find(self, i):
        while self.parent[i] != i:
            self.parent[i] = self.parent[self.parent[i]]
            i = self.parent[i]
        return i

    def union(self, i, j):
        ri, rj = self.find(i), self.find(j)
        if ri != rj:
            self.parent[max(ri, rj)] = min(ri, rj)


def _sort_key(lam: complex):
    return (abs(lam.imag) > 0, -lam.real, -lam.imag)


def spectrum(A, tol: Tolerances = DEFAULT) -> Spectrum:
    """Eigenvalues with algebraic multiplicities, diagonalisability and
    minimal polynomial degree, all decided at ``tol.cluster``."""
    a = as_square(A, check_dim=False)
    d = a.shape[0]
    try:
        w, V = np.linalg.eig(a)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(f"eigenvalue iteration failed: {exc}") from exc
    scale = 1.0 + float(np.max(np.abs(w)))
    V = V / np.linalg.norm(V, axis=0)
    uf = _UnionFind(d)
    loose = np.sqrt(tol.cluster)
    for i in range(d):
        for j in range(i + 1, d):
            gap = abs(w[i] - w[j])
            if gap <= tol.cluster * scale:
                uf.union(i, j)
            elif gap <= loose * scale:
                # a split Jordan block shows up as nearly parallel eigenvectors
                cos = abs(np.vdot(V[:, i], V[:, j]))
                if np.sqrt(max(0.0, 1.0 - cos * cos)) <= loose:
                    uf.union(i, j)
    groups = {}
    for i in range(d):
        groups.setdefault(uf.find(i), []).append(i)
    clusters = [list(g) for g in groups.values()]

    degree = max(_krylov_grades(a, tol.cluster))
    # the minimal polynomial has a root for every distinct eigenvalue, so
    # more clusters than the Krylov grade means some clusters are the same
    while len(clusters) > degree:
        best = None
        for p in range(len(clusters)):
            for q in range(p + 1, len(clusters)):
                gap = abs(w[clusters[p]].mean() - w[clusters[q]].mean())
                if best is None or gap < best[0]:
                    best = (gap, p, q)
        _, p, q = best
        clusters[p] = clusters[p] + clusters.pop(q)

    pairs = []
    for g in clusters:
        lam = complex(w[g].mean())
        if abs(lam.imag) <= tol.cluster * scale:
            lam = complex(lam.real, 0.0)
        pairs.append((lam, len(g)))
    pairs.sort(key=lambda p: _sort_key(p[0]))
    degree = min(max(degree, len(pairs)), d)
    return Spectrum(tuple(pairs), degree == len(pairs), degree, raw=w)


def alg_dimension(Q, tol: Tolerances = DEFAULT) -> int:
    """Dimension of span{Q, Q^2, ..., Q^{d-1}}."""
    q = as_square(Q, check_dim=False)
    d = q.shape[0]
    cols = []
    P = np.eye(d)
    for _ in range(1, d):
        P = P @ q
        nrm = np.linalg.norm(P)
        if nrm > 0:
            cols.append(P.ravel() / nrm)
    if not cols:
        return 0
    s = np.linalg.svd(np.column_stack(cols), compute_uv=False)
    if s[0] == 0:
        return 0
    return int(np.sum(s > tol.rank * s[0]))


def is_cyclic(A, tol: Tolerances = DEFAULT) -> bool:
    """True iff the minimal polynomial has degree d, confirmed by a
    full-rank Krylov basis on every one of the fixed random draws."""
    a = as_square(A, check_dim=False)
    return all(g == a.shape[0] for g in _krylov_grades(a, tol.cluster))


def inf_norm(A) -> float:
    return float(np.max(np.sum(np.abs(np.asarray(A)), axis=1)))


def residual(Q, M) -> float:
    """||e^Q - M||_inf."""
    return inf_norm(expm(Q) - np.asarray(M, dtype=float))


def commutator(A, B) -> np.ndarray:
    A, B = np.asarray(A), np.asarray(B)
    return A @ B - B @ A


def cyclic_shift(d: int) -> np.ndarray:
    """Permutation matrix P with P[i, i+1 mod d] = 1."""
    return np.roll(np.eye(d), 1, axis=1)


def K(d: int, r: int) -> np.ndarray:
    """Circulant generator K_r = P^r - 1."""
    return np.linalg.matrix_power(cyclic_shift(d), r % d) - np.eye(d)


def J(d: int) -> np.ndarray:
    """Constant-input generator with J^2 = -J, i.e. ones/d - 1."""
    return np.full((d, d), 1.0 / d) - np.eye(d)


def as_matrix_list(rows: Sequence[Sequence[float]]) -> np.ndarray:
    return as_square(np.array(rows, dtype=float))
