"""Equal-input matrices M = (1 - c) 1 + C where C has identical rows
(c_1, ..., c_d) and c = sum c_i.

The same parameter set doubles as a generator description: Q = C - c 1.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import DEFAULT, Tolerances
from .errors import DegenerateSum, NotEqualInput
from .kendall2 import log_factor
from .matcore import StochasticMatrix, as_square, inf_norm, validate_stochastic
from .verdict import EmbedVerdict, Generator, embeddable, not_embeddable, undecided


@dataclass(frozen=True)
class EqualInputParams:
    c_vec: tuple
    c_sum: float
    constant_input: bool

    @classmethod
    def from_vector(cls, c_vec, tol: float = DEFAULT.validation) -> "EqualInputParams":
        v = np.asarray(c_vec, dtype=float)
        if np.any(v < -tol):
            raise NotEqualInput("equal-input parameters must be non-negative")
        v = np.maximum(v, 0.0)
        const = bool(np.ptp(v) <= tol)
        return cls(tuple(float(x) for x in v), float(v.sum()), const)

    @property
    def dim(self) -> int:
        return len(self.c_vec)

    @property
    def vec(self) -> np.ndarray:
        return np.array(self.c_vec)

    def admissible(self, tol: float = DEFAULT.validation) -> bool:
        """Markov admissibility of the matrix (1 - c) 1 + C."""
        return self.c_sum <= 1.0 + min(self.c_vec) + tol

    def matrix(self) -> np.ndarray:
        """The Markov matrix (1 - c) 1 + C."""
        d = self.dim
        return (1.0 - self.c_sum) * np.eye(d) + np.tile(self.vec, (d, 1))

    def generator(self) -> np.ndarray:
        """The rate matrix C - c 1."""
        d = self.dim
        return np.tile(self.vec, (d, 1)) - self.c_sum * np.eye(d)


def detect_equal_input(M, tol: float = DEFAULT.validation):
    """Parameters if every column is constant off the diagonal, else None."""
    a = M.values if isinstance(M, StochasticMatrix) else as_square(M)
    d = a.shape[0]
    off = ~np.eye(d, dtype=bool)
    cols = []
    for j in range(d):
        col = a[off[:, j], j]
        if np.ptp(col) > tol:
            return None
        cols.append(col.mean())
    p = EqualInputParams.from_vector(cols, tol)
    diag = 1.0 - p.c_sum + p.vec
    if np.any(np.abs(np.diag(a) - diag) > tol * d):
        return None
    return p


def ei_exp(Q: EqualInputParams) -> np.ndarray:
    """e^Q = 1 + ((1 - e^{-c}) / c) Q for the generator Q = C - c 1."""
    c = Q.c_sum
    f = 1.0 if c == 0.0 else -np.expm1(-c) / c
    return np.eye(Q.dim) + f * Q.generator()


def exp_params(Q: EqualInputParams) -> EqualInputParams:
    """Parameters of e^Q; the summatory parameter becomes 1 - e^{-c}."""
    c = Q.c_sum
    f = 1.0 if c == 0.0 else -np.expm1(-c) / c
    return EqualInputParams.from_vector(f * Q.vec)


def ei_embed(M, tol: Tolerances = DEFAULT) -> EmbedVerdict:
    S = M if isinstance(M, StochasticMatrix) else validate_stochastic(M, tol.validation)
    p = detect_equal_input(S, tol.validation)
    if p is None:
        raise NotEqualInput("matrix is not of equal-input type")
    a = S.values
    d = S.dim
    c = p.c_sum
    if abs(c - 1.0) <= tol.validation:
        return not_embeddable("equal_input: c = 1 gives det(M) = 0")
    if c < 1.0:
        Q = log_factor(c) * (a - np.eye(d))
        return embeddable([Generator.build(Q, a, "equal_input", c=c)])
    if d % 2 == 0:
        return not_embeddable(
            f"equal_input: d = {d} is even and c = {c:.6g} >= 1, so the "
            f"eigenvalue 1 - c < 0 has odd multiplicity {d - 1}")
    return undecided(f"equal_input: d = {d} is odd and c = {c:.6g} > 1; no equal-input "
                     "generator exists, other generators may",
                     "refer: classes3" if d == 3 else "refer: logsearch")


def ei_compose(p: EqualInputParams, q: EqualInputParams) -> EqualInputParams:
    """Parameters of M_p M_q: C'' = (1 - c') C + C'."""
    return EqualInputParams.from_vector((1.0 - q.c_sum) * p.vec + q.vec)


def ei_product_generator(Q: EqualInputParams, Q2: EqualInputParams) -> np.ndarray:
    """Equal-input generator Q'' with e^{Q''} = e^Q e^{Q2}."""
    c, c2 = Q.c_sum, Q2.c_sum
    if c + c2 <= 0.0:
        raise DegenerateSum("c + c' must be positive")
    if c == 0.0:
        return Q2.generator()
    if c2 == 0.0:
        return Q.generator()
    s = c + c2
    pref = s / (c * -np.expm1(-s))
    return pref * (np.exp(-c2) * -np.expm1(-c) * Q.generator()
                   + (c / c2) * -np.expm1(-c2) * Q2.generator())


def commutes_with_ei(X, Q: EqualInputParams, tol: float = 1e-10) -> bool:
    """[X, Q] = 0 for a rate matrix X iff (c_1, ..., c_d) X = 0."""
    x = as_square(X)
    return inf_norm((Q.vec @ x)[None, :]) <= tol
