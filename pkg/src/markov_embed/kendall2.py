"""Complete solution of the embedding problem for 2 x 2 Markov matrices."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import DEFAULT, Tolerances
from .errors import DimensionMismatch
from .matcore import StochasticMatrix, validate_stochastic
from .verdict import EmbedVerdict, Generator, embeddable, not_embeddable

REASON = "kendall: det(M) = 1 - a - b = {:.6g} must lie in (0, 1]"


@dataclass(frozen=True)
class TwoByTwoParams:
    a: float
    b: float

    @classmethod
    def from_matrix(cls, M) -> "TwoByTwoParams":
        m = np.asarray(M, dtype=float)
        return cls(float(m[0, 1]), float(m[1, 0]))


def _phi(s: float, t: float) -> float:
    """(1 - e^{-s t}) / s with the s -> 0 limit t."""
    if s == 0.0:
        return t
    return -np.expm1(-s * t) / s


def exp_2x2(alpha: float, beta: float, t: float = 1.0) -> np.ndarray:
    """e^{tQ} for Q = [[-alpha, alpha], [beta, -beta]]; t may be np.inf."""
    Q = np.array([[-alpha, alpha], [beta, -beta]], dtype=float)
    s = alpha + beta
    if np.isinf(t):
        if s == 0.0:
            return np.eye(2)
        return np.eye(2) + Q / s
    return np.eye(2) + _phi(s, t) * Q


def log_factor(c: float) -> float:
    """-log(1 - c) / c, accurate for small c and equal to 1 at c = 0."""
    if c == 0.0:
        return 1.0
    return -np.log1p(-c) / c


def embed_2x2(M, tol: Tolerances = DEFAULT) -> EmbedVerdict:
    """Embeddable iff a + b < 1; the generator is then unique."""
    S = M if isinstance(M, StochasticMatrix) else validate_stochastic(M, tol.validation)
    if S.dim != 2:
        raise DimensionMismatch(f"embed_2x2 needs d = 2, got {S.dim}")
    a = S.values
    p = TwoByTwoParams.from_matrix(a)
    s = p.a + p.b
    det = 1.0 - s
    if det <= tol.validation:
        return not_embeddable(REASON.format(det))
    Q = log_factor(s) * (a - np.eye(2))
    E = exp_2x2(Q[0, 1], Q[1, 0])
    return embeddable([Generator.build(Q, a, "kendall", exp_q=E, a=p.a, b=p.b)])
