"""Circulant Markov matrices M = 1 + sum_r x_r K_r with K_r = P^r - 1.

Every circulant matrix is diagonalised by the discrete Fourier basis, so the
eigenvalues of M are lambda_m = sum_r c_r w^{rm} (w = e^{2 pi i/d},
c_0 = 1 - sum x).  A circulant generator Q = sum alpha_r K_r has eigenvalues
mu_m = sum_r alpha_r (w^{rm} - 1).  Embedding therefore amounts to choosing
a logarithm branch for every conjugate pair lambda_m, lambda_{d-m} and
checking that the inverse transform of the mu_m is non-negative.  The sum
of the rates is fixed by |lambda_m| alone and bounds |Im mu_m|, which makes
the branch search finite.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .config import DEFAULT, Tolerances
from .errors import ConsistencyError, DimensionTooLarge, ValidationError
from .matcore import K, StochasticMatrix, as_square, expm, inf_norm
from .newton import damped_newton, log_grid, multistart
from .verdict import EmbedVerdict, Generator, embeddable, not_embeddable, undecided

SQRT3 = math.sqrt(3.0)
MAX_GENERAL_DIM = 12
MAX_BRANCH_COMBOS = 200_000

# region labels shared with the rasteriser
INVALID, EMBEDDABLE, NOT_EMBEDDABLE, ENVELOPE = "invalid", "embeddable", "not_embeddable", "envelope"


@dataclass(frozen=True)
class CirculantCoeffs:
    dim: int
    x: tuple

    def __post_init__(self):
        if len(self.x) != self.dim - 1:
            raise ValidationError(f"need {self.dim - 1} coefficients, got {len(self.x)}")

    def matrix(self) -> np.ndarray:
        return circ_matrix(self.x)

    def valid(self, tol: float = DEFAULT.validation) -> bool:
        x = np.asarray(self.x)
        return bool(np.all(x >= -tol) and x.sum() <= 1.0 + tol)


@dataclass(frozen=True)
class CirculantRates:
    dim: int
    alpha: tuple

    def __post_init__(self):
        if len(self.alpha) != self.dim - 1:
            raise ValidationError(f"need {self.dim - 1} rates, got {len(self.alpha)}")

    def generator(self) -> np.ndarray:
        return circ_matrix(self.alpha) - np.eye(self.dim)


def circ_matrix(x) -> np.ndarray:
    """1 + sum_r x_r K_r, i.e. the circulant matrix with first row (1 - sum x, x)."""
    x = np.asarray(x, dtype=float)
    d = x.size + 1
    row = np.concatenate([[1.0 - x.sum()], x])
    return np.array([np.roll(row, i) for i in range(d)])


def detect_circulant(M, tol: float = DEFAULT.validation):
    """Coefficients if every row is the cyclic right shift of the previous."""
    a = M.values if isinstance(M, StochasticMatrix) else as_square(M)
    d = a.shape[0]
    for i in range(1, d):
        if np.max(np.abs(a[i] - np.roll(a[0], i))) > tol:
            return None
    return CirculantCoeffs(d, tuple(float(v) for v in a[0, 1:]))


def eigenvalues(x) -> np.ndarray:
    """lambda_m = sum_r c_r w^{rm}, m = 0..d-1."""
    x = np.asarray(x, dtype=float)
    c = np.concatenate([[1.0 - x.sum()], x])
    return np.fft.ifft(c) * c.size


# --- cyclic decomposition of the exponential -------------------------------

def f_char(d: int, m: int, t: float, check: float = 1e-12) -> float:
    """f^(d)_m(t) = sum_l t^{ld+m} / (ld+m)!, evaluated as the character sum
    (1/d) sum_l w^{-ml} e^{w^l t}."""
    ell = np.arange(d)
    w = np.exp(2j * np.pi * ell / d)
    terms = np.exp(-2j * np.pi * m * ell / d) * np.exp(w * t) / d
    val = terms.sum()
    size = max(1.0, float(np.abs(terms).sum()))
    if abs(val.imag) > check * size:
        raise ConsistencyError(f"imaginary residue {val.imag:.3g} in f^({d})_{m}({t})")
    return float(val.real)


def f_all(d: int, t: float) -> np.ndarray:
    """Vector (f^(d)_0(t), ..., f^(d)_{d-1}(t))."""
    ell = np.arange(d)
    w = np.exp(2j * np.pi * ell / d)
    # f_m = (1/d) sum_l w^{-ml} e^{w^l t} is a forward DFT
    return (np.fft.fft(np.exp(w * t)) / d).real


def _a_coeffs(alpha: np.ndarray) -> np.ndarray:
    """a_r as a cyclic convolution over the residues r, one rate at a time."""
    d = alpha.size + 1
    acc = np.zeros(d)
    acc[0] = 1.0
    idx = np.arange(d)
    for j, aj in enumerate(alpha, start=1):
        f = f_all(d, aj)
        new = np.zeros(d)
        for m in range(d):
            # e^{a_j P^j} contributes f_m(a_j) P^{jm}
            new += f[m] * acc[(idx - j * m) % d]
        acc = new
    return acc


def circ_general_exp(rates) -> CirculantCoeffs:
    """Coefficients x_r = e^{alpha_0} a_r of exp(sum alpha_r K_r)."""
    alpha = np.asarray(rates.alpha if isinstance(rates, CirculantRates) else rates, dtype=float)
    d = alpha.size + 1
    if d > MAX_GENERAL_DIM:
        raise DimensionTooLarge(f"d = {d} exceeds {MAX_GENERAL_DIM}")
    a = _a_coeffs(alpha)
    x = np.exp(-alpha.sum()) * a[1:]
    return CirculantCoeffs(d, tuple(float(v) for v in x))


def circ_jacobian(alpha) -> np.ndarray:
    """d x_r / d alpha_j, using d/d alpha_j e^Q = K_j e^Q for commuting K_j."""
    alpha = np.asarray(alpha, dtype=float)
    d = alpha.size + 1
    M = expm(circ_matrix(alpha) - np.eye(d))
    return np.array([[(K(d, j) @ M)[0, r] for j in range(1, d)] for r in range(1, d)])


def circ3_exp(alpha: float, beta: float):
    """(x, y) with exp(alpha K_1 + beta K_2) = 1 + x K_1 + y K_2."""
    def x_of(a, b):
        g = 1.5 * (a + b)
        dl = 0.5 * SQRT3 * (a - b)
        return (1.0 + 2.0 * math.exp(-g) * math.cos(dl - 2.0 * math.pi / 3.0)) / 3.0
    return x_of(alpha, beta), x_of(beta, alpha)


def circ4_exp(alpha: float, beta: float, gamma: float):
    """(x, y, z) with exp(alpha K_1 + beta K_2 + gamma K_3) = 1 + x K_1 + y K_2 + z K_3."""
    s = alpha + gamma
    pre = 0.5 * math.exp(-s)
    e2b = math.exp(-2.0 * beta)
    x = pre * (math.sinh(s) + e2b * math.sin(alpha - gamma))
    y = pre * (math.cosh(s) - e2b * math.cos(alpha - gamma))
    z = pre * (math.sinh(s) - e2b * math.sin(alpha - gamma))
    return x, y, z


# --- branch enumeration ----------------------------------------------------

@dataclass(frozen=True)
class _BranchResult:
    status: str                 # ok | envelope | negative
    candidates: tuple = ()      # (alpha, branch indices)
    complete: bool = True
    rate_sum: float = float("nan")


def _branches(x, tol: Tolerances, k_max: int) -> _BranchResult:
    x = np.asarray(x, dtype=float)
    d = x.size + 1
    lam = eigenvalues(x)
    mags = np.abs(lam)
    if mags[1:].min() <= tol.envelope:
        return _BranchResult("envelope")
    if d % 2 == 0 and lam[d // 2].real < 0:
        return _BranchResult("negative")
    total = -float(np.log(mags).sum()) / d   # sum of all rates
    slack = tol.validation * max(1.0, total)
    base = np.log(lam.astype(complex))
    base[0] = 0.0
    if d % 2 == 0:
        base[d // 2] = complex(base[d // 2].real, 0.0)
    free = list(range(1, (d - 1) // 2 + 1))
    ranges, complete = [], True
    for m in free:
        th = base[m].imag
        lo = math.ceil((-total - slack - th) / (2 * math.pi))
        hi = math.floor((total + slack - th) / (2 * math.pi))
        if lo < -k_max or hi > k_max:
            complete = False
        lo, hi = max(lo, -k_max), min(hi, k_max)
        ranges.append(range(lo, hi + 1))
    if math.prod(len(r) for r in ranges) > MAX_BRANCH_COMBOS:
        return _BranchResult("ok", (), False, total)
    cands = []
    for ks in itertools.product(*ranges):
        mu = base.copy()
        for m, k in zip(free, ks):
            mu[m] = base[m] + 2j * math.pi * k
            mu[d - m] = np.conj(mu[m])
        alpha = np.fft.fft(mu)[1:] / d
        if np.any(np.abs(alpha.imag) > max(tol.imag, 1e-12 * total) * 10):
            continue
        alpha = alpha.real
        if alpha.min() >= -slack:
            cands.append((np.maximum(alpha, 0.0), tuple(int(k) for k in ks)))
    return _BranchResult("ok", tuple(cands), complete, total)


def _polish(alpha, target, exp_fn, jac_fn, tol: Tolerances):
    target = np.asarray(target, dtype=float)
    F = lambda a: np.asarray(exp_fn(a)) - target
    r = float(np.max(np.abs(F(alpha))))
    if r <= tol.newton:
        return np.asarray(alpha), r
    res = damped_newton(F, alpha, jac_fn, tol.newton, lower=np.zeros_like(alpha))
    if res.residual < r:
        return res.x, res.residual
    return np.asarray(alpha), r


def _embed_coeffs(x, tol: Tolerances, k_max: int, exp_fn, label: str) -> EmbedVerdict:
    x = np.asarray(x, dtype=float)
    d = x.size + 1
    if np.any(x < -tol.validation) or x.sum() > 1.0 + tol.validation:
        raise ValidationError(f"{label}: coefficients {x} are not a valid circulant Markov matrix")
    if np.all(np.abs(x) <= tol.validation):
        M = np.eye(d)
        return embeddable([Generator.build(np.zeros((d, d)), M, "circulant",
                                           alpha=[0.0] * (d - 1))])
    br = _branches(x, tol, k_max)
    if br.status == "envelope":
        return not_embeddable(f"{label}: det(M) = 0, an eigenvalue vanishes",
                              notes=("envelope-adjacent",))
    if br.status == "negative":
        return not_embeddable(f"{label}: the real eigenvalue lambda_{d // 2} is negative, "
                              "but every circulant generator makes it positive")
    M = circ_matrix(x)
    jac = circ_jacobian
    gens, worst = [], 0.0
    for alpha, ks in br.candidates:
        alpha, r = _polish(alpha, x, exp_fn, jac, tol)
        Q = circ_matrix(alpha) - np.eye(d)
        g = Generator.build(Q, M, "circulant", alpha=[float(v) for v in alpha],
                            branch=list(ks))
        if g.residual <= tol.roundtrip:
            gens.append(g)
        else:
            worst = max(worst, g.residual)
    if gens:
        gens.sort(key=lambda g: inf_norm(g.matrix))
        return embeddable(gens)
    if br.candidates:
        return undecided(f"{label}: branch candidates failed to verify", residual=worst)
    if not br.complete:
        # branch window truncated: fall back to multi-start Newton before giving up
        seeds = log_grid(8 if d <= 3 else 3, d - 1)
        F = lambda a: np.asarray(exp_fn(a)) - x
        best = multistart(F, seeds, jac, tol.newton, lower=np.zeros(d - 1))[0]
        if best.converged:
            Q = circ_matrix(best.x) - np.eye(d)
            g = Generator.build(Q, M, "circulant", alpha=[float(v) for v in best.x])
            if g.residual <= tol.roundtrip:
                return embeddable([g])
        return undecided(f"{label}: branch window k_max = {k_max} is too small to "
                         "certify the outcome", residual=best.residual)
    return not_embeddable(f"{label}: no logarithm branch with |Im mu| <= {br.rate_sum:.6g} "
                          "gives non-negative rates")


def circ3_embed(x: float, y: float, tol: Tolerances = DEFAULT, k_max: int = 8) -> EmbedVerdict:
    return _embed_coeffs([x, y], tol, k_max, lambda a: circ3_exp(*a), "circulant3")


def circ4_embed(x: float, y: float, z: float, tol: Tolerances = DEFAULT,
                k_max: int = 8) -> EmbedVerdict:
    return _embed_coeffs([x, y, z], tol, k_max, lambda a: circ4_exp(*a), "circulant4")


def circ_general_embed(coeffs, tol: Tolerances = DEFAULT, k_max: int = 8) -> EmbedVerdict:
    x = coeffs.x if isinstance(coeffs, CirculantCoeffs) else tuple(coeffs)
    d = len(x) + 1
    if d <= MAX_GENERAL_DIM:
        exp_fn = lambda a: circ_general_exp(a).x
    else:
        exp_fn = lambda a: (expm(circ_matrix(a) - np.eye(d)))[0, 1:]
    return _embed_coeffs(x, tol, k_max, exp_fn, "circulant")


# --- vectorised region tests -------------------------------------------------

def region_circ3(x, y, tol: Tolerances = DEFAULT) -> np.ndarray:
    """Labels for M = 1 + x K_1 + y K_2 on arrays of (x, y)."""
    x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
    w = np.exp(2j * np.pi / 3)
    lam = (1.0 - x - y) + x * w + y * np.conj(w)
    r = np.abs(lam)
    out = np.full(x.shape, NOT_EMBEDDABLE, dtype=object)
    valid = (x >= -tol.validation) & (y >= -tol.validation) & (x + y <= 1.0 + tol.validation)
    env = valid & (r <= tol.envelope)
    with np.errstate(divide="ignore"):
        total = -2.0 * np.log(np.where(env | ~valid, 1.0, r)) / 3.0
    slack = tol.validation * np.maximum(1.0, total)
    # alpha - beta = 2 arg / sqrt3 and alpha + beta = total; principal branch is the tightest
    ok = np.abs(np.angle(lam)) * 2.0 / SQRT3 <= total + 2 * slack
    out[valid & ~env & ok] = EMBEDDABLE
    out[env] = ENVELOPE
    out[~valid] = INVALID
    return out


def region_circ4(x, y, z, tol: Tolerances = DEFAULT) -> np.ndarray:
    """Labels for M = 1 + x K_1 + y K_2 + z K_3."""
    x, y, z = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float),
                                  np.asarray(z, float))
    lam1 = (1.0 - x - 2.0 * y - z) + 1j * (x - z)
    lam2 = 1.0 - 2.0 * (x + z)
    r1 = np.abs(lam1)
    valid = ((x >= -tol.validation) & (y >= -tol.validation) & (z >= -tol.validation)
             & (x + y + z <= 1.0 + tol.validation))
    env = valid & ((r1 <= tol.envelope) | (np.abs(lam2) <= tol.envelope))
    good = valid & ~env & (lam2 > 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        sigma = -0.5 * np.log(np.where(good, lam2, 1.0))           # alpha + gamma
        beta2 = -np.log(np.where(good, r1, 1.0)) - sigma          # 2 beta
    slack = tol.validation * np.maximum(1.0, sigma + np.abs(beta2))
    ok = good & (np.abs(np.angle(lam1)) <= sigma + slack) & (beta2 >= -slack)
    out = np.full(x.shape, NOT_EMBEDDABLE, dtype=object)
    out[ok] = EMBEDDABLE
    out[env] = ENVELOPE
    out[~valid] = INVALID
    return out
