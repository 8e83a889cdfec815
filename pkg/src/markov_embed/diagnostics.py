"""Necessary conditions for embeddability, zero-pattern flags and the
long-time limit of a Markov matrix.

A failed necessary condition proves that no generator exists.  Passing all
of them proves nothing.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .config import DEFAULT, Tolerances
from .errors import OracleMismatch, PeripheralSpectrum
from .matcore import (
    StochasticMatrix,
    as_square,
    inf_norm,
    residual,
    spectrum,
    validate_stochastic,
)

# item numbers of the necessary-condition battery, used in reason codes
ITEM_DET = 2
ITEM_ELVING = 3
ITEM_NEGATIVE = 4
ITEM_POSITIVITY = 5
ITEM_TRANSITIVITY = 6

# a sub-tolerance entry counts as a zero only if its paths imply this many
# multiples of the tolerance
STRENGTH_FACTOR = 10.0


def reason(item: int, text: str) -> str:
    return f"necessary.{item}: {text}"


@dataclass(frozen=True)
class StructureFlags:
    positive: bool
    irreducible: bool
    primitive: bool
    doubly_stochastic: bool
    symmetric: bool


@dataclass(frozen=True)
class NecessityReport:
    det_ok: bool
    det_value: float
    no_zero_eigenvalue: bool
    elving_ok: bool
    negative_real_even_multiplicity: bool
    positivity_or_reducible: bool
    transitivity_ok: bool
    overall: bool
    failures: tuple = ()
    notes: tuple = ()

    @property
    def elving_borderline(self) -> bool:
        return any(n.startswith(f"necessary.{ITEM_ELVING}") for n in self.notes)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["failures"] = list(self.failures)
        out["notes"] = list(self.notes)
        return out


def _as_stochastic(M, tol: Tolerances) -> StochasticMatrix:
    if isinstance(M, StochasticMatrix):
        return M
    return validate_stochastic(M, tol.validation)


def _pattern(a: np.ndarray, tol: float) -> np.ndarray:
    return a > tol


def _path_strength(a: np.ndarray) -> np.ndarray:
    """max over paths i -> k of length l >= 2 of (product of entries) / l!.

    For a short-time embeddable matrix this is the leading size of M[i, k], so
    a zero entry is only held against M when its paths are clearly heavy."""
    d = a.shape[0]
    best = np.zeros_like(a)
    P = a.copy()
    for l in range(2, d + 1):
        P = np.max(P[:, :, None] * a[None, :, :], axis=1)
        best = np.maximum(best, P / math.factorial(l))
    return best


def _bool_power(Z: np.ndarray, k: int) -> np.ndarray:
    out = np.eye(Z.shape[0], dtype=bool)
    base = Z.copy()
    while k:
        if k & 1:
            out = (out.astype(int) @ base.astype(int)) > 0
        base = (base.astype(int) @ base.astype(int)) > 0
        k >>= 1
    return out


def structure_flags(M, tol: Tolerances = DEFAULT) -> StructureFlags:
    """Graph flags from the zero pattern (entries <= tol count as zero)."""
    S = _as_stochastic(M, tol)
    a = S.values
    d = a.shape[0]
    Z = _pattern(a, tol.validation)
    positive = bool(Z.all())
    reach = _bool_power(Z | np.eye(d, dtype=bool), d - 1)
    irreducible = bool(reach.all())
    # Wielandt: a primitive matrix has a positive power at (d-1)^2 + 1
    primitive = irreducible and bool(_bool_power(Z, (d - 1) ** 2 + 1).all())
    doubly = bool(np.all(np.abs(a.sum(axis=0) - 1.0) <= tol.validation * d))
    symmetric = bool(np.all(np.abs(a - a.T) <= tol.validation))
    return StructureFlags(positive, irreducible, primitive, doubly, symmetric)


def necessary_conditions(M, tol: Tolerances = DEFAULT) -> NecessityReport:
    """Run the six necessary conditions; ``overall`` False proves that M is
    not embeddable."""
    S = _as_stochastic(M, tol)
    a = S.values
    d = a.shape[0]
    failures, notes = [], []

    spec = spectrum(a, tol)
    scale = 1.0 + max(abs(lam) for lam, _ in spec.eigenvalues)
    det = float(np.linalg.det(a))
    mags = np.abs(spec.raw)

    no_zero = bool(mags.min() > tol.envelope)
    if not no_zero:
        failures.append(reason(ITEM_DET, f"0 is an eigenvalue (|lambda| = {mags.min():.3g})"))
    is_identity = inf_norm(a - np.eye(d)) <= tol.validation
    det_ok = det > 0 and det <= 1.0 + tol.validation
    if not det_ok:
        failures.append(reason(ITEM_DET, f"det(M) = {det:.6g} is not in (0, 1]"))
    elif det >= 1.0 - tol.validation and not is_identity:
        det_ok = False
        failures.append(reason(ITEM_DET, "det(M) = 1 but M is not the identity"))

    elving_ok = True
    for lam, _ in spec.eigenvalues:
        if abs(lam - 1.0) <= tol.cluster * scale:
            continue
        r = abs(lam)
        if r > 1.0 + tol.cluster:
            elving_ok = False
            failures.append(reason(ITEM_ELVING, f"eigenvalue {lam:.6g} has modulus > 1"))
        elif r >= 1.0 - tol.cluster:
            notes.append(reason(ITEM_ELVING, f"eigenvalue {lam:.6g} lies within "
                                f"{tol.cluster:g} of the unit circle; undecided"))

    neg_ok = True
    for lam, mult in spec.eigenvalues:
        if lam.imag == 0.0 and lam.real < -tol.cluster * scale and mult % 2:
            neg_ok = False
            failures.append(reason(ITEM_NEGATIVE, f"negative eigenvalue {lam.real:.6g} "
                                   f"has odd multiplicity {mult}"))

    flags = structure_flags(S, tol)
    Z = _pattern(a, tol.validation)
    strength = _path_strength(a)
    pos_ok = True
    if flags.irreducible and not flags.positive:
        i, k = np.argwhere(~Z)[np.argmax(strength[~Z])]
        if strength[i, k] > STRENGTH_FACTOR * tol.validation:
            pos_ok = False
            failures.append(reason(ITEM_POSITIVITY, "irreducible but not positive"))
        else:
            notes.append(reason(ITEM_POSITIVITY, f"M[{i},{k}] is below tolerance but paths "
                                "imply only a tiny positive value; undecided"))

    two_step = np.max(a[:, :, None] * a[None, :, :], axis=1) / 2.0
    trans_ok = True
    bad = ~Z & (two_step > STRENGTH_FACTOR * tol.validation)
    if bad.any():
        trans_ok = False
        i, k = np.argwhere(bad)[0]
        failures.append(reason(ITEM_TRANSITIVITY, f"M[{i},{k}] = 0 although a two-step "
                               "path exists"))
    elif np.any(~Z & (two_step > tol.validation)):
        i, k = np.argwhere(~Z & (two_step > tol.validation))[0]
        notes.append(reason(ITEM_TRANSITIVITY, f"M[{i},{k}] is below tolerance on a weak "
                            "two-step path; undecided"))

    overall = det_ok and no_zero and elving_ok and neg_ok and pos_ok and trans_ok
    return NecessityReport(det_ok, det, no_zero, elving_ok, neg_ok, pos_ok, trans_ok,
                           overall, tuple(failures), tuple(notes))


def _peripheral(a: np.ndarray, tol: Tolerances):
    spec = spectrum(a, tol)
    scale = 1.0 + max(abs(lam) for lam, _ in spec.eigenvalues)
    return [lam for lam, _ in spec.eigenvalues
            if abs(lam - 1.0) > tol.cluster * scale and abs(lam) >= 1.0 - tol.cluster]


def limit_matrix(M, tol: Tolerances = DEFAULT) -> StochasticMatrix:
    """lim M^n by repeated squaring; requires no unit-modulus eigenvalue
    other than 1."""
    a = _as_stochastic(M, tol).values
    bad = _peripheral(a, tol)
    if bad:
        raise PeripheralSpectrum(f"eigenvalue {bad[0]:.6g} on the unit circle")
    X = a.copy()
    for _ in range(60):
        X2 = X @ X
        if inf_norm(X2 - X) < 1e-12:
            X = X2
            break
        X = X2
    else:
        raise PeripheralSpectrum("powers of M did not converge")
    return validate_stochastic(X, max(tol.validation, 1e-8))


def _in_span(R: np.ndarray, X: np.ndarray, tol: float) -> bool:
    d = X.shape[0]
    cols, P = [], np.eye(d)
    for _ in range(1, d):
        P = P @ X
        nrm = np.linalg.norm(P)
        if nrm > 0:
            cols.append(P.ravel() / nrm)
    if not cols:
        return inf_norm(R) <= tol
    B = np.column_stack(cols)
    coef = np.linalg.lstsq(B, R.ravel(), rcond=None)[0]
    return inf_norm((B @ coef - R.ravel()).reshape(d, d)) <= tol


def check_R_in_alg(M, Q, tol: Tolerances = DEFAULT, span_tol: float = 1e-7) -> bool:
    """Check that R = M_inf - 1 lies in both alg(Q) and alg(M - 1)."""
    a = _as_stochastic(M, tol).values
    q = as_square(Q)
    res = residual(q, a)
    if res > tol.roundtrip:
        raise OracleMismatch(f"e^Q differs from M by {res:.3g}")
    d = a.shape[0]
    R = limit_matrix(a, tol).values - np.eye(d)
    return _in_span(R, q, span_tol) and _in_span(R, a - np.eye(d), span_tol)
