"""Class detection and the solver pipeline behind ``embed``.

Solvers run most specific first: 2 x 2, equal-input, circulant, the 3 x 3
classes, then branch search for cyclic matrices.  The first decided verdict
wins.  When every solver abstains, a failed necessary condition still proves
non-embeddability; otherwise the answer is undecided.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from . import circulant, classes3, equalinput, kendall2, logsearch
from .config import DEFAULT, Tolerances
from .diagnostics import NecessityReport, necessary_conditions, structure_flags
from .errors import EmbeddingError
from .io import fmt_float, matrix_to_json
from .matcore import StochasticMatrix, is_cyclic, validate_stochastic
from .verdict import EmbedVerdict, Verdict, not_embeddable, undecided

ROUNDTRIP_MAX = 1e-8


@dataclass(frozen=True)
class Report:
    matrix: np.ndarray
    classes: tuple
    necessity: NecessityReport
    verdict: EmbedVerdict

    @property
    def digest(self) -> str:
        text = ";".join(",".join(fmt_float(v) for v in row) for row in self.matrix)
        return hashlib.sha256(text.encode()).hexdigest()

    def to_dict(self) -> dict:
        v = self.verdict
        return {
            "input": {"dim": int(self.matrix.shape[0]), "sha256": self.digest},
            "classes": list(self.classes),
            "necessary": self.necessity.to_dict(),
            "verdict": v.status.value,
            "reasons": list(v.reasons),
            "notes": list(v.notes),
            "generators": [
                {"provenance": g.provenance, "residual": g.residual,
                 "params": {k: _plain(x) for k, x in g.params.items()},
                 "rows": matrix_to_json(g.matrix)["rows"]}
                for g in v.generators
            ],
            "residual": v.residual,
        }


def _plain(x):
    if isinstance(x, (list, tuple, np.ndarray)):
        return [_plain(v) for v in x]
    if isinstance(x, (np.integer, int)) and not isinstance(x, bool):
        return int(x)
    return float(x)


def class_tags(S: StochasticMatrix, tol: Tolerances = DEFAULT) -> tuple:
    tags = []
    d = S.dim
    flags = structure_flags(S, tol)
    ei = equalinput.detect_equal_input(S, tol.validation)
    if ei is not None:
        tags.append("equal_input")
        if ei.constant_input:
            tags.append("constant_input")
    if circulant.detect_circulant(S, tol.validation) is not None:
        tags.append("circulant")
    if flags.symmetric:
        tags.append("symmetric")
    if flags.doubly_stochastic:
        tags.append("doubly_stochastic")
    if is_cyclic(S.values, tol):
        tags.append("cyclic")
    if flags.positive:
        tags.append("positive")
    if d == 2:
        tags.insert(0, "two_state")
    return tuple(tags)


def _circulant(S: StochasticMatrix, tol: Tolerances, k_max: int):
    cc = circulant.detect_circulant(S, tol.validation)
    if cc is None:
        return None
    if S.dim == 3:
        return circulant.circ3_embed(*cc.x, tol=tol, k_max=k_max)
    if S.dim == 4:
        return circulant.circ4_embed(*cc.x, tol=tol, k_max=k_max)
    return circulant.circ_general_embed(cc, tol=tol, k_max=k_max)


def _equal_input(S: StochasticMatrix, tol: Tolerances, k_max: int):
    if equalinput.detect_equal_input(S, tol.validation) is None:
        return None
    v = equalinput.ei_embed(S, tol)
    if not v.decided and "refer: classes3" in v.notes:
        return classes3.dstoch_embed(S, tol, k_max)
    return v


def _classes3(S: StochasticMatrix, tol: Tolerances, k_max: int):
    if S.dim != 3:
        return None
    flags = structure_flags(S, tol)
    if flags.symmetric:
        return classes3.sym_embed(S, tol, k_max)
    if flags.doubly_stochastic:
        return classes3.dstoch_embed(S, tol, k_max)
    return None


def _pipeline(S: StochasticMatrix, tol: Tolerances, k_max: int):
    yield lambda: kendall2.embed_2x2(S, tol) if S.dim == 2 else None
    yield lambda: _equal_input(S, tol, k_max)
    yield lambda: _circulant(S, tol, k_max)
    yield lambda: _classes3(S, tol, k_max)
    yield lambda: logsearch.search_embed(S, k_max, tol) if is_cyclic(S.values, tol) else None


def _verified(v: EmbedVerdict) -> EmbedVerdict:
    if v.status is not Verdict.EMBEDDABLE:
        return v
    gens = tuple(g for g in v.generators if g.residual <= ROUNDTRIP_MAX)
    if not gens:
        return undecided(*v.notes, "no generator passed the round-trip check",
                         residual=v.residual)
    if len(gens) == len(v.generators):
        return v
    return EmbedVerdict(v.status, gens, v.reasons, v.notes, max(g.residual for g in gens))


def embed(M, k_max: int = 8, tol: Tolerances = DEFAULT) -> Report:
    """Decide embeddability of M and collect the evidence."""
    S = M if isinstance(M, StochasticMatrix) else validate_stochastic(M, tol.validation)
    logsearch.BranchWindow(k_max)
    nec = necessary_conditions(S, tol)
    tags = class_tags(S, tol)
    notes = list(nec.notes)
    verdict = None
    for step in _pipeline(S, tol, k_max):
        try:
            v = step()
        except EmbeddingError as exc:
            notes.append(f"{type(exc).__name__}: {exc}")
            continue
        if v is None:
            continue
        v = _verified(v)
        if v.decided:
            verdict = v
            break
        notes.extend(v.notes)
    if verdict is None:
        if not nec.overall:
            verdict = not_embeddable(*nec.failures)
        else:
            verdict = undecided("no solver reached a decision")
    elif verdict.status is Verdict.NOT_EMBEDDABLE and not nec.overall:
        verdict = not_embeddable(*verdict.reasons, *nec.failures, notes=verdict.notes)
    merged = tuple(dict.fromkeys((*notes, *verdict.notes)))
    verdict = EmbedVerdict(verdict.status, verdict.generators, verdict.reasons, merged,
                           verdict.residual)
    return Report(np.array(S.values), tags, nec, verdict)
