"""Result types shared by the class solvers and the dispatcher."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .matcore import expm, inf_norm

PROVENANCES = ("kendall", "equal_input", "circulant", "symmetric",
               "doubly_stochastic", "branch_search")


class Verdict(str, enum.Enum):
    EMBEDDABLE = "embeddable"
    NOT_EMBEDDABLE = "not_embeddable"
    UNDECIDED = "undecided"


@dataclass(frozen=True)
class Generator:
    """A rate matrix Q claimed to satisfy e^Q = M."""

    matrix: np.ndarray
    provenance: str
    residual: float
    params: dict = field(default_factory=dict)

    @classmethod
    def build(cls, Q, M, provenance: str, exp_q=None, **params) -> "Generator":
        """``exp_q`` may supply a closed-form e^Q for the residual."""
        Q = np.array(Q, dtype=float)
        Q.setflags(write=False)
        E = expm(Q) if exp_q is None else exp_q
        res = inf_norm(E - np.asarray(M, dtype=float))
        return cls(Q, provenance, res, dict(params))


@dataclass(frozen=True)
class EmbedVerdict:
    status: Verdict
    generators: tuple = ()
    reasons: tuple = ()
    notes: tuple = ()
    residual: float | None = None

    @property
    def embeddable(self) -> bool:
        return self.status is Verdict.EMBEDDABLE

    @property
    def decided(self) -> bool:
        return self.status is not Verdict.UNDECIDED

    @property
    def generator(self) -> np.ndarray:
        """The first (lowest-norm or canonical) generator."""
        if not self.generators:
            raise ValueError(f"verdict is {self.status.value}; no generator")
        return self.generators[0].matrix


def embeddable(generators, notes=()) -> EmbedVerdict:
    gens = tuple(generators)
    return EmbedVerdict(Verdict.EMBEDDABLE, gens, (), tuple(notes),
                        max(g.residual for g in gens))


def not_embeddable(*reasons, notes=()) -> EmbedVerdict:
    return EmbedVerdict(Verdict.NOT_EMBEDDABLE, (), tuple(reasons), tuple(notes))


def undecided(*notes, residual=None) -> EmbedVerdict:
    return EmbedVerdict(Verdict.UNDECIDED, (), (), tuple(notes), residual)
