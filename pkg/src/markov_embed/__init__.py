"""Embeddability of Markov matrices: is M = e^Q for a rate matrix Q?"""
__version__ = "0.1.0"

from .config import DEFAULT, Tolerances
from .diagnostics import NecessityReport, limit_matrix, necessary_conditions, structure_flags
from .dispatch import Report, embed
from .errors import EmbeddingError, ValidationError
from .matcore import (
    RateMatrix,
    Spectrum,
    StochasticMatrix,
    expm,
    is_cyclic,
    principal_log,
    spectrum,
    validate_generator,
    validate_stochastic,
)
from .verdict import EmbedVerdict, Generator, Verdict

__all__ = [
    "DEFAULT", "Tolerances", "NecessityReport", "limit_matrix", "necessary_conditions",
    "structure_flags", "Report", "embed", "EmbeddingError", "ValidationError",
    "RateMatrix", "Spectrum", "StochasticMatrix", "expm", "is_cyclic", "principal_log",
    "spectrum", "validate_generator", "validate_stochastic", "EmbedVerdict", "Generator",
    "Verdict",
]
