"""Numerical thresholds.

Every equality decision in the package goes through one of these fields so
that call sites never hard-code a tolerance.
"""
from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    validation: float = 1e-9   # row sums, sign constraints
    cluster: float = 1e-8      # eigenvalue equality, relative to 1 + max|lambda|
    rank: float = 1e-8         # relative singular value cutoff
    roundtrip: float = 1e-8    # ||e^Q - M||_inf accepted for a generator
    newton: float = 1e-10      # residual target of Newton polishing
    envelope: float = 1e-9     # band around det(M) = 0 boundaries
    imag: float = 1e-10        # imaginary residue allowed on real results
    boundary: float = 1e-12    # closed-boundary comparisons
    max_cond: float = 1e12     # eigenvector condition number limit

    def __post_init__(self):
        for name, val in self.__dict__.items():
            if not val >= 0:
                raise ValueError(f"tolerance {name} must be non-negative, got {val}")


DEFAULT = Tolerances()
