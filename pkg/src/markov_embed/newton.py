"""Damped Newton iteration with a multi-start wrapper."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np


@dataclass(frozen=True)
class NewtonResult:
    x: np.ndarray
    residual: float
    converged: bool
    iterations: int


def fd_jacobian(F: Callable, x: np.ndarray, h: float = 1e-7) -> np.ndarray:
    """Central-difference Jacobian."""
    x = np.asarray(x, dtype=float)
    f0 = np.asarray(F(x))
    Jm = np.empty((f0.size, x.size))
    for j in range(x.size):
        step = h * max(1.0, abs(x[j]))
        e = np.zeros_like(x)
        e[j] = step
        Jm[:, j] = (np.asarray(F(x + e)) - np.asarray(F(x - e))) / (2 * step)
    return Jm


def damped_newton(F, x0, jac=None, tol: float = 1e-10, maxiter: int = 200,
                  lower=None) -> NewtonResult:
    """Solve F(x) = 0 with step halving on the residual norm.

    ``lower`` optionally clips iterates from below (component-wise).
    """
    x = np.array(x0, dtype=float)
    jac = jac or (lambda z: fd_jacobian(F, z))
    f = np.asarray(F(x))
    r = float(np.max(np.abs(f)))
    for it in range(maxiter):
        if r <= tol:
            return NewtonResult(x, r, True, it)
        try:
            step = np.linalg.solve(jac(x), -f)
        except np.linalg.LinAlgError:
            step = np.linalg.lstsq(jac(x), -f, rcond=None)[0]
        lam = 1.0
        while lam > 1e-10:
            xn = x + lam * step
            if lower is not None:
                xn = np.maximum(xn, lower)
            fn = np.asarray(F(xn))
            rn = float(np.max(np.abs(fn)))
            if np.isfinite(rn) and rn < r:
                break
            lam *= 0.5
        else:
            return NewtonResult(x, r, False, it)
        x, f, r = xn, fn, rn
    return NewtonResult(x, r, r <= tol, maxiter)


def multistart(F, seeds: Iterable, jac=None, tol: float = 1e-10, maxiter: int = 200,
               lower=None) -> list:
    """Run damped Newton from every seed; converged results first, then by
    residual. Ties keep seed order so the outcome is deterministic."""
    results = [damped_newton(F, s, jac, tol, maxiter, lower) for s in seeds]
    order = sorted(range(len(results)),
                   key=lambda i: (not results[i].converged, results[i].residual, i))
    return [results[i] for i in order]


def log_grid(n: int, dim: int, lo: float = 1e-3, hi: float = 4.0) -> list:
    """Seeds on a log-spaced tensor grid, ``n`` values per coordinate."""
    axis = np.geomspace(lo, hi, n)
    mesh = np.meshgrid(*([axis] * dim), indexing="ij")
    return [np.array(p) for p in zip(*(m.ravel() for m in mesh))]
