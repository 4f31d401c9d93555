"""Shared Markov-chain helpers.

State distributions are 1-D arrays in *descending* state order: entry ``i``
holds ``P(X = n_max - i)``. Transition matrices are column-stochastic and act
as ``pi_next = P @ pi``. :func:`by_state` is the one place that converts to
ascending order (used only when writing reports).
"""
from __future__ import annotations

import numpy as np

from .exceptions import NonConvergenceError

NEGATIVE_LIMIT = 1e-10
STATIONARY_TOL = 1e-13
STATIONARY_MAX_ITER = 100_000


def states(n_max: int) -> np.ndarray:
    """Stock level held by each entry of a length ``n_max + 1`` distribution."""
    return np.arange(n_max, -1, -1)


def index_of(state: int, n_max: int) -> int:
    return n_max - state


def by_state(pi) -> np.ndarray:
    """Reorder a distribution so that entry ``i`` is ``P(X = i)``."""
    return np.asarray(pi, dtype=float)[::-1].copy()


def point_mass(state: int, n_max: int) -> np.ndarray:
    pi = np.zeros(n_max + 1)
    pi[index_of(state, n_max)] = 1.0
    return pi


def clean(pi: np.ndarray) -> np.ndarray:
    """Clamp round-off negatives to zero and renormalize."""
    pi = np.asarray(pi, dtype=float)
    if pi.min() < -NEGATIVE_LIMIT:
        # anything this negative is a modeling bug, not round-off
        raise ValueError(f"distribution has a significantly negative entry {pi.min():.3e}")
    pi = np.where(pi < 0.0, 0.0, pi)
    total = pi.sum()
    if not total > 0:
        raise ValueError("distribution has no mass")
    return pi / total


def mean_state(pi) -> float:
    pi = np.asarray(pi, dtype=float)
    return float(states(pi.size - 1) @ pi)


def is_column_stochastic(P, tol: float = 1e-12) -> bool:
    P = np.asarray(P, dtype=float)
    if P.ndim != 2 or P.shape[0] != P.shape[1]:
        return False
    return bool(P.min() >= -tol and np.abs(P.sum(axis=0) - 1.0).max() <= tol)


def stationary_residual(P, pi) -> float:
    return float(np.abs(np.asarray(pi) - np.asarray(P) @ pi).max())


def stationary_distribution(P, pi0=None, tol: float = STATIONARY_TOL,
                            max_iter: int = STATIONARY_MAX_ITER) -> tuple[np.ndarray, int]:
    """Stationary vector of a column-stochastic matrix by power iteration.

    The iterate is renormalized every step. After each block of 32 plain
    steps without convergence the working matrix is squared, which keeps the
    fixed point but halves the number of remaining steps for slowly mixing
    chains.

    Returns
    -------
    pi : ndarray
        Stationary distribution in descending state order.
    n_iter : int
        Number of matrix-vector products performed.
    """
    P = np.asarray(P, dtype=float)
    n = P.shape[0]
    pi = np.full(n, 1.0 / n) if pi0 is None else clean(np.array(pi0, dtype=float))
    work = P
    block = 32
    for it in range(1, max_iter + 1):
        nxt = work @ pi
        nxt /= nxt.sum()
        step = np.abs(nxt - pi).max()
        pi = nxt
        if step < tol and stationary_residual(P, pi) < tol:
            return clean(pi), it
        if it % block == 0:
            work = work @ work
            work /= work.sum(axis=0, keepdims=True)
    raise NonConvergenceError(
        f"power iteration did not converge in {max_iter} iterations")
