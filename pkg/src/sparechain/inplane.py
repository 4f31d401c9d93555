"""Constellation-plane stock chain.

A plane is reviewed each time its RAAN lines up with a parking orbit. If its
stock is at or below ``r_c`` it asks for enough ``q_c``-satellite batches to
climb back above ``r_c`` and receives as many as the parking orbit holds.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import InvalidAvailabilityError, SparePolicyError
from .markov import clean, index_of, stationary_distribution, states

KAPPA_TOL = 1e-12


@dataclass(frozen=True)
class InplanePolicy:
    q_c: int
    r_c: int

    def __post_init__(self):
        if self.q_c < 1 or self.r_c < 0:
            raise SparePolicyError(f"invalid in-plane policy q_c={self.q_c}, r_c={self.r_c}")

    @property
    def n_sat(self) -> int:
        return self.q_c + self.r_c

    @property
    def j_max(self) -> int:
        """Largest possible demand, reached from an empty plane."""
        return math.ceil((self.r_c + 1) / self.q_c)


def demand_of_state(x: int, policy: InplanePolicy) -> int:
    """Batches requested by a plane holding ``x`` satellites at contact."""
    if x > policy.r_c:
        return 0
    return -(-(policy.r_c + 1 - x) // policy.q_c)


def check_kappa(kappa, j_max: int) -> np.ndarray:
    kappa = np.asarray(kappa, dtype=float)
    if kappa.shape != (j_max + 1,):
        raise InvalidAvailabilityError(
            f"availability vector needs {j_max + 1} entries, got {kappa.shape}")
    if abs(kappa[0] - 1.0) > 1e-9:
        raise InvalidAvailabilityError(f"kappa_0 must be 1, got {kappa[0]}")
    if kappa.min() < -KAPPA_TOL or kappa.max() > 1.0 + KAPPA_TOL:
        raise InvalidAvailabilityError("availability probabilities must lie in [0, 1]")
    if np.any(np.diff(kappa) > KAPPA_TOL):
        raise InvalidAvailabilityError("availability vector must be nonincreasing")
    return np.clip(kappa, 0.0, 1.0)


def replenishment_matrix(kappa, policy: InplanePolicy) -> np.ndarray:
    """Transition at a parking contact, given availability ``kappa_j = P(X_p >= j)``.

    A plane demanding ``d`` batches gets all of them with probability
    ``kappa_d`` and exactly ``j < d`` with probability ``kappa_j - kappa_{j+1}``.
    """
    kappa = check_kappa(kappa, policy.j_max)
    n = policy.n_sat
    P = np.zeros((n + 1, n + 1))
    for col, x in enumerate(states(n)):
        d = demand_of_state(int(x), policy)
        for j in range(d):
            P[index_of(x + j * policy.q_c, n), col] += kappa[j] - kappa[j + 1]
        P[index_of(x + d * policy.q_c, n), col] += kappa[d]
    return P


def solve_cycle(P_f, P_qc, k_c: int, P_fc=None, pi0=None):
    """Stationary post-contact and pre-contact distributions.

    Returns ``(pi_q, pi_r, n_iter)`` where ``pi_q`` is stationary for
    ``P_qc @ P_f**k_c`` and ``pi_r = P_f**k_c @ pi_q``.
    """
    if P_fc is None:
        P_fc = np.linalg.matrix_power(P_f, k_c)
    pi_q, n_iter = stationary_distribution(P_qc @ P_fc, pi0=pi0)
    pi_r = clean(P_fc @ pi_q)
    return pi_q, pi_r, n_iter


def cycle_average(pi_q, P_f, k_c: int) -> np.ndarray:
    """Time-average over one review period: mean of ``P_f**j pi_q`` for ``j < k_c``."""
    acc = np.zeros_like(pi_q, dtype=float)
    step = np.array(pi_q, dtype=float)
    for _ in range(k_c):
        acc += step
        step = P_f @ step
    return clean(acc / k_c)


def demand_pmf(pi_r, policy: InplanePolicy) -> np.ndarray:
    """Distribution of batches demanded at a contact, from the pre-contact stock."""
    pi_r = np.asarray(pi_r, dtype=float)
    n = policy.n_sat
    # descending order: entries q_c*j .. q_c*(j+1)-1 from the top hold demand j
    chi = np.add.reduceat(pi_r, np.arange(0, n + 1, policy.q_c))
    out = np.zeros(policy.j_max + 1)
    out[:chi.size] = chi
    return out
