"""Satellite failure and launch lead-time laws on the Markov time grid."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import poisson

from .exceptions import SparePolicyError
from .markov import states
from .orbital import DAYS_PER_YEAR


@dataclass(frozen=True)
class FailureModel:
    """State-dependent Poisson failures.

    ``lambda_sat_step`` is the failure probability rate of one operational
    satellite per Markov step. Only ``n_nominal`` satellites are operational;
    anything above that is a spare and does not fail.
    """

    lambda_sat_step: float
    n_nominal: int

    def __post_init__(self):
        if not self.lambda_sat_step > 0:
            raise SparePolicyError("failure rate must be strictly positive")
        if self.n_nominal < 1:
            raise SparePolicyError("nominal satellite count must be >= 1")

    @classmethod
    def from_yearly(cls, lambda_per_year: float, tau_mc: float, n_nominal: int) -> "FailureModel":
        return cls(lambda_per_year * tau_mc / DAYS_PER_YEAR, n_nominal)


@dataclass(frozen=True)
class LeadTimeModel:
    """Shifted-exponential launch lead time ``tau_lv + Exp(mu_lv)``.

    ``tau_lv`` is snapped to the nearest multiple of ``tau_mc``.
    """

    mu_lv: float
    tau_lv: float
    tau_mc: float

    def __post_init__(self):
        if not self.mu_lv > 0:
            raise SparePolicyError("mean exponential lead time must be positive")
        if self.tau_lv < 0:
            raise SparePolicyError("launch processing delay must be non-negative")
        if not self.tau_mc > 0:
            raise SparePolicyError("time step must be positive")
        object.__setattr__(self, "tau_lv", self.k_lv * self.tau_mc)

    @property
    def k_lv(self) -> int:
        return int(math.floor(self.tau_lv / self.tau_mc + 0.5))

    @property
    def alpha(self) -> float:
        return math.exp(-self.tau_mc / self.mu_lv)


@dataclass(frozen=True)
class LeadTimeGrid:
    """Position of the fixed launch delay relative to the parking review grid."""

    m_lv: int
    k_left: int
    k_right: int
    k_p: int


def failure_pmf(k: int, n: int, model: FailureModel) -> float:
    """Probability of ``k`` failures in one step from a plane holding ``n`` satellites."""
    if k < 0 or n < 0:
        raise SparePolicyError("failure count and stock level must be non-negative")
    if k > model.n_nominal:
        return 0.0
    rate = min(n, model.n_nominal) * model.lambda_sat_step
    return float(poisson.pmf(k, rate))


def failure_matrix(n_max: int, model: FailureModel) -> np.ndarray:
    """One-step failure transition matrix over stock levels ``0..n_max``.

    Column for stock ``n`` puts the Poisson mass of ``k < n`` failures on
    ``n - k``; state 0 absorbs the rest.
    """
    if n_max < 1:
        raise SparePolicyError("n_max must be >= 1")
    size = n_max + 1
    P = np.zeros((size, size))
    k = np.arange(size)
    for col, n in enumerate(states(n_max)):
        rate = min(n, model.n_nominal) * model.lambda_sat_step
        nu = poisson.pmf(k[:n], rate)
        nu[k[:n] > model.n_nominal] = 0.0
        P[col:col + n, col] = nu
        # tail P(K >= min(n, nbar + 1)) as a survival function: no cancellation
        P[size - 1, col] = poisson.sf(min(n, model.n_nominal + 1) - 1, rate) if n > 0 else 1.0
    return P


def lead_time_pmf(k: int, model: LeadTimeModel) -> float:
    """Probability that the lead time lies in ``[k, k+1)`` steps (delivery at step ``k+1``)."""
    if k < 0:
        raise SparePolicyError("step index must be non-negative")
    if k < model.k_lv:
        return 0.0
    alpha = model.alpha
    return alpha ** (k - model.k_lv) * (1.0 - alpha)


def lead_time_survival(l: int, model: LeadTimeModel) -> float:
    """Probability that a delivery has not arrived by step ``l``."""
    if l < 0:
        raise SparePolicyError("step index must be non-negative")
    if l <= model.k_lv:
        return 1.0
    return model.alpha ** (l - model.k_lv)


def lead_time_grid(model: LeadTimeModel, k_p: int) -> LeadTimeGrid:
    if k_p < 1:
        raise SparePolicyError("review period must be at least one step")
    k_lv = model.k_lv
    m_lv = k_lv // k_p
    k_left = k_lv - m_lv * k_p
    return LeadTimeGrid(m_lv=m_lv, k_left=k_left, k_right=(m_lv + 1) * k_p - k_lv, k_p=k_p)
