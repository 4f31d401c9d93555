"""Parking-orbit stock chain.

A parking orbit holds batches of spares. Its stock only moves at two kinds of
instant: RAAN contacts with a constellation plane, where the plane's batch
demand is drawn down (and the reorder rule is checked), and launch deliveries
of ``q_p`` batches, which arrive after a shifted-exponential lead time.

The chain is solved over one replenishment cycle: delivery -> reorder (the
inter-order, or IO, period) and reorder -> delivery (the lead-time, or LT,
period). All infinite sums over review periods are evaluated in closed form
for the geometric lead-time tail; resolvents are triangular solves because
every matrix involved is lower triangular in descending state order.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from .exceptions import DegenerateDemandError, SparePolicyError
from .markov import clean, stationary_distribution, states
from .stochastic import LeadTimeGrid


@dataclass(frozen=True)
class ParkingPolicy:
    """Reorder rule in units of batches."""

    q_p: int
    r_p: int

    def __post_init__(self):
        if self.q_p < 1 or self.r_p < 0:
            raise SparePolicyError(f"invalid parking policy q_p={self.q_p}, r_p={self.r_p}")

    @property
    def n_sat(self) -> int:
        return self.q_p + self.r_p


@dataclass
class ContactConditional:
    pi_io_E: np.ndarray
    k_io_E: float
    pi_lt_E: np.ndarray
    k_lt_E: float
    pi_rc_E: np.ndarray
    kappa: np.ndarray


@dataclass
class ParkingCycleSolution:
    """Stationary description of one parking orbit's replenishment cycle.

    Period lengths ``k_*`` are expected numbers of Markov steps; ``k_*_E``
    are expected numbers of RAAN contacts.
    """

    pi_q: np.ndarray
    pi_r: np.ndarray
    pi_io: np.ndarray
    k_io: float
    pi_lt: np.ndarray
    k_lt: float
    pi_rc: np.ndarray
    tau_rc: float
    conditional: ContactConditional
    residual: float
    n_iter: int

    @property
    def kappa(self) -> np.ndarray:
        return self.conditional.kappa

    @property
    def pi_rc_E(self) -> np.ndarray:
        return self.conditional.pi_rc_E


def demand_failure_matrix(chi, policy: ParkingPolicy) -> np.ndarray:
    """Stock change at a contact when the plane demands ``j`` batches w.p. ``chi[j]``.

    Demand exceeding the stock empties the orbit (partial transfer).
    """
    chi = np.asarray(chi, dtype=float)
    n = policy.n_sat
    P = np.zeros((n + 1, n + 1))
    for col, x in enumerate(states(n)):
        take = min(int(x), chi.size)
        P[col:col + take, col] = chi[:take]
        P[n, col] += 1.0 - chi[:take].sum()
    return P


def replenishment_matrix(policy: ParkingPolicy) -> np.ndarray:
    """Launch delivery: stock ``x <= r_p`` jumps to ``x + q_p``; higher states are untouched."""
    n = policy.n_sat
    P = np.zeros((n + 1, n + 1))
    for col, x in enumerate(states(n)):
        target = x + policy.q_p if x <= policy.r_p else x
        P[n - target, col] = 1.0
    return P


def threshold_projectors(policy: ParkingPolicy) -> tuple[np.ndarray, np.ndarray]:
    """Diagonal masks for states above (``C_plus``) and at or below (``C_minus``) ``r_p``."""
    above = (states(policy.n_sat) > policy.r_p).astype(float)
    return np.diag(above), np.diag(1.0 - above)


def _solve_lower(M, rhs):
    return solve_triangular(M, rhs, lower=True, check_finite=False)


def _check_demand(P_fp, C_plus):
    stay = np.diag(C_plus @ P_fp)
    if np.any(stay[np.diag(C_plus) > 0] >= 1.0 - 1e-14):
        raise DegenerateDemandError(
            "a stock level above the reorder point is never drawn down; the orbit never reorders")


def delivery_to_reorder_matrix(P_fp, projectors) -> np.ndarray:
    """Map from the post-delivery to the at-reorder distribution."""
    C_plus, C_minus = projectors
    _check_demand(P_fp, C_plus)
    n = P_fp.shape[0]
    escape = _solve_lower(np.eye(n) - C_plus @ P_fp, np.eye(n))
    return C_minus @ P_fp @ escape


def delivery_to_reorder(pi_q, P_fp, projectors) -> np.ndarray:
    C_plus, C_minus = projectors
    _check_demand(P_fp, C_plus)
    n = P_fp.shape[0]
    return C_minus @ P_fp @ _solve_lower(np.eye(n) - C_plus @ P_fp, pi_q)


def _lead_time_factors(P_fp, grid: LeadTimeGrid, alpha: float):
    """``P_fp**m_lv`` and the geometric resolvent ``I - alpha**k_p P_fp``."""
    n = P_fp.shape[0]
    P_m = np.linalg.matrix_power(P_fp, grid.m_lv)
    tail = np.eye(n) - alpha**grid.k_p * P_fp
    return P_m, tail


def reorder_to_delivery_matrix(P_fp, P_qp, grid: LeadTimeGrid, alpha: float) -> np.ndarray:
    """Map from the at-reorder to the (delivery-time averaged) post-delivery distribution."""
    n = P_fp.shape[0]
    P_m, tail = _lead_time_factors(P_fp, grid, alpha)
    a_kr = alpha**grid.k_right
    inner = (1.0 - a_kr) * np.eye(n) + (1.0 - alpha**grid.k_p) * a_kr * P_fp @ _solve_lower(tail, np.eye(n))
    return P_qp @ P_m @ inner


def delivery_weights(grid: LeadTimeGrid, alpha: float) -> np.ndarray:
    """``eta_i`` for ``i = 1..k_p``: probability that delivery lands on step ``i`` of a review period."""
    i = np.arange(1, grid.k_p + 1)
    early = i <= grid.k_left
    expo = np.where(early, i - 1 + grid.k_right, i - 1 - grid.k_left)
    return (1.0 - alpha) * alpha**expo / (1.0 - alpha**grid.k_p)


def reorder_to_delivery(pi_r, P_fp, P_qp, grid: LeadTimeGrid, alpha: float):
    """Post-delivery distribution and its per-step components.

    Returns ``(pi_q, components)`` where ``components[i-1]`` is
    ``eta_i * pi_q_i``, the mass delivered on step ``i`` of a review period
    together with the stock it leaves behind. ``components.sum(0) == pi_q``.
    """
    P_m, tail = _lead_time_factors(P_fp, grid, alpha)
    late = P_qp @ P_m @ _solve_lower(tail, pi_r)
    early = P_qp @ P_m @ P_fp @ _solve_lower(tail, pi_r)
    i = np.arange(1, grid.k_p + 1)
    is_early = i <= grid.k_left
    coef = (1.0 - alpha) * alpha**np.where(is_early, i - 1 + grid.k_right, i - 1 - grid.k_left)
    components = np.where(is_early[:, None], early[None, :], late[None, :]) * coef[:, None]
    pi_q = reorder_to_delivery_matrix(P_fp, P_qp, grid, alpha) @ pi_r
    return pi_q, components


def solve_cycle(P_fp, P_qp, grid: LeadTimeGrid, alpha: float, projectors, pi0=None):
    """Joint stationary ``(pi_q, pi_r, residual, n_iter)`` of the delivery/reorder cycle."""
    to_reorder = delivery_to_reorder_matrix(P_fp, projectors)
    to_delivery = reorder_to_delivery_matrix(P_fp, P_qp, grid, alpha)
    cycle = to_delivery @ to_reorder
    pi_q, n_iter = stationary_distribution(cycle, pi0=pi0)
    pi_r = clean(to_reorder @ pi_q)
    residual = float(np.abs(cycle @ pi_q - pi_q).max())
    return pi_q, pi_r, residual, n_iter


def io_distribution(components, pi_q, P_fp, projectors, k_p: int):
    """Time-average stock over the inter-order period and its expected length in steps."""
    C_plus, _ = projectors
    n = P_fp.shape[0]
    i = np.arange(1, k_p + 1)
    first = (k_p - i) @ np.asarray(components)
    later = k_p * C_plus @ P_fp @ _solve_lower(np.eye(n) - C_plus @ P_fp, pi_q)
    raw = first + later
    k_io = float(raw.sum())
    return clean(raw / k_io), k_io


def lt_segments(pi_r, P_fp, grid: LeadTimeGrid, alpha: float) -> list[np.ndarray]:
    """The four unnormalized pieces of the lead-time average.

    1. the ``m_lv`` review periods that elapse before a delivery is possible,
    2. the ``k_left + 1`` steps of the next period up to the end of the fixed delay,
    3. the rest of that period, where the exponential tail has started,
    4. every later period (geometric series).
    """
    m, kl, kr, kp = grid.m_lv, grid.k_left, grid.k_right, grid.k_p
    pi_r = np.asarray(pi_r, dtype=float)
    acc = np.zeros_like(pi_r)
    v = pi_r
    for _ in range(m):
        acc += v
        v = P_fp @ v
    # v is now P_fp**m @ pi_r
    seg1 = kp * acc
    seg2 = (kl + 1) * v
    seg3 = alpha * (alpha ** (kr - 1) - 1.0) / (alpha - 1.0) * v
    tail = np.eye(P_fp.shape[0]) - alpha**kp * P_fp
    seg4 = alpha**kr * (alpha**kp - 1.0) / (alpha - 1.0) * (P_fp @ _solve_lower(tail, v))
    return [seg1, seg2, seg3, seg4]


def lt_distribution(pi_r, P_fp, grid: LeadTimeGrid, alpha: float):
    """Time-average stock over the lead-time period and its expected length in steps."""
    raw = sum(lt_segments(pi_r, P_fp, grid, alpha))
    k_lt = float(raw.sum())
    return clean(raw / k_lt), k_lt


def cycle_average(pi_io, k_io: float, pi_lt, k_lt: float, tau_mc: float):
    """Time-weighted mixture over a full replenishment cycle and the cycle length in days."""
    if k_io < 0 or k_lt < 0 or not k_io + k_lt > 0:
        raise SparePolicyError("period lengths must be non-negative with a positive sum")
    total = k_io + k_lt
    pi_rc = clean((k_io * np.asarray(pi_io) + k_lt * np.asarray(pi_lt)) / total)
    return pi_rc, total * tau_mc


def availability(pi_E, j_max: int) -> np.ndarray:
    """``kappa_j = P(X_p >= j)`` for ``j = 0..j_max`` from a contact-time distribution."""
    pi_E = np.asarray(pi_E, dtype=float)
    n = pi_E.size - 1
    # descending order: cumulative sum from the top gives P(X >= n - i)
    tails = np.cumsum(pi_E)[::-1]  # tails[j] = P(X >= j)
    kappa = np.zeros(j_max + 1)
    upto = min(j_max, n)
    kappa[:upto + 1] = tails[:upto + 1]
    kappa[0] = 1.0
    return np.minimum.accumulate(np.clip(kappa, 0.0, 1.0))


def contact_conditional(pi_q, pi_r, P_fp, projectors, grid: LeadTimeGrid, alpha: float,
                        j_max: int) -> ContactConditional:
    """Stock seen by planes at contact instants, and the resulting availability vector."""
    C_plus, _ = projectors
    n = P_fp.shape[0]
    raw_io = _solve_lower(np.eye(n) - C_plus @ P_fp, np.asarray(pi_q, dtype=float))
    k_io_E = float(raw_io.sum())

    acc = np.zeros(n)
    v = np.asarray(pi_r, dtype=float)
    for _ in range(grid.m_lv):
        acc += v
        v = P_fp @ v
    tail = np.eye(n) - alpha**grid.k_p * P_fp
    raw_lt = acc + alpha**grid.k_right * _solve_lower(tail, v)
    k_lt_E = float(raw_lt.sum())

    pi_rc_E = clean((raw_io + raw_lt) / (k_io_E + k_lt_E))
    return ContactConditional(
        pi_io_E=clean(raw_io / k_io_E), k_io_E=k_io_E,
        pi_lt_E=clean(raw_lt / k_lt_E), k_lt_E=k_lt_E,
        pi_rc_E=pi_rc_E, kappa=availability(pi_rc_E, j_max),
    )


def solve_parking(P_fp, policy: ParkingPolicy, grid: LeadTimeGrid, alpha: float,
                  tau_mc: float, j_max: int, pi0=None) -> ParkingCycleSolution:
    """Full parking analysis for a given contact transition ``P_fp``."""
    projectors = threshold_projectors(policy)
    P_qp = replenishment_matrix(policy)
    pi_q, pi_r, residual, n_iter = solve_cycle(P_fp, P_qp, grid, alpha, projectors, pi0=pi0)
    _, components = reorder_to_delivery(pi_r, P_fp, P_qp, grid, alpha)
    pi_io, k_io = io_distribution(components, pi_q, P_fp, projectors, grid.k_p)
    pi_lt, k_lt = lt_distribution(pi_r, P_fp, grid, alpha)
    pi_rc, tau_rc = cycle_average(pi_io, k_io, pi_lt, k_lt, tau_mc)
    conditional = contact_conditional(pi_q, pi_r, P_fp, projectors, grid, alpha, j_max)
    return ParkingCycleSolution(
        pi_q=pi_q, pi_r=pi_r, pi_io=pi_io, k_io=k_io, pi_lt=pi_lt, k_lt=k_lt,
        pi_rc=pi_rc, tau_rc=tau_rc, conditional=conditional, residual=residual, n_iter=n_iter,
    )
