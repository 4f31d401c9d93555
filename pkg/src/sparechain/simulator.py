"""Discrete-time Monte Carlo simulation of the whole constellation.

Unlike the analysis, the simulator tracks every plane and every parking orbit
individually and derives contact instants from the actual RAAN geometry (even
initial spacing, linear J2 drift), so it makes none of the independence
assumptions of the Markov model. It is the validation oracle for
:mod:`sparechain.engine`.

Within one step of ``tau_mc`` events are processed in a fixed order:

1. satellite failures in every plane;
2. launch deliveries due this step;
3. RAAN contacts, in ascending plane index: the plane's batch demand is
   served (partially if the parking orbit runs short), then the parking orbit
   reviews its stock and places a launch order if at or below ``r_p`` and no
   order is outstanding;
4. stock levels are recorded (after warm-up).

Random numbers come from numpy's Philox4x64-10 counter-based generator;
replication ``i`` is keyed by ``seed ^ i``. Two master seeds that differ only
below the top bit of ``n_replications - 1`` draw the same set of streams (in a
different order) and so aggregate to the same statistics; space independent
runs apart in the high bits, e.g. ``k << 32``.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .metrics import resilience
from .orbital import DAYS_PER_YEAR, relative_drift

RNG_ALGORITHM = "numpy.random.Philox (Philox4x64-10)"


@dataclass
class ContactSchedule:
    """Plane/parking contact events on the step grid, sorted by (step, plane)."""

    step: np.ndarray
    plane: np.ndarray
    parking: np.ndarray

    def __len__(self):
        return int(self.step.size)


@dataclass
class ReplicationResult:
    hist_c: np.ndarray  # ascending state order, counts
    hist_p: np.ndarray
    lead_time_days: list
    demands: list
    trace_c: np.ndarray | None = None
    trace_p: np.ndarray | None = None
    orders: int = 0


@dataclass
class SimStats:
    """Aggregated Monte Carlo statistics.

    Histograms are time-average PMFs in *ascending* state order (entry ``i``
    is ``P(X = i)``), pooled over planes or parking orbits.
    """

    mean_c: float
    mean_c_se: float
    mean_p: float
    mean_p_se: float
    shortage_c: float
    shortage_c_se: float
    stockout_p: float
    stockout_p_se: float
    histogram_c: list
    histogram_p: list
    lead_time_histogram: dict
    demand_histogram: list
    n_replications: int
    horizon_years: float
    warmup_years: float
    seed: int
    rng: str = RNG_ALGORITHM
    per_replication: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "SimStats":
        return cls(**data)


@dataclass(frozen=True)
class ErrorReport:
    rel_err_mean_c: float
    rel_err_mean_p: float
    rel_err_shortage_c: float
    abs_err_stockout_pp: float  # percentage points
    valid: bool

    def to_dict(self) -> dict:
        return asdict(self)


def contact_schedule(config, n_steps: int) -> ContactSchedule:
    """All plane/parking RAAN alignments within ``n_steps`` steps.

    Plane ``a`` starts at RAAN ``2 pi a / N_c`` and parking orbit ``b`` at
    ``2 pi b / N_p``; plane 0 and parking 0 are aligned at ``t = 0``. An
    alignment at time ``t`` is handled in step ``ceil(t / tau_mc)``.
    """
    geo = config.geometry
    tau_mc = config.stochastic.tau_mc
    rate = relative_drift(geo, config.constants)
    synodic = 2.0 * math.pi / abs(rate)
    horizon = n_steps * tau_mc
    steps, planes, parks = [], [], []
    for a in range(geo.n_orbit_c):
        for b in range(geo.n_orbit_p):
            offset = 2.0 * math.pi * (a / geo.n_orbit_c - b / geo.n_orbit_p)
            t0 = (-offset / rate) % synodic
            times = t0 + synodic * np.arange(int((horizon - t0) // synodic) + 1)
            s = np.ceil(times / tau_mc - 1e-9).astype(np.int64)
            s = s[s < n_steps]
            steps.append(s)
            planes.append(np.full(s.size, a))
            parks.append(np.full(s.size, b))
    step = np.concatenate(steps)
    plane = np.concatenate(planes)
    park = np.concatenate(parks)
    order = np.lexsort((park, plane, step))
    return ContactSchedule(step=step[order], plane=plane[order], parking=park[order])


def simulate_replication(config, n_steps: int, warmup_steps: int, rng: np.random.Generator,
                         schedule: ContactSchedule | None = None,
                         record_trace: bool = False) -> ReplicationResult:
    """Run one replication from full stock and return its post-warm-up statistics."""
    geo, stoch, pol = config.geometry, config.stochastic, config.policy
    if schedule is None:
        schedule = contact_schedule(config, n_steps)
    n_c, n_p = geo.n_orbit_c, geo.n_orbit_p
    nbar = geo.n_sat_nominal
    top_c, top_p = pol.q_c + pol.r_c, pol.q_p + pol.r_p
    lam = stoch.lambda_sat_per_year * stoch.tau_mc / DAYS_PER_YEAR
    k_lv = int(math.floor(stoch.tau_lv / stoch.tau_mc + 0.5))
    tau_mc = stoch.tau_mc

    x_c = np.full(n_c, top_c, dtype=np.int64)
    x_p = np.full(n_p, top_p, dtype=np.int64)
    due = np.full(n_p, -1, dtype=np.int64)
    low_since = np.full(n_c, -1, dtype=np.int64)  # first step at or below r_c since last contact
    hist_c = np.zeros(top_c + 1, dtype=np.int64)
    hist_p = np.zeros(top_p + 1, dtype=np.int64)
    lead_times, demands = [], []
    trace_c = np.empty((n_steps, n_c), dtype=np.int64) if record_trace else None
    trace_p = np.empty((n_steps, n_p), dtype=np.int64) if record_trace else None
    orders = 0

    ev_step, ev_plane, ev_park = schedule.step, schedule.plane, schedule.parking
    ptr, n_ev = 0, len(schedule)
    for s in range(n_steps):
        k = rng.poisson(lam * np.minimum(x_c, nbar))
        x_c = np.where(k > nbar, 0, np.maximum(x_c - k, 0))
        newly_low = (x_c <= pol.r_c) & (low_since < 0)
        low_since[newly_low] = s

        arrived = due == s
        if arrived.any():
            x_p[arrived] += pol.q_p
            due[arrived] = -1

        while ptr < n_ev and ev_step[ptr] == s:
            a, b = int(ev_plane[ptr]), int(ev_park[ptr])
            ptr += 1
            if x_c[a] <= pol.r_c:
                d = -(-(pol.r_c + 1 - int(x_c[a])) // pol.q_c)
                given = min(d, int(x_p[b]))
                x_c[a] += given * pol.q_c
                x_p[b] -= given
                if s >= warmup_steps:
                    demands.append(d)
                    lead_times.append((s - low_since[a]) * tau_mc)
            elif s >= warmup_steps:
                demands.append(0)
            low_since[a] = s if x_c[a] <= pol.r_c else -1
            if x_p[b] <= pol.r_p and due[b] < 0:
                # lead time T = tau_lv + Exp(mu_lv); delivery in step floor(T / tau_mc) + 1
                due[b] = s + k_lv + 1 + int(rng.exponential(stoch.mu_lv) // tau_mc)
                orders += 1

        if s >= warmup_steps:
            hist_c += np.bincount(x_c, minlength=top_c + 1)
            hist_p += np.bincount(x_p, minlength=top_p + 1)
        if record_trace:
            trace_c[s] = x_c
            trace_p[s] = x_p
    return ReplicationResult(hist_c=hist_c, hist_p=hist_p, lead_time_days=lead_times,
                             demands=demands, trace_c=trace_c, trace_p=trace_p,
                             orders=orders)


def _replication_task(args):
    config, seed, n_steps, warmup_steps, schedule = args
    rng = np.random.Generator(np.random.Philox(seed))
    return simulate_replication(config, n_steps, warmup_steps, rng, schedule)


def _mean_se(values):
    values = [float(v) for v in values]
    n = len(values)
    mean = math.fsum(values) / n
    if n < 2:
        return mean, 0.0
    var = math.fsum((v - mean) ** 2 for v in values) / (n - 1)
    return mean, math.sqrt(var / n)


def run_monte_carlo(config, horizon_years=None, n_replications=None, seed=None,
                    warmup_years=None, n_jobs: int = 1) -> SimStats:
    """Simulate ``n_replications`` independent constellations and aggregate.

    Arguments left as ``None`` come from ``config.sim``. Results do not
    depend on ``n_jobs``.
    """
    sim = config.sim
    horizon_years = sim.horizon_years if horizon_years is None else horizon_years
    n_replications = sim.n_replications if n_replications is None else n_replications
    seed = sim.seed if seed is None else seed
    warmup_years = sim.warmup_years if warmup_years is None else warmup_years
    if not horizon_years > warmup_years >= 0 or n_replications < 1:
        raise ValueError("need horizon > warm-up >= 0 and at least one replication")

    tau_mc = config.stochastic.tau_mc
    n_steps = int(round(horizon_years * DAYS_PER_YEAR / tau_mc))
    warmup_steps = int(round(warmup_years * DAYS_PER_YEAR / tau_mc))
    schedule = contact_schedule(config, n_steps)
    tasks = [(config, seed ^ i, n_steps, warmup_steps, schedule) for i in range(n_replications)]
    if n_jobs == 1:
        results = [_replication_task(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=n_jobs) as pool:
            results = list(pool.map(_replication_task, tasks))
    return aggregate(results, config, horizon_years, warmup_years, seed)


def aggregate(results, config, horizon_years, warmup_years, seed) -> SimStats:
    nbar = config.geometry.n_sat_nominal
    pmf_c = [r.hist_c / r.hist_c.sum() for r in results]
    pmf_p = [r.hist_p / r.hist_p.sum() for r in results]
    lev_c = np.arange(pmf_c[0].size)
    lev_p = np.arange(pmf_p[0].size)
    means_c = [float(lev_c @ p) for p in pmf_c]
    means_p = [float(lev_p @ p) for p in pmf_p]
    short = [float(np.clip(nbar - lev_c, 0, None) @ p) for p in pmf_c]
    stock0 = [float(p[0]) for p in pmf_p]

    hist_c = [math.fsum(col) / len(results) for col in zip(*pmf_c)]
    hist_p = [math.fsum(col) / len(results) for col in zip(*pmf_p)]

    lead = np.concatenate([np.asarray(r.lead_time_days, dtype=float) for r in results])
    if lead.size:
        values, counts = np.unique(lead, return_counts=True)
        lead_hist = {"days": values.tolist(), "probability": (counts / counts.sum()).tolist()}
    else:
        lead_hist = {"days": [], "probability": []}
    dem = np.concatenate([np.asarray(r.demands, dtype=np.int64) for r in results])
    j_max = -(-(config.policy.r_c + 1) // config.policy.q_c)
    dem_counts = np.bincount(dem, minlength=j_max + 1) if dem.size else np.zeros(j_max + 1)
    demand_hist = (dem_counts / max(dem_counts.sum(), 1)).tolist()

    (m_c, m_c_se), (m_p, m_p_se) = _mean_se(means_c), _mean_se(means_p)
    (s_c, s_c_se), (p0, p0_se) = _mean_se(short), _mean_se(stock0)
    return SimStats(
        mean_c=m_c, mean_c_se=m_c_se, mean_p=m_p, mean_p_se=m_p_se,
        shortage_c=s_c, shortage_c_se=s_c_se, stockout_p=p0, stockout_p_se=p0_se,
        histogram_c=hist_c, histogram_p=hist_p, lead_time_histogram=lead_hist,
        demand_histogram=demand_hist, n_replications=len(results),
        horizon_years=float(horizon_years), warmup_years=float(warmup_years), seed=int(seed),
        per_replication={"mean_c": means_c, "mean_p": means_p, "shortage_c": short,
                         "stockout_p": stock0,
                         "orders": [r.orders for r in results]},
    )


def _rel(a, b):
    return abs(a - b) / abs(b) if b != 0 else (0.0 if a == b else math.inf)


def compare(analysis, sim, n_nominal: int | None = None) -> ErrorReport:
    """Error of the analysis against simulation, simulation taken as reference.

    ``analysis`` is a :class:`~sparechain.engine.CoupledSolution` (then
    ``n_nominal`` is required), a :class:`~sparechain.metrics.ResilienceMetrics`
    or a mapping with ``mean_c``, ``mean_p``, ``shortage_c`` and
    ``stockout_p``. ``sim`` is a :class:`SimStats` or the same kind of mapping.
    The validity flag is the stockout heuristic ``P(X_p = 0) < 1/(N_sat_p + 1)``
    evaluated on the analysis when the parking size is known.
    """
    valid = True
    if hasattr(analysis, "inplane"):
        if n_nominal is None:
            raise ValueError("n_nominal is required when comparing a solution object")
        valid = analysis.valid
        analysis = resilience(analysis, n_nominal).to_dict()
    elif not isinstance(analysis, dict):
        analysis = analysis.to_dict()
    if not isinstance(sim, dict):
        sim = sim.to_dict()
    if "n_sat_p" in analysis:
        valid = analysis["stockout_p"] < 1.0 / (analysis["n_sat_p"] + 1)
    return ErrorReport(
        rel_err_mean_c=_rel(analysis["mean_c"], sim["mean_c"]),
        rel_err_mean_p=_rel(analysis["mean_p"], sim["mean_p"]),
        rel_err_shortage_c=_rel(analysis["shortage_c"], sim["shortage_c"]),
        abs_err_stockout_pp=100.0 * abs(analysis["stockout_p"] - sim["stockout_p"]),
        valid=bool(valid),
    )
