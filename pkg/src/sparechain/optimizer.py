"""Design optimization of spare policies.

The indirect design ``(q_c, r_c, q_p, r_p, n_orbit_p, h_p)`` is searched by an
integer-coded genetic algorithm with a static penalty on the constraints

* ``g1 = S_c - eps_1``            (expected in-plane shortage)
* ``g2 = P(X_p = 0) - eps_2``     (parking stockout probability)
* ``g3 = m_total - m_payload``    (one launch must carry ``q_p`` batches)

Violations enter the fitness relative to their own scale (``eps_1``,
``eps_2``, ``m_payload``) so that one penalty weight serves all three. The
two-variable direct strategy is enumerated exhaustively when its box is small.
"""
from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .config import DESIGN_GENES, GaParams
from .engine import solve_direct, solve_indirect
from .exceptions import SparePolicyError
from .metrics import (CostBreakdown, batch_mass, cost_breakdown, cost_breakdown_direct,
                      resilience, resilience_direct)

log = logging.getLogger(__name__)

FAILED_PENALTY = 1.0e3  # added to the fitness of designs the solver cannot handle
EXHAUSTIVE_LIMIT = 10_000


@dataclass(frozen=True)
class DesignVector:
    q_c: int
    r_c: int
    q_p: int
    r_p: int
    n_orbit_p: int
    h_p: int

    def as_tuple(self) -> tuple:
        return tuple(getattr(self, g) for g in DESIGN_GENES)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class EvaluatedDesign:
    design: dict
    cost: CostBreakdown | None
    g1: float
    g2: float
    g3: float
    converged: bool
    fitness: float
    shortage_c: float = math.nan
    stockout_p: float | None = None
    m_total: float = math.nan
    message: str = ""

    @property
    def feasible(self) -> bool:
        return self.converged and self.g1 <= 0 and self.g2 <= 0 and self.g3 <= 0

    @property
    def c_total(self) -> float:
        return self.cost.c_total if self.cost is not None else math.inf

    def to_dict(self) -> dict:
        return {
            "design": dict(self.design),
            "cost": self.cost.to_dict() if self.cost is not None else None,
            "g1": self.g1, "g2": self.g2, "g3": self.g3,
            "feasible": self.feasible, "converged": self.converged, "fitness": self.fitness,
            "shortage_c": self.shortage_c, "stockout_p": self.stockout_p,
            "m_total": self.m_total, "message": self.message,
        }


@dataclass
class GenerationRecord:
    generation: int
    best_fitness: float
    best_cost: float  # best feasible c_total so far (inf if none)
    feasible_count: int
    evaluations: int


@dataclass
class OptimizationResult:
    best: EvaluatedDesign
    history: list = field(default_factory=list)
    evaluations: int = 0
    ga_best: EvaluatedDesign | None = None  # before coordinate search

    @property
    def feasible(self) -> bool:
        return self.best.feasible


def _violation(g: float, scale: float) -> float:
    if g <= 0:
        return 0.0
    return g / scale if math.isfinite(scale) and scale > 0 else g


def _penalized(cost: float, gs, scales, weight: float) -> float:
    return cost + weight * sum(_violation(g, s) for g, s in zip(gs, scales))


def evaluate_design(x, scenario, penalty_weight: float | None = None) -> EvaluatedDesign:
    """Solve and score one indirect design.

    ``x`` is a :class:`DesignVector` or a mapping with the six design genes.
    Solver failures and non-convergence are not raised; they come back as an
    infeasible design with a large fitness.
    """
    design = x.to_dict() if isinstance(x, DesignVector) else {g: x[g] for g in DESIGN_GENES}
    weight = scenario.optimizer.ga.penalty_weight if penalty_weight is None else penalty_weight
    opt = scenario.optimizer
    eps1 = opt.epsilon_1
    eps2 = opt.epsilon_2_for(int(design["q_p"]), int(design["r_p"]))
    try:
        cfg = scenario.with_design(**design)
        sol = solve_indirect(cfg)
    except (SparePolicyError, np.linalg.LinAlgError) as exc:
        return EvaluatedDesign(design=design, cost=None, g1=math.inf, g2=math.inf, g3=math.inf,
                               converged=False, fitness=FAILED_PENALTY * 2, message=str(exc))
    cost = cost_breakdown(sol, cfg)
    res = resilience(sol, cfg.geometry.n_sat_nominal)
    mass = batch_mass(cfg.policy.q_c, cfg.policy.q_p, cfg.geometry.a_p(cfg.constants),
                      cfg.geometry.a_c(cfg.constants), cfg.costs, cfg.constants)
    g = (res.shortage_c - eps1, res.stockout_p - eps2, mass.m_total - cfg.costs.m_payload)
    fitness = _penalized(cost.c_total, g, (eps1, eps2, cfg.costs.m_payload), weight)
    if not sol.converged:
        fitness += FAILED_PENALTY
    return EvaluatedDesign(design=design, cost=cost, g1=g[0], g2=g[1], g3=g[2],
                           converged=sol.converged, fitness=fitness,
                           shortage_c=res.shortage_c, stockout_p=res.stockout_p,
                           m_total=mass.m_total,
                           message="" if sol.converged else "fixed point did not converge")


def evaluate_direct(q: int, r: int, scenario, penalty_weight: float | None = None) -> EvaluatedDesign:
    """Solve and score one direct-strategy policy ``(q, r)``; no stockout constraint applies."""
    weight = scenario.optimizer.ga.penalty_weight if penalty_weight is None else penalty_weight
    design = {"q": int(q), "r": int(r)}
    eps1 = scenario.optimizer.epsilon_1
    try:
        cfg = scenario.with_direct(q=q, r=r)
        sol = solve_direct(cfg)
    except (SparePolicyError, np.linalg.LinAlgError) as exc:
        return EvaluatedDesign(design=design, cost=None, g1=math.inf, g2=0.0, g3=math.inf,
                               converged=False, fitness=FAILED_PENALTY * 2, message=str(exc))
    cost = cost_breakdown_direct(sol, cfg)
    res = resilience_direct(sol, cfg.geometry.n_sat_nominal)
    m_total = q * cfg.costs.m_sat
    g = (res.shortage_c - eps1, 0.0, m_total - cfg.direct.m_payload)
    fitness = _penalized(cost.c_total, g, (eps1, 1.0, cfg.direct.m_payload), weight)
    return EvaluatedDesign(design=design, cost=cost, g1=g[0], g2=g[1], g3=g[2], converged=True,
                           fitness=fitness, shortage_c=res.shortage_c, m_total=m_total)


def _evaluate(task):
    scenario, genes, direct, key = task
    if direct:
        return evaluate_direct(key[0], key[1], scenario)
    return evaluate_design(dict(zip(genes, key)), scenario)


class _Evaluator:
    """Picklable, memoizing wrapper around a design evaluation."""

    def __init__(self, scenario, genes, direct=False):
        self.scenario = scenario
        self.genes = genes
        self.direct = direct
        self.cache = {}

    def __call__(self, key):
        return _evaluate((self.scenario, self.genes, self.direct, key))

    def many(self, keys, n_jobs=1):
        todo = [k for k in dict.fromkeys(keys) if k not in self.cache]
        if todo:
            if n_jobs == 1 or len(todo) == 1:
                results = [self(k) for k in todo]
            else:
                with ProcessPoolExecutor(max_workers=n_jobs) as pool:
                    tasks = [(self.scenario, self.genes, self.direct, k) for k in todo]
                    results = list(pool.map(_evaluate, tasks))
            self.cache.update(zip(todo, results))
        return [self.cache[k] for k in keys]


def genetic_search(evaluator: _Evaluator, bounds: dict, params: GaParams,
                   n_jobs: int = 1) -> OptimizationResult:
    """Integer-coded GA: tournament selection, uniform crossover, uniform-reset mutation, elitism of one.

    With ``params.polish`` the GA's best design is then refined by
    :func:`coordinate_search`.

    The operator random stream is numpy's PCG64 seeded with ``params.seed``;
    evaluations are deterministic, so the whole run is reproducible.
    """
    genes = evaluator.genes
    lo = np.array([bounds[g][0] for g in genes], dtype=np.int64)
    hi = np.array([bounds[g][1] for g in genes], dtype=np.int64)
    rng = np.random.default_rng(params.seed)
    n_pop = params.population

    pop = rng.integers(lo, hi + 1, size=(n_pop, len(genes)))
    history = []
    best_feasible = None
    best_any = None
    for gen in range(params.generations + 1):
        keys = [tuple(int(v) for v in row) for row in pop]
        scored = evaluator.many(keys, n_jobs=n_jobs)
        fitness = np.array([e.fitness for e in scored])
        for e in scored:
            if best_any is None or e.fitness < best_any.fitness:
                best_any = e
            if e.feasible and (best_feasible is None or e.c_total < best_feasible.c_total):
                best_feasible = e
        history.append(GenerationRecord(
            generation=gen, best_fitness=float(fitness.min()),
            best_cost=best_feasible.c_total if best_feasible else math.inf,
            feasible_count=sum(e.feasible for e in scored), evaluations=len(evaluator.cache)))
        log.info("generation %d: best fitness %.6f, feasible %d", gen, fitness.min(),
                 history[-1].feasible_count)
        if gen == params.generations:
            break

        elite = pop[int(np.argmin(fitness))].copy()
        children = [elite]
        while len(children) < n_pop:
            a = _tournament(rng, fitness, params.tournament_size)
            b = _tournament(rng, fitness, params.tournament_size)
            child = pop[a].copy()
            if rng.random() < params.crossover_rate:
                take = rng.random(len(genes)) < 0.5
                child[take] = pop[b][take]
            mutate = rng.random(len(genes)) < params.mutation_rate
            if mutate.any():
                child[mutate] = rng.integers(lo[mutate], hi[mutate] + 1)
            children.append(child)
        pop = np.array(children)

    best = best_feasible if best_feasible is not None else best_any
    ga_best = best
    if params.polish:
        best = coordinate_search(evaluator, best, lo, hi, n_jobs=n_jobs)
    if not best.feasible:
        log.warning("no feasible design found; returning the least-penalized one")
    return OptimizationResult(best=best, history=history, evaluations=len(evaluator.cache),
                              ga_best=ga_best)


def _rank(e: EvaluatedDesign):
    # feasible designs first, by cost; then infeasible ones by penalized fitness
    return (0, e.c_total) if e.feasible else (1, e.fitness)


def _moves(span: int) -> list[int]:
    steps = sorted({1, 2, max(1, span // 20), max(1, span // 5)})
    return [s for s in steps if s <= span]


def coordinate_search(evaluator: _Evaluator, start: EvaluatedDesign, lo, hi,
                      n_jobs: int = 1) -> EvaluatedDesign:
    """Greedy integer coordinate descent, kept inside ``[lo, hi]``.

    Each sweep evaluates every single-gene move of size ``1, 2, span/20,
    span/5`` in both directions and takes the best improving one.
    """
    genes = evaluator.genes
    current = start
    x = np.array([current.design[g] for g in genes], dtype=np.int64)
    while True:
        keys = []
        for gi in range(len(genes)):
            for step in _moves(int(hi[gi] - lo[gi])):
                for sign in (1, -1):
                    y = x.copy()
                    y[gi] += sign * step
                    if lo[gi] <= y[gi] <= hi[gi]:
                        keys.append(tuple(int(v) for v in y))
        if not keys:
            return current
        scored = evaluator.many(keys, n_jobs=n_jobs)
        cand = min(scored, key=_rank)
        if _rank(cand) >= _rank(current):
            return current
        current = cand
        x = np.array([current.design[g] for g in genes], dtype=np.int64)
        log.info("coordinate search: %s -> %.6f", current.design, current.c_total)


def _tournament(rng, fitness, size):
    entrants = rng.integers(0, fitness.size, size=size)
    return int(entrants[np.argmin(fitness[entrants])])


def _clean_bounds(bounds, genes):
    out = {}
    for g in genes:
        lo, hi = bounds[g]
        if lo > hi:
            raise SparePolicyError(f"empty bounds for {g}")
        out[g] = (int(lo), int(hi))
    return out


def _with_ga(scenario, params):
    return replace(scenario, optimizer=replace(scenario.optimizer, ga=params))


def optimize(scenario, ga_params: GaParams | None = None, bounds: dict | None = None,
             n_jobs: int = 1) -> OptimizationResult:
    """Minimize the indirect strategy's total cost under the resilience and payload constraints."""
    params = scenario.optimizer.ga if ga_params is None else ga_params
    scenario = _with_ga(scenario, params)
    bounds = _clean_bounds(scenario.optimizer.bounds if bounds is None else bounds, DESIGN_GENES)
    evaluator = _Evaluator(scenario, DESIGN_GENES)
    return genetic_search(evaluator, bounds, params, n_jobs=n_jobs)


def optimize_direct(scenario, bounds: dict | None = None, ga_params: GaParams | None = None,
                    n_jobs: int = 1) -> OptimizationResult:
    """Best direct-strategy ``(q, r)``: exhaustive when the box is small, GA otherwise."""
    bounds = _clean_bounds(scenario.optimizer.direct_bounds if bounds is None else bounds,
                           ("q", "r"))
    evaluator = _Evaluator(scenario, ("q", "r"), direct=True)
    (q_lo, q_hi), (r_lo, r_hi) = bounds["q"], bounds["r"]
    size = (q_hi - q_lo + 1) * (r_hi - r_lo + 1)
    if size > EXHAUSTIVE_LIMIT:
        params = scenario.optimizer.ga if ga_params is None else ga_params
        evaluator.scenario = _with_ga(scenario, params)
        return genetic_search(evaluator, bounds, params, n_jobs=n_jobs)
    keys = [(q, r) for q in range(q_lo, q_hi + 1) for r in range(r_lo, r_hi + 1)]
    scored = evaluator.many(keys, n_jobs=n_jobs)
    feasible = [e for e in scored if e.feasible]
    if feasible:
        best = min(feasible, key=lambda e: (e.c_total, e.design["q"], e.design["r"]))
    else:
        best = min(scored, key=lambda e: e.fitness)
    record = GenerationRecord(generation=0, best_fitness=min(e.fitness for e in scored),
                              best_cost=best.c_total if best.feasible else math.inf,
                              feasible_count=len(feasible), evaluations=len(scored))
    return OptimizationResult(best=best, history=[record], evaluations=len(scored))


@dataclass
class SweepRow:
    lambda_sat_per_year: float
    direct_cost: float
    indirect_cost: float
    savings: float  # 1 - indirect / direct
    direct_design: dict
    indirect_design: dict
    direct_feasible: bool
    indirect_feasible: bool

    def to_dict(self) -> dict:
        return asdict(self)


def sweep_failure_rate(scenario, rates, ga_params: GaParams | None = None,
                       n_jobs: int = 1) -> list[SweepRow]:
    """Re-optimize both strategies at each failure rate, everything else fixed."""
    rows = []
    for rate in rates:
        if not 0 < rate:
            raise SparePolicyError(f"failure rate must be positive, got {rate}")
        cfg = scenario.with_failure_rate(float(rate))
        direct = optimize_direct(cfg, n_jobs=n_jobs).best
        indirect = optimize(cfg, ga_params=ga_params, n_jobs=n_jobs).best
        rows.append(SweepRow(
            lambda_sat_per_year=float(rate), direct_cost=direct.c_total,
            indirect_cost=indirect.c_total, savings=1.0 - indirect.c_total / direct.c_total,
            direct_design=direct.design, indirect_design=indirect.design,
            direct_feasible=direct.feasible, indirect_feasible=indirect.feasible))
        log.info("lambda=%.3g/yr: direct %.4f, indirect %.4f M$/day", rate,
                 direct.c_total, indirect.c_total)
    return rows
