"""Markov-chain analysis, simulation and optimization of spare-satellite supply policies."""
from .config import ScenarioConfig
from .engine import CoupledSolution, EchelonSolution, solve_direct, solve_indirect
from .exceptions import ConfigError, NonConvergenceError, SparePolicyError
from .metrics import CostBreakdown, CostParams, ResilienceMetrics, cost_breakdown, resilience
from .optimizer import evaluate_design, optimize, optimize_direct, sweep_failure_rate
from .simulator import SimStats, compare, run_monte_carlo

__version__ = "0.1.0"

__all__ = [
    "ScenarioConfig", "CoupledSolution", "EchelonSolution", "solve_indirect", "solve_direct",
    "SparePolicyError", "ConfigError", "NonConvergenceError", "CostParams", "CostBreakdown",
    "ResilienceMetrics", "cost_breakdown", "resilience", "evaluate_design", "optimize",
    "optimize_direct", "sweep_failure_rate", "SimStats", "compare", "run_monte_carlo",
]
