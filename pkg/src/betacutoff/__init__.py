"""Beta-cutoff selfish mining under static block, fee and bonus rewards."""

__version__ = "0.1.0"

from .rewards import Bernoulli, Composite, Constant, Linear, combined  # noqa: E402
from .markov import AttackerParams, ConvergenceError, Equilibrium, StationaryDistribution  # noqa: E402
from .markov import hide_probability, orphan_rate, solve_equilibrium, stationary  # noqa: E402
from .calculus import RewardBreakdown, attacker_reward, f0, f_state, honest_benchmark, selfish_block_only  # noqa: E402
from .optimize import Objective, OptimizationResult, optimize_beta, profitability_threshold, sweep  # noqa: E402
from .simulation import SimConfig, SimResult, calibrate_lambda, simulate, state_occupancy  # noqa: E402

__all__ = [
    "Bernoulli", "Composite", "Constant", "Linear", "combined",
    "AttackerParams", "ConvergenceError", "Equilibrium", "StationaryDistribution",
    "hide_probability", "orphan_rate", "solve_equilibrium", "stationary",
    "RewardBreakdown", "attacker_reward", "f0", "f_state", "honest_benchmark", "selfish_block_only",
    "Objective", "OptimizationResult", "optimize_beta", "profitability_threshold", "sweep",
    "SimConfig", "SimResult", "calibrate_lambda", "simulate", "state_occupancy",
]
