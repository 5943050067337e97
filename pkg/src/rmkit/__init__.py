"""Equilibrium solvers for normal-form games built on regret matching,
with runtime-optimized iteration weighting, equilibrium gap metrics, a
double-oracle wrapper, CFR on Kuhn/Leduc poker, and a benchmark CLI."""

from .errors import (CapacityError, ConfigError, GameFormatError,
                     RmkitError, UnsupportedModeError)
from .games import (GAME_KINDS, Game, adversarialness, catalog, decompose,
                    expected_payoff, generate_random_game, interpolate,
                    load_game, materialize, payoff, save_game)
from .regrets import (VariantConfig, external_instant_regret,
                      internal_instant_regret, mixed_instant_regret_2p,
                      potential, rm_external_policy, rm_internal_policy,
                      swap_chain_policy)
from .weights import (SolveResult, TracePoint, WeightPolicy,
                      apply_iteration, bound_report, evaluate_objective,
                      log_schedule, optimal_weight, solve,
                      theorem_bound_audit)
from .metrics import (JointDistribution, cce_gap, ce_gap, nash_gap,
                      welfare, zero_sum_exploitability)
from .double_oracle import (DoubleOracleResult, RestrictedGame,
                            best_response, double_oracle_solve)
from .cfr import (CFRState, ExtensiveGame, build_kuhn, build_leduc,
                  cfr_iterate, cfr_solve, exploitability_efg,
                  kuhn_equilibrium)
from .bench import (AlgorithmSpec, ExperimentConfig, RunRecord, aggregate,
                    emit_csv, iterations_until_ratio, load_config,
                    parse_config, parse_csv, run)
from .plotting import emit_plot

__version__ = "0.1.0"

__all__ = [
    "AlgorithmSpec", "CFRState", "CapacityError", "ConfigError",
    "DoubleOracleResult", "ExperimentConfig", "ExtensiveGame",
    "GAME_KINDS", "Game", "GameFormatError", "JointDistribution",
    "RestrictedGame", "RmkitError", "RunRecord", "SolveResult",
    "TracePoint", "UnsupportedModeError", "VariantConfig", "WeightPolicy",
    "adversarialness", "aggregate", "apply_iteration", "best_response",
    "bound_report", "build_kuhn", "build_leduc", "catalog", "cce_gap",
    "ce_gap", "cfr_iterate", "cfr_solve", "decompose", "emit_csv",
    "emit_plot", "evaluate_objective", "expected_payoff",
    "exploitability_efg", "external_instant_regret",
    "generate_random_game", "internal_instant_regret", "interpolate",
    "iterations_until_ratio", "kuhn_equilibrium", "load_config",
    "load_game", "log_schedule", "materialize", "mixed_instant_regret_2p",
    "nash_gap", "optimal_weight", "parse_config", "parse_csv", "payoff",
    "potential", "rm_external_policy", "rm_internal_policy", "run",
    "save_game", "solve", "swap_chain_policy", "theorem_bound_audit",
    "welfare", "zero_sum_exploitability",
]
