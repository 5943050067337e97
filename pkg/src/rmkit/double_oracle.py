"""Double oracle: solve growing restricted games, expand by best response.

Each round solves the current restricted game with the configured
regret-matching solver, then asks every player for a full-game best
response to the restricted average profile; responses that gain more than
outer_tol join the restriction. Optionally the next round's solve is
seeded with the previous round's average profile as its first weighted
iterate, which pairs well with greedy weights.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .games import Game, materialize, payoff_batch
from .metrics import _response_values, nash_gap
from .regrets import VariantConfig
from .weights import SolveResult, WeightPolicy, solve


@dataclass(frozen=True)
class RestrictedGame:
    """A base game narrowed to per-player ordered action subsets."""

    base: Game
    supports: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if len(self.supports) != self.base.num_players:
            raise ValueError("one support per player required")
        for i, sup in enumerate(self.supports):
            if len(sup) == 0:
                raise ValueError(f"player {i} support is empty")
            if len(set(sup)) != len(sup):
                raise ValueError(f"player {i} support has duplicates")
            if min(sup) < 0 or max(sup) >= self.base.actions[i]:
                raise ValueError(f"player {i} support has invalid actions")

    def to_game(self) -> Game:
        """Dense sub-game over the restricted actions."""
        base = materialize(self.base)
        idx = np.ix_(*[np.asarray(s, dtype=np.int64) for s in self.supports],
                     np.arange(base.num_players))
        return Game(actions=tuple(len(s) for s in self.supports),
                    kind=base.kind, delta=base.delta,
                    dense=np.ascontiguousarray(base.dense[idx]))

    def lift(self, profile) -> list[np.ndarray]:
        """Restricted per-player policies -> full-game policies (zeros elsewhere)."""
        out = []
        for i, (sup, p) in enumerate(zip(self.supports, profile)):
            full = np.zeros(self.base.actions[i])
            full[list(sup)] = np.asarray(p, dtype=np.float64)
            out.append(full)
        return out

    def restrict(self, full_profile) -> list[np.ndarray]:
        out = []
        for sup, p in zip(self.supports, full_profile):
            q = np.asarray(p, dtype=np.float64)[list(sup)]
            total = q.sum()
            out.append(q / total if total > 0 else
                       np.full(len(sup), 1.0 / len(sup)))
        return out


def best_response(game: Game, player: int, profile) -> tuple[int, float]:
    """Full-game best pure response and its value against the others' mixes.

    profile carries one policy per player over the full action sets; the
    responding player's own entry is ignored. Ties break to the lowest
    action index.
    """
    dense = materialize(game).dense
    policies = [np.asarray(p, dtype=np.float64) for p in profile]
    values = _response_values(dense[..., player], policies, player)
    a = int(np.argmax(values))
    return a, float(values[a])


@dataclass
class DoubleOracleResult:
    profile: list[np.ndarray]
    supports: tuple[tuple[int, ...], ...]
    rounds: int
    total_inner_iterations: int
    restricted_gap: float
    converged: bool
    inner_results: list[SolveResult] = field(default_factory=list, repr=False)


def double_oracle_solve(game: Game, variant: VariantConfig,
                        weights: WeightPolicy, inner_iterations: int,
                        seed: int, seed_previous: bool = False,
                        outer_tol: float = 1e-3,
                        max_rounds: int = 50,
                        keep_inner: bool = False) -> DoubleOracleResult:
    """Run double oracle with a regret-matching inner solver.

    The initial restriction is one uniformly sampled action per player.
    Termination: a round in which no player's best response beats the
    restricted average by more than outer_tol. The returned full-game
    profile then has nash_gap at most outer_tol plus the inner solve's own
    gap. max_rounds guards against slow support growth.
    """
    if max_rounds < 1:
        raise ValueError("max_rounds must be >= 1")
    if inner_iterations < 1:
        raise ValueError("inner_iterations must be >= 1")
    ss = np.random.SeedSequence(seed)
    init_rng = np.random.default_rng(ss.spawn(1)[0])
    round_seeds = [int(s.generate_state(1, np.uint64)[0] >> 1)
                   for s in ss.spawn(max_rounds)]
    supports = [[int(init_rng.integers(n))] for n in game.actions]

    prev_full = None
    total = 0
    converged = False
    inner_results: list[SolveResult] = []
    for rnd in range(max_rounds):
        restriction = RestrictedGame(game, tuple(tuple(s) for s in supports))
        sub = restriction.to_game()
        seed_profile = (restriction.restrict(prev_full)
                        if seed_previous and prev_full is not None else None)
        res = solve(sub, variant, weights, inner_iterations,
                    seed=round_seeds[rnd], seed_profile=seed_profile)
        if keep_inner:
            inner_results.append(res)
        total += inner_iterations
        full = restriction.lift(res.avg_policies)
        prev_full = full
        restricted_gap = nash_gap(sub, res.avg_policies)

        added = False
        for i in range(game.num_players):
            a, value = best_response(game, i, full)
            current = _profile_value(game, full, i)
            if value - current > outer_tol and a not in supports[i]:
                supports[i].append(a)
                added = True
        if not added:
            converged = True
            break

    return DoubleOracleResult(
        profile=prev_full,
        supports=tuple(tuple(s) for s in supports),
        rounds=rnd + 1,
        total_inner_iterations=total,
        restricted_gap=restricted_gap,
        converged=converged,
        inner_results=inner_results,
    )


def _profile_value(game: Game, profile, player: int) -> float:
    dense = materialize(game).dense
    values = _response_values(dense[..., player], profile, player)
    return float(np.asarray(profile[player]) @ values)
