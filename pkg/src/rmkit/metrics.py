"""Equilibrium quality metrics.

Every gap answers "how much could someone gain by disobeying": nash_gap
against a product profile, cce_gap against a joint distribution with only
opt-out deviations, ce_gap with per-recommendation swaps. Gaps are
reported raw, in payoff units; callers normalize by the payoff range when
comparing across games.
"""

from __future__ import annotations

import numpy as np

from .errors import CapacityError
from .games import (
    DEFAULT_CELL_LIMIT,
    Game,
    materialize,
    payoff_batch,
    payoff_rows_batch,
    validate_profile,
)


class JointDistribution:
    """Sparse nonnegative weights over joint actions; the CE/CCE candidate.

    Weights need not be normalized; every metric divides by the total, so
    gaps are invariant under positive rescaling.
    """

    __slots__ = ("_weights", "_total")

    def __init__(self, weights):
        items = []
        total = 0.0
        for a, v in weights.items():
            v = float(v)
            if v < 0 or not np.isfinite(v):
                raise ValueError(f"weight for {a} must be finite and >= 0, got {v}")
            if v == 0.0:
                continue
            items.append((tuple(int(x) for x in a), v))
            total += v
        if total <= 0:
            raise ValueError("distribution needs positive total weight")
        self._weights = dict(sorted(items))
        self._total = total

    @classmethod
    def from_dense(cls, array: np.ndarray) -> "JointDistribution":
        array = np.asarray(array, dtype=np.float64)
        idx = np.argwhere(array > 0)
        return cls({tuple(int(x) for x in row): float(array[tuple(row)])
                    for row in idx})

    @classmethod
    def from_profile(cls, profile, cell_limit: int = 10_000_000) -> "JointDistribution":
        """Product distribution of independent per-player policies."""
        shape = tuple(len(p) for p in profile)
        if int(np.prod(shape)) > cell_limit:
            raise CapacityError(
                f"product support {np.prod(shape)} exceeds limit {cell_limit}")
        dense = np.asarray(profile[0], dtype=np.float64)
        for p in profile[1:]:
            dense = np.multiply.outer(dense, np.asarray(p, dtype=np.float64))
        return cls.from_dense(dense)

    @property
    def total_weight(self) -> float:
        return self._total

    @property
    def support_size(self) -> int:
        return len(self._weights)

    def support(self):
        return list(self._weights)

    def prob(self, action) -> float:
        return self._weights.get(tuple(int(x) for x in action), 0.0) / self._total

    def items(self):
        return list(self._weights.items())

    def arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """Support as an (m, players) int array plus normalized probabilities."""
        support = np.array(list(self._weights), dtype=np.int64)
        probs = np.fromiter(self._weights.values(), dtype=np.float64,
                            count=len(self._weights)) / self._total
        return support, probs

    def as_dense(self, actions) -> np.ndarray:
        out = np.zeros(tuple(actions), dtype=np.float64)
        for a, v in self._weights.items():
            out[a] = v / self._total
        return out


def _checked_arrays(game: Game, dist: JointDistribution):
    support, probs = dist.arrays()
    if support.shape[1] != game.num_players:
        raise ValueError("distribution support does not match the game's players")
    for i, n in enumerate(game.actions):
        col = support[:, i]
        if col.min() < 0 or col.max() >= n:
            raise ValueError(f"support contains invalid actions for player {i}")
    return support, probs


def _response_values(dense: np.ndarray, profile, keep: int) -> np.ndarray:
    # contract every axis but `keep` against the other players' policies;
    # descending order keeps earlier axis indices stable
    out = dense
    for j in range(len(profile) - 1, -1, -1):
        if j == keep:
            continue
        out = np.tensordot(out, profile[j], axes=([j], [0]))
    return out


def _dense_for(game: Game, cell_limit: int) -> np.ndarray:
    if game.is_dense:
        return game.dense
    return materialize(game, cell_limit=cell_limit).dense


def nash_gap(game: Game, profile, cell_limit: int = DEFAULT_CELL_LIMIT) -> float:
    """Largest single player's gain from a best pure response to the profile.

    Pure responses suffice: the deviation payoff is linear in the
    deviator's own mixture.
    """
    profile = validate_profile(game, profile)
    dense = _dense_for(game, cell_limit)
    worst = -np.inf
    for i in range(game.num_players):
        values = _response_values(dense[..., i], profile, i)
        worst = max(worst, float(values.max() - profile[i] @ values))
    return worst


def zero_sum_exploitability(game: Game, profile,
                            cell_limit: int = DEFAULT_CELL_LIMIT) -> float:
    """Sum of both players' best-response gains in a two-player zero-sum game.

    The conventional exploitability measure; equals the sum of the two
    per-player nash_gap terms, so it is at most twice nash_gap.
    """
    if game.num_players != 2:
        raise ValueError("exploitability in this form needs exactly 2 players")
    profile = validate_profile(game, profile)
    dense = _dense_for(game, cell_limit)
    total = 0.0
    for i in range(2):
        values = _response_values(dense[..., i], profile, i)
        total += float(values.max() - profile[i] @ values)
    return total


def cce_gap(game: Game, dist: JointDistribution) -> float:
    """Best gain any player could get from a fixed deviation action.

    max over players i and actions a' of sum_a p(a) (u_i(a', a_-i) - u_i(a)).
    """
    support, probs = _checked_arrays(game, dist)
    base = probs @ payoff_batch(game, support)
    gap = -np.inf
    for i in range(game.num_players):
        rows = payoff_rows_batch(game, i, support)
        gap = max(gap, float((probs @ rows).max() - base[i]))
    return gap


def ce_gap(game: Game, dist: JointDistribution) -> float:
    """Best gain any player could get from an action-swap deviation rule.

    The optimal swap decomposes per recommended action, so this is
    max_i sum_{a_i} max(0, max_{a'} sum_{a: a_i fixed} p(a) (u_i(a',a_-i) - u_i(a)))
    with no enumeration of whole swap functions.
    """
    support, probs = _checked_arrays(game, dist)
    payoffs = payoff_batch(game, support)
    gap = -np.inf
    for i in range(game.num_players):
        n = game.actions[i]
        rows = payoff_rows_batch(game, i, support)
        grouped = np.zeros((n, n))
        np.add.at(grouped, support[:, i], probs[:, None] * rows)
        base = np.zeros(n)
        np.add.at(base, support[:, i], probs * payoffs[:, i])
        gains = grouped - base[:, None]
        gap = max(gap, float(np.maximum(gains.max(axis=1), 0.0).sum()))
    return gap


def welfare(game: Game, dist: JointDistribution) -> float:
    """Expected total payoff across players under the distribution."""
    support, probs = _checked_arrays(game, dist)
    return float(probs @ payoff_batch(game, support).sum(axis=1))
