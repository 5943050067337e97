"""Regret bookkeeping and the regret-matching policy family.

Two parallel accumulations live side by side:

* true regrets: the weighted sums that define the output's epsilon and the
  averaged potential. Their weights come from the averaging scheme
  (uniform / linear / greedy) in weights.py.
* guiding regrets: the copy policies are computed from. Transforms
  (plus-clamping, optimism, alternation gating, linear weighting) apply
  only here, so experiments can reshape the dynamics without touching the
  quantity being measured.

With the greedy scheme and no transforms the two accumulations coincide:
the chosen weight drives both, matching the single regret array of the
plain algorithm.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, UnsupportedModeError
from .games import Game, payoff, payoff_row, validate_profile

REGRET_KINDS = ("external", "internal")
MODES = ("pure_sampled", "mixed_two_player")
POLICY_WEIGHTINGS = ("uniform", "linear")

# Fold the lazy averaging scale into stored weights past this magnitude.
_FOLD_LIMIT = 1e120


@dataclass(frozen=True)
class VariantConfig:
    """Which regret dynamics to run. Defaults give vanilla external RM."""

    regret_kind: str = "external"
    plus_clamping: bool = False
    policy_weighting: str = "uniform"
    optimism: bool = False
    alternation_period: int = 1
    inertia: float = 1e-10
    mode: str = "pure_sampled"

    def __post_init__(self):
        if self.regret_kind not in REGRET_KINDS:
            raise ConfigError("regret_kind", f"must be one of {REGRET_KINDS}")
        if self.policy_weighting not in POLICY_WEIGHTINGS:
            raise ConfigError("policy_weighting", f"must be one of {POLICY_WEIGHTINGS}")
        if self.mode not in MODES:
            raise ConfigError("mode", f"must be one of {MODES}")
        if self.alternation_period < 1:
            raise ConfigError("alternation_period", "must be >= 1")
        if not self.inertia > 0:
            raise ConfigError("inertia", "must be > 0")


def external_instant_regret(game: Game, a) -> list[np.ndarray]:
    """Per player: r_i(a'_i) = u_i(a'_i, a_-i) - u_i(a); played entry exactly 0."""
    out = []
    for i in range(game.num_players):
        row = payoff_row(game, i, a)
        out.append(row - row[a[i]])
    return out


def internal_instant_regret(game: Game, a) -> list[np.ndarray]:
    """Per player: matrix with row a_i equal to the external vector, rest 0."""
    out = []
    for i, vec in enumerate(external_instant_regret(game, a)):
        m = np.zeros((game.actions[i], game.actions[i]))
        m[a[i]] = vec
        out.append(m)
    return out


def mixed_instant_regret_2p(game: Game, profile, regret_kind: str = "external"):
    """Expected instantaneous regrets for full mixed play (2 players, dense).

    external: r_i(a') = u_i(a', pi_-i) - u_i(pi).
    internal: row a gets pi_i(a) * (u_i(a', pi_-i) - u_i(a, pi_-i)).
    """
    if game.num_players != 2:
        raise UnsupportedModeError(
            "mixed play is limited to 2 players; expectation cost grows as"
            " O(|P| |A|^|P|)"
        )
    if not game.is_dense:
        raise UnsupportedModeError("mixed play requires a dense payoff tensor")
    p0, p1 = validate_profile(game, profile)
    v0 = game.dense[:, :, 0] @ p1
    v1 = game.dense[:, :, 1].T @ p0
    if regret_kind == "external":
        return [v0 - p0 @ v0, v1 - p1 @ v1]
    if regret_kind == "internal":
        return [
            p0[:, None] * (v0[None, :] - v0[:, None]),
            p1[:, None] * (v1[None, :] - v1[:, None]),
        ]
    raise ConfigError("regret_kind", f"must be one of {REGRET_KINDS}")


def rm_external_policy(guiding: np.ndarray) -> np.ndarray:
    """Proportional to positive regrets; uniform when none are positive."""
    pos = np.maximum(guiding, 0.0)
    total = pos.sum()
    if total <= 0.0:
        return np.full(guiding.shape, 1.0 / guiding.shape[0])
    return pos / total


def rm_internal_policy(guiding_row: np.ndarray, alpha: float,
                       last_action: int) -> np.ndarray:
    """Inertia rule: stay with alpha/(alpha+S), switch with R+(last,a')/(alpha+S)."""
    pos = np.maximum(guiding_row, 0.0)
    denom = alpha + pos.sum()
    p = pos / denom
    p[last_action] += alpha / denom
    return p


def swap_chain_policy(guiding: np.ndarray, alpha: float,
                      start: np.ndarray, iters: int = 64) -> np.ndarray:
    """Stationary policy of the positive-regret swap chain (mixed internal).

    Rows share the common denominator alpha + max row sum, which makes any
    stationary distribution satisfy the zero-inner-product condition the
    potential bound needs; computed by power iteration from the previous
    policy.
    """
    pos = np.maximum(guiding, 0.0)
    np.fill_diagonal(pos, 0.0)
    row_sums = pos.sum(axis=1)
    denom = alpha + row_sums.max()
    stay = 1.0 - row_sums / denom
    p = start
    for _ in range(iters):
        nxt = p @ pos / denom + stay * p
        if np.abs(nxt - p).max() < 1e-15:
            p = nxt
            break
        p = nxt
    total = p.sum()
    return p / total if total > 0 else np.full(p.shape, 1.0 / p.shape[0])


def potential(regrets, w_sum: float) -> float:
    """Sum of squared positive averaged regrets across all components."""
    if w_sum <= 0:
        raise ValueError("w_sum must be positive")
    arrays = regrets if isinstance(regrets, (list, tuple)) else [regrets]
    acc = 0.0
    for arr in arrays:
        v = np.maximum(arr, 0.0) / w_sum
        acc += float(np.dot(v.ravel(), v.ravel()))
    return acc


class RegretState:
    """Mutable per-solve state: both regret accumulations plus the averages.

    The averaging store keeps relative weights with a lazy scale factor:
    discount steps shrink the scale instead of rewriting history, and the
    scale folds into stored values before it can overflow. Normalized reads
    are scale-free.
    """

    def __init__(self, game: Game, config: VariantConfig):
        if config.mode == "mixed_two_player" and game.num_players != 2:
            raise UnsupportedModeError("mixed_two_player requires a 2-player game")
        self.game = game
        self.config = config
        shapes = [
            (n, n) if config.regret_kind == "internal" else (n,)
            for n in game.actions
        ]
        self.true = [np.zeros(s) for s in shapes]
        self.guide = [np.zeros(s) for s in shapes]
        self.last_guide_add = [np.zeros(s) for s in shapes]
        self.w_sum = 0.0
        self.g_sum = 0.0
        self.g_aux = 0.0  # mirror mass, used only by greedy + linear weighting
        self.count = 0
        self.avg_scale = 1.0
        self.joint: dict[tuple[int, ...], float] = {}
        self.policy_sums = [np.zeros(n) for n in game.actions]
        self.last_action: tuple[int, ...] | None = None
        self.last_profile: list[np.ndarray] | None = None
        self.joint_dense: np.ndarray | None = (
            np.zeros(game.actions) if config.mode == "mixed_two_player" else None
        )

    # -- averaging helpers -------------------------------------------------

    def _fold_scale(self):
        if self.avg_scale < 1.0 / _FOLD_LIMIT:
            for a in self.joint:
                self.joint[a] *= self.avg_scale
            for s in self.policy_sums:
                s *= self.avg_scale
            if self.joint_dense is not None:
                self.joint_dense *= self.avg_scale
            self.avg_scale = 1.0

    def _avg_add(self, played, rel_weight: float):
        """Record an iterate (joint action or profile) with the given weight."""
        v = rel_weight / self.avg_scale
        if v > _FOLD_LIMIT:
            self._fold_scale()
            v = rel_weight / self.avg_scale
        if isinstance(played, tuple):
            self.joint[played] = self.joint.get(played, 0.0) + v
            for i, ai in enumerate(played):
                self.policy_sums[i][ai] += v
            self.last_action = played
        else:
            for i, p in enumerate(played):
                self.policy_sums[i] += v * p
            if self.joint_dense is not None:
                self.joint_dense += v * np.multiply.outer(played[0], played[1])
            self.last_profile = [np.array(p) for p in played]

    def _avg_discount(self, w: float):
        self.avg_scale /= w
        self._fold_scale()

    # -- read views ----------------------------------------------------------

    def average_policies(self) -> list[np.ndarray]:
        out = []
        for s in self.policy_sums:
            total = s.sum()
            out.append(s / total if total > 0 else np.full(s.shape, 1 / s.shape[0]))
        return out

    def joint_weights(self) -> dict[tuple[int, ...], float]:
        """Sparse averaged joint distribution, unnormalized (pure mode)."""
        return dict(self.joint)

    def max_avg_regret(self) -> float:
        return max(float(r.max()) / self.w_sum for r in self.true)

    def avg_potential(self) -> float:
        return potential(self.true, self.w_sum)


def apply_guiding_transforms(state: RegretState, config: VariantConfig,
                             iteration_index: int) -> list[np.ndarray]:
    """The regret view policies select from at the given iteration.

    Plus-clamping, alternation gating, and linear weighting act at update
    time (see apply_iteration); the only selection-time transform is
    optimism, which counts the latest applied guiding increment once more
    without touching stored values.
    """
    if config.optimism and state.count > 0:
        return [g + b for g, b in zip(state.guide, state.last_guide_add)]
    return state.guide
