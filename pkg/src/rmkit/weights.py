"""Iteration weighting and the full solve loop.

Each iteration's weight can follow a fixed schedule (uniform or linear) or
be chosen greedily at runtime: minimize the averaged potential (or the sum
of positive regrets) of the post-update true regrets over w in
[floor, cap]. The minimization objective

    f(w) = sum_j max(0, R_j + w r_j)^2 / (w_sum + w)^2

is affine in s = 1/(w_sum + w) inside each positive-part composition, so it
is unimodal in w; the exact search sweeps the sign-flip breakpoints
-R_j/r_j and per-segment stationary points, and golden-section or a
log-spaced candidate grid can stand in for it.

Weights above 1 are applied by discounting: divide stored regrets and
averaging weights by w and add the new iterate at weight 1, which is the
same normalized update without the overflow risk of ever-growing sums.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import ConfigError
from .games import Game
from .regrets import (
    RegretState,
    VariantConfig,
    apply_guiding_transforms,
    external_instant_regret,
    internal_instant_regret,
    mixed_instant_regret_2p,
    rm_external_policy,
    rm_internal_policy,
    swap_chain_policy,
)

SCHEMES = ("uniform", "linear", "greedy")
OBJECTIVES = ("potential", "sum_positive_regrets")
SEARCHES = ("exact", "grid", "golden")

_INVPHI = (np.sqrt(5.0) - 1.0) / 2.0
_REL_TIE = 1e-12


@dataclass(frozen=True)
class WeightPolicy:
    """How each iteration's averaging weight is chosen.

    floor_fraction sets a per-iteration lower bound floor_fraction*w_sum/t.
    Defaults to 0; 0.5 works well for external regret in two-player
    zero-sum games, and extensive-form solves default to 1.0.
    """

    scheme: str = "uniform"
    floor_fraction: float = 0.0
    objective: str = "potential"
    search: str = "exact"
    grid_points: int = 10
    golden_tol: float = 1e-10
    cap_factor: float = 1e6

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ConfigError("scheme", f"must be one of {SCHEMES}")
        if self.objective not in OBJECTIVES:
            raise ConfigError("objective", f"must be one of {OBJECTIVES}")
        if self.search not in SEARCHES:
            raise ConfigError("search", f"must be one of {SEARCHES}")
        if not 0.0 <= self.floor_fraction <= 2.0:
            raise ConfigError("floor_fraction", "must lie in [0, 2]")
        if self.grid_points < 1:
            raise ConfigError("grid_points", "must be >= 1")
        if not self.golden_tol > 0:
            raise ConfigError("golden_tol", "must be > 0")
        if not self.cap_factor > 0:
            raise ConfigError("cap_factor", "must be > 0")


@dataclass
class TracePoint:
    iteration: int
    wall_ns: int
    weight: float
    metrics: dict[str, float]


@dataclass
class SolveResult:
    """Solver output: the averaged play plus the final state and trace."""

    joint: "JointDistribution | None"
    avg_policies: list[np.ndarray]
    state: RegretState
    trace: list[TracePoint] = field(default_factory=list)


def evaluate_objective(R: np.ndarray, r: np.ndarray, w_sum: float, w: float,
                       objective: str = "potential") -> float:
    """The greedy objective at a specific weight."""
    v = np.maximum(0.0, R + w * r)
    if objective == "potential":
        return float(v @ v) / (w_sum + w) ** 2
    if objective == "sum_positive_regrets":
        return float(v.sum()) / (w_sum + w)
    raise ConfigError("objective", f"must be one of {OBJECTIVES}")


def _golden(R, r, w_sum, floor, cap, objective, tol):
    a, b = floor, cap
    span = cap - floor
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc = evaluate_objective(R, r, w_sum, c, objective)
    fd = evaluate_objective(R, r, w_sum, d, objective)
    while (b - a) > tol * span + 1e-300:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = evaluate_objective(R, r, w_sum, c, objective)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = evaluate_objective(R, r, w_sum, d, objective)
    w = 0.5 * (a + b)
    return w, evaluate_objective(R, r, w_sum, w, objective)


def _grid(R, r, w_sum, floor, cap, objective, candidates):
    ws = np.unique(np.clip(np.maximum(candidates, floor), None, cap))
    best_w = float(ws[0])
    best_f = evaluate_objective(R, r, w_sum, best_w, objective)
    for w in ws[1:]:
        f = evaluate_objective(R, r, w_sum, float(w), objective)
        if f < best_f - _REL_TIE * abs(best_f):
            best_w, best_f = float(w), f
    return best_w, best_f


def optimal_weight(R, r, w_sum: float, floor: float = 0.0,
                   objective: str = "potential", search: str = "exact",
                   cap: float | None = None, golden_tol: float = 1e-10,
                   grid: np.ndarray | None = None) -> tuple[float, float]:
    """Best iteration weight in [floor, cap] and its objective value.

    R and r are the flattened true regret components and the matching
    instantaneous components, concatenated across players. Ties within a
    relative 1e-12 of the minimum resolve to the smallest weight.
    """
    R = np.ascontiguousarray(R, dtype=np.float64).ravel()
    r = np.ascontiguousarray(r, dtype=np.float64).ravel()
    if R.size == 0 or R.shape != r.shape:
        raise ValueError("R and r must be nonempty arrays of equal length")
    if not (np.all(np.isfinite(R)) and np.all(np.isfinite(r))):
        raise ValueError("regret components must be finite")
    if not (np.isfinite(w_sum) and w_sum > 0):
        raise ValueError("w_sum must be positive and finite")
    if not (np.isfinite(floor) and floor >= 0):
        raise ValueError("floor must be nonnegative and finite")
    if cap is None:
        cap = 1e6 * w_sum
    if search == "exact":
        if objective == "potential":
            return _kernels.best_weight_squared(R, r, w_sum, floor, cap)
        if objective == "sum_positive_regrets":
            return _kernels.best_weight_linear_sum(R, r, w_sum, floor, cap)
        raise ConfigError("objective", f"must be one of {OBJECTIVES}")
    if search == "golden":
        return _golden(R, r, w_sum, floor, max(cap, floor), objective, golden_tol)
    if search == "grid":
        if grid is None:
            raise ValueError("grid search requires candidate weights")
        return _grid(R, r, w_sum, floor, max(cap, floor), objective, grid)
    raise ConfigError("search", f"must be one of {SEARCHES}")


def positive_weight_bound(R: np.ndarray, r: np.ndarray,
                          uniform_candidate: float) -> float:
    """Lower bound for a restarted search when the unconstrained best is 0.

    The smallest positive sign-flip breakpoint, or the uniform-step
    candidate if that is smaller (keeping it in the domain preserves the
    per-step dominance guarantee).
    """
    lo = uniform_candidate
    nz = r != 0.0
    if np.any(nz):
        bps = -R[nz] / r[nz]
        pos = bps[bps > 0.0]
        if pos.size:
            lo = min(lo, float(pos.min()))
    return lo


def apply_iteration(state: RegretState, played, r, w: float, *,
                    floor: float = 0.0, mirror_guide: bool = True) -> RegretState:
    """Fold one iterate into the state with weight w.

    played: a joint action tuple (pure mode) or a list of per-player policy
    vectors. w <= 1 adds directly; w > 1 discounts all stored history by
    1/w and adds the iterate at weight 1 (identical normalized result).

    mirror_guide=True drives the guiding regrets with the same relative
    weight as the true regrets (the greedy scheme's semantics; linear
    policy_weighting additionally multiplies by the iteration index).
    With mirror_guide=False the guiding side follows policy_weighting
    alone: weight 1 per iteration, or proportional to the iteration index.
    """
    if not (np.isfinite(w) and w >= 0):
        raise ValueError(f"weight must be finite and nonnegative, got {w}")
    if w < floor:
        raise ValueError(f"weight {w} violates the floor {floor}")
    cfg = state.config
    if isinstance(played, tuple) and cfg.regret_kind == "internal":
        for i, ai in enumerate(played):
            if np.any(r[i][np.arange(len(r[i])) != ai]):
                raise ValueError("internal instant regret must be zero off the played row")

    if state.count == 0:
        if w <= 0:
            raise ValueError("the first iterate needs a positive weight")
        for t_arr, r_arr in zip(state.true, r):
            t_arr += w * np.asarray(r_arr)
        state.w_sum = w
        state._avg_add(played, w)
        gamma = w
        base = w
        _guide_update(state, r, gamma, base, 1)
        state.count = 1
        return state

    if w == 0.0:
        return state

    t = state.count + 1
    w_sum_before = state.w_sum
    if w <= 1.0:
        for t_arr, r_arr in zip(state.true, r):
            t_arr += w * np.asarray(r_arr)
        state.w_sum = w_sum_before + w
        state._avg_add(played, w)
    else:
        for t_arr, r_arr in zip(state.true, r):
            t_arr /= w
            t_arr += np.asarray(r_arr)
        state.w_sum = w_sum_before / w + 1.0
        state._avg_discount(w)
        state._avg_add(played, 1.0)

    if mirror_guide:
        if cfg.policy_weighting == "linear":
            base = w * state.g_aux / w_sum_before
            gamma = base * t
        else:
            # g_aux == w_sum here, so the mirror weight is w exactly; computing
            # it directly keeps guiding regrets bit-identical to true regrets
            base = gamma = w
    else:
        base = state.g_sum / state.count
        gamma = 2.0 * base if cfg.policy_weighting == "linear" else base
    _guide_update(state, r, gamma, base, t)
    state.count += 1
    return state


def _guide_update(state: RegretState, r, gamma: float, base: float, t: int):
    cfg = state.config
    n = cfg.alternation_period
    if gamma > 1.0:
        for g in state.guide:
            g /= gamma
        state.g_sum = state.g_sum / gamma + 1.0
        state.g_aux = state.g_aux / gamma + base / gamma
        applied = 1.0
    else:
        state.g_sum += gamma
        state.g_aux += base
        applied = gamma
    for i, (g, add) in enumerate(zip(state.guide, state.last_guide_add)):
        if t % n == i % n:
            inc = applied * np.asarray(r[i])
            g += inc
            add[...] = inc
        else:
            add[...] = 0.0
    if cfg.plus_clamping:
        for g in state.guide:
            np.maximum(g, 0.0, out=g)


def _policies(state: RegretState, selection, rng) -> list[np.ndarray]:
    cfg = state.config
    if cfg.regret_kind == "external":
        return [rm_external_policy(v) for v in selection]
    if cfg.mode == "pure_sampled":
        return [
            rm_internal_policy(m[a], cfg.inertia, a)
            for m, a in zip(selection, state.last_action)
        ]
    return [
        swap_chain_policy(m, cfg.inertia, p)
        for m, p in zip(selection, state.last_profile)
    ]


def _sample(policies, rng, actions) -> tuple[int, ...]:
    out = []
    for p, n in zip(policies, actions):
        u = rng.random()
        idx = int(np.searchsorted(np.cumsum(p), u, side="right"))
        out.append(min(idx, n - 1))
    return tuple(out)


def _instant(game, cfg, played):
    if cfg.mode == "mixed_two_player":
        return mixed_instant_regret_2p(game, played, cfg.regret_kind)
    if cfg.regret_kind == "external":
        return external_instant_regret(game, played)
    return internal_instant_regret(game, played)


def log_schedule(total: int, points: int) -> list[int]:
    """Distinct integer checkpoints, log-spaced from 1 to total inclusive."""
    if total < 1:
        raise ValueError("need at least one iteration")
    raw = np.geomspace(1, total, num=max(1, points))
    return sorted(set(int(round(x)) for x in raw) | {total})


def solve(game: Game, variant: VariantConfig, weights: WeightPolicy,
          iterations: int, seed: int, eval_schedule=20,
          metrics: tuple[str, ...] = ("max_avg_regret",),
          seed_profile=None, on_checkpoint=None) -> SolveResult:
    """Run the full weighted regret-matching loop for `iterations` iterates.

    Iteration 1 plays a uniformly random joint action (or, in mixed mode,
    the uniform profile) at weight 1; iterations 2..T play the
    regret-matching policies and weight per the WeightPolicy. All
    randomness comes from numpy's seeded PCG64 generator: one integer draw
    per player at initialization, then one uniform draw per player per
    iteration in pure mode. Results are deterministic given (game, configs,
    seed) and a fixed kernel backend.

    seed_profile, when given, replaces the random first iterate: the
    profile is scored by its exact mixed instantaneous regrets (2-player
    dense games only) and enters the averages at weight 1.

    Reported wall times exclude time spent computing checkpoint metrics.
    """
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    schedule = (log_schedule(iterations, eval_schedule)
                if isinstance(eval_schedule, int) else
                sorted(set(int(t) for t in eval_schedule) | {iterations}))
    rng = np.random.default_rng(seed)
    state = RegretState(game, variant)
    mirror = weights.scheme == "greedy"
    trace: list[TracePoint] = []
    start = time.perf_counter_ns()
    instrumentation = 0

    def checkpoint(t: int, w: float):
        nonlocal instrumentation
        wall = time.perf_counter_ns() - start - instrumentation
        m0 = time.perf_counter_ns()
        vals = {name: _metric_value(name, game, state) for name in metrics}
        trace.append(TracePoint(iteration=t, wall_ns=wall, weight=w, metrics=vals))
        if on_checkpoint is not None:
            on_checkpoint(state, t)
        instrumentation += time.perf_counter_ns() - m0

    if seed_profile is not None:
        played = [np.asarray(p, dtype=np.float64) for p in seed_profile]
        r = mixed_instant_regret_2p(game, played, variant.regret_kind)
    elif variant.mode == "mixed_two_player":
        played = [np.full(n, 1.0 / n) for n in game.actions]
        r = mixed_instant_regret_2p(game, played, variant.regret_kind)
    else:
        played = tuple(int(rng.integers(n)) for n in game.actions)
        r = _instant(game, variant, played)
    apply_iteration(state, played, r, 1.0, mirror_guide=mirror)
    if 1 in schedule:
        checkpoint(1, 1.0)

    for t in range(2, iterations + 1):
        selection = apply_guiding_transforms(state, variant, t)
        policies = _policies(state, selection, rng)
        if variant.mode == "mixed_two_player":
            played = policies
        else:
            played = _sample(policies, rng, game.actions)
        r = _instant(game, variant, played)

        t_apply = state.count + 1
        floor = weights.floor_fraction * state.w_sum / t_apply
        if weights.scheme == "uniform":
            w = state.w_sum / state.count
        elif weights.scheme == "linear":
            w = 2.0 * state.w_sum / state.count
        else:
            cap = weights.cap_factor * state.w_sum
            R_cat = np.concatenate([a.ravel() for a in state.true])
            r_cat = np.concatenate([np.asarray(a).ravel() for a in r])
            if weights.search == "grid":
                lo = state.w_sum / state.count
                grid = np.geomspace(lo, lo * iterations**2, weights.grid_points)
                w, _ = optimal_weight(R_cat, r_cat, state.w_sum, floor,
                                      weights.objective, "grid", cap, grid=grid)
            else:
                w, _ = optimal_weight(R_cat, r_cat, state.w_sum, floor,
                                      weights.objective, weights.search, cap,
                                      golden_tol=weights.golden_tol)
            if w == 0.0:
                # a zero weight leaves the state untouched and can deadlock
                # the sampled dynamics at a non-equilibrium, so apply the
                # best strictly positive weight instead; keeping the
                # uniform-step candidate inside the domain preserves the
                # per-step dominance the convergence guarantee rests on
                lo = positive_weight_bound(R_cat, r_cat,
                                           state.w_sum / state.count)
                w, _ = optimal_weight(R_cat, r_cat, state.w_sum, min(lo, cap),
                                      weights.objective, weights.search, cap,
                                      golden_tol=weights.golden_tol)
        w = max(w, floor)
        apply_iteration(state, played, r, w, floor=floor, mirror_guide=mirror)
        if t in schedule:
            checkpoint(t, w)

    from .metrics import JointDistribution

    joint = None
    if variant.mode == "pure_sampled":
        if state.joint:
            joint = JointDistribution(state.joint_weights())
    elif state.joint_dense is not None:
        joint = JointDistribution.from_dense(state.joint_dense)
    return SolveResult(joint=joint, avg_policies=state.average_policies(),
                       state=state, trace=trace)


def _metric_value(name: str, game: Game, state: RegretState) -> float:
    from . import metrics as _m

    if name == "max_avg_regret":
        return state.max_avg_regret()
    if name == "potential":
        return state.avg_potential()
    if name == "nash_gap":
        return _m.nash_gap(game, state.average_policies())
    if name in ("ce_gap", "cce_gap", "welfare"):
        if state.config.mode == "pure_sampled":
            dist = _m.JointDistribution(state.joint_weights())
        else:
            dist = _m.JointDistribution.from_dense(state.joint_dense)
        return getattr(_m, name)(game, dist)
    raise ConfigError("metrics", f"unknown metric {name!r}")


def theorem_bound_audit(state: RegretState) -> bool:
    """Check the potential growth guarantee on the current state.

    With weights normalized to sum to T, the total potential of the true
    regrets must stay below |P| * C * T where C = delta^2 * A_max for
    external regret and delta^2 * A_max^2 for internal; equivalently the
    averaged potential is at most |P| * C / T. The implied cap on the
    maximum average regret, sqrt(|P| * C / T), is checked too.
    """
    report = bound_report(state)
    return bool(report["ok"])


def bound_report(state: RegretState) -> dict:
    if state.count < 1:
        raise ValueError("audit requires at least one applied iteration")
    game = state.game
    a_max = max(game.actions)
    c = game.delta**2 * (a_max if state.config.regret_kind == "external"
                         else a_max**2)
    bound = game.num_players * c / state.count
    value = state.avg_potential()
    reg_bound = float(np.sqrt(bound))
    reg_value = state.max_avg_regret()
    ok = (value <= bound * (1 + 1e-9) + 1e-12
          and reg_value <= reg_bound * (1 + 1e-9) + 1e-12)
    return {
        "ok": ok,
        "potential": value,
        "potential_bound": bound,
        "max_avg_regret": reg_value,
        "regret_bound": reg_bound,
        "slack_ratio": value / bound if bound > 0 else np.inf,
        "iterations": state.count,
    }
