"""Counterfactual regret minimization on small poker trees.

The trees expand every chance outcome explicitly, so one iteration is one
exact full-tree traversal with no sampling anywhere. Averaging supports
the same three weight schemes as the normal-form solver; the greedy
scheme picks one weight per iteration shared by every infoset being
updated, minimizing the summed potential of the averaged regrets, with a
default floor of 100% of the mean weight so far (high floors work best
on these trees).

Kuhn: 3 cards, one bet size, single round. Leduc: 6 cards in 3 ranks and
2 suits, two rounds with a public card between them, raise sizes 2 then
4, at most two raises per round. Both are two-player zero-sum, ante 1.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .regrets import rm_external_policy
from .weights import log_schedule, optimal_weight, positive_weight_bound

KUHN_RANKS = ("J", "Q", "K")
AVERAGING = ("uniform", "linear", "greedy")


@dataclass
class Terminal:
    payoffs: tuple[float, float]
    uid: int = -1


@dataclass
class Chance:
    probs: list[float] = field(repr=False)
    children: list = field(repr=False, default_factory=list)
    uid: int = -1


@dataclass
class Decision:
    player: int
    infoset: str
    children: list = field(repr=False, default_factory=list)
    uid: int = -1


@dataclass
class ExtensiveGame:
    name: str
    root: object = field(repr=False)
    # infoset key -> (index, player, action count); indices follow build order
    infosets: dict[str, tuple[int, int, int]] = field(repr=False)

    def __post_init__(self):
        self._by_index = {idx: (key, player, n)
                          for key, (idx, player, n) in self.infosets.items()}

    @property
    def num_infosets(self) -> int:
        return len(self.infosets)

    def infoset_key(self, index: int) -> str:
        return self._by_index[index][0]

    def infoset_player(self, index: int) -> int:
        return self._by_index[index][1]

    def infoset_actions(self, index: int) -> int:
        return self._by_index[index][2]


class _Builder:
    """Assigns node uids and infoset indices in construction order."""

    def __init__(self):
        self.infosets: dict[str, tuple[int, int, int]] = {}
        self.uid = 0

    def _take_uid(self) -> int:
        self.uid += 1
        return self.uid - 1

    def terminal(self, p0: float) -> Terminal:
        return Terminal(payoffs=(p0, -p0), uid=self._take_uid())

    def chance(self, probs, children) -> Chance:
        return Chance(probs=list(probs), children=list(children),
                      uid=self._take_uid())

    def decision(self, player: int, key: str, children) -> Decision:
        children = list(children)
        if key in self.infosets:
            _, pl, n = self.infosets[key]
            if pl != player or n != len(children):
                raise ValueError(f"inconsistent infoset {key!r}")
        else:
            self.infosets[key] = (len(self.infosets), player, len(children))
        return Decision(player=player, infoset=key, children=children,
                        uid=self._take_uid())


def build_kuhn() -> ExtensiveGame:
    """Three-card Kuhn poker, all 6 deals expanded at probability 1/6.

    Action 0 is always the passive move (check or fold) and action 1 the
    aggressive one (bet or call). Infoset keys are
    "{player}:{rank}:{history}" with history one of "", "c", "b", "cb".
    """
    b = _Builder()

    def deal(c0: int, c1: int):
        def showdown(pot: float) -> Terminal:
            return b.terminal(pot if c0 > c1 else -pot)

        cb = b.decision(0, f"0:{KUHN_RANKS[c0]}:cb",
                        [b.terminal(-1.0), showdown(2.0)])
        after_check = b.decision(1, f"1:{KUHN_RANKS[c1]}:c",
                                 [showdown(1.0), cb])
        after_bet = b.decision(1, f"1:{KUHN_RANKS[c1]}:b",
                               [b.terminal(1.0), showdown(2.0)])
        return b.decision(0, f"0:{KUHN_RANKS[c0]}:", [after_check, after_bet])

    deals = [(c0, c1) for c0 in range(3) for c1 in range(3) if c0 != c1]
    root = b.chance([1.0 / len(deals)] * len(deals),
                    [deal(c0, c1) for c0, c1 in deals])
    return ExtensiveGame(name="kuhn", root=root, infosets=b.infosets)


def build_leduc() -> ExtensiveGame:
    """Leduc hold'em with the standard 6-card deck and 2-raise cap.

    Infoset keys are "{player}:{private rank}:{public rank or -}:{history}"
    where history records c/r letters with "/" separating the rounds;
    suits never appear because they cannot affect the outcome. Facing no
    bet the actions are [check, raise]; facing a bet [fold, call, raise],
    with the raise dropped once a round already holds two raises.
    """
    b = _Builder()

    def rank(card: int) -> int:
        return card // 2

    def showdown(r0: int, r1: int, pub_rank: int, stake: float) -> Terminal:
        # a private card pairing the board beats everything else
        if r0 == pub_rank and r1 != pub_rank:
            return b.terminal(stake)
        if r1 == pub_rank and r0 != pub_rank:
            return b.terminal(-stake)
        if r0 != r1:
            return b.terminal(stake if r0 > r1 else -stake)
        return b.terminal(0.0)

    def betting(rnd, to_act, owe, raises, contrib, history, c0, c1, pub):
        my_rank = rank(c0) if to_act == 0 else rank(c1)
        pub_str = "-" if pub is None else str(rank(pub))
        key = f"{to_act}:{my_rank}:{pub_str}:{history}"
        raise_size = 2.0 if rnd == 1 else 4.0

        def round_over(new_contrib, new_history):
            if rnd == 1:
                remaining = [c for c in range(6) if c not in (c0, c1)]
                kids = [betting(2, 0, 0.0, 0, new_contrib,
                                new_history + "/", c0, c1, p)
                        for p in remaining]
                return b.chance([1.0 / len(remaining)] * len(remaining), kids)
            return showdown(rank(c0), rank(c1), rank(pub), new_contrib[0])

        children = []
        if owe == 0.0:
            closes_round = history.split("/")[-1] == "c"
            children.append(round_over(contrib, history + "c")
                            if closes_round else
                            betting(rnd, 1 - to_act, 0.0, raises, contrib,
                                    history + "c", c0, c1, pub))
        else:
            # folder forfeits everything they have put in, antes included
            loss = contrib[to_act]
            children.append(b.terminal(-loss if to_act == 0 else loss))
            called = list(contrib)
            called[to_act] += owe
            children.append(round_over(called, history + "c"))
        if raises < 2:
            raised = list(contrib)
            raised[to_act] += owe + raise_size
            children.append(betting(rnd, 1 - to_act, raise_size, raises + 1,
                                    raised, history + "r", c0, c1, pub))
        return b.decision(to_act, key, children)

    deals = [(c0, c1) for c0 in range(6) for c1 in range(6) if c0 != c1]
    root = b.chance([1.0 / len(deals)] * len(deals),
                    [betting(1, 0, 0.0, 0, [1.0, 1.0], "", c0, c1, None)
                     for c0, c1 in deals])
    return ExtensiveGame(name="leduc", root=root, infosets=b.infosets)


class CFRState:
    """Per-infoset cumulative regrets and weighted strategy sums.

    One weight stream is shared by every table: w_sum is a single scalar,
    and both players' strategy sums accumulate every iteration, so all
    the averages stay aligned even when regret updates alternate.
    """

    def __init__(self, game: ExtensiveGame):
        self.game = game
        self.regrets = [np.zeros(game.infoset_actions(i))
                        for i in range(game.num_infosets)]
        self.strategy_sums = [np.zeros(game.infoset_actions(i))
                              for i in range(game.num_infosets)]
        self.w_sum = 0.0
        self.count = 0
        self.last_weight = 0.0

    def average_strategy(self) -> list[np.ndarray]:
        out = []
        for s in self.strategy_sums:
            total = s.sum()
            out.append(s / total if total > 0
                       else np.full(len(s), 1.0 / len(s)))
        return out

    def avg_potential(self, player: int | None = None) -> float:
        """Summed squared positive parts of weight-averaged regrets."""
        if self.w_sum <= 0:
            return 0.0
        total = 0.0
        for i, reg in enumerate(self.regrets):
            if player is not None and self.game.infoset_player(i) != player:
                continue
            v = np.maximum(0.0, reg / self.w_sum)
            total += float(v @ v)
        return total


def _strategies(state: CFRState) -> list[np.ndarray]:
    return [rm_external_policy(reg) for reg in state.regrets]


def _walk(game, node, sigma, p0, p1, pc, r_out, reach_out):
    """Returns both players' expected values while accumulating per-infoset
    counterfactual instant regrets and the acting player's own reach."""
    if isinstance(node, Terminal):
        return np.asarray(node.payoffs)
    if isinstance(node, Chance):
        v = np.zeros(2)
        if p0 == 0.0 and p1 == 0.0:
            return v
        for prob, child in zip(node.probs, node.children):
            v += prob * _walk(game, child, sigma, p0, p1, pc * prob,
                              r_out, reach_out)
        return v
    idx = game.infosets[node.infoset][0]
    s = sigma[idx]
    player = node.player
    child_vals = np.empty((len(node.children), 2))
    for a, child in enumerate(node.children):
        if player == 0:
            child_vals[a] = _walk(game, child, sigma, p0 * s[a], p1, pc,
                                  r_out, reach_out)
        else:
            child_vals[a] = _walk(game, child, sigma, p0, p1 * s[a], pc,
                                  r_out, reach_out)
    v = s @ child_vals
    opp_reach = pc * (p1 if player == 0 else p0)
    r_out[idx] += opp_reach * (child_vals[:, player] - v[player])
    reach_out[idx] += p0 if player == 0 else p1
    return v


def cfr_iterate(game: ExtensiveGame, state: CFRState,
                averaging: str = "uniform", floor_fraction: float = 1.0,
                alternating: bool = False) -> float:
    """One exact CFR sweep; mutates state and returns the weight used.

    The chosen weight scales both the regret updates and the
    reach-weighted strategy contributions; weights above 1 instead
    discount all stored history by 1/w and add the new iterate at weight
    1, which leaves every average unchanged. With alternating=True only
    one player's regret tables receive their update per call (player
    count % 2); the weight stream, the discounts, and both players'
    strategy sums stay shared across every iteration.
    """
    if averaging not in AVERAGING:
        raise ValueError(f"averaging must be one of {AVERAGING}")
    if floor_fraction < 0.0:
        raise ValueError("floor_fraction must be >= 0")

    sigma = _strategies(state)
    r = [np.zeros_like(x) for x in state.regrets]
    reach = np.zeros(game.num_infosets)
    _walk(game, game.root, sigma, 1.0, 1.0, 1.0, r, reach)

    updating = (state.count % 2,) if alternating else (0, 1)
    gets_add = [game.infoset_player(i) in updating
                for i in range(game.num_infosets)]

    if state.count == 0:
        w = 1.0
    elif averaging == "uniform":
        w = state.w_sum / state.count
    elif averaging == "linear":
        w = 2.0 * state.w_sum / state.count
    else:
        t = state.count + 1
        floor = floor_fraction * state.w_sum / t
        cap = 1e6 * state.w_sum
        # all infosets enter the objective even when an alternating update
        # will skip some adds: fitting w to only half the tables lets it
        # dilute the idle half for free and blow up
        R_cat = np.concatenate(state.regrets)
        r_cat = np.concatenate(r)
        w, _ = optimal_weight(R_cat, r_cat, state.w_sum, floor, "potential",
                              "exact", cap)
        if w == 0.0:
            # zero is a no-op that can stall the averages; fall back to
            # the best strictly positive weight, keeping the uniform-step
            # candidate in range so per-step dominance survives
            lo = positive_weight_bound(R_cat, r_cat,
                                       state.w_sum / state.count)
            w, _ = optimal_weight(R_cat, r_cat, state.w_sum, min(lo, cap),
                                  "potential", "exact", cap)

    for i in range(game.num_infosets):
        contrib = reach[i] * sigma[i]
        if w <= 1.0:
            if gets_add[i]:
                state.regrets[i] += w * r[i]
            state.strategy_sums[i] += w * contrib
        else:
            state.regrets[i] /= w
            if gets_add[i]:
                state.regrets[i] += r[i]
            state.strategy_sums[i] /= w
            state.strategy_sums[i] += contrib
    if state.count == 0 or w <= 1.0:
        state.w_sum += w
    else:
        state.w_sum = state.w_sum / w + 1.0
    state.count += 1
    state.last_weight = w
    return w


def _collect(game, node, sigma, me, opp_reach, bucket, depth):
    """Gathers (node, opponent-and-chance reach) per infoset of player me."""
    if isinstance(node, Terminal):
        return
    if isinstance(node, Chance):
        for prob, child in zip(node.probs, node.children):
            _collect(game, child, sigma, me, opp_reach * prob, bucket,
                     depth + 1)
        return
    idx = game.infosets[node.infoset][0]
    if node.player == me:
        bucket.setdefault(idx, (depth, []))[1].append((node, opp_reach))
        for child in node.children:
            _collect(game, child, sigma, me, opp_reach, bucket, depth + 1)
    else:
        s = sigma[idx]
        for a, child in enumerate(node.children):
            _collect(game, child, sigma, me, opp_reach * s[a], bucket,
                     depth + 1)


def best_response_value(game: ExtensiveGame, sigma, me: int) -> float:
    """Expected value for `me` best-responding pointwise to sigma.

    Infosets are resolved deepest first, so every deeper choice of ours is
    already fixed when a shallower infoset evaluates through it; value
    ties pick the lowest action index. Assumes perfect recall.
    """
    bucket: dict[int, tuple[int, list]] = {}
    _collect(game, game.root, sigma, me, 1.0, bucket, 0)
    chosen: dict[int, int] = {}
    memo: dict[int, float] = {}

    def ev(node) -> float:
        if isinstance(node, Terminal):
            return node.payoffs[me]
        got = memo.get(node.uid)
        if got is not None:
            return got
        if isinstance(node, Chance):
            val = sum(p * ev(c) for p, c in zip(node.probs, node.children))
        elif node.player == me:
            val = ev(node.children[chosen[game.infosets[node.infoset][0]]])
        else:
            s = sigma[game.infosets[node.infoset][0]]
            val = float(sum(s[a] * ev(c)
                            for a, c in enumerate(node.children)))
        memo[node.uid] = val
        return val

    for idx in sorted(bucket, key=lambda i: -bucket[i][0]):
        _, nodes = bucket[idx]
        vals = [sum(reach * ev(node.children[a]) for node, reach in nodes)
                for a in range(game.infoset_actions(idx))]
        best = max(vals)
        chosen[idx] = next(a for a, v in enumerate(vals) if v == best)
    return ev(game.root)


def exploitability_efg(game: ExtensiveGame, avg_strategy) -> float:
    """Sum of both players' best-response gains against avg_strategy.

    Zero-sum, so the sum is nonnegative and zero exactly at a Nash
    equilibrium; it is the epsilon of an epsilon-equilibrium.
    """
    return (best_response_value(game, avg_strategy, 0)
            + best_response_value(game, avg_strategy, 1))


def kuhn_equilibrium(alpha: float = 0.2) -> list[np.ndarray]:
    """A point in Kuhn poker's one-parameter Nash equilibrium family.

    Valid for alpha in [0, 1/3]; the first player's value is -1/18 at
    every alpha. Entries follow build_kuhn's infoset ordering.
    """
    if not 0.0 <= alpha <= 1.0 / 3.0 + 1e-12:
        raise ValueError("alpha must lie in [0, 1/3]")
    game = build_kuhn()
    table = {
        "0:J:": [1.0 - alpha, alpha],
        "0:Q:": [1.0, 0.0],
        "0:K:": [1.0 - 3.0 * alpha, 3.0 * alpha],
        "0:J:cb": [1.0, 0.0],
        "0:Q:cb": [2.0 / 3.0 - alpha, 1.0 / 3.0 + alpha],
        "0:K:cb": [0.0, 1.0],
        "1:J:c": [2.0 / 3.0, 1.0 / 3.0],
        "1:Q:c": [1.0, 0.0],
        "1:K:c": [0.0, 1.0],
        "1:J:b": [1.0, 0.0],
        "1:Q:b": [2.0 / 3.0, 1.0 / 3.0],
        "1:K:b": [0.0, 1.0],
    }
    out: list = [None] * game.num_infosets
    for key, (idx, _, n) in game.infosets.items():
        vec = np.asarray(table[key], dtype=np.float64)
        assert len(vec) == n
        out[idx] = vec
    return out


@dataclass
class CFRTracePoint:
    iteration: int
    wall_ns: int
    weight: float
    exploitability: float


def cfr_solve(game: ExtensiveGame, iterations: int,
              averaging: str = "uniform", floor_fraction: float = 1.0,
              eval_points: int = 15, alternating: bool = False,
              ) -> tuple[CFRState, list[CFRTracePoint]]:
    """Runs full-sweep CFR with exploitability checkpoints on a log grid.

    Wall times exclude the checkpoint evaluations themselves.
    """
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    state = CFRState(game)
    schedule = set(log_schedule(iterations, eval_points))
    trace: list[CFRTracePoint] = []
    start = time.perf_counter_ns()
    instrumentation = 0
    for t in range(1, iterations + 1):
        cfr_iterate(game, state, averaging=averaging,
                    floor_fraction=floor_fraction, alternating=alternating)
        if t in schedule:
            wall = time.perf_counter_ns() - start - instrumentation
            mark = time.perf_counter_ns()
            gap = exploitability_efg(game, state.average_strategy())
            trace.append(CFRTracePoint(iteration=t, wall_ns=wall,
                                       weight=state.last_weight,
                                       exploitability=gap))
            instrumentation += time.perf_counter_ns() - mark
    return state, trace
