"""Normal-form games: representation, generation, catalog, decomposition, I/O.

A game holds one payoff value per (joint action, player) cell. Two backends:

* dense: a float64 tensor of shape ``(|A_1|, ..., |A_P|, |P|)`` in C order,
  so in the flattened view the player index varies fastest, then the last
  player's action. This cell order is fixed and is also the game-file order.
* procedural: payoffs are produced on demand by a counter-based hash of
  (seed, cell index), so huge games (e.g. 7 players x 10 actions, ~0.5 GB
  dense) cost O(1) memory and O(1) per query.

Generated games use the hash for both backends, so materializing a
procedural game reproduces the dense generation bit-for-bit.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from ._kernels import hash_key, unit_hash
from .errors import CapacityError, GameFormatError

GAME_KINDS = ("general_sum", "zero_sum", "cooperative")

# Materialization / enumeration guard, in (joint action x player) cells.
DEFAULT_CELL_LIMIT = 100_000_000

_FORMAT_VERSION = 1


@dataclass(frozen=True)
class Game:
    """An n-player normal-form game.

    actions: per-player action counts |A_i|.
    kind: one of GAME_KINDS (structure of the payoff table).
    delta: payoff range; every payoff lies in a window of this width.
    dense: payoff tensor of shape (*actions, num_players), or None.
    seed: procedural backend seed, or None.
    """

    actions: tuple[int, ...]
    kind: str
    delta: float
    dense: np.ndarray | None = None
    seed: int | None = None
    _key: int = field(default=0, repr=False)

    def __post_init__(self):
        if len(self.actions) < 1 or any(a < 1 for a in self.actions):
            raise ValueError(f"invalid action counts {self.actions}")
        if self.kind not in GAME_KINDS:
            raise ValueError(f"unknown game kind {self.kind!r}")
        if (self.dense is None) == (self.seed is None):
            raise ValueError("exactly one of dense payoffs or seed is required")
        if self.dense is not None:
            expect = (*self.actions, self.num_players)
            if self.dense.shape != expect:
                raise ValueError(f"payoff tensor shape {self.dense.shape} != {expect}")
            if not np.all(np.isfinite(self.dense)):
                raise ValueError("payoffs must be finite")
            self.dense.setflags(write=False)
        else:
            object.__setattr__(self, "_key", hash_key(int(self.seed)))

    @property
    def num_players(self) -> int:
        return len(self.actions)

    @property
    def is_dense(self) -> bool:
        return self.dense is not None

    @property
    def num_cells(self) -> int:
        n = self.num_players
        for a in self.actions:
            n *= a
        return n

    @property
    def strides(self) -> tuple[int, ...]:
        """Row-major strides of the joint-action index."""
        out = [1] * len(self.actions)
        for k in range(len(self.actions) - 2, -1, -1):
            out[k] = out[k + 1] * self.actions[k + 1]
        return tuple(out)


def _check_joint(game: Game, a) -> tuple[int, ...]:
    a = tuple(int(x) for x in a)
    if len(a) != game.num_players:
        raise ValueError(f"joint action length {len(a)} != {game.num_players} players")
    for i, (x, n) in enumerate(zip(a, game.actions)):
        if not 0 <= x < n:
            raise ValueError(f"action {x} out of range for player {i} (|A_i|={n})")
    return a


def validate_profile(game: Game, profile) -> list[np.ndarray]:
    """Check one probability vector per player; returns float64 copies."""
    if len(profile) != game.num_players:
        raise ValueError("profile length != number of players")
    out = []
    for i, (p, n) in enumerate(zip(profile, game.actions)):
        p = np.asarray(p, dtype=np.float64)
        if p.shape != (n,):
            raise ValueError(f"player {i} policy shape {p.shape} != ({n},)")
        if np.any(p < 0) or abs(p.sum() - 1.0) > 1e-9:
            raise ValueError(f"player {i} policy is not a distribution")
        out.append(p)
    return out


def _proc_values(game: Game, joint: np.ndarray, player) -> np.ndarray:
    """Hash payoffs for flat joint indices; player is an int or a (..,) array."""
    j = joint.astype(np.uint64)
    p = game.num_players
    if game.kind == "cooperative":
        return unit_hash(game._key, j.ravel()).reshape(j.shape)
    if game.kind == "zero_sum" and p == 2:
        base = unit_hash(game._key, j.ravel()).reshape(j.shape)
        sign = np.where(np.asarray(player) == 0, 1.0, -1.0)
        return base * sign
    if game.kind == "zero_sum":
        cells = (j[..., None] * np.uint64(p)) + np.arange(p, dtype=np.uint64)
        allv = unit_hash(game._key, cells.ravel()).reshape(cells.shape)
        centered = allv - allv.mean(axis=-1, keepdims=True)
        return np.take_along_axis(
            centered, np.broadcast_to(np.asarray(player), j.shape)[..., None], -1
        )[..., 0]
    cells = j * np.uint64(p) + np.asarray(player, dtype=np.uint64)
    return unit_hash(game._key, cells.ravel()).reshape(cells.shape)


def payoff(game: Game, a) -> np.ndarray:
    """u_i(a) for every player i; length num_players."""
    a = _check_joint(game, a)
    if game.is_dense:
        return np.array(game.dense[a], dtype=np.float64)
    joint = np.uint64(sum(x * s for x, s in zip(a, game.strides)))
    players = np.arange(game.num_players)
    return _proc_values(game, np.full(game.num_players, joint), players)


def payoff_batch(game: Game, acts: np.ndarray) -> np.ndarray:
    """Payoffs for many joint actions at once: (n, P) indices -> (n, P) values."""
    acts = np.asarray(acts, dtype=np.int64)
    if game.is_dense:
        return game.dense[tuple(acts[:, k] for k in range(game.num_players))]
    joint = acts @ np.asarray(game.strides, dtype=np.int64)
    players = np.arange(game.num_players)
    return _proc_values(game, joint[:, None] + np.zeros(game.num_players, np.int64),
                        players[None, :])


def payoff_row(game: Game, player: int, a) -> np.ndarray:
    """u_player(a'_player, a_{-player}) for every alternative action a'."""
    a = _check_joint(game, a)
    if game.is_dense:
        idx = list(a) + [player]
        idx[player] = slice(None)
        return np.array(game.dense[tuple(idx)], dtype=np.float64)
    strides = game.strides
    base = sum(x * s for x, s in zip(a, strides)) - a[player] * strides[player]
    joint = base + np.arange(game.actions[player], dtype=np.int64) * strides[player]
    return _proc_values(game, joint, player)


def payoff_rows_batch(game: Game, player: int, acts: np.ndarray) -> np.ndarray:
    """payoff_row for many joint actions: (n, P) indices -> (n, |A_player|)."""
    acts = np.asarray(acts, dtype=np.int64)
    n_alt = game.actions[player]
    if game.is_dense:
        idx = [acts[:, k][:, None] for k in range(game.num_players)]
        idx[player] = np.arange(n_alt)[None, :]
        idx.append(player)
        return game.dense[tuple(idx)]
    strides = np.asarray(game.strides, dtype=np.int64)
    base = acts @ strides - acts[:, player] * strides[player]
    joint = base[:, None] + np.arange(n_alt, dtype=np.int64)[None, :] * strides[player]
    return _proc_values(game, joint, player)


def expected_payoff(game: Game, profile) -> np.ndarray:
    """Exact expectation of each player's payoff under a product profile."""
    profile = validate_profile(game, profile)
    dense = game.dense if game.is_dense else materialize(game).dense
    t = dense
    for p in profile:
        # contract the leading action axis; player axis stays last
        t = np.tensordot(p, t, axes=(0, 0))
    return t


def materialize(game: Game, cell_limit: int | None = None) -> Game:
    """Expand a procedural game into a dense one (identity for dense games)."""
    if game.is_dense:
        return game
    limit = DEFAULT_CELL_LIMIT if cell_limit is None else cell_limit
    if game.num_cells > limit:
        raise CapacityError(
            f"materializing {game.num_cells} cells exceeds the limit of {limit}"
        )
    grids = np.indices(game.actions).reshape(game.num_players, -1).T
    vals = payoff_batch(game, grids)
    tensor = np.ascontiguousarray(vals.reshape(*game.actions, game.num_players))
    return Game(actions=game.actions, kind=game.kind,
                delta=float(tensor.max() - tensor.min()), dense=tensor)


def _proc_delta(kind: str) -> float:
    # uniform-[0,1) entries: width 1; zero-sum constructions span (-1, 1).
    return 2.0 if kind == "zero_sum" else 1.0


def generate_random_game(num_players: int, actions, kind: str, seed: int,
                         backend: str = "auto",
                         dense_limit: int = 2_000_000) -> Game:
    """Random game with i.i.d. uniform-[0,1) structure, deterministic in seed.

    kind=general_sum: every (a, i) cell independent uniform.
    kind=zero_sum, 2 players: player 0 uniform, player 1 the negation; with
    n != 2 players, per-cell mean subtraction makes payoffs sum to zero
    (this differs from the 2-player construction and is documented as such).
    kind=cooperative: one uniform value per joint action, shared by all.

    backend: "dense", "procedural", or "auto" (dense below dense_limit
    cells). Both backends define the same payoffs from the same seed.
    """
    if num_players < 2:
        raise ValueError("need at least 2 players")
    if isinstance(actions, int):
        actions = (actions,) * num_players
    actions = tuple(int(a) for a in actions)
    if len(actions) != num_players or any(a < 1 for a in actions):
        raise ValueError(f"invalid action counts {actions}")
    if kind not in GAME_KINDS:
        raise ValueError(f"unknown game kind {kind!r}")
    proc = Game(actions=actions, kind=kind, delta=_proc_delta(kind), seed=int(seed))
    if backend == "auto":
        backend = "dense" if proc.num_cells <= dense_limit else "procedural"
    if backend == "procedural":
        return proc
    if backend == "dense":
        return materialize(proc)
    raise ValueError(f"unknown backend {backend!r}")


def decompose(game: Game, cell_limit: int | None = None) -> tuple[Game, Game]:
    """Split a game into zero-sum and cooperative parts: u_i = Z_i + C.

    Z_i(a) = u_i(a) - mean_j u_j(a) sums to zero across players; C(a) is the
    per-cell mean, identical for all players. The split is unique.
    """
    game = materialize(game, cell_limit)
    mean = game.dense.mean(axis=-1, keepdims=True)
    coop = np.ascontiguousarray(np.broadcast_to(mean, game.dense.shape))
    zs = game.dense - coop
    z_game = Game(actions=game.actions, kind="zero_sum",
                  delta=float(zs.max() - zs.min()), dense=zs)
    c_game = Game(actions=game.actions, kind="cooperative",
                  delta=float(coop.max() - coop.min()), dense=coop)
    return z_game, c_game


def adversarialness(game: Game, cell_limit: int | None = None) -> float:
    """||Z||_F / ||G||_F over all (joint action, player) cells, in [0, 1]."""
    game = materialize(game, cell_limit)
    g_norm = float(np.linalg.norm(game.dense))
    if g_norm == 0.0:
        raise ValueError("adversarialness is undefined for the all-zero game")
    z_game, _ = decompose(game)
    return float(np.linalg.norm(z_game.dense)) / g_norm


def interpolate(zero_sum: Game, cooperative: Game, lam: float) -> Game:
    """Blend lam * zero_sum + (1 - lam) * cooperative."""
    if not 0.0 <= lam <= 1.0:
        raise ValueError("lambda must lie in [0, 1]")
    zs = materialize(zero_sum)
    co = materialize(cooperative)
    if zs.actions != co.actions:
        raise ValueError("component games must share an action space")
    scale_z = max(1.0, float(np.abs(zs.dense).max()))
    if np.abs(zs.dense.sum(axis=-1)).max() > 1e-9 * scale_z * zs.num_players:
        raise ValueError("first argument is not a zero-sum game")
    spread = co.dense.max(axis=-1) - co.dense.min(axis=-1)
    if spread.max() > 1e-9 * max(1.0, float(np.abs(co.dense).max())):
        raise ValueError("second argument is not a cooperative game")
    mix = np.ascontiguousarray(lam * zs.dense + (1.0 - lam) * co.dense)
    return Game(actions=zs.actions, kind="general_sum",
                delta=float(mix.max() - mix.min()), dense=mix)


def _dense_from_rows(rows, kind: str) -> Game:
    """Build a 2-player game from per-player payoff matrices."""
    tensor = np.ascontiguousarray(np.stack(rows, axis=-1).astype(np.float64))
    return Game(actions=tensor.shape[:-1], kind=kind,
                delta=float(tensor.max() - tensor.min()), dense=tensor)


def catalog(name: str) -> Game:
    """Built-in classic games; tables documented in the README."""
    if name == "matching_pennies":
        u1 = np.array([[1.0, -1.0], [-1.0, 1.0]])
        return _dense_from_rows([u1, -u1], "zero_sum")
    if name == "rock_paper_scissors":
        u1 = np.array([[0.0, -1.0, 1.0], [1.0, 0.0, -1.0], [-1.0, 1.0, 0.0]])
        return _dense_from_rows([u1, -u1], "zero_sum")
    if name == "prisoners_dilemma":
        # actions (Cooperate, Defect); Defect strictly dominates.
        u1 = np.array([[3.0, 0.0], [5.0, 1.0]])
        return _dense_from_rows([u1, u1.T], "general_sum")
    if name == "chicken":
        # actions (Swerve, Straight)
        u1 = np.array([[2.0, 1.0], [3.0, 0.0]])
        return _dense_from_rows([u1, u1.T], "general_sum")
    if name == "battle_of_sexes":
        u1 = np.array([[2.0, 0.0], [0.0, 1.0]])
        u2 = np.array([[1.0, 0.0], [0.0, 2.0]])
        return _dense_from_rows([u1, u2], "general_sum")
    if name == "shapley":
        # Shapley's fictitious-play cycler: wins are offset by one column.
        u1 = np.eye(3)
        u2 = np.roll(np.eye(3), 1, axis=1)
        return _dense_from_rows([u1, u2], "general_sum")
    raise KeyError(f"unknown catalog game {name!r}")


def save_game(game: Game, path, cell_limit: int | None = None) -> None:
    """Write the versioned game file (JSON; floats round-trip exactly)."""
    game = materialize(game, cell_limit)
    doc = {
        "format_version": _FORMAT_VERSION,
        "num_players": game.num_players,
        "actions": list(game.actions),
        "kind": game.kind,
        "payoffs": [float(x) for x in game.dense.ravel()],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh)
        fh.write("\n")


def load_game(path) -> Game:
    """Read a game file written by save_game, validating the header."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise GameFormatError(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(doc, dict):
        raise GameFormatError(f"{path}: top-level value must be an object")
    if doc.get("format_version") != _FORMAT_VERSION:
        raise GameFormatError(
            f"{path}: unsupported format_version {doc.get('format_version')!r}"
        )
    for key in ("num_players", "actions", "kind", "payoffs"):
        if key not in doc:
            raise GameFormatError(f"{path}: missing field {key!r}")
    actions = doc["actions"]
    if (not isinstance(actions, list) or len(actions) != doc["num_players"]
            or any(not isinstance(a, int) or a < 1 for a in actions)):
        raise GameFormatError(f"{path}: bad actions list {actions!r}")
    if doc["kind"] not in GAME_KINDS:
        raise GameFormatError(f"{path}: unknown kind {doc['kind']!r}")
    flat = np.asarray(doc["payoffs"], dtype=np.float64)
    expect = len(actions) * int(np.prod(actions))
    if flat.size != expect:
        raise GameFormatError(f"{path}: expected {expect} payoffs, got {flat.size}")
    if not np.all(np.isfinite(flat)):
        raise GameFormatError(f"{path}: payoffs must be finite")
    tensor = np.ascontiguousarray(flat.reshape(*actions, len(actions)))
    scale = max(1.0, float(np.abs(tensor).max()))
    if doc["kind"] == "zero_sum":
        if np.abs(tensor.sum(axis=-1)).max() > 1e-9 * scale * len(actions):
            raise GameFormatError(f"{path}: kind zero_sum but payoffs do not sum to 0")
    if doc["kind"] == "cooperative":
        if (tensor.max(axis=-1) - tensor.min(axis=-1)).max() > 1e-9 * scale:
            raise GameFormatError(f"{path}: kind cooperative but payoffs differ")
    return Game(actions=tuple(actions), kind=doc["kind"],
                delta=float(tensor.max() - tensor.min()), dense=tensor)
