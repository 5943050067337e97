"""Experiment runner: versioned JSON configs in, CSV records out.

A config names one game source (generator parameters, a game file, or a
catalog entry), a seed list, and a list of labeled algorithm settings.
Every algorithm runs on every seed with identical solver seeding, so
cross-label comparisons are paired. Records carry raw metric values; all
statistics happen downstream in aggregate().

Unknown config keys are errors, reported with their dotted path, so a
typo in an ablation knob can't silently run the default instead.
"""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import CapacityError, ConfigError
from .games import GAME_KINDS, Game, catalog, generate_random_game, load_game
from .regrets import VariantConfig
from .weights import WeightPolicy, solve

CONFIG_VERSION = 1
METRIC_NAMES = ("max_avg_regret", "potential", "nash_gap", "ce_gap",
                "cce_gap", "welfare")
CSV_HEADER = ("run_id", "label", "game_seed", "iteration", "wall_ns",
              "metric", "value", "weight")


@dataclass(frozen=True)
class AlgorithmSpec:
    label: str
    variant: VariantConfig
    weights: WeightPolicy


@dataclass(frozen=True)
class ExperimentConfig:
    game: dict
    seeds: tuple[int, ...]
    iterations: int
    algorithms: tuple[AlgorithmSpec, ...]
    eval_points: int = 20
    metrics: tuple[str, ...] = ("max_avg_regret",)

    def build_game(self, seed: int) -> Game:
        if "file" in self.game:
            return load_game(self.game["file"])
        if "catalog" in self.game:
            return catalog(self.game["catalog"])
        return generate_random_game(self.game["players"],
                                    self.game["actions"],
                                    self.game["kind"], seed)


@dataclass(frozen=True)
class RunRecord:
    run_id: str
    label: str
    game_seed: int
    iteration: int
    wall_ns: int
    metric: str
    value: float
    weight: float


@dataclass(frozen=True)
class RunFailure:
    label: str
    game_seed: int
    category: str
    message: str


def _require(cond: bool, path: str, message: str) -> None:
    if not cond:
        raise ConfigError(path, message)


def _check_keys(doc: dict, allowed, path: str) -> None:
    for key in doc:
        if key not in allowed:
            where = f"{path}.{key}" if path else key
            raise ConfigError(where, "unknown key")


def _build_dataclass(cls, doc: dict, path: str):
    fields = {f.name for f in dataclasses.fields(cls)}
    _check_keys(doc, fields, path)
    try:
        return cls(**doc)
    except ConfigError as exc:
        raise ConfigError(f"{path}.{exc.path}", str(exc).split(": ", 1)[-1]) from exc


def _parse_game(doc, path: str = "game") -> dict:
    _require(isinstance(doc, dict), path, "must be an object")
    if "file" in doc:
        _check_keys(doc, {"file"}, path)
        _require(isinstance(doc["file"], str), f"{path}.file",
                 "must be a string")
        return {"file": doc["file"]}
    if "catalog" in doc:
        _check_keys(doc, {"catalog"}, path)
        _require(isinstance(doc["catalog"], str), f"{path}.catalog",
                 "must be a string")
        return {"catalog": doc["catalog"]}
    _check_keys(doc, {"players", "actions", "kind"}, path)
    for key in ("players", "actions", "kind"):
        _require(key in doc, f"{path}.{key}", "missing")
    _require(isinstance(doc["players"], int) and doc["players"] >= 2,
             f"{path}.players", "must be an integer >= 2")
    actions = doc["actions"]
    ok = (isinstance(actions, int) and actions >= 1) or (
        isinstance(actions, list) and len(actions) == doc["players"]
        and all(isinstance(a, int) and a >= 1 for a in actions))
    _require(ok, f"{path}.actions",
             "must be a positive integer or one per player")
    _require(doc["kind"] in GAME_KINDS, f"{path}.kind",
             f"must be one of {GAME_KINDS}")
    return {"players": doc["players"],
            "actions": tuple(actions) if isinstance(actions, list) else actions,
            "kind": doc["kind"]}


def parse_config(doc: dict) -> ExperimentConfig:
    _require(isinstance(doc, dict), "", "config must be an object")
    _check_keys(doc, {"version", "game", "seeds", "iterations",
                      "eval_points", "metrics", "algorithms"}, "")
    _require(doc.get("version") == CONFIG_VERSION, "version",
             f"must be {CONFIG_VERSION}")
    _require("game" in doc, "game", "missing")
    game = _parse_game(doc["game"])

    seeds = doc.get("seeds")
    _require(isinstance(seeds, list) and len(seeds) >= 1
             and all(isinstance(s, int) for s in seeds), "seeds",
             "must be a nonempty list of integers")
    _require(len(set(seeds)) == len(seeds), "seeds", "must be distinct")

    iterations = doc.get("iterations")
    _require(isinstance(iterations, int) and iterations >= 1, "iterations",
             "must be an integer >= 1")
    eval_points = doc.get("eval_points", 20)
    _require(isinstance(eval_points, int) and eval_points >= 1,
             "eval_points", "must be an integer >= 1")

    metrics = doc.get("metrics", ["max_avg_regret"])
    _require(isinstance(metrics, list) and len(metrics) >= 1, "metrics",
             "must be a nonempty list")
    for j, m in enumerate(metrics):
        _require(m in METRIC_NAMES, f"metrics[{j}]",
                 f"must be one of {METRIC_NAMES}")

    algos_doc = doc.get("algorithms")
    _require(isinstance(algos_doc, list) and len(algos_doc) >= 1,
             "algorithms", "must be a nonempty list")
    algorithms = []
    for i, spec in enumerate(algos_doc):
        path = f"algorithms[{i}]"
        _require(isinstance(spec, dict), path, "must be an object")
        _check_keys(spec, {"label", "variant", "weights"}, path)
        label = spec.get("label")
        _require(isinstance(label, str) and label != "", f"{path}.label",
                 "must be a nonempty string")
        variant = _build_dataclass(VariantConfig, spec.get("variant", {}),
                                   f"{path}.variant")
        weights = _build_dataclass(WeightPolicy, spec.get("weights", {}),
                                   f"{path}.weights")
        algorithms.append(AlgorithmSpec(label, variant, weights))
    labels = [a.label for a in algorithms]
    _require(len(set(labels)) == len(labels), "algorithms",
             "labels must be unique")

    return ExperimentConfig(game=game, seeds=tuple(seeds),
                            iterations=iterations,
                            algorithms=tuple(algorithms),
                            eval_points=eval_points, metrics=tuple(metrics))


def load_config(path) -> ExperimentConfig:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError("", f"{path} is not valid JSON ({exc})") from exc
    return parse_config(doc)


def solver_seed(game_seed: int) -> int:
    """Solver stream for one game seed, shared by all labels (paired) but
    decoupled from the generator's own stream over the same integer."""
    return int(np.random.SeedSequence(game_seed).generate_state(
        1, np.uint64)[0])


def _run_one(config: ExperimentConfig, game_seed: int,
             algo_index: int) -> list[RunRecord]:
    spec = config.algorithms[algo_index]
    game = config.build_game(game_seed)
    result = solve(game, spec.variant, spec.weights, config.iterations,
                   seed=solver_seed(game_seed),
                   eval_schedule=config.eval_points, metrics=config.metrics)
    run_id = f"{spec.label}-s{game_seed}"
    return [RunRecord(run_id=run_id, label=spec.label, game_seed=game_seed,
                      iteration=tp.iteration, wall_ns=tp.wall_ns,
                      metric=m, value=tp.metrics[m], weight=tp.weight)
            for tp in result.trace for m in config.metrics]


def worker_count() -> int:
    raw = os.environ.get("RMKIT_WORKERS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError("RMKIT_WORKERS", f"not an integer: {raw!r}")
    _require(n >= 1, "RMKIT_WORKERS", "must be >= 1")
    return n


def run(config: ExperimentConfig, workers: int | None = None,
        ) -> tuple[list[RunRecord], list[RunFailure]]:
    """Execute every (seed, algorithm) cell; capacity errors are collected
    per cell instead of aborting the surviving cells.

    Record order is deterministic regardless of worker count; wall times
    are the only nondeterministic field.
    """
    if workers is None:
        workers = worker_count()
    tasks = [(s, i) for s in config.seeds
             for i in range(len(config.algorithms))]
    records: list[RunRecord] = []
    failures: list[RunFailure] = []
    if workers == 1:
        outcomes = []
        for s, i in tasks:
            try:
                outcomes.append(_run_one(config, s, i))
            except CapacityError as exc:
                outcomes.append(exc)
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_run_one, config, s, i) for s, i in tasks]
            outcomes = []
            for fut in futures:
                try:
                    outcomes.append(fut.result())
                except CapacityError as exc:
                    outcomes.append(exc)
    for (s, i), out in zip(tasks, outcomes):
        if isinstance(out, CapacityError):
            failures.append(RunFailure(config.algorithms[i].label, s,
                                       "capacity", str(out)))
        else:
            records.extend(out)
    records.sort(key=lambda r: (r.label, r.game_seed, r.metric, r.iteration))
    return records, failures


def emit_csv(records, target) -> None:
    """Write records with the fixed header; floats use repr so that
    parse_csv(emit_csv(x)) == x exactly."""
    own = isinstance(target, (str, os.PathLike))
    fh = open(target, "w", encoding="utf-8", newline="") if own else target
    try:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        for r in records:
            writer.writerow([r.run_id, r.label, r.game_seed, r.iteration,
                             r.wall_ns, r.metric, repr(r.value),
                             repr(r.weight)])
    finally:
        if own:
            fh.close()


def parse_csv(source) -> list[RunRecord]:
    own = isinstance(source, (str, os.PathLike))
    fh = open(source, "r", encoding="utf-8", newline="") if own else source
    try:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != list(CSV_HEADER):
            raise ConfigError("csv", f"bad header {header!r}")
        out = []
        for row in reader:
            if len(row) != len(CSV_HEADER):
                raise ConfigError("csv", f"bad row {row!r}")
            out.append(RunRecord(run_id=row[0], label=row[1],
                                 game_seed=int(row[2]), iteration=int(row[3]),
                                 wall_ns=int(row[4]), metric=row[5],
                                 value=float(row[6]), weight=float(row[7])))
        return out
    finally:
        if own:
            fh.close()


def csv_text(records) -> str:
    buf = io.StringIO()
    emit_csv(records, buf)
    return buf.getvalue()


@dataclass(frozen=True)
class AggregateCell:
    label: str
    metric: str
    iteration: int
    n: int
    mean: float
    half_width: float
    mean_wall_ns: float


def aggregate(records) -> list[AggregateCell]:
    """Mean and 95% Student-t confidence half-width per (label, metric,
    iteration) across seeds; one seed gives a null interval.

    Values are summed in game_seed order, so the result is invariant to
    any permutation of the input records.
    """
    from scipy import stats

    cells: dict[tuple, list] = {}
    for r in records:
        cells.setdefault((r.label, r.metric, r.iteration), []).append(r)
    out = []
    for (label, metric, iteration), rs in sorted(cells.items()):
        rs.sort(key=lambda r: r.game_seed)
        seeds = [r.game_seed for r in rs]
        if len(set(seeds)) != len(seeds):
            raise ConfigError("records",
                              f"duplicate seed for {label}/{metric}@{iteration}")
        values = np.array([r.value for r in rs])
        walls = np.array([r.wall_ns for r in rs], dtype=np.float64)
        n = len(values)
        if n >= 2:
            hw = float(stats.t.ppf(0.975, n - 1)
                       * values.std(ddof=1) / np.sqrt(n))
        else:
            hw = 0.0
        out.append(AggregateCell(label=label, metric=metric,
                                 iteration=iteration, n=n,
                                 mean=float(values.mean()), half_width=hw,
                                 mean_wall_ns=float(walls.mean())))
    return out


AGGREGATE_HEADER = ("label", "metric", "iteration", "n", "mean",
                    "half_width", "mean_wall_ns")


def emit_aggregate_csv(cells, target) -> None:
    own = isinstance(target, (str, os.PathLike))
    fh = open(target, "w", encoding="utf-8", newline="") if own else target
    try:
        writer = csv.writer(fh)
        writer.writerow(AGGREGATE_HEADER)
        for c in cells:
            writer.writerow([c.label, c.metric, c.iteration, c.n,
                             repr(c.mean), repr(c.half_width),
                             repr(c.mean_wall_ns)])
    finally:
        if own:
            fh.close()


def iterations_until_ratio(records, label_a: str, label_b: str,
                           ratio: float = 10.0,
                           metric: str | None = None) -> float | None:
    """Mean over seeds of the first scheduled iteration where label_a's
    metric drops to 1/ratio of label_b's; None when no seed ever crosses.

    Seeds that never cross contribute nothing to the mean.
    """
    if metric is None:
        present = sorted({r.metric for r in records})
        if len(present) != 1:
            raise ValueError(f"metric must be named; found {present}")
        metric = present[0]
    by: dict[tuple, dict[int, float]] = {}
    for r in records:
        if r.metric == metric and r.label in (label_a, label_b):
            by.setdefault((r.label, r.game_seed), {})[r.iteration] = r.value
    seeds = sorted({s for (lab, s) in by if lab == label_a}
                   & {s for (lab, s) in by if lab == label_b})
    crossings = []
    for s in seeds:
        va, vb = by[(label_a, s)], by[(label_b, s)]
        for t in sorted(set(va) & set(vb)):
            if va[t] <= vb[t] / ratio:
                crossings.append(t)
                break
    if not crossings:
        return None
    return float(np.mean(crossings))
