"""Command-line surface: game files in, CSV/SVG/report lines out.

Exit codes: 0 success, 2 configuration or usage problems, 3 capacity
limits, 1 anything unexpected. Failures print one line to stderr shaped
``error:{category}: {message}`` so scripts can dispatch on the category
without parsing prose.
"""

from __future__ import annotations

import argparse
import json
import sys
import time

import numpy as np

from .bench import (aggregate, emit_aggregate_csv, emit_csv, load_config,
                    parse_csv, run, worker_count)
from .cfr import build_kuhn, build_leduc, cfr_solve, exploitability_efg
from .double_oracle import double_oracle_solve
from .errors import CapacityError, ConfigError, GameFormatError, RmkitError
from .games import (GAME_KINDS, adversarialness, catalog, decompose,
                    generate_random_game, load_game, save_game)
from .metrics import (JointDistribution, cce_gap, ce_gap, nash_gap, welfare)
from .plotting import emit_plot
from .regrets import VariantConfig
from .weights import WeightPolicy, bound_report, solve


def _add_game_source(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("game source (one of)")
    g.add_argument("--game", metavar="FILE", help="game file from `generate`")
    g.add_argument("--catalog", metavar="NAME",
                   help="built-in classic game by name")
    g.add_argument("--players", type=int, help="random game: player count")
    g.add_argument("--actions", type=int, help="random game: actions each")
    g.add_argument("--kind", choices=GAME_KINDS, default="general_sum",
                   help="random game: payoff structure")
    g.add_argument("--seed", type=int, default=0,
                   help="random game: generator seed")


def _build_game(args):
    picked = sum(x is not None
                 for x in (args.game, args.catalog, args.players))
    if picked != 1:
        raise ConfigError("game",
                          "give exactly one of --game, --catalog, --players")
    if args.game is not None:
        return load_game(args.game)
    if args.catalog is not None:
        try:
            return catalog(args.catalog)
        except KeyError as exc:
            raise ConfigError("catalog", exc.args[0]) from exc
    if args.actions is None:
        raise ConfigError("actions", "--actions is required with --players")
    return generate_random_game(args.players, args.actions, args.kind,
                                args.seed)


def _add_solver_args(p: argparse.ArgumentParser) -> None:
    s = p.add_argument_group("solver")
    s.add_argument("--regret-kind", choices=("external", "internal"),
                   default="external")
    s.add_argument("--mode", choices=("pure_sampled", "mixed_two_player"),
                   default="pure_sampled")
    s.add_argument("--scheme", choices=("uniform", "linear", "greedy"),
                   default="greedy")
    s.add_argument("--floor", type=float, default=0.0,
                   help="weight floor as a fraction of the running mean")
    s.add_argument("--objective",
                   choices=("potential", "sum_positive_regrets"),
                   default="potential")
    s.add_argument("--search", choices=("exact", "golden", "grid"),
                   default="exact")
    s.add_argument("--plus", action="store_true",
                   help="clamp negative guiding regrets to zero")
    s.add_argument("--optimism", action="store_true",
                   help="count the latest iterate twice for selection")
    s.add_argument("--policy-weighting", choices=("uniform", "linear"),
                   default="uniform")
    s.add_argument("--alternation", type=int, default=1, metavar="N",
                   help="update each player's guiding regrets every N steps")
    s.add_argument("--iterations", type=int, default=1000)
    s.add_argument("--solver-seed", type=int, default=0)
    s.add_argument("--eval-points", type=int, default=20)


def _solver_configs(args) -> tuple[VariantConfig, WeightPolicy]:
    variant = VariantConfig(regret_kind=args.regret_kind, mode=args.mode,
                            plus_clamping=args.plus, optimism=args.optimism,
                            policy_weighting=args.policy_weighting,
                            alternation_period=args.alternation)
    weights = WeightPolicy(scheme=args.scheme,
                           floor_fraction=args.floor,
                           objective=args.objective, search=args.search)
    return variant, weights


def _cmd_generate(args) -> int:
    game = generate_random_game(args.players, args.actions, args.kind,
                                args.seed)
    save_game(game, args.out)
    print(f"wrote {args.out}: {game.num_players} players, "
          f"actions {'x'.join(str(a) for a in game.actions)}, {game.kind}")
    return 0


def _cmd_solve(args) -> int:
    game = _build_game(args)
    variant, weights = _solver_configs(args)
    result = solve(game, variant, weights, args.iterations,
                   seed=args.solver_seed, eval_schedule=args.eval_points)
    state = result.state
    print(f"iterations={state.count} max_avg_regret="
          f"{state.max_avg_regret():.6g}")
    if result.joint is not None:
        dist = result.joint
        print(f"ce_gap={ce_gap(game, dist):.6g} "
              f"cce_gap={cce_gap(game, dist):.6g} "
              f"welfare={welfare(game, dist):.6g}")
    print(f"nash_gap={nash_gap(game, result.avg_policies):.6g}")
    return 0


def _cmd_bench(args) -> int:
    config = load_config(args.config)
    workers = args.workers if args.workers is not None else worker_count()
    records, failures = run(config, workers=workers)
    for f in failures:
        print(f"warning:{f.category}: label={f.label} seed={f.game_seed} "
              f"{f.message}", file=sys.stderr)
    if not records:
        raise CapacityError("every run failed")
    emit_csv(records, args.out)
    print(f"wrote {args.out}: {len(records)} records from "
          f"{len(config.seeds)} seeds x {len(config.algorithms)} algorithms")
    return 0


def _cmd_aggregate(args) -> int:
    cells = aggregate(parse_csv(args.records))
    if args.out:
        emit_aggregate_csv(cells, args.out)
        print(f"wrote {args.out}: {len(cells)} cells")
    else:
        emit_aggregate_csv(cells, sys.stdout)
    return 0


def _cmd_plot(args) -> int:
    records = parse_csv(args.records)
    svg = emit_plot(records, x_axis=args.x, metric=args.metric,
                    title=args.title)
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(svg)
    print(f"wrote {args.out}")
    return 0


def _cmd_decompose(args) -> int:
    game = _build_game(args)
    zs, coop = decompose(game)
    score = adversarialness(game)
    print(f"adversarialness={score:.6g}")
    print(f"zero_sum_norm={float(np.linalg.norm(zs.dense)):.6g} "
          f"cooperative_norm={float(np.linalg.norm(coop.dense)):.6g}")
    if args.out_prefix:
        save_game(zs, args.out_prefix + ".zero_sum.json")
        save_game(coop, args.out_prefix + ".cooperative.json")
        print(f"wrote {args.out_prefix}.zero_sum.json and "
              f"{args.out_prefix}.cooperative.json")
    return 0


def _cmd_audit(args) -> int:
    game = _build_game(args)
    variant, weights = _solver_configs(args)
    reports = []

    def check(state, iteration):
        reports.append((iteration, bound_report(state)))

    solve(game, variant, weights, args.iterations, seed=args.solver_seed,
          eval_schedule=args.eval_points, on_checkpoint=check)
    worst = 0.0
    for iteration, rep in reports:
        worst = max(worst, rep["slack_ratio"])
        print(f"iteration={iteration} ok={rep['ok']} "
              f"potential={rep['potential']:.6g} "
              f"bound={rep['potential_bound']:.6g} "
              f"slack_ratio={rep['slack_ratio']:.6g}")
    if not all(rep["ok"] for _, rep in reports):
        print("error:internal: potential bound violated", file=sys.stderr)
        return 1
    print(f"all {len(reports)} checkpoints ok (worst slack {worst:.3g})")
    return 0


def _cmd_do_solve(args) -> int:
    game = _build_game(args)
    variant = VariantConfig(regret_kind="external", mode=args.mode)
    weights = WeightPolicy(scheme=args.scheme, floor_fraction=args.floor)
    result = double_oracle_solve(game, variant, weights,
                                 inner_iterations=args.inner_iterations,
                                 seed=args.solver_seed,
                                 seed_previous=args.seeded,
                                 outer_tol=args.outer_tol,
                                 max_rounds=args.max_rounds)
    sizes = "x".join(str(len(s)) for s in result.supports)
    print(f"rounds={result.rounds} converged={result.converged} "
          f"supports={sizes} inner_iterations={result.total_inner_iterations}")
    print(f"restricted_gap={result.restricted_gap:.6g} "
          f"nash_gap={nash_gap(game, result.profile):.6g}")
    return 0


def _cmd_cfr(args) -> int:
    game = build_kuhn() if args.tree == "kuhn" else build_leduc()
    state, trace = cfr_solve(game, args.iterations, averaging=args.averaging,
                             floor_fraction=args.floor,
                             eval_points=args.eval_points,
                             alternating=args.alternating)
    for tp in trace:
        print(f"iteration={tp.iteration} exploitability="
              f"{tp.exploitability:.6g} weight={tp.weight:.6g}")
    final = exploitability_efg(game, state.average_strategy())
    print(f"final exploitability={final:.6g}")
    return 0


def _cmd_kernel_bench(args) -> int:
    from ._kernels import BACKEND, available_backends, get_backend

    rng = np.random.default_rng(args.seed)
    n = args.size
    R = rng.normal(size=n) * 5
    r = rng.normal(size=n)
    for name in available_backends():
        fn = get_backend(name).best_weight_squared
        t0 = time.perf_counter_ns()
        for _ in range(args.repeats):
            fn(R, r, 100.0, 0.0, 1e6)
        per = (time.perf_counter_ns() - t0) / args.repeats
        print(f"{name}: {per / 1e3:.1f} us/search (n={n})")
    print(f"active backend: {BACKEND}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="rmkit",
        description="Equilibrium solvers and benchmarks for normal-form "
                    "games, with runtime-optimized iteration weighting.")
    sub = top.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a random game file")
    p.add_argument("--players", type=int, required=True)
    p.add_argument("--actions", type=int, required=True)
    p.add_argument("--kind", choices=GAME_KINDS, default="general_sum")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_generate)

    p = sub.add_parser("solve", help="run one solver and print final gaps")
    _add_game_source(p)
    _add_solver_args(p)
    p.set_defaults(fn=_cmd_solve)

    p = sub.add_parser("bench", help="run an experiment config to CSV")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--workers", type=int, default=None,
                   help="overrides RMKIT_WORKERS (default 1)")
    p.set_defaults(fn=_cmd_bench)

    p = sub.add_parser("aggregate",
                       help="per-(label, iteration) mean and 95%% interval")
    p.add_argument("--records", required=True)
    p.add_argument("--out", default=None, help="default: stdout")
    p.set_defaults(fn=_cmd_aggregate)

    p = sub.add_parser("plot", help="render records as a log-log SVG")
    p.add_argument("--records", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--metric", default=None)
    p.add_argument("--x", choices=("iteration", "time"),
                   default="iteration")
    p.add_argument("--title", default=None)
    p.set_defaults(fn=_cmd_plot)

    p = sub.add_parser("decompose",
                       help="zero-sum/cooperative split and adversarialness")
    _add_game_source(p)
    p.add_argument("--out-prefix", default=None)
    p.set_defaults(fn=_cmd_decompose)

    p = sub.add_parser("audit",
                       help="check the potential growth bound along a solve")
    _add_game_source(p)
    _add_solver_args(p)
    p.set_defaults(fn=_cmd_audit)

    p = sub.add_parser("do-solve", help="double oracle on a zero-sum game")
    _add_game_source(p)
    p.add_argument("--scheme", choices=("uniform", "linear", "greedy"),
                   default="greedy")
    p.add_argument("--floor", type=float, default=0.5)
    p.add_argument("--mode", choices=("pure_sampled", "mixed_two_player"),
                   default="mixed_two_player")
    p.add_argument("--inner-iterations", type=int, default=1000)
    p.add_argument("--outer-tol", type=float, default=1e-3)
    p.add_argument("--max-rounds", type=int, default=50)
    p.add_argument("--solver-seed", type=int, default=0)
    p.add_argument("--seeded", action="store_true",
                   help="warm-start each round from the previous profile")
    p.set_defaults(fn=_cmd_do_solve)

    p = sub.add_parser("cfr", help="counterfactual regret minimization")
    p.add_argument("--tree", choices=("kuhn", "leduc"), required=True)
    p.add_argument("--iterations", type=int, default=1000)
    p.add_argument("--averaging", choices=("uniform", "linear", "greedy"),
                   default="uniform")
    p.add_argument("--floor", type=float, default=1.0)
    p.add_argument("--eval-points", type=int, default=15)
    p.add_argument("--alternating", action="store_true")
    p.set_defaults(fn=_cmd_cfr)

    p = sub.add_parser("kernel-bench",
                       help="time the weight search backends")
    p.add_argument("--size", type=int, default=64)
    p.add_argument("--repeats", type=int, default=2000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(fn=_cmd_kernel_bench)

    return top


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (ConfigError, GameFormatError, ValueError, OSError) as exc:
        print(f"error:config: {exc}", file=sys.stderr)
        return 2
    except CapacityError as exc:
        print(f"error:capacity: {exc}", file=sys.stderr)
        return 3
    except RmkitError as exc:
        print(f"error:internal: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # pragma: no cover - last resort
        print(f"error:internal: {type(exc).__name__}: {exc}",
              file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
