"""End-to-end command-line checks: every subcommand runs against real
files in a tmp directory, and each failure category maps to its
documented exit code and stderr prefix.
"""

import json

import pytest

from rmkit.bench import parse_csv
from rmkit.cli import main
from rmkit.games import load_game


def config_doc():
    return {
        "version": 1,
        "game": {"players": 2, "actions": 3, "kind": "general_sum"},
        "seeds": [0, 1],
        "iterations": 25,
        "eval_points": 3,
        "metrics": ["nash_gap"],
        "algorithms": [
            {"label": "greedy",
             "variant": {"mode": "mixed_two_player"},
             "weights": {"scheme": "greedy", "floor_fraction": 0.5}},
            {"label": "uniform",
             "variant": {"mode": "mixed_two_player"},
             "weights": {}},
        ],
    }


# ------------------------------------------------------------- exit codes


def test_missing_subcommand_is_usage_error():
    with pytest.raises(SystemExit) as exc:
        main([])
    assert exc.value.code == 2


def test_game_source_must_be_exclusive(capsys):
    assert main(["solve", "--catalog", "matching_pennies",
                 "--players", "2", "--actions", "2"]) == 2
    err = capsys.readouterr().err
    assert err.startswith("error:config: game:")

    assert main(["solve"]) == 2
    assert main(["solve", "--players", "2"]) == 2  # --actions missing
    err = capsys.readouterr().err
    assert "error:config:" in err


def test_unknown_catalog_name(capsys):
    assert main(["solve", "--catalog", "nope"]) == 2
    assert "error:config: catalog:" in capsys.readouterr().err


def test_missing_game_file_is_config_error(capsys):
    assert main(["solve", "--game", "/no/such/file.json"]) == 2
    assert "error:config:" in capsys.readouterr().err


def test_unsupported_mode_is_internal_error(capsys):
    rc = main(["solve", "--players", "3", "--actions", "2",
               "--mode", "mixed_two_player", "--iterations", "5"])
    assert rc == 1
    assert capsys.readouterr().err.startswith("error:internal:")


def test_capacity_exit_code(tmp_path, capsys):
    doc = config_doc()
    doc["game"] = {"players": 10, "actions": 10, "kind": "general_sum"}
    doc["seeds"] = [0]
    doc["iterations"] = 2
    doc["eval_points"] = 1
    doc["algorithms"] = [{"label": "rm", "variant": {}, "weights": {}}]
    cfg = tmp_path / "big.json"
    cfg.write_text(json.dumps(doc), encoding="utf-8")
    rc = main(["bench", "--config", str(cfg), "--out",
               str(tmp_path / "r.csv")])
    assert rc == 3
    err = capsys.readouterr().err
    assert "warning:capacity:" in err
    assert "error:capacity:" in err


def test_bad_config_reports_dotted_path(tmp_path, capsys):
    doc = config_doc()
    doc["algorithms"][0]["weights"]["floorr_fraction"] = 0.5
    del doc["algorithms"][0]["weights"]["floor_fraction"]
    cfg = tmp_path / "typo.json"
    cfg.write_text(json.dumps(doc), encoding="utf-8")
    rc = main(["bench", "--config", str(cfg), "--out",
               str(tmp_path / "r.csv")])
    assert rc == 2
    err = capsys.readouterr().err
    assert "algorithms[0].weights.floorr_fraction" in err


# --------------------------------------------------------------- pipeline


def test_generate_solve_roundtrip(tmp_path, capsys):
    out = tmp_path / "game.json"
    assert main(["generate", "--players", "2", "--actions", "3",
                 "--seed", "5", "--out", str(out)]) == 0
    assert "wrote" in capsys.readouterr().out
    game = load_game(out)
    assert game.num_players == 2 and game.actions == (3, 3)

    rc = main(["solve", "--game", str(out), "--mode", "mixed_two_player",
               "--floor", "0.5", "--iterations", "60"])
    assert rc == 0
    text = capsys.readouterr().out
    assert "max_avg_regret=" in text
    assert "nash_gap=" in text


@pytest.mark.filterwarnings("ignore:.*clamped.*:RuntimeWarning")
def test_bench_aggregate_plot_pipeline(tmp_path, capsys):
    cfg = tmp_path / "exp.json"
    cfg.write_text(json.dumps(config_doc()), encoding="utf-8")
    csv_path = tmp_path / "records.csv"
    assert main(["bench", "--config", str(cfg),
                 "--out", str(csv_path)]) == 0
    assert "wrote" in capsys.readouterr().out
    records = parse_csv(csv_path)
    assert {r.label for r in records} == {"greedy", "uniform"}

    agg_path = tmp_path / "agg.csv"
    assert main(["aggregate", "--records", str(csv_path),
                 "--out", str(agg_path)]) == 0
    capsys.readouterr()
    head = agg_path.read_text(encoding="utf-8").splitlines()[0]
    assert head == "label,metric,iteration,n,mean,half_width,mean_wall_ns"

    # Without --out the table goes to stdout.
    assert main(["aggregate", "--records", str(csv_path)]) == 0
    assert "label,metric,iteration" in capsys.readouterr().out

    svg_a = tmp_path / "a.svg"
    svg_b = tmp_path / "b.svg"
    assert main(["plot", "--records", str(csv_path), "--out", str(svg_a),
                 "--title", "demo"]) == 0
    assert main(["plot", "--records", str(csv_path), "--out", str(svg_b),
                 "--title", "demo"]) == 0
    capsys.readouterr()
    a = svg_a.read_bytes()
    assert a == svg_b.read_bytes()  # identical input, identical bytes
    assert a.startswith(b"<svg ")
    assert b"greedy" in a and b"uniform" in a

    assert main(["plot", "--records", str(csv_path), "--out", str(svg_a),
                 "--metric", "nash_gap", "--x", "time"]) == 0


def test_decompose_writes_components(tmp_path, capsys):
    prefix = tmp_path / "split"
    rc = main(["decompose", "--players", "2", "--actions", "3",
               "--seed", "1", "--out-prefix", str(prefix)])
    assert rc == 0
    out = capsys.readouterr().out
    assert "adversarialness=" in out
    zs = load_game(str(prefix) + ".zero_sum.json")
    coop = load_game(str(prefix) + ".cooperative.json")
    assert zs.kind == "zero_sum" and coop.kind == "cooperative"


def test_audit_reports_checkpoints(capsys):
    rc = main(["audit", "--catalog", "matching_pennies",
               "--mode", "mixed_two_player", "--floor", "0.5",
               "--iterations", "40", "--eval-points", "3"])
    assert rc == 0
    out = capsys.readouterr().out
    assert "checkpoints ok" in out
    assert "slack_ratio=" in out


def test_do_solve_runs(capsys):
    rc = main(["do-solve", "--players", "2", "--actions", "4",
               "--kind", "zero_sum", "--seed", "3",
               "--inner-iterations", "120", "--max-rounds", "6",
               "--outer-tol", "1e-2"])
    assert rc == 0
    out = capsys.readouterr().out
    assert "rounds=" in out and "nash_gap=" in out


def test_cfr_runs(capsys):
    rc = main(["cfr", "--tree", "kuhn", "--iterations", "60",
               "--eval-points", "3"])
    assert rc == 0
    out = capsys.readouterr().out
    assert out.count("iteration=") == 3
    assert "final exploitability=" in out


def test_kernel_bench_lists_backends(capsys):
    rc = main(["kernel-bench", "--size", "16", "--repeats", "5"])
    assert rc == 0
    out = capsys.readouterr().out
    assert "us/search" in out
    assert "active backend:" in out
