"""Variant configuration, instant regrets, and policy rule tests."""

import numpy as np
import pytest

from rmkit import ConfigError, UnsupportedModeError, VariantConfig, catalog, generate_random_game, solve
from rmkit.games import payoff, payoff_row
from rmkit.regrets import (
    RegretState,
    apply_guiding_transforms,
    external_instant_regret,
    internal_instant_regret,
    mixed_instant_regret_2p,
    potential,
    rm_external_policy,
    rm_internal_policy,
    swap_chain_policy,
)
from rmkit.weights import WeightPolicy, apply_iteration


def test_variant_config_validation():
    VariantConfig(regret_kind="internal", mode="mixed_two_player")
    with pytest.raises(ConfigError):
        VariantConfig(regret_kind="swap")
    with pytest.raises(ConfigError):
        VariantConfig(mode="self_play")
    with pytest.raises(ConfigError):
        VariantConfig(policy_weighting="quadratic")
    with pytest.raises(ConfigError):
        VariantConfig(alternation_period=0)
    with pytest.raises(ConfigError):
        VariantConfig(inertia=0.0)


def test_external_instant_regret_definition():
    game = generate_random_game(3, 4, "general_sum", seed=0)
    a = (1, 3, 2)
    rs = external_instant_regret(game, a)
    for i in range(3):
        for dev in range(4):
            swapped = tuple(dev if j == i else aj for j, aj in enumerate(a))
            want = payoff(game, swapped)[i] - payoff(game, a)[i]
            assert rs[i][dev] == pytest.approx(want, abs=1e-12)
        assert rs[i][a[i]] == 0.0


def test_internal_instant_regret_lives_on_played_row():
    game = generate_random_game(2, 3, "general_sum", seed=1)
    a = (2, 0)
    rs = internal_instant_regret(game, a)
    ext = external_instant_regret(game, a)
    for i in range(2):
        np.testing.assert_array_equal(rs[i][a[i]], ext[i])
        off = np.delete(rs[i], a[i], axis=0)
        assert not off.any()


def test_mixed_instant_regret_matches_expectation():
    """Mixed-mode regrets are the sampled ones in expectation."""
    game = generate_random_game(2, 3, "general_sum", seed=2)
    rng = np.random.default_rng(0)
    p0, p1 = rng.dirichlet(np.ones(3)), rng.dirichlet(np.ones(3))
    got = mixed_instant_regret_2p(game, [p0, p1], "external")
    want = [np.zeros(3), np.zeros(3)]
    for a0 in range(3):
        for a1 in range(3):
            pr = p0[a0] * p1[a1]
            rs = external_instant_regret(game, (a0, a1))
            want[0] += pr * rs[0]
            want[1] += pr * rs[1]
    np.testing.assert_allclose(got[0], want[0], atol=1e-12)
    np.testing.assert_allclose(got[1], want[1], atol=1e-12)

    got_i = mixed_instant_regret_2p(game, [p0, p1], "internal")
    want_i = [np.zeros((3, 3)), np.zeros((3, 3))]
    for a0 in range(3):
        for a1 in range(3):
            pr = p0[a0] * p1[a1]
            rs = internal_instant_regret(game, (a0, a1))
            want_i[0] += pr * rs[0]
            want_i[1] += pr * rs[1]
    np.testing.assert_allclose(got_i[0], want_i[0], atol=1e-12)
    np.testing.assert_allclose(got_i[1], want_i[1], atol=1e-12)


def test_mixed_mode_guards():
    with pytest.raises(UnsupportedModeError):
        mixed_instant_regret_2p(generate_random_game(3, 2, "general_sum", seed=0),
                                [np.ones(2) / 2] * 3)
    proc = generate_random_game(2, 3, "general_sum", seed=0, backend="procedural")
    with pytest.raises(UnsupportedModeError):
        mixed_instant_regret_2p(proc, [np.ones(3) / 3] * 2)


def test_rm_external_policy():
    np.testing.assert_allclose(rm_external_policy(np.array([2.0, 0.0, 6.0])),
                               [0.25, 0.0, 0.75])
    np.testing.assert_allclose(rm_external_policy(np.array([-1.0, -0.5])),
                               [0.5, 0.5])
    np.testing.assert_allclose(rm_external_policy(np.array([3.0, -2.0])),
                               [1.0, 0.0])


def test_rm_internal_policy_inertia():
    row = np.array([1.0, 3.0, -2.0])
    alpha = 0.5
    p = rm_internal_policy(row, alpha, last_action=0)
    denom = alpha + 4.0
    np.testing.assert_allclose(p, [(1.0 + alpha) / denom, 3.0 / denom, 0.0])
    assert p.sum() == pytest.approx(1.0)
    # vanishing regrets pin the policy to the last action
    p0 = rm_internal_policy(np.array([0.0, 0.0, 0.0]), 1e-10, last_action=2)
    np.testing.assert_allclose(p0, [0.0, 0.0, 1.0])


def test_swap_chain_policy_is_stationary():
    rng = np.random.default_rng(5)
    guiding = rng.normal(size=(4, 4)) * 2.0
    alpha = 1e-10
    start = np.full(4, 0.25)
    p = swap_chain_policy(guiding, alpha, start, iters=500)
    pos = np.maximum(guiding, 0.0)
    np.fill_diagonal(pos, 0.0)
    denom = alpha + pos.sum(axis=1).max()
    stay = 1.0 - pos.sum(axis=1) / denom
    nxt = p @ pos / denom + stay * p
    np.testing.assert_allclose(nxt, p, atol=1e-9)
    assert p.sum() == pytest.approx(1.0)
    assert p.min() >= 0.0


def test_potential_definition():
    rs = [np.array([1.0, -2.0]), np.array([[0.5, -1.0], [3.0, 0.0]])]
    # only positive components count, each squared after dividing by w_sum
    want = (1.0 ** 2 + 0.5 ** 2 + 3.0 ** 2) / 4.0
    assert potential(rs, 2.0) == pytest.approx(want)
    with pytest.raises(ValueError):
        potential(rs, 0.0)


def test_plus_clamping_zeroes_negative_guides():
    game = catalog("matching_pennies")
    state = RegretState(game, VariantConfig(plus_clamping=True))
    r = [np.array([-1.0, 2.0]), np.array([3.0, -4.0])]
    apply_iteration(state, (0, 0), r, 1.0)
    np.testing.assert_array_equal(state.guide[0], [0.0, 2.0])
    np.testing.assert_array_equal(state.guide[1], [3.0, 0.0])
    # true regrets keep their sign
    np.testing.assert_array_equal(state.true[0], [-1.0, 2.0])


def test_optimism_counts_latest_increment_twice():
    game = catalog("matching_pennies")
    state = RegretState(game, VariantConfig(optimism=True))
    r1 = [np.array([1.0, -1.0]), np.array([0.5, -0.5])]
    apply_iteration(state, (0, 0), r1, 1.0)
    r2 = [np.array([0.25, 0.75]), np.array([-0.25, 0.25])]
    apply_iteration(state, (0, 1), r2, 1.0)
    seen = apply_guiding_transforms(state, state.config, 3)
    # stored guide holds r1 + r2; the selection view adds r2 once more
    np.testing.assert_allclose(seen[0], np.array([1.0, -1.0]) + 2 * np.array([0.25, 0.75]))
    np.testing.assert_allclose(seen[1], np.array([0.5, -0.5]) + 2 * np.array([-0.25, 0.25]))
    # and the stored values stay unboosted
    np.testing.assert_allclose(state.guide[0], [1.25, -0.25])


def test_alternation_gates_guiding_updates():
    game = generate_random_game(2, 2, "general_sum", seed=3)
    state = RegretState(game, VariantConfig(alternation_period=2))
    r1 = [np.array([1.0, 0.0]), np.array([2.0, 0.0])]
    apply_iteration(state, (1, 1), r1, 1.0)  # t=1: only player 1's guide moves
    np.testing.assert_array_equal(state.guide[0], [0.0, 0.0])
    np.testing.assert_array_equal(state.guide[1], [2.0, 0.0])
    r2 = [np.array([0.0, 3.0]), np.array([0.0, 4.0])]
    apply_iteration(state, (1, 1), r2, 1.0)  # t=2: only player 0's guide moves
    np.testing.assert_array_equal(state.guide[0], [0.0, 3.0])
    np.testing.assert_array_equal(state.guide[1], [2.0, 0.0])
    # true regrets always accumulate for everyone
    np.testing.assert_array_equal(state.true[0], [1.0, 3.0])
    np.testing.assert_array_equal(state.true[1], [2.0, 4.0])


def test_linear_policy_weighting_tilts_guides():
    """policy_weighting=linear weights the guide add by the iteration index.

    After t iterations at uniform averaging weights the guiding regrets
    equal sum_t t * r_t up to one common scale.
    """
    game = generate_random_game(2, 2, "general_sum", seed=4)
    state = RegretState(game, VariantConfig(policy_weighting="linear"))
    rs = []
    rng = np.random.default_rng(1)
    for t in range(1, 5):
        r = [rng.normal(size=2), rng.normal(size=2)]
        apply_iteration(state, (0, 0), r, 1.0, mirror_guide=False)
        rs.append(r)
    want0 = sum(t * r[0] for t, r in zip(range(1, 5), rs))
    got0 = state.guide[0]
    scale = want0[0] / got0[0]
    np.testing.assert_allclose(got0 * scale, want0, rtol=1e-9)


def test_external_solver_tracks_cce_identity():
    # spot check on a tiny run; the acceptance suite does the full matrix
    from rmkit import JointDistribution, cce_gap

    game = generate_random_game(2, 3, "general_sum", seed=6)
    res = solve(game, VariantConfig(), WeightPolicy(scheme="greedy"), 60, seed=2,
                metrics=("max_avg_regret",))
    dist = JointDistribution(res.state.joint_weights())
    assert res.trace[-1].metrics["max_avg_regret"] == pytest.approx(
        cce_gap(game, dist), abs=1e-9)
