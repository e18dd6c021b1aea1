import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import exact_game
from stochclock.clock import make_clock, make_ladder, make_perfect
from stochclock.game import (
    BLOCK_ROUNDS,
    GameConfig,
    check_halting_boundaries,
    estimate_score,
    play_once,
    renewal_estimate,
    run_rng,
)
from stochclock.walk import (
    NECESSARY,
    SUFFICIENT,
    AbsorptionProblem,
    delta_distribution,
    perfect_vs_ladder_D,
    solve_expected_absorption,
    theorem1_bounds,
    theorem2_bounds,
)


def valid_prefix(owners, leader):
    """Owners up to and excluding the first tick out of turn."""
    expected = leader
    for n, o in enumerate(owners):
        if o != expected:
            return owners[:n]
        expected = "B" if o == "A" else "A"
    return owners


def test_config_validation():
    a, b = make_ladder(4, 0.5), make_ladder(5, 0.5)
    with pytest.raises(ValueError):
        GameConfig(a, b)
    with pytest.raises(ValueError):
        GameConfig(a, a, z0=4)
    with pytest.raises(ValueError):
        GameConfig(a, a, z0=-4)
    with pytest.raises(ValueError):
        GameConfig(a, a, application_cap=0)
    with pytest.raises(ValueError):
        GameConfig(a, a, runs=0)
    with pytest.raises(ValueError):
        GameConfig(a, a, seed=-1)


def test_initial_positions_realize_offset():
    c = make_ladder(10, 0.5)
    assert GameConfig(c, c, z0=3).initial_positions() == (3, 0)
    assert GameConfig(c, c, z0=-3).initial_positions() == (0, 3)
    assert GameConfig(c, c, z0=-3).leader == "B"


def test_perfect_clocks_staggered_play_forever():
    c = make_perfect(10)
    t = play_once(GameConfig(c, c, z0=5, application_cap=1000))
    assert t.halt_reason == "cap_reached"
    assert t.score == 100 and t.ticks_a == 100 and t.ticks_b == 100
    assert valid_prefix(t.owners, "A") == t.owners
    assert check_halting_boundaries(t).ok
    assert not check_halting_boundaries(t).necessary_touched


def test_frozen_clocks_never_tick():
    c = make_ladder(6, 0.0)
    t = play_once(GameConfig(c, c, z0=3, application_cap=500))
    assert t.halt_reason == "cap_reached" and t.score == 0
    assert t.ticks.shape == (0, 2) and t.applications_used == 500


def test_staggered_unit_clocks_alternate():
    c = make_ladder(2, 1.0)
    t = play_once(GameConfig(c, c, z0=1, application_cap=101))
    assert t.halt_reason == "cap_reached"
    assert t.owners == ["A", "B"] * 50 + ["A"]
    assert t.ticks[:, 1].tolist() == list(range(1, 102))
    assert t.score == 50


def test_capped_estimate_counts_every_run():
    c = make_perfect(4)
    est = estimate_score(GameConfig(c, c, z0=2, application_cap=40, runs=5))
    assert est.capped_runs == est.runs == 5
    assert est.mean == 10.0 and est.std_error == 0.0


def test_estimate_needs_two_runs():
    c = make_ladder(4, 0.5)
    with pytest.raises(ValueError):
        estimate_score(GameConfig(c, c, z0=2, runs=1))


def test_play_once_deterministic():
    c = make_clock([0.4, 0.3, 0.3], d=7)
    cfg = GameConfig(c, c, z0=3, seed=99)
    a, b = play_once(cfg, 7), play_once(cfg, 7)
    assert np.array_equal(a.ticks, b.ticks)
    assert (a.score, a.applications_used, a.q_at_halt) == (b.score, b.applications_used, b.q_at_halt)


def test_estimate_independent_of_run_partition():
    c = make_ladder(6, 0.3)
    cfg = GameConfig(c, c, z0=3, seed=5, runs=40)
    est = estimate_score(cfg)
    singles = [play_once(cfg, i, record_ticks=False).score for i in range(40)]
    assert est.scores.tolist() == singles
    reversed_scores = [play_once(cfg, i).score for i in reversed(range(40))]
    assert sorted(reversed_scores) == sorted(singles)


def test_run_rng_is_pure():
    assert np.array_equal(run_rng(3, 4).random(5), run_rng(3, 4).random(5))
    assert not np.array_equal(run_rng(3, 4).random(5), run_rng(3, 5).random(5))


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 12), st.floats(0.05, 1.0), st.integers(0, 2**32), st.data())
def test_alternation_and_score(d, delta, seed, data):
    z0 = data.draw(st.integers(-(d - 1), d - 1))
    c = make_ladder(d, delta)
    cfg = GameConfig(c, c, z0=z0, seed=seed, application_cap=20000)
    t = play_once(cfg)
    prefix = valid_prefix(t.owners, cfg.leader)
    if t.halt_reason == "violation":
        assert len(prefix) == len(t.owners) - 1
    else:
        assert prefix == t.owners
    assert t.score == min(prefix.count("A"), prefix.count("B"))
    rounds = t.ticks[:, 1]
    assert np.all(np.diff(rounds) >= 0) and (rounds.size == 0 or rounds[-1] <= t.applications_used)


def test_replay_with_pure_step():
    from stochclock.clock import start, step

    c = make_clock([0.3, 0.4, 0.3], d=5)
    cfg = GameConfig(c, c, z0=2, seed=11)
    for run in range(20):
        t = play_once(cfg, run)
        rng = run_rng(cfg.seed, run)
        u = rng.random((t.applications_used, 2))
        sa, sb = start(c.started_at(2)), start(c)
        events = []
        for n in range(t.applications_used):
            sa, ta = step(c.started_at(2), sa, u[n, 0])
            sb, tb = step(c, sb, u[n, 1])
            if ta and tb:
                # the owner due next goes first
                due = "B" if events and events[-1][0] == "A" else "A"
                other = "A" if due == "B" else "B"
                events += [(due, n + 1), (other, n + 1)]
            elif ta:
                events.append(("A", n + 1))
            elif tb:
                events.append(("B", n + 1))
        assert list(zip(t.owners, t.ticks[:, 1].tolist())) == events


def test_monotone_cap():
    c = make_clock([0.5, 0.3, 0.2], d=6)
    for run in range(50):
        scores = [play_once(GameConfig(c, c, z0=3, seed=8, application_cap=cap), run).score
                  for cap in (5, 20, 80, 400, 5000)]
        assert scores == sorted(scores)


def test_cap_reproduces_prefix():
    c = make_ladder(8, 0.4)
    long = play_once(GameConfig(c, c, z0=4, seed=2, application_cap=10**6), 3)
    cut = long.applications_used // 2
    short = play_once(GameConfig(c, c, z0=4, seed=2, application_cap=cut), 3)
    n = short.ticks.shape[0]
    assert np.array_equal(long.ticks[:n], short.ticks)


def test_games_longer_than_one_block():
    c = make_ladder(100, 0.05)
    cfg = GameConfig(c, c, z0=50, seed=0)
    games = [play_once(cfg, i) for i in range(10)]
    assert max(g.applications_used for g in games) > 2 * BLOCK_ROUNDS
    for g in games:
        assert g.ticks_a + g.ticks_b == g.ticks.shape[0]
        assert check_halting_boundaries(g).ok


def test_halting_boundaries_sandwich():
    rng = np.random.default_rng(2024)
    checked = 0
    for d in (4, 10, 20):
        for run in range(3400):
            delta = float(rng.uniform(0.05, 0.95))
            z0 = int(rng.integers(-(d - 1), d))
            c = make_ladder(d, delta)
            t = play_once(GameConfig(c, c, z0=z0, seed=77, application_cap=10**6), run, record_ticks=False)
            rep = check_halting_boundaries(t)
            assert rep.ok, (d, delta, z0, run, t)
            if t.halt_reason == "violation":
                assert t.q_at_halt > d or t.q_at_halt < 0
            checked += 1
    assert checked >= 10**4


def test_halting_boundaries_general_clocks():
    rng = np.random.default_rng(7)
    for run in range(2000):
        d = int(rng.integers(3, 15))
        m = int(rng.integers(1, min(d, 4) + 1))
        p = np.zeros(m + 1)
        p[: m + 1] = rng.dirichlet(np.ones(m + 1))
        c = make_clock(p, d=d)
        t = play_once(GameConfig(c, c, z0=d // 2, seed=1, application_cap=10**5), run, record_ticks=False)
        assert check_halting_boundaries(t).ok


def test_boundary_report_untouched_when_capped_inside():
    c = make_perfect(6)
    t = play_once(GameConfig(c, c, z0=3, application_cap=60))
    rep = check_halting_boundaries(t)
    assert rep.ok and not rep.necessary_touched and not rep.sufficient_touched


def test_symmetry_under_swap():
    c = make_ladder(6, 0.4)
    a = estimate_score(GameConfig(c, c, z0=3, seed=1, runs=4000))
    b = estimate_score(GameConfig(c, c, z0=-3, seed=2, runs=4000))
    assert abs(a.mean - b.mean) < 4 * np.hypot(a.std_error, b.std_error)


def test_symmetry_under_swap_unequal_clocks():
    pa, pb = make_clock([0.5, 0.5], d=5), make_clock([0.4, 0.4, 0.2], d=5)
    a = estimate_score(GameConfig(pa, pb, z0=2, seed=1, runs=4000))
    b = estimate_score(GameConfig(pb, pa, z0=-2, seed=2, runs=4000))
    assert abs(a.mean - b.mean) < 4 * np.hypot(a.std_error, b.std_error)


def test_monte_carlo_matches_exact_game():
    d, delta = 4, 0.5
    c = make_ladder(d, delta)
    score, rounds = exact_game(c.jumps.probs, c.jumps.probs, d, 2)
    assert score == pytest.approx(2.3795, abs=1e-4)
    est = estimate_score(GameConfig(c, c, z0=2, seed=0, runs=10**5))
    assert abs(est.mean - score) < 4 * est.std_error
    assert abs(est.mean_applications - rounds) < 4 * est.applications_std_error


def test_ladder_game_within_walk_envelope():
    # the game score sits between the necessary and sufficient absorption values
    d, delta = 4, 0.5
    c = make_ladder(d, delta)
    dd = delta_distribution(c.jumps, c.jumps)
    lo = delta / d * solve_expected_absorption(AbsorptionProblem(dd, -1, d + 1, 2))
    hi = delta / d * solve_expected_absorption(AbsorptionProblem(dd, -d - 1, 2 * d + 1, 2))
    assert (lo, hi) == pytest.approx((2.25, 12.25))
    score, _ = exact_game(c.jumps.probs, c.jumps.probs, d, 2)
    assert lo <= score <= hi


@pytest.mark.parametrize("probs, d, z0", [
    ([0.5, 0.5], 6, 3),
    ([0.6, 0.3, 0.1], 5, 2),
    ([0.2, 0.5, 0.3], 4, 1),
])
def test_monte_carlo_matches_exact_general(probs, d, z0):
    a = make_clock(probs, d=d)
    score, rounds = exact_game(a.jumps.probs, a.jumps.probs, d, z0)
    est = estimate_score(GameConfig(a, a, z0=z0, seed=3, runs=20000))
    assert abs(est.mean - score) < 4 * est.std_error


def test_ladder_sweep_example_d20():
    d, delta = 20, 0.05
    c = make_ladder(d, delta)
    est = estimate_score(GameConfig(c, c, z0=10, seed=0, runs=500))
    _, exact = theorem2_bounds(d, delta)
    assert exact.N_lower <= est.mean <= exact.N_upper
    assert est.capped_runs == 0


def test_reach_envelope_contains_exact_score():
    d = 4
    c = make_clock([0.5, 0.25, 0.25], d=d)
    rep = theorem1_bounds(d, 0.5, 2, 0.25, 0.25)
    score, _ = exact_game(c.jumps.probs, c.jumps.probs, d, d // 2)
    assert rep.N_lower <= score <= rep.N_upper


def test_perfect_vs_ladder_renewal_estimate():
    d, delta = 10, 0.5
    p, lad = make_perfect(d), make_ladder(d, delta)
    est = estimate_score(GameConfig(p, lad, z0=0, seed=4, runs=20000))
    n, se = renewal_estimate(est, p)
    score, rounds = exact_game(p.jumps.probs, lad.jumps.probs, d, 0)
    assert abs(n - rounds / d) < 4 * se
    lo = perfect_vs_ladder_D(d, 0, delta, NECESSARY) / d
    hi = perfect_vs_ladder_D(d, 0, delta, SUFFICIENT) / d
    assert (lo, hi) == pytest.approx((2.2, 4.2))
    assert lo <= rounds / d <= hi
    # the perfect clock ends the game on its second unanswered tick
    assert score == pytest.approx(rounds / d - 2, rel=1e-9)
    assert abs(est.mean - score) < 4 * est.std_error
