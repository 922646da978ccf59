import io
import json

import numpy as np
import pytest

from fatou_lab.config import settings
from fatou_lab.core.constants import INFINITY
from fatou_lab.core.exceptions import (
    BudgetExceeded,
    ConfigurationError,
    NeverExited,
    NotGenerating,
    StepBudgetExceeded,
)
from fatou_lab.core.schemas import Budgets, StepSpec
from fatou_lab.geometry import ball
from fatou_lab.walks import (
    ExitBall,
    FirstOf,
    FixedSteps,
    Purpose,
    RngStream,
    StepDistribution,
    Trajectory,
    exit_index,
    exit_proxy,
    point_mass,
    simulate,
    simulate_batch,
    step,
    stopping_time_Tm,
    strong_markov_check,
    validate,
    write_jsonl,
)


# ========== STEP DISTRIBUTIONS ==========


def test_simple_random_walk_is_admissible(srw):
    report = validate(srw)
    assert (report.m1, report.l, report.c0) == (1, 2, 0.25)
    assert report.passed
    assert srw.symmetric and srw.is_exact


def test_lazy_walk_is_admissible_in_one_step(free2):
    lazy = StepDistribution.from_spec(StepSpec.parse("lazy"), free2)
    report = validate(lazy)
    assert (report.m1, report.l, report.c0) == (1, 1, 0.125)
    assert lazy.stay == 0.5


def test_point_mass_does_not_generate(free2):
    with pytest.raises(NotGenerating):
        validate(point_mass(free2, "a"))


def test_explicit_weights(free2):
    nu = StepDistribution.from_spec(StepSpec.parse("a:1/2,a':1/4,ab:1/4"), free2)
    assert nu.m1 == 2
    assert not nu.symmetric
    with pytest.raises(ConfigurationError):
        StepDistribution(free2, [((0,), 0.5), ((1,), 0.4)])


def test_draw_follows_cumulative_weights(srw):
    assert srw.draw(0.0) == 0
    assert srw.draw(0.26) == 1
    assert srw.draw(0.999) == 3


# ========== SIMULATION ==========


def test_step_with_a_point_mass(free2):
    nu = point_mass(free2, "b")
    assert step(free2.word("a"), nu, free2, RngStream(1)) == free2.word("ab")


def test_simulation_is_reproducible(free2, srw, seed):
    first = simulate((), srw, free2, FixedSteps(50), RngStream(seed, 3))
    second = simulate((), srw, free2, FixedSteps(50), RngStream(seed, 3))
    other = simulate((), srw, free2, FixedSteps(50), RngStream(seed, 4))
    assert first.positions == second.positions
    assert first.positions != other.positions
    assert first.seed == {"master_seed": seed, "purpose": "plain", "index": 3}


def test_simulation_commutes_with_translation(free2, srw, seed):
    a = free2.word("a")
    from_o = simulate((), srw, free2, FixedSteps(40), RngStream(seed, 9))
    from_a = simulate(a, srw, free2, FixedSteps(40), RngStream(seed, 9))
    assert from_a.positions == [free2.multiply(a, x) for x in from_o.positions]


def test_fixed_steps_zero(free2, srw):
    t = simulate((), srw, free2, FixedSteps(0), RngStream(0))
    assert t.positions == [()]
    assert t.steps == 0
    with pytest.raises(NeverExited):
        exit_proxy(t, 1)


def test_exit_ball_stops_on_the_sphere(free2, srw, seed):
    for i in range(20):
        t = simulate((), srw, free2, ExitBall(5), RngStream(seed, i))
        assert len(t.last) == 5
        assert all(len(x) < 5 for x in t.positions[:-1])
        assert exit_proxy(t, 5) == t.last
        assert exit_index(t, 5) == t.steps


def test_first_of_is_bounded(free2, srw):
    rule = FirstOf((ExitBall(1000), FixedSteps(7)))
    assert rule.bounded and not ExitBall(3).bounded
    assert simulate((), srw, free2, rule, RngStream(5)).steps == 7


def test_step_cap(free2):
    with pytest.raises(StepBudgetExceeded):
        simulate((), StepDistribution.from_spec(StepSpec.parse("lazy"), free2), free2, ExitBall(50),
                 RngStream(0), step_cap=10)


def test_trajectory_must_start_at_start():
    with pytest.raises(ValueError):
        Trajectory(start=(0,), positions=[()])


def test_mean_exit_time(free2, srw, seed):
    radius = 10
    trajectories = simulate_batch((), srw, free2, ExitBall(radius), 4000, seed)
    mean = np.mean([t.steps for t in trajectories])
    expected = 2 * radius - 1.5 * (1 - 3.0 ** -radius)
    assert mean == pytest.approx(expected, rel=0.05)


def test_batches_do_not_depend_on_worker_count(free2, srw, seed):
    one = simulate_batch((), srw, free2, ExitBall(4), 40, seed, workers=1)
    two = simulate_batch((), srw, free2, ExitBall(4), 40, seed, workers=2)
    assert [t.positions for t in one] == [t.positions for t in two]
    shifted = simulate_batch((), srw, free2, ExitBall(4), 10, seed, start_index=30)
    assert [t.positions for t in shifted] == [t.positions for t in one[30:]]


@pytest.mark.parametrize("workers", [1, 2])
def test_batch_budgets_reach_the_workers(free2, seed, workers):
    lazy = StepDistribution.from_spec(StepSpec.parse("lazy"), free2)
    saved = settings.step_cap
    with pytest.raises(StepBudgetExceeded):
        simulate_batch((), lazy, free2, ExitBall(50), 200, seed, workers=workers, budgets=Budgets(steps=10))
    assert settings.step_cap == saved
    with pytest.raises(BudgetExceeded):
        simulate_batch((), lazy, free2, ExitBall(2), 10, seed, budgets=Budgets(trajectories=5))


def test_purposes_use_separate_streams(free2, srw, seed):
    plain = simulate_batch((), srw, free2, FixedSteps(20), 5, seed)
    theta = simulate_batch((), srw, free2, FixedSteps(20), 5, seed, purpose=Purpose.THETA)
    assert [t.positions for t in plain] != [t.positions for t in theta]


def test_write_jsonl(free2, srw, seed):
    out = io.StringIO()
    trajectories = simulate_batch((), srw, free2, FixedSteps(3), 2, seed)
    assert write_jsonl(trajectories, out, free2) == 2
    record = json.loads(out.getvalue().splitlines()[1])
    assert record["seed"]["index"] == 1
    assert len(record["positions"]) == 4
    assert record["positions"][0] == "e"


# ========== STOPPING TIMES ==========


def test_stopping_time_matches_brute_force(free2, srw, seed):
    t = simulate((), srw, free2, FixedSteps(60), RngStream(seed, 2))

    def u(y):
        return float(len(y))

    for m in (0.5, 2, 4):
        expected = next((n for n, x in enumerate(t.positions)
                         if max(u(y) for y in ball(free2, 1, x)) > m), INFINITY)
        assert stopping_time_Tm(t, u, m, 1, free2) == expected


def test_stopping_time_limits(free2, srw):
    t = simulate((), srw, free2, FixedSteps(10), RngStream(1))
    assert stopping_time_Tm(t, lambda y: 1.0, -1, 1, free2) == 0
    assert stopping_time_Tm(t, lambda y: 1.0, 10, 1, free2) == INFINITY


# ========== STRONG MARKOV ==========


def test_step_after_exit_follows_nu(free2, srw, seed):
    report = strong_markov_check(srw, free2, 6, 4000, seed)
    assert report.passed
    assert set(report.cells) == {"a", "a'", "b", "b'"}
    assert len(report.p_values) == 4
    assert sum(report.cells.values()) == 4000
