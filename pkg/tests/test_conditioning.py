import pytest

from fatou_lab.boundary import RayKind
from fatou_lab.conditioning import (
    CappedVisits,
    ConditionedKernel,
    ConditionedSimulator,
    ConstantOne,
    ReturnIndicator,
    desintegration_check,
    h_transition,
    sample_boundary_points,
    simulate_conditioned,
)
from fatou_lab.walks import ExitBall, FixedSteps, RngStream, Trajectory, exit_proxy, map_trajectories


@pytest.fixture(scope="module")
def toward_a(srw, theta_a):
    return ConditionedKernel.toward(theta_a, srw, depth=12)


def test_conditioned_row_at_the_identity(free2, toward_a):
    assert h_transition((), free2.word("a"), toward_a) == pytest.approx(0.75, rel=1e-6)
    for w in ("a'", "b", "b'"):
        assert h_transition((), free2.word(w), toward_a) == pytest.approx(1 / 12, rel=1e-5)
    assert h_transition((), free2.word("ab"), toward_a) == 0.0
    assert toward_a.row_defect(()) < 1e-6
    assert toward_a.stabilization.stabilized


def test_conditioned_rows_sum_to_one(free2, toward_a):
    for x in ("e", "a", "b", "aab'", "b'a"):
        assert sum(p for _, p in toward_a.transitions(free2.word(x))) == pytest.approx(1.0)
    assert toward_a.target_label == "(a)^inf"


def test_conditioned_walk_is_reproducible(free2, toward_a, seed):
    first = simulate_conditioned((), toward_a, FixedSteps(20), RngStream(seed, 1))
    second = simulate_conditioned((), toward_a, FixedSteps(20), RngStream(seed, 1))
    assert first.positions == second.positions
    assert first.conditioned["theta"] == "(a)^inf"
    assert first.conditioned["depth"] == 12
    assert all(free2.distance(x, y) == 1 for x, y in zip(first.positions, first.positions[1:]))


def _exit_in_cylinder_a(t: Trajectory) -> int:
    return int(exit_proxy(t, 8)[:1] == (0,))


@pytest.mark.parametrize("start", ["e", "b", "a'"])
def test_conditioned_walk_exits_toward_its_target(free2, toward_a, seed, start):
    hits = map_trajectories(ConditionedSimulator(free2.word(start), toward_a, ExitBall(8)), 1000, seed,
                            reducer=_exit_in_cylinder_a, workers=1)
    assert sum(hits) / len(hits) >= 0.99


@pytest.mark.slow
@pytest.mark.parametrize("start", ["e", "b", "a'"])
def test_conditioned_walk_exits_toward_its_target_at_scale(free2, toward_a, seed, start):
    hits = map_trajectories(ConditionedSimulator(free2.word(start), toward_a, ExitBall(8)), 10_000, seed,
                            reducer=_exit_in_cylinder_a)
    assert sum(hits) / len(hits) >= 0.99


def test_conditioning_toward_a_point(free2, srw):
    kernel = ConditionedKernel.toward_point(free2.word("ab"), srw)
    assert kernel.target_label == "ab"
    assert h_transition((), free2.word("a"), kernel) > h_transition((), free2.word("b"), kernel)


def test_sampled_boundary_points_follow_exits(free2, srw, seed):
    rays = sample_boundary_points((), srw, free2, 5, 20, seed)
    assert len(rays) == 20
    for ray in rays:
        assert ray.kind == RayKind.FROZEN
        assert len(ray.point(5)) == 5
        assert ray.point(5) == ray.word
        assert ray.seed["purpose"] == "theta"
    assert len({ray.word for ray in rays}) > 1


def test_trajectory_functionals(free2):
    t = Trajectory(start=(), positions=[(), (0,), (), (2,), ()])
    assert ConstantOne()(t) == 1.0
    assert ReturnIndicator(2)(t) == 1.0
    assert ReturnIndicator(3)(t) == 0.0
    assert ReturnIndicator(9)(t) == 0.0
    assert CappedVisits((), cap=2, horizon=4)(t) == 2.0
    assert CappedVisits((), cap=5, horizon=2)(t) == 2.0
    assert ReturnIndicator(2).label == "1{X_2=e}"


@pytest.mark.slow
def test_desintegration_of_the_return_indicator(free2, srw, seed):
    report = desintegration_check(ReturnIndicator(2), (), srw, free2, radius=6, n_outer=200, n_inner=50,
                                  seed=seed, workers=1)
    assert report.passed
    assert report.left == pytest.approx(0.25, abs=0.02)
    assert report.max_renorm_defect < 1e-6
