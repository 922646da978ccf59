import io

import pytest

from fatou_lab.boundary import BoundaryRegion, cylinder
from fatou_lab.config import SolverChoice
from fatou_lab.core.exceptions import ConfigurationError, NonHyperbolicWarning, OutOfTabulatedRange, PreconditionFailed
from fatou_lab.core.schemas import GreenMethod
from fatou_lab.geometry import ball
from fatou_lab.groups import build_group
from fatou_lab.potential import (
    ShadowBins,
    SphereCell,
    TabulatedFunction,
    build_solver,
    exit_frequency,
    green_estimate_linear,
    green_linear,
    green_mc,
    harmonic_measure,
    is_harmonic,
    laplacian,
    martin_function,
    martin_kernel,
    martin_kernel_at_boundary,
    martingale_check,
    poisson_integral,
)
from fatou_lab.walks import ExitBall, simple_random_walk, simulate_batch

RADIUS = 24


# ========== GREEN FUNCTION ==========


def test_green_function_on_the_tree(free2, srw):
    green = green_linear((), srw, free2, RADIUS)
    assert green(()) == pytest.approx(1.5, rel=1e-6)
    assert green(free2.word("a")) == pytest.approx(0.5, rel=1e-6)
    assert green(free2.word("ab")) == pytest.approx(0.5 / 3, rel=1e-6)


def test_green_estimate_records_method(free2, srw):
    estimate = green_estimate_linear(free2.word("a"), (), srw, free2, RADIUS)
    assert estimate.method == GreenMethod.LINEAR
    assert estimate.value == pytest.approx(0.5, rel=1e-6)
    assert estimate.truncation_radius == RADIUS


def test_green_monte_carlo_agrees(free2, srw, seed):
    estimate = green_mc((), (), srw, free2, 4000, 8, seed)
    exact = green_linear((), srw, free2, 8)(())
    assert abs(estimate.value - exact) < 4 * estimate.stderr
    with pytest.raises(PreconditionFailed):
        green_mc((), free2.word("a^8"), srw, free2, 10, 8, seed)


def _green_z_scores(group, nu, points, n_traj, radius, seed):
    scores = []
    for i, y in enumerate(points):
        exact = green_linear(y, nu, group, radius)
        for j, x in enumerate(points):
            estimate = green_mc(x, y, nu, group, n_traj, radius, seed,
                                start_index=(i * len(points) + j) * n_traj)
            # pairs that are never visited report a zero stderr
            stderr = max(estimate.stderr, 1 / n_traj)
            scores.append(abs(estimate.value - exact(x)) / stderr)
    return scores


def test_green_monte_carlo_agrees_near_the_identity(free2, srw, seed):
    scores = _green_z_scores(free2, srw, list(ball(free2, 1)), 2000, 5, seed)
    assert len(scores) == 25
    assert max(scores) < 4


@pytest.mark.slow
def test_green_monte_carlo_agrees_on_the_radius_three_ball(free2, srw, seed):
    scores = _green_z_scores(free2, srw, list(ball(free2, 3)), 400, 5, seed)
    assert len(scores) == 53 ** 2
    # a 3 stderr band misses about 0.3% of pairs by chance
    assert sum(s > 3 for s in scores) <= 0.01 * len(scores)
    assert max(scores) < 5


@pytest.mark.parametrize("radius", [3, 5])
def test_sparse_solver_matches_tree_solver(free2, srw, radius):
    tree = build_solver(free2, srw, radius, SolverChoice.TREE)
    sparse = build_solver(free2, srw, radius, SolverChoice.SPARSE)
    assert (tree.name, sparse.name) == ("tree", "sparse")
    y = free2.word("a")
    for x in ball(free2, radius - 1):
        assert sparse.green(y)(x) == pytest.approx(tree.green(y)(x), abs=1e-9)
    region = BoundaryRegion.cylinders(["ab", "b'"], free2)
    for x in ball(free2, radius - 1):
        assert sparse.exit_probability(region)(x) == pytest.approx(tree.exit_probability(region)(x), abs=1e-9)


def test_tree_solver_needs_a_tree():
    with pytest.raises(ConfigurationError):
        build_solver(build_group("fpc:2,3"), simple_random_walk(build_group("fpc:2,3")), 4, SolverChoice.TREE)


def test_line_green_function_grows_with_radius():
    line = build_group("lattice:1")
    nu = simple_random_walk(line)
    with pytest.warns(NonHyperbolicWarning):
        green = green_linear((), nu, line, 12)
    assert green(()) == pytest.approx(12, rel=1e-6)


def test_green_is_harmonic_off_the_source(free2, srw):
    green = green_linear((), srw, free2, 10)
    report = is_harmonic(green, [x for x in ball(free2, 3) if x], srw, free2)
    assert report.passed
    assert laplacian(green, (), srw, free2) == pytest.approx(-1.0, abs=1e-9)


# ========== MARTIN KERNEL ==========


def test_martin_kernel_along_a_ray(free2, srw):
    y = free2.word("a^5")
    assert martin_kernel(free2.word("a"), y, srw, free2) == pytest.approx(3.0, rel=1e-4)
    assert martin_kernel(free2.word("b"), y, srw, free2) == pytest.approx(1 / 3, rel=1e-4)
    assert martin_kernel((), y, srw, free2) == pytest.approx(1.0)


def test_martin_kernel_at_the_boundary_stabilizes(free2, srw, theta_a):
    value, report = martin_kernel_at_boundary(free2.word("a"), theta_a, srw, free2, depths=[6, 8, 10])
    assert report.stabilized
    assert value == pytest.approx(3.0, rel=1e-4)


def test_martin_function_is_harmonic(free2, srw, theta_a):
    k = martin_function(theta_a, srw, free2, depth=8)
    assert k(()) == pytest.approx(1.0)
    assert k(free2.word("a'")) == pytest.approx(1 / 3, rel=1e-4)
    assert is_harmonic(k, ball(free2, 3), srw, free2).passed
    with pytest.raises(PreconditionFailed):
        martin_function(theta_a, srw, free2)


# ========== POISSON INTEGRALS ==========


def test_poisson_integral_of_a_cylinder(free2, srw, cyl_a):
    f = poisson_integral(cyl_a, srw, free2, RADIUS)
    assert f(()) == pytest.approx(0.25, rel=1e-6)
    assert f(free2.word("a")) == pytest.approx(0.75, rel=1e-6)
    assert f(free2.word("b")) == pytest.approx(1 / 12, rel=1e-6)
    assert is_harmonic(f, ball(free2, 3), srw, free2).passed


def test_poisson_integral_of_full_region(free2, srw):
    f = poisson_integral(BoundaryRegion.full(), srw, free2, 6)
    assert f(free2.word("ab")) == pytest.approx(1.0)


def test_poisson_integral_monte_carlo(free2, srw, cyl_a, seed):
    f = poisson_integral(cyl_a, srw, free2, 8, method=GreenMethod.MONTE_CARLO,
                         points=[(), free2.word("a")], n_traj=4000, seed=seed)
    assert f(()) == pytest.approx(0.25, abs=0.03)
    assert f(free2.word("a")) == pytest.approx(0.75, abs=0.03)
    with pytest.raises(OutOfTabulatedRange):
        f(free2.word("b"))


@pytest.mark.parametrize("n", [1, 2])
def test_exit_frequency_from_another_branch(free2, srw, cyl_a, seed, n):
    p, stderr = exit_frequency(free2.word(f"b^{n}"), cyl_a, srw, free2, 10, 6000, seed)
    expected = 0.25 * (1 / 3) ** n
    assert abs(p - expected) < 4 * max(stderr, 1e-3)


# ========== HARMONIC MEASURE ==========


def test_harmonic_measure_is_uniform_on_first_letters(free2, srw, seed):
    estimate = harmonic_measure((), srw, free2, 6, SphereCell(2), 4000, seed)
    assert len(estimate.bins) == 12
    for b in estimate.bins.values():
        assert abs(b.probability - 1 / 12) <= 4 * (1 / 12 * 11 / 12 / 4000) ** 0.5
    coarse = estimate.coarsen(1, free2)
    assert set(coarse.bins) == {"a", "a'", "b", "b'"}
    assert sum(b.count for b in coarse.bins.values()) == 4000
    for b in coarse.bins.values():
        assert b.probability == pytest.approx(0.25, abs=0.04)


@pytest.mark.slow
def test_harmonic_measure_is_uniform_on_depth_two_cells(free2, srw, seed):
    estimate = harmonic_measure((), srw, free2, 8, SphereCell(2), 20_000, seed)
    assert len(estimate.bins) == 12
    for label, b in estimate.bins.items():
        assert len(b.cell) == 2
        assert abs(b.probability - 1 / 12) <= 3 * estimate.sigma(label)


def test_harmonic_measure_by_shadows(free2, srw, seed):
    binning = ShadowBins((cylinder("a", free2), cylinder("b", free2)))
    estimate = harmonic_measure(free2.word("a"), srw, free2, 6, binning, 2000, seed)
    assert estimate.bins["V[a,1]"].probability == pytest.approx(0.75, abs=0.05)
    assert "outside" in estimate.bins
    with pytest.raises(PreconditionFailed):
        harmonic_measure((), srw, free2, 3, SphereCell(4), 10, seed)


# ========== MARTINGALES AND TABLES ==========


def test_exit_probability_is_a_martingale(free2, srw, cyl_a, seed):
    f = poisson_integral(cyl_a, srw, free2, 6)
    trajectories = simulate_batch((), srw, free2, ExitBall(6), 1000, seed)
    report = martingale_check(f, trajectories, srw, free2, sigmas=4)
    assert report.passed
    assert report.identity_max_error < 1e-12
    assert report.times[0] == 0


def test_word_length_martingale_has_drift(free2, srw, seed):
    u = TabulatedFunction.from_ball(ball(free2, 6), len, free2, label="length")
    trajectories = simulate_batch((), srw, free2, ExitBall(6), 500, seed)
    report = martingale_check(u, trajectories, srw, free2, sigmas=4)
    assert report.passed
    assert report.means[0] == 0


def test_tabulated_function_bounds_and_csv(free2):
    u = TabulatedFunction.constant(2.0, free2, 1)
    assert u(free2.word("b")) == 2.0
    with pytest.raises(OutOfTabulatedRange):
        u(free2.word("ab"))
    v = TabulatedFunction.combine([(1.0, u), (-0.5, u)])
    assert v(()) == 1.0
    out = io.StringIO()
    v.dump_csv(out, [(), free2.word("a")])
    assert out.getvalue().splitlines() == ["word,value", "e,1.0", "a,1.0"]
