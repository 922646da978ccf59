import pytest

from fatou_lab.boundary import BoundaryRegion, TubeSpec, periodic_ray
from fatou_lab.conditioning import ConditionedKernel
from fatou_lab.core.exceptions import ConfigurationError, PreconditionFailed
from fatou_lab.core.schemas import Contingency
from fatou_lab.experiments import (
    classify,
    corollary_checks,
    default_annuli,
    eta_tau_bound_check,
    free_srw_bound,
    harmonic_function,
    lemma53_check,
    lemma61_check,
    lemma62_check,
    nt_report,
    out_of_tube_points,
    pole_censor_depth,
    prop52_check,
    stochastic_report,
    stopped_martingale_check,
    theorem_experiment,
)
from fatou_lab.experiments.corollaries import spike_radius
from fatou_lab.experiments.theorem import near_pole
from fatou_lab.geometry import ball


@pytest.fixture(scope="module")
def poisson_a(srw, free2):
    return harmonic_function("poisson:a", srw, free2, 12)


@pytest.fixture(scope="module")
def martin_a(srw, free2):
    return harmonic_function("martin:a", srw, free2, 12)


# ========== HARMONIC FUNCTIONS ==========


def test_harmonic_function_specs(free2, srw, poisson_a, martin_a):
    assert harmonic_function("const:5", srw, free2, 4)(free2.word("ab")) == 5.0
    combined = harmonic_function("lin:2*const:1;-1*const:3", srw, free2, 4)
    assert combined(()) == -1.0
    assert poisson_a(()) == pytest.approx(0.25, rel=1e-6)
    assert martin_a(free2.word("a")) == pytest.approx(3.0, rel=1e-4)
    diff = harmonic_function("diff:a,b", srw, free2, 12)
    assert diff(free2.word("a")) == pytest.approx(3.0 - 1 / 3, rel=1e-4)


@pytest.mark.parametrize("text", ["diff:a", "lin:2", "heat:1"])
def test_harmonic_function_rejects(free2, srw, text):
    with pytest.raises(ConfigurationError):
        harmonic_function(text, srw, free2, 4)


# ========== NON-TANGENTIAL REPORTS ==========


def test_default_annuli():
    assert default_annuli(12) == [(4, 6), (6, 8), (8, 10), (10, 12)]
    assert default_annuli(8) == [(2, 4), (4, 6), (6, 8)]
    assert default_annuli(2) == []


def test_poisson_integral_converges_along_its_cylinder(poisson_a, theta_a):
    report = nt_report(poisson_a, TubeSpec(theta_a, 1), default_annuli(12))
    assert report.verdicts.convergent and report.verdicts.bounded
    assert report.verdicts.limit == pytest.approx(1.0, abs=0.01)
    assert report.points_per_annulus == [3, 3, 3, 3]
    assert classify(report) == Contingency(bounded_convergent=1)


def test_poisson_integral_vanishes_off_its_cylinder(poisson_a, theta_b):
    report = nt_report(poisson_a, TubeSpec(theta_b, 2), default_annuli(12))
    assert report.verdicts.convergent
    assert report.verdicts.limit == pytest.approx(0.0, abs=0.01)


def test_martin_kernel_blows_up_toward_its_pole(martin_a, theta_a, theta_b):
    toward = nt_report(martin_a, TubeSpec(theta_a, 1), default_annuli(12))
    assert not toward.verdicts.bounded and not toward.verdicts.convergent
    assert classify(toward) == Contingency(unbounded_not_convergent=1)
    away = nt_report(martin_a, TubeSpec(theta_b, 1), default_annuli(12))
    assert away.verdicts.convergent
    assert near_pole(theta_a, martin_a.poles, pole_censor_depth(12))
    assert not near_pole(theta_b, martin_a.poles, pole_censor_depth(12))


def test_nt_report_needs_annuli(poisson_a, theta_a):
    with pytest.raises(PreconditionFailed):
        nt_report(poisson_a, TubeSpec(theta_a, 1), [])


def test_pole_censor_depth():
    assert pole_censor_depth(12) == 2
    assert pole_censor_depth(4) == 1


# ========== HARMONIC MEASURE BOUNDS ==========


def test_free_srw_bound():
    assert free_srw_bound(0) == 1.0
    assert free_srw_bound(1) == pytest.approx(1 / 12)
    assert free_srw_bound(2) == pytest.approx(1 / 36)
    assert free_srw_bound(1.5) == pytest.approx(1 / 36)


def test_points_outside_the_tubes(free2, cyl_a):
    points = out_of_tube_points(cyl_a, 1, free2, 2, 100)
    assert free2.word("b") in points and free2.word("a'b") in points
    assert all(w[:1] != (0,) for w in points)
    assert () not in points


def test_escape_probability_from_outside_the_tubes(free2, srw, cyl_a, seed):
    report = lemma62_check(cyl_a, 1, srw, free2, n_traj=500, radius=8, seed=seed, n_points=6)
    assert report.lower_bound == pytest.approx(11 / 12, abs=2e-3)
    assert report.passed
    assert len(report.points) == 6


def test_escape_check_holds_the_walk_to_its_bound(free2, srw, cyl_a, seed):
    report = lemma62_check(cyl_a, 1, srw, free2, n_traj=200, radius=8, seed=seed, n_points=3, lower_bound=0.999)
    assert report.lower_bound == 0.999
    assert not report.passed


@pytest.mark.slow
def test_escape_probability_on_fifty_points(free2, srw, cyl_a, seed):
    report = lemma62_check(cyl_a, 1, srw, free2, n_traj=2000, radius=10, seed=seed)
    assert len(report.points) == 50
    assert report.lower_bound == pytest.approx(11 / 12, abs=1e-3)
    assert report.eta_hat + 3 * report.eta_sigma >= 11 / 12 - 1e-3
    assert report.passed


def test_escape_check_preconditions(free2, srw, cyl_a, seed):
    with pytest.raises(PreconditionFailed):
        lemma62_check(cyl_a, 1, srw, free2, n_traj=10, radius=6, seed=seed, delta_hat=1)
    with pytest.raises(PreconditionFailed):
        lemma62_check(BoundaryRegion.full(), 1, srw, free2, n_traj=10, radius=6, seed=seed)


def test_poisson_integral_converges_along_conditioned_paths(srw, poisson_a, theta_a, theta_b, seed):
    toward_a = ConditionedKernel.toward(theta_a, srw, depth=20)
    report = stochastic_report(poisson_a, toward_a, n_traj=100, window=5, radius=10, seed=seed, workers=1)
    assert report.censored == 0
    assert report.fraction_convergent >= 0.95
    assert sorted(report.limits)[50] == pytest.approx(1.0, abs=0.01)
    assert all(t >= p for t, p in zip(report.sup_thickened, report.sup_path))
    toward_b = ConditionedKernel.toward(theta_b, srw, depth=20)
    away = stochastic_report(poisson_a, toward_b, n_traj=100, window=5, radius=10, seed=seed, workers=1)
    assert sorted(away.limits)[50] == pytest.approx(0.0, abs=0.01)


def test_stopped_martingale_bound(free2, srw, martin_a, seed):
    report = stopped_martingale_check(martin_a, 5.0, srw, free2, n_traj=300, radius=8, seed=seed)
    assert report.passed
    assert report.violations == 0
    assert report.max_ratio <= 1.0
    assert report.stopped > 0


# ========== SPIKES ==========


def test_spike_radius(free2, theta_a, cyl_a):
    assert spike_radius(theta_a, 2, cyl_a, 1, 6) == 1
    assert spike_radius(theta_a, 1, cyl_a, 1, 6) == 0


def test_spike_radius_outside_the_region(free2, cyl_a):
    theta = periodic_ray(free2, "b")
    assert spike_radius(theta, 1, cyl_a, 1, 6) is None


# ========== LONG RUNS ==========


@pytest.mark.slow
def test_bounded_implies_convergent_for_a_poisson_integral(free2, srw, poisson_a, seed):
    report = theorem_experiment(poisson_a, srw, free2, n_thetas=40, c_values=[1, 2], radius=10, seed=seed,
                                workers=1)
    assert report.passed
    assert report.pooled.bounded_not_convergent == 0
    assert report.pooled.total == 80


@pytest.mark.slow
def test_boundary_neighbourhoods_have_uniform_mass(free2, srw, seed):
    report = lemma61_check(srw, free2, alpha=1, n_traj=1000, radius=8, seed=seed,
                           points=list(ball(free2, 1)), n_rays=8, workers=1)
    assert report.oracle_bound == pytest.approx(1 / 12)
    assert report.passed


@pytest.mark.slow
def test_corollaries_on_a_cylinder(free2, srw, cyl_a, seed):
    report = corollary_checks(cyl_a, 2, srw, free2, radius=8, n_thetas=5, n_traj=50, seed=seed, workers=1)
    assert report.tail_in_tube.passed
    assert all(s.passed for s in report.spikes)
    assert report.nt_stability.passed


@pytest.mark.slow
def test_escape_bound_at_the_tube_exit(free2, srw, cyl_a, seed):
    report = eta_tau_bound_check(cyl_a, 3, srw, free2, radius=8, n_traj=300, seed=seed, n_points=5, workers=1)
    assert report.passed
    assert report.eta_hat > 0


@pytest.mark.slow
def test_stochastic_checks_for_a_poisson_integral(free2, srw, poisson_a, cyl_a, seed):
    prop = prop52_check(poisson_a, srw, free2, bound=1.0, n_thetas=8, n_traj=30, radius=8, seed=seed, workers=1)
    assert prop.passed
    limits = lemma53_check(cyl_a, srw, free2, n_thetas=8, c=1, radius=12, n_traj=30, seed=seed, workers=1)
    assert limits.passed
