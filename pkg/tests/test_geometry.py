import io
import itertools

import numpy as np
import pytest
from hypothesis import given, settings as hsettings, strategies as st

from fatou_lab.config import settings
from fatou_lab.core.exceptions import BudgetExceeded, PreconditionFailed
from fatou_lab.core.numbers import HalfInt
from fatou_lab.core.schemas import DeltaMethod
from fatou_lab.geometry import ball, distance_matrix, estimate_delta, geodesic, gromov_product, thinness
from fatou_lab.geometry.delta import four_point_twice
from fatou_lab.geometry.metric import point_to_segment
from fatou_lab.groups import build_group

FREE2 = build_group("free:2")
free_words = st.lists(st.integers(min_value=0, max_value=3), max_size=8).map(FREE2.normalize)


@pytest.mark.parametrize("radius", [0, 1, 2, 3, 4])
def test_free_ball_growth(free2, radius):
    assert len(ball(free2, radius)) == 2 * 3 ** radius - 1


def test_ball_parents_are_one_step_closer(free2):
    b = ball(free2, 3)
    assert b.distance(()) == 0 and b.parent(()) is None
    for x in b:
        if x:
            assert b.distance(b.parent(x)) == b.distance(x) - 1
            assert free2.distance(b.parent(x), x) == 1
    assert len(b.sphere(3)) == 36
    assert len(b.interior()) == len(ball(free2, 2))


def test_ball_around_a_point(free2):
    a = free2.word("a")
    b = ball(free2, 1, center=a)
    assert set(b) == {free2.word(w) for w in ("a", "aa", "e", "ab", "ab'")}
    assert b.distance(a) == 0


def test_ball_csv(free2):
    out = io.StringIO()
    ball(free2, 1).dump_csv(out, free2)
    lines = out.getvalue().splitlines()
    assert lines[0] == "word,distance,parent"
    assert lines[1] == "e,0,"
    assert len(lines) == 6


def test_ball_budget(free2):
    with pytest.raises(BudgetExceeded):
        ball(free2, 20)
    with pytest.raises(PreconditionFailed):
        ball(free2, -1)


def test_geodesic_and_gromov_product(free2):
    a, ab = free2.word("a"), free2.word("ab")
    assert gromov_product(a, ab, (), free2) == 1
    segment = geodesic((), ab, free2)
    assert segment.vertices == ((), (0,), (0, 2))
    assert segment.length == 2
    assert thinness((), a, ab, free2) == 0


def test_distance_matrix_matches_word_metric(free2):
    points = ball(free2, 2).order
    matrix = distance_matrix(points, free2)
    for i in range(0, len(points), 3):
        for j in range(0, len(points), 5):
            assert matrix[i, j] == free2.distance(points[i], points[j])


@given(free_words, free_words, free_words)
@hsettings(max_examples=80, deadline=None)
def test_gromov_product_bounds(x, y, o):
    value = gromov_product(x, y, o, FREE2)
    assert value == gromov_product(y, x, o, FREE2)
    assert HalfInt(0) <= value
    assert value <= min(FREE2.distance(x, o), FREE2.distance(y, o))


def _products_against_geodesics(group, radius, bases):
    points = ball(group, radius).order
    for x in points:
        for y in points:
            segment = geodesic(x, y, group)
            for o in bases:
                yield float(gromov_product(x, y, o, group)), point_to_segment(o, segment, group)


@pytest.mark.parametrize("radius, all_bases", [(2, True), (3, False), (4, False),
                                               pytest.param(5, False, marks=pytest.mark.slow)])
def test_gromov_product_is_the_distance_to_a_geodesic_on_the_tree(free2, radius, all_bases):
    bases = ball(free2, radius).order if all_bases else [()]
    # delta = 0 closes the band d(o, gamma) - 2 delta <= (x, y)_o <= d(o, gamma)
    for product, d in _products_against_geodesics(free2, radius, bases):
        assert product == d


def test_gromov_product_never_exceeds_the_distance_to_a_geodesic():
    plane = build_group("lattice:2")
    for product, d in _products_against_geodesics(plane, 2, ball(plane, 2).order):
        assert product <= d


@given(free_words, free_words, free_words, free_words)
@hsettings(max_examples=80, deadline=None)
def test_tree_gromov_products_are_ultrametric(x, y, z, o):
    products = [gromov_product(x, y, o, FREE2), gromov_product(x, z, o, FREE2), gromov_product(y, z, o, FREE2)]
    assert products[0] >= min(products[1:])


def test_interior_gromov_products_obey_the_ball_delta():
    plane = build_group("lattice:2")
    delta = estimate_delta(plane, 3, exhaustive=True).delta
    assert delta > 0
    interior = ball(plane, 2).order
    for o, x, y, z in itertools.product(interior, repeat=4):
        xy, xz, yz = (float(gromov_product(p, q, o, plane)) for p, q in ((x, y), (x, z), (y, z)))
        assert xy >= min(xz, yz) - 2 * delta


# ========== HYPERBOLICITY ==========


def test_free_group_is_a_tree(free2):
    estimate = estimate_delta(free2, 3, exhaustive=True)
    assert estimate.value == 0
    assert estimate.sample_count == 0
    assert estimate_delta(free2, 2, method=DeltaMethod.THIN_TRIANGLE).value == 0


def test_sampled_delta_is_reproducible(free2):
    first = estimate_delta(free2, 3, exhaustive=False, sample_count=5_000, seed=3, workers=1)
    second = estimate_delta(free2, 3, exhaustive=False, sample_count=5_000, seed=3, workers=1)
    assert first == second
    assert first.sample_count == 5_000


@pytest.mark.parametrize("name, radius", [("free:2", 2), ("lattice:2", 2), ("fpc:2,3", 2)])
def test_four_point_delta_is_bounded_by_thin_triangles(name, radius):
    group = build_group(name)
    four_point = estimate_delta(group, radius, exhaustive=True)
    thin = estimate_delta(group, radius, method=DeltaMethod.THIN_TRIANGLE, exhaustive=True, workers=1)
    assert four_point.delta <= 3 * thin.delta + 1


def test_plane_square_certifies_delta_four():
    plane = build_group("lattice:2")
    o, x, y, z = (plane.word(w) for w in ("e", "a^4", "a^4b^4", "b^4"))
    assert gromov_product(x, z, o, plane) == 0
    assert gromov_product(x, y, o, plane) == 4 == gromov_product(y, z, o, plane)
    twice, witness = four_point_twice(distance_matrix([o, x, y, z], plane), np.array([[0, 1, 2, 3]]))
    assert twice == 8
    assert list(witness) == [0, 1, 2, 3]


@pytest.mark.parametrize("method", [DeltaMethod.FOUR_POINT, DeltaMethod.THIN_TRIANGLE])
def test_exhaustive_delta_budget(free2, monkeypatch, method):
    monkeypatch.setattr(settings, "delta_quadruple_budget", 10)
    with pytest.raises(BudgetExceeded):
        estimate_delta(free2, 2, method=method, exhaustive=True, workers=1)


@pytest.mark.slow
def test_free_group_delta_at_radius_five(free2):
    assert estimate_delta(free2, 5, exhaustive=True).value == 0


@pytest.mark.slow
def test_plane_delta_grows():
    plane = build_group("lattice:2")
    values = [estimate_delta(plane, r, exhaustive=True).delta for r in (4, 6, 8)]
    assert values == sorted(values)
    assert values[-1] >= 4
