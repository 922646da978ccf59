import io

import pytest

from fatou_lab.boundary import (
    BoundaryRay,
    BoundaryRegion,
    Shadow,
    TubeSpec,
    cylinder,
    frozen_ray,
    gromov_product_to_ray,
    in_tube,
    periodic_ray,
    ray_gromov_product,
    region_tube_verdict,
    shadow_contains,
    spike,
    translate_ray,
    tube_points,
)
from fatou_lab.core.exceptions import InvalidRay, NonHyperbolicWarning
from fatou_lab.core.schemas import TubeVerdict
from fatou_lab.groups import build_group

IN, OUT = TubeVerdict.IN, TubeVerdict.OUT


# ========== RAYS ==========


def test_periodic_ray_points(free2, theta_a):
    assert theta_a.point(0) == ()
    assert theta_a.point(3) == (0, 0, 0)
    mixed = periodic_ray(free2, "ab")
    assert [len(p) for p in mixed.prefix(5)] == list(range(6))
    assert mixed.point(3) == free2.word("aba")


def test_periodic_ray_must_be_geodesic():
    with pytest.raises(InvalidRay):
        periodic_ray(build_group("fpc:2,3"), "a")
    assert periodic_ray(build_group("fpc:2,3"), "ab").point(4) == build_group("fpc:2,3").word("abab")


def test_periodic_ray_on_plane_warns():
    with pytest.warns(NonHyperbolicWarning):
        periodic_ray(build_group("lattice:2"), "a")


def test_translate_ray(free2, theta_a):
    moved = translate_ray(theta_a, "b")
    assert moved.point(1) == free2.word("b")
    assert moved.point(3) == free2.word("baa")
    assert translate_ray(theta_a, "a'").point(4) == theta_a.point(4)
    assert translate_ray(theta_a, "e") is theta_a


def test_frozen_ray_continues_past_exit(free2):
    ray = frozen_ray(free2, free2.word("ab"))
    assert ray.point(2) == free2.word("ab")
    assert ray.point(4) == free2.word("abbb")


def test_ray_dict_roundtrip(free2, theta_a):
    ray = translate_ray(theta_a, "b")
    again = BoundaryRay.from_dict(free2, ray.to_dict())
    assert again.description == ray.description
    assert again.point(6) == ray.point(6)


# ========== SHADOWS ==========


def test_cylinder_membership(free2, theta_a, theta_b, cyl_a):
    assert cyl_a.contains(theta_a, free2)
    assert not cyl_a.contains(theta_b, free2)
    assert cyl_a.contains(free2.word("ab"), free2)
    assert not cyl_a.contains(free2.word("ba"), free2)
    assert gromov_product_to_ray(free2.word("ab"), theta_a) == 1


def test_full_and_empty_regions(free2, theta_b):
    assert BoundaryRegion.full().contains(theta_b, free2)
    assert BoundaryRegion.full().is_full
    assert not BoundaryRegion.empty().contains(theta_b, free2)
    assert BoundaryRegion.empty().label(free2) == "empty"


def test_tree_cylinders_form_an_antichain(free2):
    region = BoundaryRegion.of([cylinder("ab", free2), cylinder("a", free2), Shadow(base=free2.word("ba"), r=1)])
    assert region.tree_cylinders() == [free2.word("a"), free2.word("b")]


def test_uncertain_band_with_slack(free2, theta_a):
    s = Shadow(base=theta_a, r=2)
    assert s.label(free2) == "V[(a)^inf,2]"
    verdict = BoundaryRegion.of([s]).verdict(free2.word("aa"), free2, delta_hat=1)
    assert verdict == TubeVerdict.UNCERTAIN


# ========== TUBES ==========


def test_tube_on_a_tree_is_the_two_neighbourhood(free2, theta_a):
    tube = TubeSpec(theta_a, 2)
    points = tube_points(tube, 3)
    assert len(points.inside) == 11
    assert not points.uncertain
    assert in_tube(free2.word("ab"), tube) == IN
    assert in_tube(free2.word("abb"), tube) == OUT
    assert spike(points.inside, 2, free2) == {free2.word(w) for w in ("aaa", "aab", "aab'")}


def test_tube_of_radius_one_is_the_ray(free2, theta_a):
    points = tube_points(TubeSpec(theta_a, 1), 4)
    assert points.inside == set(theta_a.prefix(4))


def test_tube_csv(free2, theta_a):
    out = io.StringIO()
    tube_points(TubeSpec(theta_a, 1), 1).dump_csv(out, free2)
    assert out.getvalue().splitlines() == ["word,distance_to_o,verdict", "e,0,in", "a,1,in"]


def test_tube_radius_must_be_positive(theta_a):
    with pytest.raises(ValueError):
        TubeSpec(theta_a, 0)


@pytest.mark.parametrize("n", [1, 2, 5])
def test_region_tube_leaves_other_branches(free2, cyl_a, n):
    assert region_tube_verdict(free2.word(f"b^{n}"), cyl_a, 1, free2) == OUT


def test_region_tube_inside(free2, cyl_a):
    assert region_tube_verdict((), cyl_a, 1, free2) == IN
    assert region_tube_verdict(free2.word("ab"), cyl_a, 1, free2) == IN
    assert region_tube_verdict(free2.word("a'"), cyl_a, 1, free2) == OUT
    assert region_tube_verdict(free2.word("a'"), cyl_a, 2, free2) == IN
    assert region_tube_verdict(free2.word("b^4"), BoundaryRegion.full(), 1, free2) == IN


def test_gromov_product_of_two_rays(free2, theta_a, theta_b):
    assert ray_gromov_product(theta_a, periodic_ray(free2, "ab"), depth=20) == 1
    assert ray_gromov_product(theta_a, theta_b) == 0
    assert ray_gromov_product(theta_a, theta_a, depth=20) == 20


def test_shadow_contains_words_and_rays(free2, theta_a, theta_b):
    s = cylinder("a", free2)
    assert shadow_contains(s, free2.word("ab"), free2)
    assert not shadow_contains(s, free2.word("b"), free2)
    assert shadow_contains(s, theta_a, free2)
    assert not shadow_contains(s, theta_b, free2)
    assert shadow_contains(Shadow(base=(), r=0), theta_b, free2)
