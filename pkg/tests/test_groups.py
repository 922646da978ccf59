import pytest
from hypothesis import given, settings as hsettings, strategies as st

from fatou_lab.core.constants import NOT_WITHIN_LIMIT
from fatou_lab.core.exceptions import SmallCancellationViolation, UnknownGenerator
from fatou_lab.groups import FreeProductCyclic, Lattice, SmallCancellationGroup, build_group

FREE2 = build_group("free:2")
FPC23 = build_group("fpc:2,3")
SURFACE = build_group("surface:2")


def letters_of(group, max_size=12):
    return st.lists(st.integers(min_value=0, max_value=len(group.symbols) - 1), max_size=max_size)


# ========== WORDS ==========


def test_parse_and_format(free2):
    assert free2.parse_word("a^3") == (0, 0, 0)
    assert free2.parse_word("a^-2") == (1, 1)
    assert free2.parse_word("e") == ()
    assert free2.parse_word("a b' a'") == (0, 3, 1)
    assert free2.format_word(free2.word("a b b'")) == "a"
    assert free2.format_word(()) == "e"


def test_unknown_generator(free2):
    with pytest.raises(UnknownGenerator):
        free2.word("z")
    with pytest.raises(UnknownGenerator):
        free2.normalize((7,))


def test_free_neighbors_of_a(free2):
    a = free2.word("a")
    assert free2.neighbors(a) == {free2.word(w) for w in ("aa", "e", "ab", "ab'")}


def test_free_distance(free2):
    assert free2.distance(free2.word("a'"), free2.word("ab")) == 3
    assert free2.distance((), free2.word("ab"), limit=1) == NOT_WITHIN_LIMIT


def test_free_product_involutions():
    g = build_group("fpc:2,2,2")
    assert isinstance(g, FreeProductCyclic)
    assert len(g.neighbors(())) == 3
    assert g.word("a a") == ()


def test_free_product_syllables_take_the_short_side():
    assert FPC23.word("b b") == FPC23.word("b'")
    assert FPC23.word("b b b") == ()
    assert len(FPC23.word("a b b a")) == 3


def test_negative_controls_have_no_boundary():
    assert build_group("fpc:2,2").elementary
    assert build_group("lattice:1").elementary
    plane = build_group("lattice:2")
    assert isinstance(plane, Lattice)
    assert plane.non_hyperbolic and not plane.has_boundary
    assert plane.word("a b a'") == plane.word("b")
    assert FREE2.has_boundary and FPC23.has_boundary and SURFACE.has_boundary


# ========== SMALL CANCELLATION ==========


def test_surface_relator_is_trivial():
    assert isinstance(SURFACE, SmallCancellationGroup)
    assert SURFACE.is_identity(SURFACE.parse_word("a b a' b' c d c' d'"))
    assert not SURFACE.is_identity(SURFACE.parse_word("a b a' b'"))
    assert SURFACE.word("a b a' b'") == SURFACE.word("d c d' c'")
    assert len(SURFACE.neighbors(())) == 8


def test_surface_canonical_words_are_geodesic():
    # five letters of the relator are three letters the other way round
    x = SURFACE.word("a b a' b' c")
    assert len(x) == 3
    assert SURFACE.word("d c d' c'") != ()


def test_torus_is_not_small_cancellation():
    with pytest.raises(SmallCancellationViolation):
        build_group("sc:a,b|a b a' b'")


# ========== PROPERTIES ==========


@pytest.mark.parametrize("group", [FREE2, FPC23, build_group("lattice:2")], ids=lambda g: g.name)
@given(data=st.data())
@hsettings(max_examples=60, deadline=None)
def test_normal_form_is_idempotent(group, data):
    raw = tuple(data.draw(letters_of(group)))
    x = group.normalize(raw)
    assert group.normalize(x) == x
    assert group.multiply(x, group.inverse(x)) == ()
    assert len(x) <= len(raw)


@given(letters_of(FREE2, 8), letters_of(FREE2, 8), letters_of(FREE2, 8))
@hsettings(max_examples=60, deadline=None)
def test_free_multiplication_is_associative(u, v, w):
    x, y, z = FREE2.normalize(u), FREE2.normalize(v), FREE2.normalize(w)
    assert FREE2.multiply(FREE2.multiply(x, y), z) == FREE2.multiply(x, FREE2.multiply(y, z))


@given(letters_of(SURFACE, 5), letters_of(SURFACE, 5))
@hsettings(max_examples=30, deadline=None)
def test_surface_distance_is_symmetric(u, v):
    x, y = SURFACE.normalize(u), SURFACE.normalize(v)
    assert SURFACE.distance(x, y) == SURFACE.distance(y, x)
    assert SURFACE.distance(x, x) == 0
