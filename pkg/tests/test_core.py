import pytest
from hypothesis import given, strategies as st
from pydantic import ValidationError

from fatou_lab.core.exceptions import ConfigurationError
from fatou_lab.core.numbers import HalfInt
from fatou_lab.core.parallel import chunk_ranges, parallel_map
from fatou_lab.core.schemas import (
    Contingency,
    ExperimentConfig,
    GroupKind,
    GroupSpec,
    StepKind,
    StepSpec,
)

halves = st.integers(min_value=-1000, max_value=1000).map(HalfInt)


# ========== HALF INTEGERS ==========


def test_halfint_coercion():
    assert HalfInt.of(2) == 2
    assert HalfInt.of("5/2").twice == 5
    assert HalfInt.of("2.5") == HalfInt(5)
    assert HalfInt.of(1.5) == HalfInt(3)
    with pytest.raises(ValueError):
        HalfInt.of(0.3)
    with pytest.raises(ValueError):
        HalfInt.of("5/3")


def test_halfint_rounding_and_text():
    assert HalfInt(5).ceil() == 3
    assert HalfInt(5).floor() == 2
    assert HalfInt(-5).ceil() == -2
    assert str(HalfInt(5)) == "2.5"
    assert str(HalfInt(4)) == "2"
    assert float(HalfInt(-3)) == -1.5


@given(halves, halves)
def test_halfint_arithmetic_matches_floats(a, b):
    assert float(a + b) == float(a) + float(b)
    assert float(a - b) == float(a) - float(b)
    assert (a < b) == (float(a) < float(b))
    assert a - b + b == a


@given(halves, st.integers(min_value=-50, max_value=50))
def test_halfint_int_mixing(a, k):
    assert float(a + k) == float(a) + k
    assert float(k - a) == k - float(a)
    assert float(a * k) == float(a) * k


@given(halves)
def test_halfint_hash_agrees_with_equality(a):
    assert hash(a) == hash(float(a))
    if a.twice % 2 == 0:
        assert a == a.twice // 2
        assert hash(a) == hash(a.twice // 2)
        assert {a.twice // 2: "x"}[a] == "x"


# ========== SCHEMAS ==========


def test_group_spec_shorthand():
    assert GroupSpec.parse("free:2").kind == GroupKind.FREE
    assert GroupSpec.parse("fpc:2,3").orders == (2, 3)
    assert GroupSpec.parse("lattice:2").dimension == 2
    surface = GroupSpec.parse("surface:2")
    assert surface.kind == GroupKind.SMALL_CANCELLATION
    assert surface.generators == ("a", "b", "c", "d")
    assert surface.relators == ("a b a' b' c d c' d'",)
    assert GroupSpec.parse("sc:a,b|a b a' b'").label == "sc:a,b|a b a' b'"


@pytest.mark.parametrize("text", ["free:1", "fpc:2", "lattice:0", "torus:2", "free:x"])
def test_group_spec_rejects(text):
    with pytest.raises(ConfigurationError):
        GroupSpec.parse(text)


def test_step_spec_shorthand():
    assert StepSpec.parse("srw").kind == StepKind.SRW
    lazy = StepSpec.parse("lazy:1/3")
    assert lazy.kind == StepKind.LAZY and lazy.label == "lazy:1/3"
    explicit = StepSpec.parse("a:1/2,a':1/2")
    assert explicit.weights == (("a", "1/2"), ("a'", "1/2"))
    with pytest.raises(ConfigurationError):
        StepSpec.parse("a,b")
    with pytest.raises(ValidationError):
        StepSpec.parse("lazy:3/2")


def test_config_hash_roundtrip():
    config = ExperimentConfig(group="free:2", step="lazy", operation="green",
                              params={"x": "a", "radius": 12}, seed=7)
    again = ExperimentConfig.model_validate_json(config.model_dump_json())
    assert again == config
    assert again.config_hash() == config.config_hash()
    assert config.budgets.ball_elements > 0


def test_config_hash_ignores_output_only():
    base = ExperimentConfig(group="free:2", operation="ball", seed=1)
    assert base.model_copy(update={"output": "elsewhere"}).config_hash() == base.config_hash()
    assert base.model_copy(update={"seed": 2}).config_hash() != base.config_hash()


def test_contingency_totals():
    a = Contingency(bounded_convergent=3, unbounded_not_convergent=1, censored=1)
    b = Contingency(bounded_convergent=1, unbounded_convergent=2, censored=1)
    pooled = a.add(b)
    assert pooled.bounded_convergent == 4
    assert pooled.total == 9
    assert pooled.censored_fraction == pytest.approx(2 / 9)


# ========== PARALLEL ==========


@given(st.integers(min_value=0, max_value=5000), st.integers(min_value=1, max_value=16))
def test_chunk_ranges_cover_in_order(n, workers):
    ranges = chunk_ranges(n, workers)
    covered = [i for a, b in ranges for i in range(a, b)]
    assert covered == list(range(n))


def _square(x):
    return x * x


def test_parallel_map_keeps_order():
    items = list(range(50))
    assert parallel_map(_square, items, 1) == [x * x for x in items]
    assert parallel_map(_square, items, 2) == [x * x for x in items]
