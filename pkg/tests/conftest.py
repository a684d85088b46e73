import random
from fractions import Fraction

import pytest
from hypothesis import strategies as st

from railyard.graph import RailYardSpec


def random_spec(rng: random.Random, min_cols: int = 2, max_cols: int = 4, max_num: int = 10) -> RailYardSpec:
    n = rng.randint(min_cols, max_cols)
    a = "".join(rng.choice("LR") for _ in range(n))
    b = "".join(rng.choice("+-") for _ in range(n))
    x = [Fraction(rng.randint(1, max_num), 30) for _ in range(n)]
    return RailYardSpec.from_words(a, b, x)


def spec_corpus(count: int = 50, seed: int = 2024) -> list[RailYardSpec]:
    rng = random.Random(seed)
    return [random_spec(rng) for _ in range(count)]


@st.composite
def small_specs(draw, max_cols: int = 4):
    n = draw(st.integers(2, max_cols))
    a = draw(st.lists(st.sampled_from("LR"), min_size=n, max_size=n))
    b = draw(st.lists(st.sampled_from("+-"), min_size=n, max_size=n))
    x = draw(st.lists(st.integers(1, 10).map(lambda k: Fraction(k, 30)), min_size=n, max_size=n))
    return RailYardSpec.from_words(a, b, x)


@pytest.fixture
def figure_spec() -> RailYardSpec:
    return RailYardSpec.from_json({"l": -2, "r": 1, "a": ["L", "R", "R", "L"], "b": ["+", "+", "-", "-"], "x": ["1/2", "1/3", "1/3", "1/2"]})
