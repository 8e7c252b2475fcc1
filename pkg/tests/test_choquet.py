from itertools import permutations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from capacity_studio.capacity import Capacity, equidistributed, load_capacity
from capacity_studio.choquet import ascending_order, choquet, tail_masks
from capacity_studio.fixture_data import fixture_path
from capacity_studio.subsets import full_mask

from oracles import choquet_by_definition, random_capacity

CONCEPT_I = (0.84, 0.86, 0.85, 0.91, 1.0)


@pytest.fixture(scope="module")
def table5():
    return load_capacity(fixture_path("table5-capacity.json"))


def test_published_concept_value(table5):
    assert choquet(table5, CONCEPT_I) == pytest.approx(0.8954, abs=1e-4)


def test_additive_reduces_to_mean():
    cap = equidistributed(5)
    assert choquet(cap, (0.2, 0.4, 0.6, 0.8, 1.0)) == pytest.approx(0.6)


def test_boundary_capacities():
    n = 4
    maxcap = np.ones(1 << n)
    maxcap[0] = 0.0
    mincap = np.zeros(1 << n)
    mincap[full_mask(n)] = 1.0
    f = (0.3, 0.9, 0.1, 0.5)
    assert choquet(Capacity(n, maxcap), f) == pytest.approx(max(f))
    assert choquet(Capacity(n, mincap), f) == pytest.approx(min(f))


def test_dimension_mismatch():
    with pytest.raises(ValueError):
        choquet(equidistributed(3), (0.1, 0.2))


def test_ascending_order_breaks_ties_by_index():
    assert ascending_order((0.5, 0.2, 0.5, 0.1)) == (4, 2, 1, 3)
    assert ascending_order((0.7, 0.7)) == (1, 2)


def test_tail_masks_shrink():
    order = (2, 1, 3)
    masks = tail_masks(order, 3)
    assert masks == (0b111, 0b101, 0b100)


def test_matches_definition_oracle():
    rng = np.random.default_rng(3)
    for n in (2, 3, 4, 5):
        for _ in range(20):
            cap = random_capacity(rng, n)
            f = rng.uniform(0, 1, n)
            assert choquet(cap, f) == pytest.approx(
                choquet_by_definition(cap, f), abs=1e-12
            )


def test_tie_invariance_exhaustive():
    # Every ordering consistent with ascending values gives the same sum.
    rng = np.random.default_rng(5)
    cap = random_capacity(rng, 4)
    f = (0.4, 0.4, 0.2, 0.4)
    reference = choquet(cap, f)
    tied = [1, 2, 4]
    for perm in permutations(tied):
        order = (3,) + perm
        total = 0.0
        prev = 0.0
        for crit, mask in zip(order, tail_masks(order, 4)):
            total += (f[crit - 1] - prev) * cap.values[mask]
            prev = f[crit - 1]
        assert total == pytest.approx(reference, abs=1e-12)


scores = st.lists(
    st.floats(min_value=0.0, max_value=1.0, allow_nan=False), min_size=4, max_size=4
)


@settings(max_examples=60, deadline=None)
@given(scores, st.integers(min_value=0, max_value=2**31 - 1))
def test_bounds_property(f, seed):
    cap = random_capacity(np.random.default_rng(seed), 4)
    value = choquet(cap, f)
    assert min(f) - 1e-12 <= value <= max(f) + 1e-12


@settings(max_examples=40, deadline=None)
@given(
    st.floats(min_value=0.0, max_value=1.0, allow_nan=False),
    st.integers(min_value=0, max_value=2**31 - 1),
)
def test_idempotence_property(a, seed):
    cap = random_capacity(np.random.default_rng(seed), 3)
    assert choquet(cap, (a, a, a)) == pytest.approx(a, abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(scores, scores, st.integers(min_value=0, max_value=2**31 - 1))
def test_monotone_in_scores_property(f, g, seed):
    cap = random_capacity(np.random.default_rng(seed), 4)
    lo = [min(a, b) for a, b in zip(f, g)]
    hi = [max(a, b) for a, b in zip(f, g)]
    assert choquet(cap, lo) <= choquet(cap, hi) + 1e-12
