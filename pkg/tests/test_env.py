import math
from random import Random

import pytest

from siggame.env import (
    RewardMatrix,
    enumerate_reward_functions,
    explicit_reward,
    make_permutation_reward,
    sample_reward_function,
    sample_state,
)


def test_identity_permutation_puts_reward_on_diagonal():
    m = make_permutation_reward(2, 2, (0, 1))
    assert m.cells == ((1.0, -1.0), (-1.0, 1.0))


def test_swap_permutation_puts_reward_on_antidiagonal():
    m = make_permutation_reward(2, 2, (1, 0))
    assert m.cells == ((-1.0, 1.0), (1.0, -1.0))


def test_three_state_rotation_has_one_positive_cell_per_row():
    m = make_permutation_reward(3, 3, (1, 2, 0))
    for s, row in enumerate(m.cells):
        assert sum(1 for v in row if v > 0) == 1
        assert row[(s + 1) % 3] == 1.0


@pytest.mark.parametrize(
    "args",
    [
        (2, 2, (0, 0)),  # not a bijection
        (2, 3, (0, 1)),  # non-square
    ],
)
def test_permutation_construction_rejects_bad_shapes(args):
    with pytest.raises(ValueError):
        make_permutation_reward(*args)


def test_permutation_construction_rejects_bad_signs():
    with pytest.raises(ValueError):
        make_permutation_reward(2, 2, (0, 1), pos=0.0)
    with pytest.raises(ValueError):
        make_permutation_reward(2, 2, (0, 1), neg=0.5)


@pytest.mark.parametrize("n,count", [(1, 1), (2, 2), (3, 6)])
def test_enumeration_counts_match_factorial(n, count):
    family = enumerate_reward_functions(n, n)
    assert len(family) == math.factorial(n) == count


def test_enumerated_matrices_are_distinct_and_well_formed():
    family = enumerate_reward_functions(3, 3)
    assert len({m.cells for m in family}) == 6
    for m in family:
        assert m.violations() == []


def test_enumeration_rejects_mismatched_dimensions():
    with pytest.raises(ValueError):
        enumerate_reward_functions(2, 3)


def test_two_by_two_family_keeps_conventional_names():
    family = enumerate_reward_functions(2, 2)
    assert [m.tag for m in family] == ["R1", "R2"]
    assert family[0].positive_action(0) == 0
    assert family[1].positive_action(0) == 1


def test_sampling_single_matrix_family_is_constant():
    family = enumerate_reward_functions(2, 2)[:1]
    rng = Random(0)
    assert all(sample_reward_function(rng, family) is family[0] for _ in range(50))


def test_sampling_two_by_two_family_is_balanced():
    family = enumerate_reward_functions(2, 2)
    rng = Random(42)
    draws = [sample_reward_function(rng, family).tag for _ in range(10000)]
    assert abs(draws.count("R1") / 10000 - 0.5) < 0.02


def test_sampling_three_by_three_family_is_uniform():
    family = enumerate_reward_functions(3, 3)
    rng = Random(7)
    counts = {m.tag: 0 for m in family}
    for _ in range(6000):
        counts[sample_reward_function(rng, family).tag] += 1
    # expected 1000 per matrix; +-100 is ~3.5 sigma for a binomial(6000, 1/6)
    assert all(900 <= c <= 1100 for c in counts.values()), counts


def test_sampling_rejects_empty_family():
    with pytest.raises(ValueError):
        sample_reward_function(Random(0), [])


def test_sample_state_is_uniform():
    rng = Random(3)
    counts = [0, 0]
    for _ in range(10000):
        counts[sample_state(rng, 2)] += 1
    assert abs(counts[0] / 10000 - 0.5) < 0.02


def test_sample_state_three_values():
    rng = Random(9)
    counts = [0, 0, 0]
    for _ in range(30000):
        counts[sample_state(rng, 3)] += 1
    for c in counts:
        assert abs(c / 30000 - 1 / 3) < 0.02


def test_sample_state_single_state_and_bad_count():
    assert sample_state(Random(0), 1) == 0
    with pytest.raises(ValueError):
        sample_state(Random(0), 0)


def test_reward_lookup_is_pure_table_access():
    r1 = make_permutation_reward(2, 2, (0, 1))
    assert r1.reward(0, 0) == 1.0
    assert r1.reward(0, 1) == -1.0
    assert all(r1.reward(0, 0) == 1.0 for _ in range(10))
    asym = explicit_reward(((1, -1), (-3, 1)), "asym")
    assert asym.reward(1, 0) == -3.0


def test_explicit_reward_enforces_row_shape():
    with pytest.raises(ValueError):
        explicit_reward(((1, 1), (-1, 1)), "two-positives")
    with pytest.raises(ValueError):
        explicit_reward(((1, 0), (-1, 1)), "zero-cell")
