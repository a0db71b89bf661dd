import math
from random import Random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from siggame.agent import Agent, STALENESS_LIMIT, sample_index, softmax_with_epsilon

E = math.e


def make_agent(agent_id=0, num_states=2, num_actions=2):
    return Agent(agent_id, num_states, num_actions)


# -- softmax ----------------------------------------------------------------


def test_softmax_equal_values_splits_evenly():
    assert softmax_with_epsilon([0.0, 0.0], 0.2) == pytest.approx([0.5, 0.5])
    assert softmax_with_epsilon([5.0, 5.0, 5.0], 0.0) == pytest.approx([1 / 3] * 3)


def test_softmax_matches_direct_formula():
    # softmax([1, 0, 0]) = [e, 1, 1] / (e + 2), then 0.7 * p + 0.3 / 3
    sm0 = E / (E + 2)
    sm1 = 1 / (E + 2)
    expected = [0.7 * sm0 + 0.1, 0.7 * sm1 + 0.1, 0.7 * sm1 + 0.1]
    got = softmax_with_epsilon([1.0, 0.0, 0.0], 0.3)
    assert got == pytest.approx(expected, abs=1e-12)
    assert got[0] == pytest.approx(0.5033, abs=1e-4)
    assert got[1] == pytest.approx(0.2483, abs=1e-4)


def test_softmax_rejects_empty_and_bad_epsilon():
    with pytest.raises(ValueError):
        softmax_with_epsilon([], 0.1)
    with pytest.raises(ValueError):
        softmax_with_epsilon([1.0], 1.5)


@given(
    st.lists(st.floats(min_value=-1e5, max_value=1e5), min_size=1, max_size=8),
    st.floats(min_value=0.0, max_value=1.0),
)
def test_softmax_is_a_distribution(values, epsilon):
    probs = softmax_with_epsilon(values, epsilon)
    assert abs(sum(probs) - 1.0) < 1e-9
    assert all(0.0 <= p <= 1.0 for p in probs)


@given(
    st.lists(st.floats(min_value=-1e5, max_value=1e5), min_size=1, max_size=8),
    st.floats(min_value=0.0, max_value=1.0),
    st.floats(min_value=-1e5, max_value=1e5),
)
def test_softmax_is_shift_invariant(values, epsilon, shift):
    base = softmax_with_epsilon(values, epsilon)
    shifted = softmax_with_epsilon([v + shift for v in values], epsilon)
    assert base == pytest.approx(shifted, abs=1e-9)


def test_saturated_softmax_picks_argmax_almost_surely():
    probs = softmax_with_epsilon([50.0, 0.0], 0.0)
    rng = Random(1234)
    hits = sum(1 for _ in range(10000) if sample_index(rng, probs) == 0)
    assert hits >= 9990


# -- candidate selection ----------------------------------------------------


def test_candidates_require_strict_dominance():
    agent = make_agent()
    agent.sender_table = {(0, 0): [3.0, 1.0], (0, 1): [-1.0, -1.0]}
    agent.last_used = {(0, 0): 0, (0, 1): 0}
    assert agent.candidate_signals(0) == [(0, 0)]  # the tied signal is excluded


def test_candidates_empty_for_naive_agent():
    assert make_agent().candidate_signals(0) == []


def test_candidates_exclude_signal_favouring_other_state():
    agent = make_agent()
    agent.sender_table = {(0, 0): [2.0, 5.0]}
    agent.last_used = {(0, 0): 0}
    assert agent.candidate_signals(0) == []
    assert agent.candidate_signals(1) == [(0, 0)]


def test_received_signal_becomes_sendable_when_nothing_else_fits():
    agent = make_agent(agent_id=1)
    agent.receiver_table = {(0, 5): [1.0, 0.0]}
    agent.last_used = {(0, 5): 0}
    assert agent.candidate_signals(0) == [(0, 5)]
    assert agent.candidate_signals(1) == [(0, 5)]
    # once a stored signal strictly fits the state, the fallback disappears
    agent.sender_table = {(1, 0): [2.0, 0.0]}
    agent.last_used[(1, 0)] = 0
    assert agent.candidate_signals(0) == [(1, 0)]
    assert agent.candidate_signals(1) == [(0, 5)]


def test_candidates_come_in_canonical_order():
    agent = make_agent()
    agent.sender_table = {(2, 0): [4.0, 0.0], (0, 1): [3.0, 0.0], (0, 0): [1.0, 0.0]}
    agent.last_used = {c: 0 for c in agent.sender_table}
    assert agent.candidate_signals(0) == [(0, 0), (0, 1), (2, 0)]


# -- signal selection -------------------------------------------------------


def test_naive_agent_mints_its_first_signal():
    agent = make_agent(agent_id=3)
    signal, minted = agent.select_signal(0, 0.2, Random(0))
    assert minted and signal == (3, 0)
    assert agent.sender_table[signal] == [0.0, 0.0]
    assert signal in agent.last_used
    signal2, minted2 = agent.select_signal(1, 0.2, Random(0))
    assert minted2 and signal2 == (3, 1)


def test_single_candidate_is_always_selected():
    agent = make_agent()
    agent.sender_table = {(0, 0): [5.0, 0.0]}
    agent.last_used = {(0, 0): 0}
    rng = Random(2)
    for _ in range(200):
        signal, minted = agent.select_signal(0, 0.0, rng)
        assert signal == (0, 0) and not minted


def test_selection_frequency_tracks_softmax_weights():
    rng = Random(99)
    agent = make_agent()
    agent.sender_table = {(0, 0): [10.0, 0.0], (0, 1): [0.0, -1.0]}
    agent.last_used = {(0, 0): 0, (0, 1): 0}
    hits = 0
    for _ in range(10000):
        signal, _ = agent.select_signal(0, 0.0, rng)
        if signal == (0, 0):
            hits += 1
    # softmax([10, 0]) gives the stronger signal with p ~ 0.99995
    assert hits >= 9990


def test_adopted_signal_gets_a_sender_row_on_selection():
    agent = make_agent(agent_id=1)
    agent.receiver_table = {(0, 7): [1.0, 0.0]}
    agent.last_used = {(0, 7): 0}
    signal, minted = agent.select_signal(1, 0.0, Random(4))
    assert signal == (0, 7) and not minted
    assert agent.sender_table[signal] == [0.0, 0.0]


# -- action selection -------------------------------------------------------


def test_unknown_signal_gets_uniform_response():
    agent = make_agent()
    rng = Random(5)
    counts = [0, 0]
    for i in range(10000):
        counts[agent.select_action((9, i), 0.0, rng)] += 1
    assert abs(counts[0] / 10000 - 0.5) < 0.02


def test_unknown_signal_is_inserted_with_zero_vector():
    agent = make_agent()
    agent.select_action((9, 9), 0.0, Random(0))
    assert (9, 9) in agent.receiver_table
    assert (9, 9) in agent.last_used


def test_saturated_receiver_always_picks_argmax():
    agent = make_agent()
    agent.receiver_table = {(0, 0): [100.0, 0.0]}
    agent.last_used = {(0, 0): 0}
    rng = Random(6)
    assert all(agent.select_action((0, 0), 0.0, rng) == 0 for _ in range(200))


def test_equal_utilities_give_uniform_actions():
    agent = make_agent(num_actions=3)
    agent.receiver_table = {(0, 0): [1.0, 1.0, 1.0]}
    agent.last_used = {(0, 0): 0}
    rng = Random(7)
    counts = [0, 0, 0]
    for _ in range(9000):
        counts[agent.select_action((0, 0), 0.2, rng)] += 1
    for c in counts:
        assert abs(c / 9000 - 1 / 3) < 0.025


# -- learning updates -------------------------------------------------------


def test_sender_update_is_additive():
    agent = make_agent()
    agent.sender_table = {(0, 0): [2.0, 0.0]}
    agent.update_sender((0, 0), 0, -1.0)
    assert agent.sender_table[(0, 0)] == [1.0, 0.0]
    agent.update_sender((0, 0), 0, 1.0)
    assert agent.sender_table[(0, 0)] == [2.0, 0.0]


def test_repeated_updates_accumulate():
    agent = make_agent()
    agent.sender_table = {(0, 0): [0.0, 0.0]}
    agent.receiver_table = {(0, 0): [0.0, 0.0]}
    for _ in range(10):
        agent.update_sender((0, 0), 0, 1.0)
        agent.update_receiver((0, 0), 1, 1.0)
    assert agent.sender_table[(0, 0)] == [10.0, 0.0]
    assert agent.receiver_table[(0, 0)] == [0.0, 10.0]


def test_update_touches_exactly_one_cell():
    agent = make_agent(num_states=3, num_actions=3)
    agent.sender_table = {(0, 0): [1.0, 2.0, 3.0]}
    before = list(agent.sender_table[(0, 0)])
    agent.update_sender((0, 0), 1, -1.0)
    after = agent.sender_table[(0, 0)]
    assert [i for i in range(3) if before[i] != after[i]] == [1]


# -- forgetting -------------------------------------------------------------


def test_stale_signal_is_purged_after_twenty_unused_episodes():
    agent = make_agent()
    stale, live = (0, 0), (0, 1)
    agent.sender_table = {stale: [1.0, 0.0], live: [0.0, 1.0]}
    agent.last_used = {stale: 0, live: 0}
    purged = set()
    for _ in range(STALENESS_LIMIT):
        purged |= agent.note_participation(live)
    assert not purged  # staleness exactly 20 is still tolerated
    purged = agent.note_participation(live)
    assert purged == {stale}
    assert stale not in agent.sender_table and stale not in agent.last_used


def test_signal_used_every_episode_is_never_purged():
    agent = make_agent()
    agent.sender_table = {(0, 0): [1.0, 0.0]}
    agent.last_used = {(0, 0): 0}
    for _ in range(100):
        assert agent.note_participation((0, 0)) == set()
    assert agent.vocabulary() == {(0, 0)}


def test_purge_removes_from_both_tables():
    agent = make_agent()
    agent.sender_table = {(0, 0): [1.0, 0.0]}
    agent.receiver_table = {(0, 0): [0.0, 1.0], (9, 9): [0.0, 0.0]}
    agent.last_used = {(0, 0): 0, (9, 9): 0}
    for _ in range(STALENESS_LIMIT + 1):
        agent.note_participation((9, 9))
    assert agent.vocabulary() == {(9, 9)}
    assert (0, 0) not in agent.last_used


@given(st.lists(st.integers(min_value=0, max_value=3), min_size=1, max_size=120))
@settings(max_examples=50)
def test_no_stored_signal_ever_exceeds_staleness_limit(uses):
    agent = make_agent()
    for serial in range(4):
        agent.sender_table[(0, serial)] = [0.0, 0.0]
        agent.last_used[(0, serial)] = 0
    for pick in uses:
        agent.note_participation((0, pick))
        now = agent.participation_count
        assert all(now - last <= STALENESS_LIMIT for last in agent.last_used.values())


# -- interpretations --------------------------------------------------------


def test_interpretations_take_unique_argmax():
    agent = make_agent()
    agent.sender_table = {(0, 0): [4.0, 1.0], (0, 1): [2.0, 2.0]}
    agent.receiver_table = {(0, 0): [0.0, 7.0]}
    assert agent.sender_interpretation((0, 0)) == 0
    assert agent.sender_interpretation((0, 1)) is None  # tie
    assert agent.sender_interpretation((9, 9)) is None  # unknown
    assert agent.receiver_interpretation((0, 0)) == 1


def test_intended_action_mirrors_receiver_interpretation():
    agent = make_agent()
    agent.receiver_table = {(0, 0): [0.0, 7.0], (0, 1): [3.0, 3.0]}
    assert agent.intended_action((0, 0)) == 1
    assert agent.intended_action((0, 1)) is None
    assert agent.intended_action((5, 5)) is None


def test_vocabulary_is_union_of_both_tables():
    agent = make_agent()
    assert agent.vocabulary() == set()
    agent.sender_table = {(0, 0): [0.0, 0.0]}
    agent.receiver_table = {(0, 0): [0.0, 0.0], (1, 0): [0.0, 0.0]}
    assert agent.vocabulary() == {(0, 0), (1, 0)}
