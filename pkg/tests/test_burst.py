import itertools
import math
import random
from datetime import date

import pytest

from coevo_mapper.burst import (
    CO_BURST,
    FUNDING,
    PUBLICATION,
    Burst,
    BurstParams,
    EventStream,
    build_event_stream,
    candidate_terms,
    cost_matrix,
    detect_bursts,
    detect_term_bursts,
    find_cobursts,
    layout_burst_bars,
    mark_cobursts,
    multiplicity_counts,
    optimal_states,
    state_cost,
    summarize_and_rank,
    transition_matrix,
)
from coevo_mapper.exceptions import NoBurstSignal


def stream(d, r, start=2001, term="t"):
    return EventStream(term, tuple(range(start, start + len(d))), tuple(d), tuple(r))


def exhaustive(events, params):
    """Total cost of every state sequence."""
    levels = params.num_burst_states + 1
    n = len(events.years)
    slices = params.n_slices or n
    step = params.gamma * math.log(slices) if slices > 1 else 0.0
    costs = {}
    for path in itertools.product(range(levels), repeat=n):
        total, previous = 0.0, 0
        for state, r, d in zip(path, events.r, events.d):
            total += max(0, state - previous) * step + state_cost(state, r, d, events.p0, params.s)
            previous = state
        costs[path] = total
    return costs


def brute_force(events, params):
    """Cheapest state sequence; the lexicographically smallest one on exact ties."""
    costs = exhaustive(events, params)
    best = min(costs, key=lambda path: (costs[path], path))
    return costs[best], best


def bursts_from_path(events, path, params):
    """(start year, end year, weight) of each run of raised states, empty years trimmed."""
    def cost(level, t):
        return state_cost(level, events.r[t], events.d[t], events.p0, params.s)

    runs, t = [], 0
    while t < len(path):
        if path[t] == 0:
            t += 1
            continue
        start = t
        while t < len(path) and path[t] > 0:
            t += 1
        runs.append((start, t - 1))

    found = []
    for start, end in runs:
        while start <= end and events.d[start] == 0:
            start += 1
        while end >= start and events.d[end] == 0:
            end -= 1
        if end - start + 1 < params.min_burst_length:
            continue
        weight = sum(cost(0, t) - cost(path[t], t) for t in range(start, end + 1))
        if weight > 0:
            found.append((events.years[start], events.years[end], weight))
    return found


def random_stream(rng, n, zero_years=False):
    while True:
        d = [rng.randint(0 if zero_years else 1, 30) for _ in range(n)]
        r = [rng.randint(0, x) for x in d]
        if 0 < sum(r) < sum(d):
            return stream(d, r)


# =============================================================================
# Costs
# =============================================================================

def test_state_cost_formula():
    expected = -(8 * math.log(0.08) + 92 * math.log(0.92))
    assert state_cost(0, 8, 100, 0.08, 2.0) == pytest.approx(expected, rel=1e-12)
    assert state_cost(0, 8, 100, 0.08, 2.0) == pytest.approx(27.877, abs=1e-3)


def test_state_cost_boundaries():
    p1 = 0.2
    assert state_cost(1, 10, 10, 0.1, 2.0) == pytest.approx(-10 * math.log(p1))
    assert state_cost(1, 0, 10, 0.1, 2.0) == pytest.approx(-10 * math.log(1 - p1))
    assert state_cost(1, 0, 0, 0.1, 2.0) == 0.0


def test_state_probability_is_clamped():
    assert math.isfinite(state_cost(3, 5, 10, 0.5, 2.0))


def test_zero_base_rate_is_no_signal():
    with pytest.raises(NoBurstSignal):
        state_cost(0, 0, 10, 0.0, 2.0)


def test_transition_costs_only_going_up():
    tau = transition_matrix(3, 20, 1.0)
    assert tau[0, 1] == pytest.approx(math.log(20))
    assert tau[0, 2] == pytest.approx(2 * math.log(20))
    assert tau[2, 0] == 0.0
    assert tau[1, 1] == 0.0


# =============================================================================
# Detection
# =============================================================================

def test_single_spike():
    events = stream([100] * 5, [5, 5, 20, 5, 5])

    bursts = detect_bursts(events)

    assert [(b.start_year, b.end_year) for b in bursts] == [(2003, 2003)]
    expected_weight = state_cost(0, 20, 100, 0.08, 2.0) - state_cost(1, 20, 100, 0.08, 2.0)
    assert bursts[0].weight == pytest.approx(expected_weight)
    assert bursts[0].source == PUBLICATION

    _, path = brute_force(events, BurstParams())
    assert path == (0, 0, 1, 0, 0)


def test_constant_rate_has_no_bursts():
    assert detect_bursts(stream([50] * 6, [5] * 6)) == []


def test_absent_or_saturated_term_has_no_bursts():
    assert detect_bursts(stream([10, 10, 10], [0, 0, 0])) == []
    assert detect_bursts(stream([10, 10, 10], [10, 10, 10])) == []


def test_empty_years_never_bound_a_burst():
    events = stream([0, 0, 0, 100, 100, 100, 100, 100], [0, 0, 0, 40, 40, 2, 2, 2])

    bursts = detect_bursts(events)

    assert bursts
    assert all(events.d[b.start_year - 2001] > 0 and events.d[b.end_year - 2001] > 0 for b in bursts)


def test_min_burst_length():
    events = stream([100] * 5, [5, 5, 20, 5, 5])
    assert detect_bursts(events, BurstParams(min_burst_length=2)) == []


@pytest.mark.parametrize("seed", range(200))
def test_detection_matches_exhaustive_search(seed):
    rng = random.Random(seed)
    events = random_stream(rng, rng.randint(1, 10), zero_years=seed % 2 == 1)
    params = BurstParams(gamma=rng.choice([0.5, 1.0, 2.0]), s=rng.choice([1.5, 2.0, 3.0]))

    costs = exhaustive(events, params)
    best = min(costs.values())
    cheapest = [bursts_from_path(events, path, params) for path, cost in costs.items() if cost - best <= 1e-9]

    _, dp_cost = optimal_states(cost_matrix(events, params), transition_matrix(2, len(events.years), params.gamma))
    assert dp_cost == pytest.approx(best, abs=1e-9)

    found = [(b.start_year, b.end_year, b.weight) for b in detect_bursts(events, params)]
    intervals = [f[:2] for f in found]
    expected = next((c for c in cheapest if [e[:2] for e in c] == intervals), cheapest[0])
    assert intervals == [e[:2] for e in expected]
    assert [f[2] for f in found] == pytest.approx([e[2] for e in expected], abs=1e-9)


@pytest.mark.parametrize("seed", range(20))
def test_multi_state_program_matches_exhaustive_search(seed):
    rng = random.Random(1000 + seed)
    events = random_stream(rng, rng.randint(2, 6))
    params = BurstParams(num_burst_states=2)

    costs = cost_matrix(events, params)
    path, dp_cost = optimal_states(costs, transition_matrix(3, len(events.years), params.gamma))
    oracle_cost, _ = brute_force(events, params)

    assert dp_cost == pytest.approx(oracle_cost, abs=1e-9)
    assert all(0 <= state <= 2 for state in path)


@pytest.mark.parametrize("seed", range(50))
def test_higher_gamma_never_adds_bursts_or_weight(seed):
    rng = random.Random(3000 + seed)
    events = random_stream(rng, 10)

    found = [detect_bursts(events, BurstParams(gamma=g)) for g in (0.25, 0.5, 1.0, 2.0, 4.0)]

    counts = [len(bursts) for bursts in found]
    weights = [sum(b.weight for b in bursts) for bursts in found]
    assert counts == sorted(counts, reverse=True)
    for lower, higher in zip(weights, weights[1:]):
        assert higher <= lower + 1e-9


def test_higher_gamma_can_bridge_a_gap():
    events = stream([100] * 5, [2, 30, 22, 30, 2])

    low = detect_bursts(events, BurstParams(gamma=1.0))
    high = detect_bursts(events, BurstParams(gamma=3.0))

    assert [(b.start_year, b.end_year) for b in low] == [(2002, 2002), (2004, 2004)]
    assert [(b.start_year, b.end_year) for b in high] == [(2002, 2004)]
    assert high[0].weight < sum(b.weight for b in low)


def test_detection_is_deterministic():
    events = random_stream(random.Random(5), 12)
    assert detect_bursts(events) == detect_bursts(events)


def test_scaling_counts_keeps_base_rate():
    events = stream([10, 20, 30], [1, 5, 3])
    scaled = stream([3 * d for d in events.d], [3 * r for r in events.r])
    assert scaled.p0 == pytest.approx(events.p0)


@pytest.mark.parametrize("k", [2, 5])
@pytest.mark.parametrize("seed", range(30))
def test_scaling_counts_with_gamma_keeps_the_state_path(seed, k):
    rng = random.Random(4000 + seed)
    events = random_stream(rng, rng.randint(2, 10))
    scaled = stream([k * d for d in events.d], [k * r for r in events.r])
    params, scaled_params = BurstParams(), BurstParams(gamma=k * BurstParams().gamma)
    n = len(events.years)

    path, cost = optimal_states(cost_matrix(events, params), transition_matrix(2, n, params.gamma))
    scaled_path, scaled_cost = optimal_states(
        cost_matrix(scaled, scaled_params), transition_matrix(2, n, scaled_params.gamma)
    )

    assert scaled.p0 == events.p0
    assert scaled_path == path
    assert scaled_cost == pytest.approx(k * cost)
    bursts, scaled_bursts = detect_bursts(events, params), detect_bursts(scaled, scaled_params)
    assert [(b.start_year, b.end_year) for b in scaled_bursts] == [(b.start_year, b.end_year) for b in bursts]
    assert [b.weight for b in scaled_bursts] == pytest.approx([k * b.weight for b in bursts])


@pytest.mark.parametrize("kwargs", [
    {"gamma": 0}, {"s": 1.0}, {"num_burst_states": 0}, {"min_burst_length": 0}, {"n_slices": 0},
])
def test_invalid_params(kwargs):
    with pytest.raises(ValueError):
        BurstParams(**kwargs)


def test_invalid_streams():
    with pytest.raises(ValueError):
        stream([1, 2], [2, 1])
    with pytest.raises(ValueError):
        EventStream("t", (2000, 2002), (1, 1), (0, 0))
    with pytest.raises(ValueError):
        stream([0, 0], [0, 0])


# =============================================================================
# Streams from records
# =============================================================================

def test_event_stream_counts(publication):
    records = [
        publication("1", 2010, author_keywords=["big data"]),
        publication("2", 2010, author_keywords=["robotics"]),
        publication("3", 2010),
        publication("4", 2012, author_keywords=["big data"]),
    ]

    events = build_event_stream(records, "big data", (2009, 2012))

    assert events.years == (2009, 2010, 2011, 2012)
    assert events.d == (0, 3, 0, 1)
    assert events.r == (0, 1, 0, 1)
    assert build_event_stream(records, "absent", (2009, 2012)).r == (0, 0, 0, 0)


def test_event_stream_for_late_starting_topic(publication):
    records = [publication(str(y), y, author_keywords=["rfid"]) for y in range(2006, 2018)]

    events = build_event_stream(records, "rfid", (1998, 2017))

    assert events.d[:8] == (0,) * 8
    assert events.d[8:] == (1,) * 12


def test_event_stream_for_awards_uses_start_year(award):
    records = [award("1", date(2010, 9, 1), date(2014, 8, 31), keywords=["cps"])]

    assert build_event_stream(records, "cps", (2009, 2011)).r == (0, 1, 0)


def test_term_bursts_over_records(publication):
    records = []
    for year in range(2000, 2010):
        for i in range(20):
            keywords = ["slam"] if (2004 <= year <= 2005 and i < 12) or i == 0 else ["other"]
            records.append(publication(f"{year}-{i}", year, author_keywords=keywords))

    assert candidate_terms(records, min_records=2) == ["other", "slam"]
    bursts = detect_term_bursts(records, ["slam", "other"], (2000, 2009), workers=2)

    assert [(b.term, b.start_year, b.end_year) for b in bursts if b.term == "slam"] == [("slam", 2004, 2005)]


# =============================================================================
# Summaries and bars
# =============================================================================

def burst(term, start, end, weight, source=PUBLICATION):
    return Burst(term, start, end, weight, source=source)


def test_weights_are_summed_before_ranking():
    bursts = [burst("a", 2000, 2001, 3), burst("a", 2005, 2006, 4), burst("b", 2003, 2003, 6)]

    ranked = summarize_and_rank(bursts, top_n=2)

    assert [(s.term, s.total_weight) for s in ranked] == [("a", 7), ("b", 6)]
    assert [b.weight for b in ranked[0].bursts] == [3, 4]


def test_top_n():
    bursts = [burst(t, 2000, 2000, w) for t, w in zip("abcde", [1, 5, 3, 5, 2])]

    assert [s.term for s in summarize_and_rank(bursts, top_n=1)] == ["b"]
    assert [s.term for s in summarize_and_rank(bursts)] == ["b", "d", "c", "e", "a"]
    with pytest.raises(ValueError):
        summarize_and_rank(bursts, top_n=0)


def test_cobursts():
    funding = summarize_and_rank([burst("Machine Learning", 2014, 2017, 5, FUNDING),
                                  burst("cps", 1999, 2001, 2, FUNDING)])
    publication = summarize_and_rank([burst("machine learning", 2015, 2017, 4),
                                      burst("cps", 2010, 2012, 3),
                                      burst("slam", 2004, 2006, 1)])

    cobursts = find_cobursts(funding, publication)

    assert cobursts == {"machine learning"}
    marked = mark_cobursts(funding + publication, cobursts)
    assert {(s.term, s.source) for s in marked if s.co_burst} == {
        ("Machine Learning", FUNDING), ("machine learning", PUBLICATION),
    }


def test_bar_heights_spread_weight_over_years():
    summaries = summarize_and_rank([
        burst("big data", 2014, 2017, 12),
        burst("rfid", 2010, 2010, 5),
        burst("cps", 2010, 2011, 4),
        burst("cps", 2012, 2012, 6),
    ])

    bars = layout_burst_bars(summaries)

    assert [(b.term, b.start_year, b.height) for b in bars] == [
        ("cps", 2010, 2.0), ("cps", 2012, 6.0), ("rfid", 2010, 5.0), ("big data", 2014, 3.0),
    ]
    assert all(b.color_class == PUBLICATION for b in bars)
    assert bars[3].area == pytest.approx(12)


def test_coburst_bars_are_grey():
    summaries = mark_cobursts(summarize_and_rank([burst("big data", 2014, 2017, 12)]), {"big data"})
    assert layout_burst_bars(summaries)[0].color_class == CO_BURST


def test_multiplicity():
    bursts = [burst("cps", y, y, 1) for y in (2000, 2003, 2006)] + [burst("slam", 2001, 2001, 1)]
    assert multiplicity_counts(bursts) == {1: 1, 3: 1}
