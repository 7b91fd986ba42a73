"""
Burst detection

Two-state (or multi-state) automaton over yearly document batches:
- Each year t has d_t documents, r_t of them containing the term.
- State i emits the term with probability p_i = p0 * s**i, where p0 is the
  overall rate of the term.
- Moving up from state i to j costs (j - i) * gamma * ln(T); moving down is free.

The cheapest state sequence is found with a Viterbi pass; maximal runs of
non-base states become bursts, weighted by how much cheaper the burst states
are than the base state over the run.
"""

import logging
import math
from collections import Counter, defaultdict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Dict, Iterable, List, Optional, Sequence, Set, Tuple

import numpy as np

from coevo_mapper.exceptions import NoBurstSignal
from coevo_mapper.items import record_keywords, record_year

logger = logging.getLogger(__name__)

FUNDING = "funding"
PUBLICATION = "publication"
CO_BURST = "co_burst"
SOURCES = (FUNDING, PUBLICATION)

# Upper clamp for p_i, keeps ln(1 - p_i) finite
P_MAX = 1 - 1e-6


@dataclass(frozen=True)
class EventStream:
    term: str
    years: Tuple[int, ...]
    d: Tuple[int, ...]
    r: Tuple[int, ...]

    def __post_init__(self):
        if not (len(self.years) == len(self.d) == len(self.r)):
            raise ValueError(f"stream '{self.term}': years, d and r differ in length")
        if not self.years:
            raise ValueError(f"stream '{self.term}' is empty")
        if any(b - a != 1 for a, b in zip(self.years, self.years[1:])):
            raise ValueError(f"stream '{self.term}': years must increase by 1")
        for year, total, hits in zip(self.years, self.d, self.r):
            if not 0 <= hits <= total:
                raise ValueError(f"stream '{self.term}' year {year}: need 0 <= r <= d, got r={hits} d={total}")
        if sum(self.d) <= 0:
            raise ValueError(f"stream '{self.term}' has no documents")

    @property
    def p0(self):
        return sum(self.r) / sum(self.d)


@dataclass(frozen=True)
class BurstParams:
    """
    Args:
        gamma: transition cost multiplier
        s: density scaling between consecutive states
        num_burst_states: number of states above the base state
        min_burst_length: shortest run (in years) reported as a burst
        n_slices: T in the transition cost; defaults to the stream length
    """

    gamma: float = 1.0
    s: float = 2.0
    num_burst_states: int = 1
    min_burst_length: int = 1
    n_slices: Optional[int] = None

    def __post_init__(self):
        if self.gamma <= 0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")
        if self.s <= 1:
            raise ValueError(f"density scaling must exceed 1, got {self.s}")
        if self.num_burst_states < 1:
            raise ValueError(f"need at least one burst state, got {self.num_burst_states}")
        if self.min_burst_length < 1:
            raise ValueError(f"min burst length must be at least 1, got {self.min_burst_length}")
        if self.n_slices is not None and self.n_slices < 1:
            raise ValueError(f"n_slices must be at least 1, got {self.n_slices}")

    @classmethod
    def from_settings(cls, settings):
        return cls(
            gamma=settings.getfloat("BURST_GAMMA"),
            s=settings.getfloat("BURST_SCALING"),
            num_burst_states=settings.getint("BURST_STATES"),
            min_burst_length=settings.getint("BURST_MIN_LENGTH"),
        )


@dataclass(frozen=True)
class Burst:
    term: str
    start_year: int
    end_year: int
    weight: float
    state_level: int = 1
    source: str = PUBLICATION

    def __post_init__(self):
        if self.start_year > self.end_year:
            raise ValueError(f"burst of '{self.term}' starts after it ends")
        if self.source not in SOURCES:
            raise ValueError(f"unknown burst source '{self.source}'")

    @property
    def length(self):
        return self.end_year - self.start_year + 1

    def overlaps(self, other):
        return self.start_year <= other.end_year and other.start_year <= self.end_year


@dataclass
class BurstSummary:
    term: str
    source: str
    bursts: List[Burst] = field(default_factory=list)
    co_burst: bool = False

    @property
    def total_weight(self):
        return sum(b.weight for b in self.bursts)

    @property
    def first_start(self):
        return min(b.start_year for b in self.bursts)


@dataclass(frozen=True)
class BurstBar:
    term: str
    source: str
    start_year: int
    end_year: int
    height: float
    color_class: str

    @property
    def span(self):
        return self.end_year - self.start_year + 1

    @property
    def area(self):
        return self.height * self.span


# =============================================================================
# Streams
# =============================================================================

def build_event_stream(records, term, year_range: Tuple[int, int], normalize=None) -> EventStream:
    """
    Count records per year (d) and records whose term set contains `term` (r).

    Awards count in their start year. `normalize` maps a raw keyword to the
    form compared against `term` (e.g. a lexicon canonical map lookup).
    """
    start, end = year_range
    if start > end:
        raise ValueError(f"year range {start}-{end} is reversed")
    years = list(range(start, end + 1))
    totals = Counter()
    hits = Counter()
    for item in records:
        year = record_year(item)
        if year < start or year > end:
            continue
        totals[year] += 1
        terms = record_keywords(item)
        if normalize is not None:
            terms = [normalize(t) for t in terms]
        if term in terms:
            hits[year] += 1
    return EventStream(
        term,
        tuple(years),
        tuple(totals[y] for y in years),
        tuple(hits[y] for y in years),
    )


# =============================================================================
# Costs and the dynamic program
# =============================================================================

def state_probability(level, p0, s):
    return min(p0 * s ** level, P_MAX)


def state_cost(level, r, d, p0, s):
    """Negative log-likelihood of r hits among d documents in state `level`."""
    if p0 <= 0:
        raise NoBurstSignal(f"base rate {p0} gives no burst signal")
    if d == 0:
        return 0.0
    p = state_probability(level, p0, s)
    return -(r * math.log(p) + (d - r) * math.log(1 - p))


def cost_matrix(stream: EventStream, params: BurstParams) -> np.ndarray:
    """Per-year emission costs, shape (num_states, T)."""
    levels = params.num_burst_states + 1
    costs = np.zeros((levels, len(stream.years)))
    for t, (r, d) in enumerate(zip(stream.r, stream.d)):
        for level in range(levels):
            costs[level, t] = state_cost(level, r, d, stream.p0, params.s)
    return costs


def transition_matrix(levels, n_slices, gamma) -> np.ndarray:
    """tau[i, j]: cost of moving from state i to state j."""
    step = gamma * math.log(n_slices) if n_slices > 1 else 0.0
    i = np.arange(levels)[:, None]
    j = np.arange(levels)[None, :]
    return np.where(j > i, (j - i) * step, 0.0)


def optimal_states(costs: np.ndarray, tau: np.ndarray) -> Tuple[List[int], float]:
    """
    Viterbi over the cost matrix, starting from state 0.

    Equal-cost choices go to the lower state, so among optimal sequences the
    one with lower states (fewer bursts) is returned.
    """
    levels, n = costs.shape
    total = tau[0, :] + costs[:, 0]
    back = np.zeros((levels, n), dtype=int)
    for t in range(1, n):
        # candidates[i, j]: reach j at t from i at t-1
        candidates = total[:, None] + tau
        back[:, t] = np.argmin(candidates, axis=0)
        total = candidates[back[:, t], np.arange(levels)] + costs[:, t]

    state = int(np.argmin(total))
    best = float(total[state])
    path = [state]
    for t in range(n - 1, 0, -1):
        state = int(back[state, t])
        path.append(state)
    path.reverse()
    return path, best


def _runs(path):
    """Maximal (start, end) index runs with state >= 1."""
    runs = []
    start = None
    for t, state in enumerate(path):
        if state >= 1 and start is None:
            start = t
        elif state == 0 and start is not None:
            runs.append((start, t - 1))
            start = None
    if start is not None:
        runs.append((start, len(path) - 1))
    return runs


def detect_bursts(stream: EventStream, params: BurstParams = BurstParams(), source=PUBLICATION) -> List[Burst]:
    """
    Bursts of `stream.term`, in year order.

    A term that never occurs, or occurs in every document, yields no bursts.
    Empty years (d = 0) never start or end a burst.
    """
    p0 = stream.p0
    if p0 <= 0 or p0 >= 1:
        logger.debug(f"No burst signal for '{stream.term}' (p0={p0})")
        return []

    costs = cost_matrix(stream, params)
    tau = transition_matrix(costs.shape[0], params.n_slices or len(stream.years), params.gamma)
    path, _ = optimal_states(costs, tau)

    bursts = []
    for start, end in _runs(path):
        while start <= end and stream.d[start] == 0:
            start += 1
        while end >= start and stream.d[end] == 0:
            end -= 1
        if start > end or end - start + 1 < params.min_burst_length:
            continue
        weight = float(sum(costs[0, t] - costs[path[t], t] for t in range(start, end + 1)))
        if weight <= 0:
            continue
        bursts.append(
            Burst(
                term=stream.term,
                start_year=stream.years[start],
                end_year=stream.years[end],
                weight=weight,
                state_level=max(path[start:end + 1]),
                source=source,
            )
        )
    return bursts


def detect_term_bursts(records, terms: Iterable[str], window: Tuple[int, int], params: BurstParams = BurstParams(),
                       source=PUBLICATION, workers=4, normalize=None) -> List[Burst]:
    """Detect bursts of every term over one source, concurrently per term."""
    terms = sorted(set(terms))

    def run(term):
        return detect_bursts(build_event_stream(records, term, window, normalize), params, source)

    with ThreadPoolExecutor(max_workers=max(1, workers)) as executor:
        results = list(executor.map(run, terms))

    bursts = [b for found in results for b in found]
    bursts.sort(key=lambda b: (b.term, b.start_year))
    logger.info(f"{source}: {len(bursts)} bursts across {len({b.term for b in bursts})} of {len(terms)} terms")
    return bursts


def candidate_terms(records, min_records=2, normalize=None) -> List[str]:
    """Terms appearing in at least `min_records` records."""
    counts = Counter()
    for item in records:
        terms = record_keywords(item)
        if normalize is not None:
            terms = [normalize(t) for t in terms]
        counts.update(set(terms))
    return sorted(t for t, n in counts.items() if n >= min_records)


# =============================================================================
# Summaries, co-bursts, bars
# =============================================================================

def summarize_and_rank(bursts: Iterable[Burst], top_n: Optional[int] = None) -> List[BurstSummary]:
    """
    Sum weights per (term, source) and keep the `top_n` heaviest terms.

    Ties go to the term that sorts first. Each summary keeps its original bursts.
    """
    if top_n is not None and top_n < 1:
        raise ValueError("top_n must be at least 1")
    grouped: Dict[Tuple[str, str], List[Burst]] = defaultdict(list)
    for burst in bursts:
        grouped[(burst.term, burst.source)].append(burst)
    summaries = [
        BurstSummary(term, source, sorted(found, key=lambda b: b.start_year))
        for (term, source), found in grouped.items()
    ]
    summaries.sort(key=lambda s: (-s.total_weight, s.term, s.source))
    return summaries[:top_n] if top_n is not None else summaries


def find_cobursts(funding: Sequence[BurstSummary], publication: Sequence[BurstSummary]) -> Set[str]:
    """
    Terms with a funding burst and a publication burst whose years intersect.

    Terms are compared case-insensitively. Returns casefolded terms.
    """
    funding_by_term = defaultdict(list)
    for summary in funding:
        funding_by_term[summary.term.casefold()].extend(summary.bursts)

    cobursts = set()
    for summary in publication:
        key = summary.term.casefold()
        for burst in summary.bursts:
            if any(burst.overlaps(other) for other in funding_by_term.get(key, [])):
                cobursts.add(key)
                break
    return cobursts


def mark_cobursts(summaries: Iterable[BurstSummary], cobursts: Set[str]) -> List[BurstSummary]:
    return [replace(s, co_burst=s.term.casefold() in cobursts) for s in summaries]


def layout_burst_bars(summaries: Iterable[BurstSummary]) -> List[BurstBar]:
    """
    One bar per burst, its height spreading the weight evenly over the years.

    Rows are ordered by earliest burst start, then term.
    """
    bars = []
    for summary in sorted(summaries, key=lambda s: (s.first_start, s.term, s.source)):
        color = CO_BURST if summary.co_burst else summary.source
        for burst in summary.bursts:
            bars.append(
                BurstBar(
                    term=summary.term,
                    source=summary.source,
                    start_year=burst.start_year,
                    end_year=burst.end_year,
                    height=burst.weight / burst.length,
                    color_class=color,
                )
            )
    return bars


def multiplicity_counts(bursts: Iterable[Burst]) -> Dict[int, int]:
    """{k: number of terms bursting exactly k times}, per term and source."""
    per_term = Counter((b.term, b.source) for b in bursts)
    return dict(sorted(Counter(per_term.values()).items()))
