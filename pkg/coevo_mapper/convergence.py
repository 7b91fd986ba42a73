"""
Topic convergence

- Overlaps between topics: records carrying several labels, and keywords
  shared by the topics' vocabularies.
- Inter-citation flows from one topic to another, per (citing year, cited year).
- Linear growth trend of yearly counts with a slope t-test.
"""

import logging
from collections import Counter
from dataclasses import dataclass, field
from itertools import combinations
from typing import Dict, Iterable, List, Mapping, Sequence, Set, Tuple

import numpy as np
import pandas as pd
from scipy import stats

from coevo_mapper.items import record_keywords, record_year

logger = logging.getLogger(__name__)

# Below this residual variance a fit counts as exact
EXACT_FIT_VARIANCE = 1e-12


@dataclass
class OverlapReport:
    totals: Dict[str, int] = field(default_factory=dict)
    record_overlaps: Dict[Tuple[str, ...], int] = field(default_factory=dict)
    keyword_totals: Dict[str, int] = field(default_factory=dict)
    keyword_overlaps: Dict[Tuple[str, ...], int] = field(default_factory=dict)

    def overlap(self, *labels):
        return self.record_overlaps[tuple(sorted(labels))]

    def keyword_overlap(self, *labels):
        return self.keyword_overlaps[tuple(sorted(labels))]

    def to_frame(self) -> pd.DataFrame:
        rows = [
            {
                "topics": "+".join(combo),
                "records": count,
                "keywords": self.keyword_overlaps.get(combo, 0),
            }
            for combo, count in self.record_overlaps.items()
        ]
        rows = [
            {"topics": label, "records": total, "keywords": self.keyword_totals.get(label, 0)}
            for label, total in self.totals.items()
        ] + rows
        return pd.DataFrame(rows, columns=["topics", "records", "keywords"])


@dataclass(frozen=True)
class CitationFlow:
    source_topic: str
    source_year: int
    target_topic: str
    target_year: int
    count: int

    def __post_init__(self):
        if self.target_year > self.source_year:
            raise ValueError(f"flow points forward in time: {self.source_year} -> {self.target_year}")


@dataclass
class FlowReport:
    flows: List[CitationFlow] = field(default_factory=list)
    unresolved: int = 0
    later_year: int = 0

    def __iter__(self):
        return iter(self.flows)

    def __len__(self):
        return len(self.flows)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            [(f.source_topic, f.source_year, f.target_topic, f.target_year, f.count) for f in self.flows],
            columns=["source_topic", "source_year", "target_topic", "target_year", "count"],
        )


@dataclass(frozen=True)
class TrendResult:
    slope: float
    p_value: float
    n_years: int
    intercept: float = 0.0


# =============================================================================
# Overlaps
# =============================================================================

def topic_keyword_sets(records, labels: Sequence[str], normalize=None) -> Dict[str, Set[str]]:
    """label -> normalized keywords of the records carrying that label."""
    sets = {label: set() for label in labels}
    for item in records:
        terms = record_keywords(item)
        if normalize is not None:
            terms = [normalize(t) for t in terms]
        terms = {" ".join(t.casefold().split()) for t in terms if t}
        for label in item.get("topics", ()):
            if label in sets:
                sets[label] |= terms
    return sets


def set_overlaps(records, keyword_sets: Mapping[str, Set[str]], labels: Sequence[str] = None) -> OverlapReport:
    """Overlaps for every combination of two or more labels."""
    labels = sorted(labels or keyword_sets)
    tagged = [frozenset(item.get("topics", ())) for item in records]

    report = OverlapReport()
    for label in labels:
        report.totals[label] = sum(1 for topics in tagged if label in topics)
        report.keyword_totals[label] = len(keyword_sets.get(label, ()))
    for size in range(2, len(labels) + 1):
        for combo in combinations(labels, size):
            wanted = set(combo)
            report.record_overlaps[combo] = sum(1 for topics in tagged if wanted <= topics)
            shared = set.intersection(*(set(keyword_sets.get(label, ())) for label in combo))
            report.keyword_overlaps[combo] = len(shared)
    return report


# =============================================================================
# Inter-citation
# =============================================================================

def intercitation_matrix(publications) -> FlowReport:
    """
    Count citations between differently-labelled papers per (citing year, cited year).

    A paper with several labels counts for each of them. References outside
    the corpus are ignored; references to later papers are dropped. Both are
    counted in the report.
    """
    by_id = {p["id"]: p for p in publications}
    counts = Counter()
    report = FlowReport()
    for citing in publications:
        for cited_id in sorted(set(citing.get("cited_ids", []))):
            cited = by_id.get(cited_id)
            if cited is None:
                report.unresolved += 1
                continue
            if cited["year"] > citing["year"]:
                report.later_year += 1
                logger.warning(
                    f"{citing['id']} ({citing['year']}) cites later paper {cited_id} ({cited['year']}), dropped"
                )
                continue
            for source in citing.get("topics", ()):
                for target in cited.get("topics", ()):
                    if source != target:
                        counts[(source, citing["year"], target, cited["year"])] += 1

    report.flows = [CitationFlow(*key, count) for key, count in sorted(counts.items())]
    logger.info(
        f"Inter-citation: {len(report.flows)} flows, {report.unresolved} unresolved, "
        f"{report.later_year} later-year references"
    )
    return report


# =============================================================================
# Trends
# =============================================================================

def annual_counts(records, label, window: Tuple[int, int]) -> List[Tuple[int, int]]:
    """(year, records with `label`) for every year of the window, empty years included."""
    start, end = window
    counts = Counter(record_year(r) for r in records if label is None or label in r.get("topics", ()))
    return [(year, counts[year]) for year in range(start, end + 1)]


def trend_test(counts) -> TrendResult:
    """
    OLS of count on year with a two-sided t-test on the slope.

    Args:
        counts: (year, count) pairs or a {year: count} mapping

    Raises:
        ValueError: fewer than 3 years
    """
    pairs = sorted(counts.items() if isinstance(counts, Mapping) else counts)
    if len(pairs) < 3:
        raise ValueError(f"trend test needs at least 3 years, got {len(pairs)}")
    years = np.array([y for y, _ in pairs], dtype=float)
    values = np.array([c for _, c in pairs], dtype=float)

    if np.all(values == values[0]):
        return TrendResult(0.0, 1.0, len(pairs), float(values[0]))

    fit = stats.linregress(years, values)
    residuals = values - (fit.intercept + fit.slope * years)
    residual_variance = float(residuals @ residuals) / (len(pairs) - 2)
    if residual_variance < EXACT_FIT_VARIANCE:
        p_value = 0.0 if fit.slope != 0 else 1.0
    else:
        p_value = float(min(max(fit.pvalue, 0.0), 1.0))
    return TrendResult(float(fit.slope), p_value, len(pairs), float(fit.intercept))
