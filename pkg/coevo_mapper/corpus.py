"""
Corpus operations

Restrict records to the analysis window, drop known false positives, tag
records by topic, rank funders/organizations/venues under name aliases, and
read/write the canonical record dump.

Records are PublicationItem / AwardItem objects. Operations return new lists
(and copies of items they change); inputs are never modified.
"""

import logging
import re
from collections import Counter
from datetime import date
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import pandas as pd

from coevo_mapper.items import (
    Address,
    AwardItem,
    ExclusionList,
    PublicationItem,
    TopicQuery,
    fill_defaults,
    is_award,
    record_keywords,
    record_year,
)

logger = logging.getLogger(__name__)

ENTITY_SELECTORS = ("funder", "organization", "venue")


# =============================================================================
# Window and exclusions
# =============================================================================

def in_window(item, window_start_year, window_end_year):
    """Publications by year; awards when [start_date, end_date] meets the window."""
    if is_award(item):
        return (
            item["start_date"] <= date(window_end_year, 12, 31)
            and item["end_date"] >= date(window_start_year, 1, 1)
        )
    return window_start_year <= item["year"] <= window_end_year


def filter_window(records, window_start_year, window_end_year):
    if window_start_year > window_end_year:
        raise ValueError(f"window start {window_start_year} after end {window_end_year}")
    kept = [r for r in records if in_window(r, window_start_year, window_end_year)]
    logger.debug(f"Window {window_start_year}-{window_end_year}: kept {len(kept)} of {len(records)}")
    return kept


def apply_exclusions(records, exclusion_list: ExclusionList) -> Tuple[list, int]:
    """Drop excluded ids. Returns the kept records and the number removed."""
    excluded = exclusion_list.excluded_ids
    kept = [r for r in records if r["id"] not in excluded]
    removed = len(records) - len(kept)
    if removed:
        logger.info(f"Removed {removed} excluded records")
    return kept, removed


# =============================================================================
# Topic tagging
# =============================================================================

def normalize_phrase(value):
    return " ".join(value.casefold().split())


class TopicMatcher:
    """Compiled form of one TopicQuery."""

    def __init__(self, query: TopicQuery):
        self.query = query
        self.keyword_terms = frozenset(normalize_phrase(t) for t in query.terms)
        # whole-word match; inner whitespace of compound terms may vary
        alternatives = [r"\s+".join(re.escape(w) for w in t.split()) for t in query.terms]
        self.pattern = re.compile(
            r"(?<!\w)(?:" + "|".join(alternatives) + r")(?!\w)", re.IGNORECASE
        )

    def matches(self, item):
        fields = self.query.fields_searched
        if "keywords" in fields:
            if any(normalize_phrase(k) in self.keyword_terms for k in record_keywords(item)):
                return True
        for text_field in ("title", "abstract"):
            if text_field in fields and self.pattern.search(item.get(text_field) or ""):
                return True
        return False


def topic_labels(item, matchers: Sequence[TopicMatcher]):
    return frozenset(m.query.label for m in matchers if m.matches(item))


def topic_tag(records, queries: Sequence[TopicQuery]):
    """Return copies of the records with `topics` set from the queries."""
    labels = [q.label for q in queries]
    if len(set(labels)) != len(labels):
        raise ValueError(f"topic queries must have distinct labels: {labels}")
    matchers = [TopicMatcher(q) for q in queries]
    tagged = []
    for item in records:
        copy = item.copy()
        copy["topics"] = topic_labels(item, matchers)
        tagged.append(copy)
    return tagged


def records_with_topic(records, label):
    return [r for r in records if label in r.get("topics", ())]


# =============================================================================
# Entity ranking
# =============================================================================

def _entity_names(item, selector):
    if selector == "venue":
        return [item.get("venue")] if not is_award(item) else []
    if selector == "funder":
        return list(item.get("funders", [])) if not is_award(item) else []
    if selector == "organization":
        if is_award(item):
            return [item.get("organization")]
        return [a.organization for a in item.get("addresses", [])]
    raise ValueError(f"unknown entity selector '{selector}', expected one of {ENTITY_SELECTORS}")


def rank_entities(records, selector, alias_map: Optional[Mapping[str, str]] = None, top_n=10):
    """
    Count records per canonical entity name.

    Each record counts once per distinct canonical name. Ties are broken by
    name ascending.
    """
    if top_n < 1:
        raise ValueError("top_n must be at least 1")
    alias_map = alias_map or {}
    counts = Counter()
    for item in records:
        names = {alias_map.get(n, n) for n in _entity_names(item, selector) if n}
        counts.update(names)
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    return ranked[:top_n]


# =============================================================================
# Summaries
# =============================================================================

def annual_summary(publications, awards, window_start_year, window_end_year) -> pd.DataFrame:
    """Per-year publications, citations, awards (by start year) and awarded dollars."""
    years = list(range(window_start_year, window_end_year + 1))
    papers = Counter(p["year"] for p in publications)
    citations = Counter()
    for p in publications:
        citations[p["year"]] += p.get("times_cited", 0)
    grants = Counter(record_year(a) for a in awards)
    dollars = Counter()
    for a in awards:
        dollars[record_year(a)] += a.get("amount", 0)
    return pd.DataFrame(
        {
            "year": years,
            "publications": [papers[y] for y in years],
            "citations": [citations[y] for y in years],
            "awards": [grants[y] for y in years],
            "award_amount": [dollars[y] for y in years],
        }
    )


def topic_statistics(publications, awards, labels) -> pd.DataFrame:
    rows = []
    for label in labels:
        pubs = records_with_topic(publications, label)
        grants = records_with_topic(awards, label)
        rows.append(
            {
                "topic": label,
                "publications": len(pubs),
                "awards": len(grants),
                "unique_authors": len({a for p in pubs for a in p.get("authors", [])}),
                "unique_publication_keywords": len(
                    {normalize_phrase(k) for p in pubs for k in p.get("author_keywords", [])}
                ),
                "unique_investigators": len({i for a in grants for i in a.get("investigators", [])}),
                "unique_award_keywords": len(
                    {normalize_phrase(k) for a in grants for k in a.get("keywords", [])}
                ),
                "award_amount": sum(a.get("amount", 0) for a in grants),
            }
        )
    return pd.DataFrame(rows)


def top_cited(publications, label=None, n=5):
    """The `n` most cited publications, ties broken by id."""
    pool = records_with_topic(publications, label) if label else list(publications)
    return sorted(pool, key=lambda p: (-p.get("times_cited", 0), p["id"]))[:n]


# =============================================================================
# Canonical record dump
# =============================================================================

PUBLICATION_COLUMNS = [
    "id", "year", "title", "abstract", "venue", "authors", "addresses",
    "author_keywords", "funders", "times_cited", "cited_ids", "topics",
]
AWARD_COLUMNS = [
    "id", "title", "abstract", "start_date", "end_date", "amount",
    "investigators", "organization", "keywords", "topics",
]
LIST_FIELDS = {"authors", "author_keywords", "funders", "cited_ids", "investigators", "keywords"}


ESCAPE = "\\"
ADDRESS_SEPARATOR = ";"


def join_escaped(values, sep):
    """Join `values` with `sep`; a backslash escapes `sep` and itself inside a value."""
    return sep.join(str(v).replace(ESCAPE, ESCAPE * 2).replace(sep, ESCAPE + sep) for v in values)


def split_escaped(value, sep) -> List[str]:
    """Inverse of join_escaped. Keeps empty parts."""
    parts, current, escaped = [], [], False
    for char in value:
        if escaped:
            current.append(char)
            escaped = False
        elif char == ESCAPE:
            escaped = True
        elif char == sep:
            parts.append("".join(current))
            current = []
        else:
            current.append(char)
    if escaped:
        raise ValueError(f"dangling escape in {value!r}")
    parts.append("".join(current))
    return parts


def _encode_address(address: Address):
    return join_escaped(
        [address.author, address.organization, address.city, address.region,
         address.country, address.year],
        ADDRESS_SEPARATOR,
    )


def _decode_address(value):
    fields = split_escaped(value, ADDRESS_SEPARATOR)
    if len(fields) != 6:
        raise ValueError(f"address needs 6 fields, got {len(fields)}: {value!r}")
    author, organization, city, region, country, year = fields
    return Address(author, organization, city, region, country, int(year))


def _split(value, sep):
    return [v for v in split_escaped(value, sep) if v] if value else []


def records_frame(records, kind="publication", sep="|") -> pd.DataFrame:
    columns = AWARD_COLUMNS if kind == "award" else PUBLICATION_COLUMNS
    rows = []
    for item in records:
        row = {}
        for column in columns:
            value = item.get(column)
            if column in LIST_FIELDS:
                value = join_escaped(value or [], sep)
            elif column == "addresses":
                value = join_escaped([_encode_address(a) for a in value or []], sep)
            elif column == "topics":
                value = join_escaped(sorted(value or []), sep)
            elif isinstance(value, date):
                value = value.isoformat()
            row[column] = value
        rows.append(row)
    return pd.DataFrame(rows, columns=columns)


def write_records(records, path, kind="publication", delimiter="\t", sep="|"):
    """Write the canonical dump: one row per record, lists joined by `sep` (backslash-escaped)."""
    frame = records_frame(records, kind, sep)
    frame.to_csv(path, sep=delimiter, index=False, lineterminator="\n")
    logger.info(f"Wrote {len(frame)} {kind} records to {path}")


def read_records(path, kind="publication", delimiter="\t", sep="|"):
    frame = pd.read_csv(Path(path), sep=delimiter, dtype=str, keep_default_na=False)
    records = []
    for row in frame.to_dict("records"):
        item = AwardItem() if kind == "award" else PublicationItem()
        for column, value in row.items():
            if column in LIST_FIELDS:
                item[column] = _split(value, sep)
            elif column == "addresses":
                item[column] = [_decode_address(v) for v in _split(value, sep)]
            elif column == "topics":
                item[column] = frozenset(_split(value, sep))
            elif column in ("year", "times_cited", "amount"):
                item[column] = int(value)
            elif column in ("start_date", "end_date"):
                item[column] = date.fromisoformat(value)
            else:
                item[column] = value
        records.append(fill_defaults(item))
    return records
