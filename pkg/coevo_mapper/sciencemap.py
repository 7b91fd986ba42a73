"""
Science map coding

A classification places subdisciplines on a 2-D base map and groups them into
disciplines. Publications are located through their venue (possibly split
across several subdisciplines), awards through keyword overlap. Anything that
cannot be located lands in the Unclassified bucket, which has no position.
"""

import logging
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Tuple

import pandas as pd

from coevo_mapper.exceptions import ClassificationError
from coevo_mapper.items import is_award, record_key, record_keywords, record_year
from coevo_mapper.parsers.tables import read_table

logger = logging.getLogger(__name__)

UNCLASSIFIED = "unclassified"
UNCLASSIFIED_NAME = "Unclassified"
MULTIDISCIPLINARY = "multidisciplinary"
MULTIDISCIPLINARY_NAME = "Multidisciplinary"
MULTIDISCIPLINARY_COLOR = "#555555"
UNCLASSIFIED_COLOR = "#bbbbbb"

FRACTION_TOLERANCE = 1e-6


def normalize_venue(name):
    return " ".join((name or "").upper().split())


@dataclass(frozen=True)
class Subdiscipline:
    id: str
    x: float
    y: float
    discipline: str


@dataclass(frozen=True)
class Discipline:
    id: str
    name: str
    color: str


@dataclass
class Classification:
    """Two-level classification; venue keys are normalized on construction."""

    venue_map: Dict[str, List[Tuple[str, float]]]
    subdisciplines: Dict[str, Subdiscipline]
    disciplines: Dict[str, Discipline]
    keyword_map: Dict[str, FrozenSet[str]] = field(default_factory=dict)

    def __post_init__(self):
        if UNCLASSIFIED not in self.disciplines:
            self.disciplines[UNCLASSIFIED] = Discipline(UNCLASSIFIED, UNCLASSIFIED_NAME, UNCLASSIFIED_COLOR)
        if self.multidisciplinary is None:
            self.disciplines[MULTIDISCIPLINARY] = Discipline(
                MULTIDISCIPLINARY, MULTIDISCIPLINARY_NAME, MULTIDISCIPLINARY_COLOR
            )
        for sub in self.subdisciplines.values():
            if sub.discipline not in self.disciplines:
                raise ClassificationError(
                    f"subdiscipline {sub.id} references unknown discipline {sub.discipline}"
                )
        venues = {}
        for venue, shares in self.venue_map.items():
            total = sum(f for _, f in shares)
            if abs(total - 1) > FRACTION_TOLERANCE:
                raise ClassificationError(f"fractions of venue '{venue}' sum to {total}, not 1")
            for sub_id, _ in shares:
                if sub_id not in self.subdisciplines:
                    raise ClassificationError(f"venue '{venue}' references unknown subdiscipline {sub_id}")
            venues[normalize_venue(venue)] = list(shares)
        self.venue_map = venues
        for sub_id in self.keyword_map:
            if sub_id not in self.subdisciplines:
                raise ClassificationError(f"keyword table references unknown subdiscipline {sub_id}")

    @property
    def multidisciplinary(self) -> Optional[str]:
        """Id of the discipline named Multidisciplinary, if the tables define one."""
        for d in self.disciplines.values():
            if d.name.casefold() == MULTIDISCIPLINARY_NAME.casefold():
                return d.id
        return None

    def bucket_order(self) -> List[Discipline]:
        """Disciplines by name, then Multidisciplinary, then Unclassified."""
        special = {self.multidisciplinary: 1, UNCLASSIFIED: 2}
        return sorted(self.disciplines.values(), key=lambda d: (special.get(d.id, 0), d.name))

    def discipline_of(self, sub_id):
        if sub_id == UNCLASSIFIED:
            return UNCLASSIFIED
        return self.subdisciplines[sub_id].discipline


@dataclass(frozen=True)
class ScienceLocation:
    record_id: str
    shares: Tuple[Tuple[str, float], ...]

    @property
    def unclassified(self):
        return self.shares == ((UNCLASSIFIED, 1.0),)


@dataclass(frozen=True)
class OverlaySymbol:
    subdiscipline: str
    x: float
    y: float
    value: float
    radius: float


def load_classification(venue_path, subdiscipline_path, discipline_path, keyword_path=None,
                        delimiter="\t") -> Classification:
    """
    Load the classification tables:
        (venue, subd_id, fraction), (subd_id, x, y, discipline_id),
        (discipline_id, name, color) and optionally (subd_id, term).

    Raises:
        ClassificationError: fractions off by more than 1e-6, or dangling ids
    """
    disciplines = {
        row["discipline_id"]: Discipline(row["discipline_id"], row["name"], row["color"])
        for row in read_table(discipline_path, ["discipline_id", "name", "color"], delimiter).to_dict("records")
    }
    subdisciplines = {
        row["subd_id"]: Subdiscipline(row["subd_id"], float(row["x"]), float(row["y"]), row["discipline_id"])
        for row in read_table(subdiscipline_path, ["subd_id", "x", "y", "discipline_id"], delimiter).to_dict("records")
    }
    venue_map = defaultdict(list)
    for row in read_table(venue_path, ["venue", "subd_id", "fraction"], delimiter).to_dict("records"):
        venue_map[row["venue"]].append((row["subd_id"], float(row["fraction"])))

    keyword_map = {}
    if keyword_path:
        terms = defaultdict(set)
        for row in read_table(keyword_path, ["subd_id", "term"], delimiter).to_dict("records"):
            terms[row["subd_id"]].add(" ".join(row["term"].lower().split()))
        keyword_map = {k: frozenset(v) for k, v in terms.items()}

    classification = Classification(dict(venue_map), subdisciplines, disciplines, keyword_map)
    logger.info(
        f"Loaded classification: {len(classification.venue_map)} venues, "
        f"{len(subdisciplines)} subdisciplines, {len(classification.disciplines)} disciplines"
    )
    return classification


# =============================================================================
# Coding
# =============================================================================

def _unclassified(record_id):
    return ScienceLocation(record_id, ((UNCLASSIFIED, 1.0),))


def science_code_by_venue(publication, classification: Classification) -> ScienceLocation:
    shares = classification.venue_map.get(normalize_venue(publication.get("venue")))
    if not shares:
        return _unclassified(publication["id"])
    return ScienceLocation(publication["id"], tuple(shares))


def science_code_by_keywords(record, classification: Classification, normalize=None) -> ScienceLocation:
    """
    Score subdisciplines by shared terms; the best-scoring ones split the
    record equally. No shared term means Unclassified.
    """
    terms = record_keywords(record)
    if normalize is not None:
        terms = [normalize(t) for t in terms]
    terms = {" ".join(t.lower().split()) for t in terms}
    scores = {sub_id: len(terms & vocabulary) for sub_id, vocabulary in classification.keyword_map.items()}
    best = max(scores.values(), default=0)
    if best == 0:
        return _unclassified(record["id"])
    winners = sorted(sub_id for sub_id, score in scores.items() if score == best)
    share = 1.0 / len(winners)
    return ScienceLocation(record["id"], tuple((sub_id, share) for sub_id in winners))


def code_records(records, classification: Classification,
                 normalize=None) -> Dict[Tuple[str, str], ScienceLocation]:
    """Venue coding for publications, keyword coding for awards; keyed by record_key."""
    locations = {}
    for item in records:
        if is_award(item):
            locations[record_key(item)] = science_code_by_keywords(item, classification, normalize)
        else:
            locations[record_key(item)] = science_code_by_venue(item, classification)
    missed = sum(1 for loc in locations.values() if loc.unclassified)
    logger.info(f"Science-coded {len(locations)} records, {missed} unclassified")
    return locations


# =============================================================================
# Aggregation
# =============================================================================

def parse_slice(value) -> Tuple[int, int]:
    """"1998:2007" -> (1998, 2007)"""
    if isinstance(value, (tuple, list)):
        start, end = value
    else:
        start, end = str(value).split(":")
    start, end = int(start), int(end)
    if start > end:
        raise ValueError(f"year slice {start}:{end} is reversed")
    return start, end


def _locations_for(records, classification, locations, normalize):
    if locations is None:
        locations = code_records(records, classification, normalize)
    return [(item, locations[record_key(item)]) for item in records]


def aggregate_overlay(records, classification: Classification, year_slice, radius_scale=4.0,
                      locations: Optional[Mapping[Tuple[str, str], ScienceLocation]] = None,
                      normalize=None) -> List[OverlaySymbol]:
    """
    Proportional symbols for the records of one year slice.

    value is the summed fraction per subdiscipline, radius = scale * sqrt(value).
    Unclassified has no position and is left out.
    """
    start, end = parse_slice(year_slice)
    in_slice = [r for r in records if start <= record_year(r) <= end]
    totals = defaultdict(float)
    for _, location in _locations_for(in_slice, classification, locations, normalize):
        for sub_id, fraction in location.shares:
            totals[sub_id] += fraction

    symbols = []
    for sub_id in sorted(totals):
        value = totals[sub_id]
        if sub_id == UNCLASSIFIED or value <= 0:
            continue
        sub = classification.subdisciplines[sub_id]
        symbols.append(OverlaySymbol(sub_id, sub.x, sub.y, value, radius_scale * value ** 0.5))
    return symbols


def discipline_table(records, classification: Classification,
                     locations: Optional[Mapping[Tuple[str, str], ScienceLocation]] = None,
                     normalize=None) -> pd.DataFrame:
    """Fractional papers and citations per discipline, every discipline listed."""
    papers = defaultdict(float)
    citations = defaultdict(float)
    for item, location in _locations_for(records, classification, locations, normalize):
        cited = item.get("times_cited", 0) or 0
        for sub_id, fraction in location.shares:
            discipline = classification.discipline_of(sub_id)
            papers[discipline] += fraction
            citations[discipline] += fraction * cited

    rows = [
        {
            "discipline_id": d.id,
            "name": d.name,
            "color": d.color,
            "papers": papers[d.id],
            "citations": citations[d.id],
        }
        for d in classification.bucket_order()
    ]
    return pd.DataFrame(rows, columns=["discipline_id", "name", "color", "papers", "citations"])


def discipline_histogram(records, classification: Classification, metric="papers",
                         locations: Optional[Mapping[Tuple[str, str], ScienceLocation]] = None,
                         normalize=None) -> Dict[str, float]:
    """discipline name -> fractional papers or citations."""
    if metric not in ("papers", "citations"):
        raise ValueError(f"unknown metric '{metric}', expected papers or citations")
    table = discipline_table(records, classification, locations, normalize)
    return dict(zip(table["name"], table[metric]))


def overlay_frame(symbols: Iterable[OverlaySymbol]) -> pd.DataFrame:
    return pd.DataFrame(
        [(s.subdiscipline, s.x, s.y, s.value, s.radius) for s in symbols],
        columns=["subd_id", "x", "y", "value", "radius"],
    )


def overlay_from_frame(frame: pd.DataFrame) -> List[OverlaySymbol]:
    return [
        OverlaySymbol(str(row["subd_id"]), float(row["x"]), float(row["y"]), float(row["value"]), float(row["radius"]))
        for row in frame.to_dict("records")
    ]
