# Define here the models for ingested records
#
# See documentation in:
# https://docs.scrapy.org/en/latest/topics/items.html
# https://itemloaders.readthedocs.io/en/latest/processors.html

import re
from dataclasses import dataclass, field
from datetime import date, datetime
from typing import Dict, FrozenSet, Iterable, List, Optional, Tuple

import scrapy
from itemadapter import ItemAdapter
from itemloaders.processors import Identity, MapCompose, TakeFirst
from scrapy import Field
from scrapy.loader import ItemLoader

DEFAULT_AWARD_DATE_FORMAT = "%m/%d/%Y"
_GRANT_NUMBERS = re.compile(r"\[[^\]]*\]")


def clean_string(value):
    """Trim and collapse internal whitespace; blank strings become None."""
    if value is None:
        return None
    value = " ".join(str(value).split())
    return value or None


def split_semicolons(value):
    """Split a semicolon-separated field into its parts."""
    if value:
        return [part for part in value.split(";")]
    return []


def to_int(value):
    """Parse a non-negative integer field (PY, TC)."""
    number = int(value.strip())
    if number < 0:
        raise ValueError(f"negative value: {value}")
    return number


def parse_amount(value):
    """Parse a dollar amount such as "$43,000,000" into integer dollars."""
    cleaned = value.replace("$", "").replace(",", "").strip()
    if not cleaned:
        raise ValueError("empty amount")
    amount = int(round(float(cleaned)))
    if amount < 0:
        raise ValueError(f"negative amount: {value}")
    return amount


def parse_award_date(value, loader_context=None):
    """Parse an award date with the loader's `date_format` (MM/DD/YYYY unless set)."""
    if isinstance(value, date):
        return value
    date_format = (loader_context or {}).get("date_format") or DEFAULT_AWARD_DATE_FORMAT
    try:
        return datetime.strptime(value, date_format).date()
    except ValueError:
        raise ValueError(f"date {value!r} does not match {date_format}") from None


def strip_grant_numbers(value):
    """Remove bracketed grant numbers from a funding agency entry."""
    if value:
        return _GRANT_NUMBERS.sub("", value)
    return value


@dataclass(frozen=True)
class Address:
    """One author address as of the record's publication year."""

    author: str
    organization: str
    city: str
    region: str
    country: str
    year: int

    @property
    def is_us(self):
        return self.country.upper() in ("USA", "US", "UNITED STATES")


class PublicationItem(scrapy.Item):
    """
    One bibliographic record from a tagged flat-file export.

    Author name identity is the trimmed, whitespace-collapsed string; no
    disambiguation is attempted.
    """

    id = Field(
        input_processor=MapCompose(clean_string),
        output_processor=TakeFirst(),
    )
    year = Field(
        input_processor=MapCompose(clean_string, to_int),
        output_processor=TakeFirst(),
    )
    title = Field(
        input_processor=MapCompose(clean_string),
        output_processor=TakeFirst(),
        default=str,
    )
    abstract = Field(
        input_processor=MapCompose(clean_string),
        output_processor=TakeFirst(),
        default=str,
    )
    venue = Field(
        input_processor=MapCompose(clean_string),
        output_processor=TakeFirst(),
        default=str,
    )

    authors = Field(
        input_processor=MapCompose(clean_string),
        output_processor=Identity(),
        default=list,
    )
    addresses = Field(output_processor=Identity(), default=list)
    author_keywords = Field(
        input_processor=MapCompose(split_semicolons, clean_string),
        output_processor=Identity(),
        default=list,
    )
    funders = Field(
        input_processor=MapCompose(split_semicolons, strip_grant_numbers, clean_string),
        output_processor=Identity(),
        default=list,
    )

    times_cited = Field(
        input_processor=MapCompose(clean_string, to_int),
        output_processor=TakeFirst(),
        default=int,
    )
    cited_ids = Field(
        input_processor=MapCompose(clean_string),
        output_processor=Identity(),
        default=list,
    )

    # Populated by TopicTagPipeline
    topics = Field(default=frozenset)


class AwardItem(scrapy.Item):
    """One funding award row from an NSF award search export."""

    id = Field(
        input_processor=MapCompose(clean_string),
        output_processor=TakeFirst(),
    )
    title = Field(
        input_processor=MapCompose(clean_string),
        output_processor=TakeFirst(),
        default=str,
    )
    abstract = Field(
        input_processor=MapCompose(clean_string),
        output_processor=TakeFirst(),
        default=str,
    )
    start_date = Field(
        input_processor=MapCompose(clean_string, parse_award_date),
        output_processor=TakeFirst(),
    )
    end_date = Field(
        input_processor=MapCompose(clean_string, parse_award_date),
        output_processor=TakeFirst(),
    )
    amount = Field(
        input_processor=MapCompose(clean_string, parse_amount),
        output_processor=TakeFirst(),
        default=int,
    )
    investigators = Field(
        input_processor=MapCompose(clean_string),
        output_processor=Identity(),
        default=list,
    )
    organization = Field(
        input_processor=MapCompose(clean_string),
        output_processor=TakeFirst(),
        default=str,
    )

    # Populated by the keywords stage (MaxMatch over title and abstract)
    keywords = Field(output_processor=Identity(), default=list)
    topics = Field(default=frozenset)


class PublicationLoader(ItemLoader):
    default_item_class = PublicationItem
    default_output_processor = TakeFirst()


class AwardLoader(ItemLoader):
    default_item_class = AwardItem
    default_output_processor = TakeFirst()


def fill_defaults(item):
    """Set every unset field that declares a default factory."""
    adapter = ItemAdapter(item)
    for name in adapter.field_names():
        if name not in adapter:
            factory = adapter.get_field_meta(name).get("default")
            if factory is not None:
                adapter[name] = factory()
    return item


def is_award(item):
    return isinstance(item, AwardItem)


def record_key(item) -> Tuple[str, str]:
    """(kind, id); publication and award ids are separate namespaces."""
    return ("award" if is_award(item) else "publication"), item["id"]


def record_year(item):
    """Year a record is counted in: publication year, or award start year."""
    if is_award(item):
        return item["start_date"].year
    return item["year"]


def record_keywords(item):
    """Keyword list of a record (author keywords, or extracted award terms)."""
    if is_award(item):
        return item.get("keywords", [])
    return item.get("author_keywords", [])


@dataclass(frozen=True)
class TopicQuery:
    """A labelled topic query over whole terms."""

    label: str
    terms: Tuple[str, ...]
    fields_searched: Tuple[str, ...] = ("keywords",)

    def __post_init__(self):
        if not self.terms:
            raise ValueError(f"topic query '{self.label}' has no terms")
        unknown = set(self.fields_searched) - {"keywords", "title", "abstract"}
        if unknown:
            raise ValueError(f"unknown fields for topic '{self.label}': {sorted(unknown)}")


@dataclass
class ExclusionList:
    """Record ids known to be false positives, with the reason for each."""

    reasons: Dict[str, str] = field(default_factory=dict)

    @property
    def excluded_ids(self) -> FrozenSet[str]:
        return frozenset(self.reasons)

    @classmethod
    def from_ids(cls, ids: Iterable[str], reason: str = ""):
        return cls({record_id: reason for record_id in ids})


def topic_queries_from_mapping(mapping, fields_searched=("keywords",)) -> List[TopicQuery]:
    """Build TopicQuery objects from a {label: [terms]} setting."""
    queries = []
    for label, terms in mapping.items():
        if isinstance(terms, str):
            terms = [term for term in terms.split(",")]
        terms = tuple(t.strip() for t in terms if t and t.strip())
        queries.append(TopicQuery(label, terms, tuple(fields_searched)))
    labels = [q.label for q in queries]
    if len(set(labels)) != len(labels):
        raise ValueError(f"duplicate topic labels: {labels}")
    return queries


def topic_slug(label: str, extra: Optional[str] = None) -> str:
    """File-name friendly form of a topic label."""
    slug = re.sub(r"[^a-z0-9]+", "_", label.lower()).strip("_")
    return f"{slug}_{extra}" if extra else slug
