"""
Tagged flat-file parser

Reads the plain-text export of a citation index: a header ("FN ..." and
"VR 1.0"), then records made of lines carrying a two-character field tag
followed by a value. Continuation lines start with three spaces, "ER" ends a
record and "EF" ends the file.

Recognized tags:
- UT accession number, PY year, TI title, AB abstract, SO venue
- AU authors (one per line), C1 addresses (one per line)
- DE author keywords and FU funding agencies (semicolon separated)
- TC times cited, CR cited references (one per line)

Unknown tags are ignored. Broken records are skipped and reported; parsing
carries on with the next record.
"""

import logging
import re
from pathlib import Path
from typing import Dict, Iterable, List

from itemadapter import ItemAdapter

from coevo_mapper.exceptions import FormatError
from coevo_mapper.items import Address, PublicationLoader, clean_string, fill_defaults
from coevo_mapper.parsers.results import ParseResult, RecordError, read_text

logger = logging.getLogger(__name__)

TAG_LINE = re.compile(r"^([A-Z][A-Z0-9])(?: (.*))?$")
BRACKETED_NAMES = re.compile(r"^\[(?P<names>[^\]]*)\]\s*(?P<rest>.*)$")
PROVINCE = re.compile(r"^[A-Z]{2,3}$")

# PublicationItem field fed by each recognized tag
TAG_FIELDS = {
    "UT": "id",
    "PY": "year",
    "TI": "title",
    "AB": "abstract",
    "SO": "venue",
    "AU": "authors",
    "DE": "author_keywords",
    "FU": "funders",
    "TC": "times_cited",
    "CR": "cited_ids",
}

DEFAULT_LIST_TAGS = ("AU", "C1", "CR")


def _strip_postcode(value):
    return " ".join(token for token in value.split() if not any(c.isdigit() for c in token))


def parse_address(value, authors, year):
    """
    Split one C1 line into per-author Address entries.

    A leading "[Name; Name]" block names the authors the address belongs to;
    without it the address applies to every author of the record. US
    addresses end in "<STATE> [zip] USA"; elsewhere the last component is the
    country and the one before it the city.
    """
    match = BRACKETED_NAMES.match(value)
    if match:
        names = [clean_string(n) for n in match.group("names").split(";")]
        names = [n for n in names if n]
        rest = match.group("rest")
    else:
        names = list(authors)
        rest = value

    parts = [p.strip() for p in rest.strip().rstrip(".").split(",") if p.strip()]
    if not parts or not names:
        return []

    tokens = parts[-1].split()
    place_parts = parts[:-1]
    if tokens and tokens[-1].upper() == "USA":
        country = "USA"
        region = tokens[0] if len(tokens) > 1 and tokens[0].isalpha() else ""
    else:
        country = _strip_postcode(parts[-1])
        region = ""
        # "Toronto, ON M5S 3G4, Canada"
        if len(place_parts) >= 2 and PROVINCE.match(_strip_postcode(place_parts[-1])):
            region = _strip_postcode(place_parts[-1])
            place_parts = place_parts[:-1]

    city = _strip_postcode(place_parts[-1]) if place_parts else ""
    organization = place_parts[0] if len(place_parts) >= 2 else ""

    return [Address(name, organization, city, region, country, year) for name in names]


def format_address(address):
    """Inverse of parse_address for a single-author entry."""
    place = [address.organization] if address.organization else []
    if address.city:
        place.append(address.city)
    if address.country == "USA":
        tail = f"{address.region} USA" if address.region else "USA"
    else:
        if address.region:
            place.append(address.region)
        tail = address.country
    return f"[{address.author}] " + ", ".join(place + [tail])


class _RecordBuffer:
    """Tag values of the record being read."""

    def __init__(self, start_line):
        self.start_line = start_line
        self.values: Dict[str, List[str]] = {}
        self.current_tag = None

    def add(self, tag, value):
        self.values.setdefault(tag, []).append(value)
        self.current_tag = tag

    def extend(self, value, list_tags):
        values = self.values[self.current_tag]
        if self.current_tag in list_tags:
            values.append(value)
        else:
            values[-1] = f"{values[-1]} {value}".strip()


def _build_publication(buffer):
    loader = PublicationLoader()
    for tag, field_name in TAG_FIELDS.items():
        if tag in buffer.values:
            loader.add_value(field_name, buffer.values[tag])

    # Processor failures (non-numeric PY/TC) surface as ValueError here
    item = fill_defaults(loader.load_item())
    adapter = ItemAdapter(item)

    if not adapter.get("id"):
        raise ValueError("record has no UT accession number")
    if adapter.get("year") is None:
        raise ValueError(f"record {adapter['id']} has no PY year")

    addresses = []
    for line in buffer.values.get("C1", []):
        addresses.extend(parse_address(line, item["authors"], item["year"]))
    item["addresses"] = addresses
    return item


def parse_wos_tagged(
    stream,
    continuation_indent=3,
    list_tags: Iterable[str] = DEFAULT_LIST_TAGS,
    encoding="utf-8-sig",
    source="<stream>",
) -> ParseResult:
    """
    Parse a tagged flat-file export into PublicationItem records.

    Args:
        stream: bytes, text, or a file object opened in binary or text mode
        continuation_indent: number of leading spaces marking a continuation line
        list_tags: tags whose continuation lines are separate values
        encoding: text encoding of byte input
        source: name used in error reports

    Returns:
        ParseResult with records in file order and the skipped-record errors

    Raises:
        FormatError: the header lines are missing or malformed
    """
    list_tags = frozenset(list_tags)
    indent = " " * continuation_indent
    lines = read_text(stream, encoding).splitlines()

    numbered = [(n, line) for n, line in enumerate(lines, start=1) if line.strip()]
    if len(numbered) < 2 or not numbered[0][1].startswith("FN"):
        raise FormatError(f"{source}: missing 'FN' header line")
    if numbered[1][1].split()[:2] != ["VR", "1.0"]:
        raise FormatError(f"{source}: expected 'VR 1.0' version line, got {numbered[1][1]!r}")

    result = ParseResult(source=source)
    buffer = None
    index = 0
    ended = False

    def finish(buf):
        nonlocal index
        index += 1
        try:
            result.records.append(_build_publication(buf))
        except ValueError as e:
            error = RecordError(index, buf.start_line, str(e), source)
            result.errors.append(error)
            logger.warning(f"{source}: skipped record {index} (line {buf.start_line}): {e}")

    for line_no, line in numbered[2:]:
        if line.startswith(indent) and not line.startswith(indent + " "):
            if buffer is None or buffer.current_tag is None:
                logger.warning(f"{source}:{line_no}: continuation line outside a field, ignored")
                continue
            buffer.extend(line[continuation_indent:].strip(), list_tags)
            continue

        stripped = line.rstrip()
        if stripped == "EF":
            ended = True
            break
        if stripped == "ER":
            if buffer is not None:
                finish(buffer)
            buffer = None
            continue

        match = TAG_LINE.match(stripped)
        if not match:
            logger.warning(f"{source}:{line_no}: unrecognized line ignored")
            continue
        if buffer is None:
            buffer = _RecordBuffer(line_no)
        buffer.add(match.group(1), (match.group(2) or "").strip())

    if buffer is not None:
        logger.warning(f"{source}: last record has no 'ER' terminator")
        finish(buffer)
    if not ended:
        logger.warning(f"{source}: no 'EF' file terminator")

    logger.info(
        f"Parsed {len(result.records)} publications from {source} "
        f"({len(result.errors)} skipped)"
    )
    return result


def parse_wos_file(path, **kwargs) -> ParseResult:
    path = Path(path)
    with open(path, "rb") as f:
        return parse_wos_tagged(f, source=str(path), **kwargs)


def serialize_wos_tagged(records) -> str:
    """Write records back to the tagged format read by parse_wos_tagged."""
    out = ["FN Clarivate Analytics Web of Science", "VR 1.0"]

    def emit(tag, values):
        values = [v for v in values if v not in (None, "")]
        if values:
            out.append(f"{tag} {values[0]}")
            out.extend(f"   {v}" for v in values[1:])

    for item in records:
        out.append("PT J")
        emit("AU", item.get("authors", []))
        emit("TI", [item.get("title")])
        emit("SO", [item.get("venue")])
        if item.get("author_keywords"):
            emit("DE", ["; ".join(item["author_keywords"])])
        emit("AB", [item.get("abstract")])
        emit("C1", [format_address(a) for a in item.get("addresses", [])])
        if item.get("funders"):
            emit("FU", ["; ".join(item["funders"])])
        emit("CR", item.get("cited_ids", []))
        emit("TC", [str(item.get("times_cited", 0))])
        emit("PY", [str(item["year"])])
        emit("UT", [item["id"]])
        out.append("ER")
        out.append("")
    out.append("EF")
    return "\n".join(out) + "\n"
