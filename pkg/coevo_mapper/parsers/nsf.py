"""
Award table parser

Reads the comma-separated export of an award search portal. Required columns:
AwardNumber, Title, StartDate, EndDate, AwardedAmountToDate,
PrincipalInvestigator, Organization, Abstract. An optional co-PI column adds
further investigators.
"""

import logging
from pathlib import Path

import pandas as pd
from itemadapter import ItemAdapter

from coevo_mapper.exceptions import FormatError
from coevo_mapper.items import DEFAULT_AWARD_DATE_FORMAT, AwardLoader, fill_defaults
from coevo_mapper.parsers.results import ParseResult, RecordError, as_binary

logger = logging.getLogger(__name__)

REQUIRED_COLUMNS = [
    "AwardNumber",
    "Title",
    "StartDate",
    "EndDate",
    "AwardedAmountToDate",
    "PrincipalInvestigator",
    "Organization",
    "Abstract",
]

COLUMN_FIELDS = {
    "AwardNumber": "id",
    "Title": "title",
    "Abstract": "abstract",
    "StartDate": "start_date",
    "EndDate": "end_date",
    "AwardedAmountToDate": "amount",
    "Organization": "organization",
}


def _build_award(row, copi_column, date_format):
    loader = AwardLoader(date_format=date_format)
    for column, field_name in COLUMN_FIELDS.items():
        loader.add_value(field_name, row[column])
    loader.add_value("investigators", row["PrincipalInvestigator"])
    if copi_column and row.get(copi_column):
        loader.add_value("investigators", row[copi_column].split(","))

    item = fill_defaults(loader.load_item())
    adapter = ItemAdapter(item)
    for required in ("id", "start_date", "end_date"):
        if adapter.get(required) is None:
            raise ValueError(f"missing {required}")
    if item["start_date"] > item["end_date"]:
        raise ValueError(f"start date {item['start_date']} after end date {item['end_date']}")
    return item


def parse_nsf_awards(stream, copi_column="Co-PIName(s)", date_format=DEFAULT_AWARD_DATE_FORMAT,
                     source="<stream>") -> ParseResult:
    """
    Parse an award export into AwardItem records.

    Rows with unparseable dates or amounts are skipped and reported.

    Raises:
        FormatError: the header lacks a required column
    """
    try:
        frame = pd.read_csv(as_binary(stream), dtype=str, keep_default_na=False)
    except pd.errors.EmptyDataError as e:
        raise FormatError(f"{source}: empty award table") from e
    except pd.errors.ParserError as e:
        raise FormatError(f"{source}: unreadable award table: {e}") from e

    frame.columns = [str(c).strip() for c in frame.columns]
    missing = [c for c in REQUIRED_COLUMNS if c not in frame.columns]
    if missing:
        raise FormatError(f"{source}: missing required columns {missing}")

    result = ParseResult(source=source)
    for index, row in enumerate(frame.to_dict("records"), start=1):
        try:
            result.records.append(_build_award(
                row, copi_column if copi_column in frame.columns else None, date_format
            ))
        except ValueError as e:
            # header is line 1
            result.errors.append(RecordError(index, index + 1, str(e), source))
            logger.warning(f"{source}: skipped award row {index}: {e}")

    logger.info(f"Parsed {len(result.records)} awards from {source} ({len(result.errors)} skipped)")
    return result


def parse_nsf_file(path, **kwargs) -> ParseResult:
    path = Path(path)
    with open(path, "rb") as f:
        return parse_nsf_awards(f, source=str(path), **kwargs)
