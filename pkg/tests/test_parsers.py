import io
from datetime import date

import pytest

from coevo_mapper.exceptions import FormatError
from coevo_mapper.items import Address
from coevo_mapper.parsers import (
    parse_nsf_awards,
    parse_nsf_file,
    parse_wos_file,
    parse_wos_tagged,
    serialize_wos_tagged,
)
from coevo_mapper.parsers.tables import read_alias_map, read_exclusions, read_polylines
from coevo_mapper.parsers.wos import parse_address
from coevo_mapper.sample import write_sample_corpus

HEADER = "FN Clarivate Analytics Web of Science\nVR 1.0\n"

AWARD_HEADER = (
    "AwardNumber,Title,StartDate,EndDate,AwardedAmountToDate,PrincipalInvestigator,"
    "Organization,Abstract,Co-PIName(s)\n"
)


def wos(body):
    return (HEADER + body + "EF\n").encode("utf-8")


def test_minimal_record():
    result = parse_wos_tagged(wos("UT WOS:1\nPY 2010\nTI A title\nER\n"))

    assert len(result) == 1
    record = result.records[0]
    assert record["id"] == "WOS:1"
    assert record["year"] == 2010
    assert record["title"] == "A title"
    assert record["authors"] == []
    assert record["author_keywords"] == []
    assert record["cited_ids"] == []
    assert record["times_cited"] == 0
    assert not result.errors


def test_authors_times_cited_and_continuations():
    body = (
        "PT J\n"
        "AU Smith, J\n"
        "   Lee, K\n"
        "TI Learning to walk\n"
        "   on two legs\n"
        "DE deep learning; Robotics ;legged locomotion\n"
        "TC 7\n"
        "PY 2012\n"
        "UT WOS:1\n"
        "ER\n"
        "\n"
        "UT WOS:2\n"
        "PY 2013\n"
        "XX unknown tag\n"
        "ER\n"
    )
    result = parse_wos_tagged(wos(body))

    first, second = result.records
    assert first["authors"] == ["Smith, J", "Lee, K"]
    assert first["times_cited"] == 7
    assert first["title"] == "Learning to walk on two legs"
    assert first["author_keywords"] == ["deep learning", "Robotics", "legged locomotion"]
    assert second["id"] == "WOS:2"


def test_record_without_accession_is_skipped():
    body = "UT WOS:1\nPY 2010\nER\nPY 2011\nTI no id\nER\n"
    result = parse_wos_tagged(wos(body))

    assert [r["id"] for r in result] == ["WOS:1"]
    assert len(result.errors) == 1
    assert result.errors[0].index == 2


@pytest.mark.parametrize("tag_line", ["PY twenty", "TC many"])
def test_non_numeric_year_or_citations_is_a_record_error(tag_line):
    body = f"UT WOS:1\nPY 2010\nER\nUT WOS:2\nPY 2011\n{tag_line}\nER\n"
    result = parse_wos_tagged(wos(body))

    assert [r["id"] for r in result] == ["WOS:1"]
    assert len(result.errors) == 1


@pytest.mark.parametrize("text", ["", "VR 1.0\nUT WOS:1\n", "FN Export\nVR 2.0\n"])
def test_malformed_header(text):
    with pytest.raises(FormatError):
        parse_wos_tagged(text.encode("utf-8"))


def test_accepts_text_and_file_objects():
    text = HEADER + "UT WOS:1\nPY 2010\nER\nEF\n"
    assert len(parse_wos_tagged(text)) == 1
    assert len(parse_wos_tagged(io.BytesIO(text.encode("utf-8")))) == 1


def test_addresses_and_funders():
    body = (
        "AU Smith, J\n"
        "   Lee, K\n"
        "C1 [Smith, J] Carnegie Mellon Univ, Sch Comp Sci, Pittsburgh, PA 15213 USA.\n"
        "   [Lee, K] Univ Toronto, Dept Comp Sci, Toronto, ON M5S 3G4, Canada\n"
        "FU National Science Foundation [IIS-1234]; DARPA\n"
        "PY 2010\n"
        "UT WOS:1\n"
        "ER\n"
    )
    record = parse_wos_tagged(wos(body)).records[0]

    smith, lee = record["addresses"]
    assert smith.author == "Smith, J"
    assert smith.city == "Pittsburgh"
    assert smith.region == "PA"
    assert smith.is_us
    assert smith.organization == "Carnegie Mellon Univ"
    assert lee.author == "Lee, K"
    assert (lee.city, lee.region, lee.country) == ("Toronto", "ON", "Canada")
    assert not lee.is_us
    assert record["funders"] == ["National Science Foundation", "DARPA"]


def test_address_without_names_applies_to_every_author():
    addresses = parse_address("Indiana Univ, Bloomington, IN 47405 USA", ["A", "B"], 2010)

    assert [a.author for a in addresses] == ["A", "B"]
    assert {a.city for a in addresses} == {"Bloomington"}
    assert {a.year for a in addresses} == {2010}


def test_serialize_and_parse_again():
    body = (
        "AU Smith, J\n"
        "   Lee, K\n"
        "TI A long title\n"
        "SO IEEE TRANSACTIONS ON ROBOTICS\n"
        "DE robotics; slam\n"
        "AB Some abstract text.\n"
        "C1 [Smith, J] Carnegie Mellon Univ, Pittsburgh, PA USA\n"
        "FU DARPA\n"
        "CR WOS:0\n"
        "TC 3\n"
        "PY 2011\n"
        "UT WOS:1\n"
        "ER\n"
    )
    first = parse_wos_tagged(wos(body)).records
    again = parse_wos_tagged(serialize_wos_tagged(first)).records

    assert [dict(r) for r in again] == [dict(r) for r in first]


def test_award_rows():
    rows = (
        '1000001,"Robots, Humans and Trust",09/01/2010,08/31/2021,"$43,000,000",Ann Lee,Indiana Univ,Text,"Bo Chen, Cy Diaz"\n'
        "1000002,Sensing,01/15/2012,01/14/2015,$120000,Dee Evans,Univ Michigan,Text,\n"
    )
    result = parse_nsf_awards((AWARD_HEADER + rows).encode("utf-8"))

    first, second = result.records
    assert first["amount"] == 43000000
    assert first["title"] == "Robots, Humans and Trust"
    assert first["start_date"] == date(2010, 9, 1)
    assert first["start_date"] < first["end_date"]
    assert first["investigators"] == ["Ann Lee", "Bo Chen", "Cy Diaz"]
    assert second["investigators"] == ["Dee Evans"]
    assert second["amount"] == 120000


def test_bad_award_date_skips_the_row():
    rows = (
        "1,A,09/01/2010,08/31/2012,$1,P,O,T,\n"
        "2,B,13/45/2010,08/31/2012,$1,P,O,T,\n"
        "3,C,09/01/2011,08/31/2013,$1,P,O,T,\n"
    )
    result = parse_nsf_awards((AWARD_HEADER + rows).encode("utf-8"))

    assert [r["id"] for r in result] == ["1", "3"]
    assert len(result.errors) == 1
    assert result.errors[0].line == 3


def test_award_date_format_is_configurable():
    rows = "1,A,2010-09-01,2012-08-31,$1,P,O,T,\n2,B,09/01/2010,08/31/2012,$1,P,O,T,\n"

    result = parse_nsf_awards((AWARD_HEADER + rows).encode("utf-8"), date_format="%Y-%m-%d")

    assert [r["id"] for r in result] == ["1"]
    assert result.records[0]["start_date"] == date(2010, 9, 1)
    assert "%Y-%m-%d" in result.errors[0].message


def test_award_table_missing_column():
    with pytest.raises(FormatError):
        parse_nsf_awards(b"AwardNumber,Title\n1,A\n")


def test_companion_tables(tmp_path):
    exclusions = tmp_path / "exclusions.tsv"
    exclusions.write_text("id\treason\nWOS:1\tfalse positive\n", encoding="utf-8")
    aliases = tmp_path / "aliases.tsv"
    aliases.write_text("variant\tcanonical\nNSF\tNational Science Foundation\n", encoding="utf-8")
    basemap = tmp_path / "basemap.tsv"
    basemap.write_text("path_id\tlat\tlon\na\t1\t2\na\t3\t4\nb\t5\t6\n", encoding="utf-8")

    assert read_exclusions(exclusions).excluded_ids == frozenset({"WOS:1"})
    assert read_alias_map(aliases) == {"NSF": "National Science Foundation"}
    assert read_polylines(basemap) == [[(1.0, 2.0), (3.0, 4.0)], [(5.0, 6.0)]]


def test_address_equality_is_by_value():
    assert Address("A", "O", "C", "R", "USA", 2000) == Address("A", "O", "C", "R", "USA", 2000)


def test_generated_sample_corpus(tmp_path):
    first = write_sample_corpus(tmp_path / "one")
    second = write_sample_corpus(tmp_path / "two")

    for name in ("publications", "awards"):
        assert first[name].read_bytes() == second[name].read_bytes()

    publications = parse_wos_file(first["publications"])
    awards = parse_nsf_file(first["awards"])
    assert len(publications) == 200
    assert publications.errors == []
    assert len(awards) + len(awards.errors) == 66
    assert len(awards.errors) == 1
