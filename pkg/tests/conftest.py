from datetime import date
from pathlib import Path

import pytest

from coevo_mapper.items import Address, AwardItem, PublicationItem, fill_defaults
from coevo_mapper.sample import write_sample_corpus
from coevo_mapper.sciencemap import load_classification

SAMPLE_DIR = Path(__file__).resolve().parent.parent / "data" / "sample"

SAMPLE_TABLES = {
    "exclusion_file": "exclusions.tsv",
    "alias_file": "aliases.tsv",
    "merge_overrides_file": "merge_overrides.tsv",
    "gazetteer_file": "gazetteer.tsv",
    "basemap_file": "basemap.tsv",
    "classification_venue_file": "classification_venues.tsv",
    "classification_subdiscipline_file": "classification_subdisciplines.tsv",
    "classification_discipline_file": "classification_disciplines.tsv",
    "classification_keyword_file": "classification_keywords.tsv",
}


def make_publication(id, year, **fields):
    item = PublicationItem(id=id, year=year, **fields)
    return fill_defaults(item)


def make_award(id, start, end, **fields):
    item = AwardItem(id=id, start_date=start, end_date=end, **fields)
    return fill_defaults(item)


@pytest.fixture
def publication():
    return make_publication


@pytest.fixture
def award():
    return make_award


@pytest.fixture
def toy_papers():
    """P1:[A1,A2] P2:[A2,A6] P3:[A3,A4] P4:[A5] P5:[A2,A6]"""
    authors = {
        "P1": ["A1", "A2"],
        "P2": ["A2", "A6"],
        "P3": ["A3", "A4"],
        "P4": ["A5"],
        "P5": ["A2", "A6"],
    }
    return [
        make_publication(pid, 2000 + i, authors=names, times_cited=i + 1)
        for i, (pid, names) in enumerate(authors.items())
    ]


@pytest.fixture
def located_papers():
    """Papers with addresses for geocoding tests."""
    return [
        make_publication(
            "P1", 2005, authors=["Smith, J"], times_cited=3,
            addresses=[Address("Smith, J", "Carnegie Mellon Univ", "Pittsburgh", "PA", "USA", 2005)],
        ),
        make_publication(
            "P2", 2011, authors=["Smith, J", "Lee, K"], times_cited=4,
            addresses=[
                Address("Smith, J", "Univ Texas Austin", "Austin", "TX", "USA", 2011),
                Address("Lee, K", "Univ Toronto", "Toronto", "", "Canada", 2011),
            ],
        ),
        make_publication(
            "P3", 2012, authors=["Park, S"], times_cited=1,
            addresses=[Address("Park, S", "Springfield Coll", "Springfield", "ZZ", "USA", 2012)],
        ),
        make_publication("P4", 2013, authors=["Nobody, N"], times_cited=2),
    ]


@pytest.fixture
def toy_award():
    return make_award("1000001", date(2010, 9, 1), date(2013, 8, 31), amount=500000)


@pytest.fixture(scope="session")
def classification():
    return load_classification(
        SAMPLE_DIR / "classification_venues.tsv",
        SAMPLE_DIR / "classification_subdisciplines.tsv",
        SAMPLE_DIR / "classification_disciplines.tsv",
        SAMPLE_DIR / "classification_keywords.tsv",
    )


def write_config(path, corpus_dir, output_dir, **extra):
    """A config file pointing at a generated corpus and the shipped sample tables."""
    lines = [
        f"publication_files = {corpus_dir / 'publications.txt'}",
        f"award_files = {corpus_dir / 'awards.csv'}",
        f"output_dir = {output_dir}",
        "layout_seed = 42",
        "layout_iterations = 20",
    ]
    lines += [f"{key} = {SAMPLE_DIR / name}" for key, name in SAMPLE_TABLES.items()]
    lines += [f"{key} = {value}" for key, value in extra.items()]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


@pytest.fixture
def sample_corpus(tmp_path):
    directory = tmp_path / "corpus"
    write_sample_corpus(directory, n_publications=200)
    return directory


@pytest.fixture
def sample_config(tmp_path, sample_corpus):
    return write_config(tmp_path / "run.cfg", sample_corpus, tmp_path / "out")


@pytest.fixture
def config_writer():
    return write_config
