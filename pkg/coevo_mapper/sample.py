"""
Synthetic sample corpus

Writes a small, seeded corpus in the two input formats (a tagged publication
export and an award table) whose topics, keyword variants, bursty terms,
authors, cities, venues and citations exercise every stage. The companion
tables (classification, gazetteer, base map, aliases, overrides, exclusions)
live next to it under data/sample/.
"""

import logging
from datetime import date
from pathlib import Path
from typing import Dict, List

import numpy as np
import pandas as pd

from coevo_mapper.items import Address, PublicationItem
from coevo_mapper.parsers import serialize_wos_tagged

logger = logging.getLogger(__name__)

DEFAULT_SEED = 20180101
WINDOW = (1998, 2017)

TOPIC_TERMS = {
    "AI": ["artificial intelligence", "Artificial Intelligence"],
    "robotics": ["robotics", "Robotics"],
    "IoT": ["internet of things", "Internet of Things", "IoT"],
}
TOPIC_START = {"AI": 1998, "robotics": 1998, "IoT": 2006}
TOPIC_WEIGHTS = {"AI": 0.4, "robotics": 0.35, "IoT": 0.25}

# canonical term -> spellings used in author keywords
VOCABULARY = {
    "AI": ["machine learning", "neural networks", "computer vision", "natural language processing",
           "deep learning", "big data", "expert systems"],
    "robotics": ["motion planning", "slam", "human-robot interaction", "manipulation", "cps",
                 "impacts", "computer vision"],
    "IoT": ["rfid", "wireless sensor networks", "smart cities", "edge computing", "big data", "cps",
            "security"],
}
VARIANTS = {
    "machine learning": ["machine learning", "Machine Learning", "Learning, Machine"],
    "neural networks": ["neural networks", "Neural Networks", "neural network"],
    "big data": ["big data", "Big Data"],
    "rfid": ["RFID"],
    "slam": ["SLAM"],
    "cps": ["CPS", "cyber-physical systems"],
    "deep learning": ["deep learning", "Deep Learning"],
}

# years in which a term is much more likely, per source
PUBLICATION_BURSTS = {
    "expert systems": (1998, 2003),
    "slam": (2004, 2009),
    "rfid": (2006, 2013),
    "deep learning": (2012, 2017),
    "big data": (2014, 2017),
    "machine learning": (2014, 2017),
}
FUNDING_BURSTS = {
    "expert systems": (1998, 2002),
    "cps": (2009, 2014),
    "big data": (2013, 2017),
    "machine learning": (2015, 2017),
    "smart cities": (2014, 2017),
}

US_CITIES = [
    ("Pittsburgh", "PA", "Carnegie Mellon Univ"),
    ("Austin", "TX", "Univ Texas Austin"),
    ("Boston", "MA", "Northeastern Univ"),
    ("Seattle", "WA", "Univ Washington"),
    ("Atlanta", "GA", "Georgia Inst Technol"),
    ("Chicago", "IL", "Univ Chicago"),
    ("San Diego", "CA", "Univ Calif San Diego"),
    ("Bloomington", "IN", "Indiana Univ"),
    ("Ann Arbor", "MI", "Univ Michigan"),
    ("Palo Alto", "CA", "Stanford Univ"),
]
# cities outside the gazetteer or the US
OTHER_CITIES = [
    ("Springfield", "ZZ", "Springfield Coll", "USA"),
    ("Toronto", "", "Univ Toronto", "Canada"),
    ("Munich", "", "Tech Univ Munich", "Germany"),
]

SURNAMES = [
    "Adams", "Baker", "Chen", "Diaz", "Evans", "Fischer", "Garcia", "Hughes", "Ito", "Jones",
    "Kim", "Lopez", "Miller", "Nguyen", "Okafor", "Patel", "Quinn", "Rossi", "Smith", "Tanaka",
    "Ueda", "Varga", "Wang", "Xu", "Young", "Zhang", "Borner", "Cohen", "Dubois", "Ellis",
]
INITIALS = ["A", "B", "C", "D", "E", "J", "K", "L", "M", "S"]

VENUES = {
    "AI": ["ARTIFICIAL INTELLIGENCE", "MACHINE LEARNING", "IEEE TRANSACTIONS ON PATTERN ANALYSIS AND MACHINE INTELLIGENCE",
           "NEURAL COMPUTATION"],
    "robotics": ["IEEE TRANSACTIONS ON ROBOTICS", "INTERNATIONAL JOURNAL OF ROBOTICS RESEARCH",
                 "AUTONOMOUS ROBOTS", "JOURNAL OF MEDICAL ROBOTICS"],
    "IoT": ["IEEE INTERNET OF THINGS JOURNAL", "COMPUTER NETWORKS", "SENSORS", "IEEE COMMUNICATIONS MAGAZINE"],
}
UNKNOWN_VENUE = "JOURNAL OF OBSCURE STUDIES"

FUNDERS = ["National Science Foundation [IIS-{n}]", "NSF [CNS-{n}]", "DARPA", "Office of Naval Research [N000{n}]"]

EXTERNAL_REFERENCE = "WOS:999999999999999"
POOL_SIZE = 60
# topic -> slice of the author pool; neighbouring topics share authors
AUTHOR_POOLS = {"AI": range(0, 30), "robotics": range(20, 50), "IoT": list(range(40, 60)) + list(range(0, 5))}


def author_name(i):
    return f"{SURNAMES[i % len(SURNAMES)]}, {INITIALS[i // len(SURNAMES) % len(INITIALS)]}"


def investigator_name(i):
    """Award tables write "First Last" and separate co-PIs with commas."""
    return f"{INITIALS[i // len(SURNAMES) % len(INITIALS)]} {SURNAMES[i % len(SURNAMES)]}"


def _home(i, year):
    """(city, region, organization, country) of author i in `year`; every 7th author moves in 2010."""
    places = [(c, r, o, "USA") for c, r, o in US_CITIES] + OTHER_CITIES
    index = i % len(places)
    if i % 7 == 0 and year >= 2010:
        index = (index + 3) % len(US_CITIES)
    return places[index]


def _burst_boost(term, year, periods):
    start, end = periods.get(term, (None, None))
    if start is not None and start <= year <= end:
        return 8.0
    return 1.0


def _pick_terms(rng, topic, year, periods, k):
    vocabulary = VOCABULARY[topic]
    weights = np.array([_burst_boost(t, year, periods) for t in vocabulary], dtype=float)
    # bursting terms barely appear before their period
    for j, term in enumerate(vocabulary):
        if term in periods and year < periods[term][0]:
            weights[j] = 0.05
    chosen = rng.choice(len(vocabulary), size=min(k, len(vocabulary)), replace=False, p=weights / weights.sum())
    return [vocabulary[j] for j in sorted(chosen)]


def _spelling(rng, term):
    options = VARIANTS.get(term, [term])
    return options[int(rng.integers(len(options)))]


def _year(rng, topic):
    years = np.arange(TOPIC_START[topic], WINDOW[1] + 1)
    weights = (years - years[0] + 1).astype(float)
    return int(rng.choice(years, p=weights / weights.sum()))


def _topic(rng, exclude=None):
    labels = [t for t in TOPIC_WEIGHTS if t != exclude]
    weights = np.array([TOPIC_WEIGHTS[t] for t in labels])
    return labels[int(rng.choice(len(labels), p=weights / weights.sum()))]


def _authors(rng, topic, k):
    pool = list(AUTHOR_POOLS[topic])
    weights = 1.0 / (np.arange(len(pool)) + 1)
    chosen = rng.choice(len(pool), size=k, replace=False, p=weights / weights.sum())
    return [pool[j] for j in chosen]


def generate_publications(rng, n_publications) -> List[PublicationItem]:
    drafts = []
    for _ in range(n_publications):
        topic = _topic(rng)
        year = _year(rng, topic)
        second = _topic(rng, exclude=topic) if rng.random() < 0.12 else None
        drafts.append((year, topic, second))
    drafts.sort(key=lambda d: d[0])

    publications = []
    for number, (year, topic, second) in enumerate(drafts, start=1):
        terms = _pick_terms(rng, topic, year, PUBLICATION_BURSTS, int(rng.integers(2, 5)))
        keywords = [TOPIC_TERMS[topic][int(rng.integers(len(TOPIC_TERMS[topic])))]]
        keywords += [_spelling(rng, t) for t in terms]
        if second and year >= TOPIC_START[second]:
            keywords.append(TOPIC_TERMS[second][0])
            keywords += [_spelling(rng, t) for t in _pick_terms(rng, second, year, PUBLICATION_BURSTS, 1)]

        author_ids = _authors(rng, topic, int(rng.integers(1, 5)))
        authors = [author_name(i) for i in author_ids]
        addresses = []
        for i, name in zip(author_ids, authors):
            city, region, organization, country = _home(i, year)
            addresses.append(Address(name, organization, city, region, country, year))

        venue = UNKNOWN_VENUE if rng.random() < 0.05 else VENUES[topic][int(rng.integers(len(VENUES[topic])))]

        earlier = [p["id"] for p in publications if p["year"] <= year]
        cited = []
        if earlier:
            picks = rng.choice(len(earlier), size=min(len(earlier), int(rng.integers(0, 4))), replace=False)
            cited = [earlier[j] for j in sorted(picks)]
        if rng.random() < 0.1:
            cited.append(EXTERNAL_REFERENCE)

        funders = []
        if rng.random() < 0.5:
            template = FUNDERS[int(rng.integers(len(FUNDERS)))]
            funders.append(template.format(n=int(rng.integers(1000000, 9999999))))

        age = WINDOW[1] + 1 - year
        times_cited = int(rng.gamma(1.2, 4.0 * age))

        publications.append(PublicationItem(
            id=f"WOS:{number:015d}",
            year=year,
            title=f"{terms[0].capitalize()} for {TOPIC_TERMS[topic][0]}",
            abstract=f"This paper studies {' and '.join(terms)} in {TOPIC_TERMS[topic][0]}.",
            venue=venue,
            authors=authors,
            addresses=addresses,
            author_keywords=keywords,
            funders=funders,
            times_cited=times_cited,
            cited_ids=cited,
            topics=frozenset(),
        ))

    # one reference pointing forward in time
    if len(publications) > 2:
        publications[0]["cited_ids"] = publications[0]["cited_ids"] + [publications[-1]["id"]]
    return publications


def generate_awards(rng, n_awards) -> pd.DataFrame:
    rows = []
    for number in range(n_awards):
        topic = _topic(rng)
        year = _year(rng, topic)
        terms = _pick_terms(rng, topic, year, FUNDING_BURSTS, int(rng.integers(2, 4)))
        start = date(year, int(rng.integers(1, 13)), int(rng.integers(1, 29)))
        end = date(year + int(rng.integers(1, 5)), start.month, start.day)
        investigator_ids = _authors(rng, topic, int(rng.integers(1, 4)))
        investigators = [investigator_name(i) for i in investigator_ids]
        _, _, organization, _ = _home(investigator_ids[0], year)
        rows.append({
            "AwardNumber": f"{1000000 + number}",
            "Title": f"{terms[0].title()} Research in {TOPIC_TERMS[topic][0].title()}",
            "StartDate": start.strftime("%m/%d/%Y"),
            "EndDate": end.strftime("%m/%d/%Y"),
            "AwardedAmountToDate": f"${int(rng.integers(50, 1500)) * 1000:,}",
            "PrincipalInvestigator": investigators[0],
            "Co-PIName(s)": ", ".join(investigators[1:]),
            "Organization": organization,
            "Abstract": f"This project advances {', '.join(terms)} for {TOPIC_TERMS[topic][0]}.",
        })
    # one row with an impossible date, reported as a parse error
    if rows:
        rows[-1]["StartDate"] = "13/45/2010"
    return pd.DataFrame(rows)


def write_sample_corpus(directory, n_publications=200, seed=DEFAULT_SEED, n_awards=None) -> Dict[str, Path]:
    """
    Write publications.txt and awards.csv into `directory`.

    Args:
        directory: created if missing
        n_publications: number of publication records
        seed: fixes every random choice; equal seeds give identical files
        n_awards: defaults to a third of n_publications (at least 30)
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)

    publications = generate_publications(rng, n_publications)
    awards = generate_awards(rng, n_awards if n_awards is not None else max(30, n_publications // 3))

    paths = {"publications": directory / "publications.txt", "awards": directory / "awards.csv"}
    paths["publications"].write_text(serialize_wos_tagged(publications), encoding="utf-8")
    awards.to_csv(paths["awards"], index=False, lineterminator="\n")
    logger.info(f"Wrote {len(publications)} publications and {len(awards)} awards to {directory}")
    return paths
