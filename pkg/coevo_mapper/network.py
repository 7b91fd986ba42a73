"""
Co-occurrence networks

Nodes are entities (authors by default) identified by exact name; an edge
counts the records two entities share. Node attributes:
    label, papers, citations, first_year, and lat/lon once geocoded.

Also: component statistics, threshold filtering, a seeded spring-embedder
layout and Mercator geocoding of authors by their most recent address.
"""

import logging
import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from itertools import combinations
from typing import Dict, Iterable, List, Optional, Tuple

import networkx as nx
import numpy as np
import pandas as pd

from coevo_mapper.parsers.tables import read_table

logger = logging.getLogger(__name__)

MAX_LATITUDE = 85.0


# =============================================================================
# Extraction and structure
# =============================================================================

def extract_cooccurrence(records, entity_field="authors") -> nx.Graph:
    """
    Build the weighted co-occurrence network of `entity_field`.

    Every unordered pair of distinct entities on a record adds 1 to their edge
    weight. Each entity gets full citation credit for its records.
    """
    graph = nx.Graph()
    for item in records:
        entities = sorted(set(e for e in item.get(entity_field) or [] if e))
        if not entities:
            continue
        year = item.get("year")
        cited = item.get("times_cited", 0) or 0
        for entity in entities:
            if entity not in graph:
                graph.add_node(entity, label=entity, papers=0, citations=0, first_year=year)
            node = graph.nodes[entity]
            node["papers"] += 1
            node["citations"] += cited
            if year is not None and (node["first_year"] is None or year < node["first_year"]):
                node["first_year"] = year
        for a, b in combinations(entities, 2):
            if graph.has_edge(a, b):
                graph[a][b]["weight"] += 1
            else:
                graph.add_edge(a, b, weight=1)
    logger.info(f"Co-occurrence network: {graph.number_of_nodes()} nodes, {graph.number_of_edges()} edges")
    return graph


def average_degree(graph: nx.Graph) -> float:
    n = graph.number_of_nodes()
    if n == 0:
        return 0.0
    return round(2 * graph.number_of_edges() / n, 2)


@dataclass(frozen=True)
class ComponentReport:
    component_count: int
    isolate_count: int
    largest_component_size: int
    avg_degree: float
    node_count: int = 0
    edge_count: int = 0


def _ordered_components(graph):
    """Components sorted by size descending, then smallest label."""
    return sorted(
        (sorted(c) for c in nx.connected_components(graph)),
        key=lambda c: (-len(c), c[0]),
    )


def components(graph: nx.Graph) -> Tuple[ComponentReport, Dict[str, int]]:
    """Component statistics plus node -> component id (0 is the largest)."""
    ordered = _ordered_components(graph)
    membership = {node: i for i, comp in enumerate(ordered) for node in comp}
    report = ComponentReport(
        component_count=len(ordered),
        isolate_count=sum(1 for c in ordered if len(c) == 1),
        largest_component_size=len(ordered[0]) if ordered else 0,
        avg_degree=average_degree(graph),
        node_count=graph.number_of_nodes(),
        edge_count=graph.number_of_edges(),
    )
    return report, membership


def filter_network(graph: nx.Graph, min_node_citations=0, min_edge_weight=0, drop_isolates=False) -> nx.Graph:
    """
    Thresholded copy of `graph`.

    Order: low-citation nodes go first (with their edges), then light edges,
    then (optionally) the nodes left without edges.
    """
    if min_node_citations < 0 or min_edge_weight < 0:
        raise ValueError("thresholds must be non-negative")
    keep = [n for n, c in graph.nodes(data="citations", default=0) if c >= min_node_citations]
    filtered = graph.subgraph(keep).copy()
    light = [(a, b) for a, b, w in filtered.edges(data="weight", default=1) if w < min_edge_weight]
    filtered.remove_edges_from(light)
    if drop_isolates:
        filtered.remove_nodes_from(list(nx.isolates(filtered)))
    logger.debug(
        f"Filtered network to {filtered.number_of_nodes()} nodes, {filtered.number_of_edges()} edges "
        f"(citations>={min_node_citations}, weight>={min_edge_weight}, drop_isolates={drop_isolates})"
    )
    return filtered


def largest_component(graph: nx.Graph) -> nx.Graph:
    if graph.number_of_nodes() == 0:
        return nx.Graph()
    return graph.subgraph(_ordered_components(graph)[0]).copy()


def productivity_counts(graph: nx.Graph, thresholds: Iterable[int] = (3, 4, 5)) -> Dict[int, int]:
    """{k: number of nodes with more than k papers}"""
    papers = [p for _, p in graph.nodes(data="papers", default=0)]
    return {k: sum(1 for p in papers if p > k) for k in thresholds}


def top_nodes(graph: nx.Graph, attribute="citations", n=10) -> List[Tuple[str, int]]:
    ranked = sorted(
        ((node, value) for node, value in graph.nodes(data=attribute, default=0)),
        key=lambda nv: (-nv[1], nv[0]),
    )
    return ranked[:n]


# =============================================================================
# Force-directed layout
# =============================================================================

def force_layout(graph: nx.Graph, seed: int, iterations=50, width=1000.0, height=1000.0,
                 margin=20.0) -> Dict[str, Tuple[float, float]]:
    """
    Fruchterman-Reingold layout inside [margin, width - margin] x [margin, height - margin].

    Every pair repels with k^2 / d, every edge attracts with weight * d^2 / k,
    and each move is capped by a temperature that cools linearly. All
    randomness comes from `seed`.
    """
    if iterations < 1:
        raise ValueError("iterations must be at least 1")
    if seed is None:
        raise ValueError("a layout seed is required")
    nodes = sorted(graph.nodes)
    n = len(nodes)
    if n == 0:
        return {}
    if n == 1:
        return {nodes[0]: (width / 2, height / 2)}

    low = np.array([margin, margin])
    high = np.array([width - margin, height - margin])
    rng = np.random.default_rng(seed)
    pos = rng.uniform(low, high, size=(n, 2))

    index = {node: i for i, node in enumerate(nodes)}
    edges = np.array([(index[a], index[b]) for a, b in graph.edges], dtype=int).reshape(-1, 2)
    weights = np.array([w for _, _, w in graph.edges(data="weight", default=1)], dtype=float)

    k = math.sqrt((high - low).prod() / n)
    temp = min(high - low) / 10
    dt = temp / (iterations + 1)

    for _ in range(iterations):
        delta = pos[:, None, :] - pos[None, :, :]
        dist = np.linalg.norm(delta, axis=-1)
        np.fill_diagonal(dist, 1.0)
        dist = np.maximum(dist, 0.01)
        # repulsion: delta / d * k^2 / d
        disp = (delta * (k * k / dist ** 2)[:, :, None]).sum(axis=1)

        if len(edges):
            edge_delta = pos[edges[:, 0]] - pos[edges[:, 1]]
            edge_dist = np.maximum(np.linalg.norm(edge_delta, axis=1), 0.01)
            pull = edge_delta * (weights * edge_dist / k)[:, None]
            np.subtract.at(disp, edges[:, 0], pull)
            np.add.at(disp, edges[:, 1], pull)

        length = np.linalg.norm(disp, axis=1)
        scale = np.where(length > 0, np.minimum(length, temp) / np.where(length > 0, length, 1.0), 0.0)
        pos = np.clip(pos + disp * scale[:, None], low, high)
        temp = max(temp - dt, 0.0)

    return {node: (float(pos[i, 0]), float(pos[i, 1])) for node, i in index.items()}


# =============================================================================
# Geocoding
# =============================================================================

@dataclass
class Gazetteer:
    """(city, region) -> (lat, lon); lookups ignore case."""

    entries: Dict[Tuple[str, str], Tuple[float, float]] = field(default_factory=dict)

    def __post_init__(self):
        normalized = {}
        for (city, region), (lat, lon) in self.entries.items():
            if abs(lat) > 90 or abs(lon) > 180:
                raise ValueError(f"coordinates out of range for {city}, {region}: ({lat}, {lon})")
            normalized[(city.casefold(), region.casefold())] = (float(lat), float(lon))
        self.entries = normalized

    def lookup(self, city, region) -> Optional[Tuple[float, float]]:
        return self.entries.get(((city or "").casefold(), (region or "").casefold()))

    def __len__(self):
        return len(self.entries)

    @classmethod
    def from_file(cls, path, delimiter="\t"):
        frame = read_table(path, ["city", "region", "country", "lat", "lon"], delimiter)
        return cls({
            (city, region): (float(lat), float(lon))
            for city, region, lat, lon in zip(frame["city"], frame["region"], frame["lat"], frame["lon"])
        })


@dataclass(frozen=True)
class GeoLocation:
    city: str
    region: str
    lat: float
    lon: float

    @property
    def place(self):
        return f"{self.city}, {self.region}" if self.region else self.city


@dataclass
class GeocodeResult:
    locations: Dict[str, GeoLocation] = field(default_factory=dict)
    excluded: Counter = field(default_factory=Counter)

    @property
    def excluded_count(self):
        return sum(self.excluded.values())


def _in_country(address, country):
    if country.upper() == "USA":
        return address.is_us
    return address.country.upper() == country.upper()


def geocode(records, gazetteer: Gazetteer, country="USA") -> GeocodeResult:
    """
    Locate each author at their most recent address (last listed on ties).

    Authors whose chosen address is outside `country`, or missing from the
    gazetteer, are excluded and counted by reason.
    """
    latest = {}
    authors = set()
    for item in records:
        authors.update(item.get("authors", []))
        for address in item.get("addresses", []):
            current = latest.get(address.author)
            if current is None or address.year >= current.year:
                latest[address.author] = address

    result = GeocodeResult()
    for author in sorted(authors | set(latest)):
        address = latest.get(author)
        if address is None:
            result.excluded["no_address"] += 1
        elif country and not _in_country(address, country):
            result.excluded["non_us"] += 1
        else:
            coordinates = gazetteer.lookup(address.city, address.region)
            if coordinates is None:
                result.excluded["unknown_city"] += 1
                logger.debug(f"No gazetteer entry for {address.city}, {address.region}")
            else:
                result.locations[author] = GeoLocation(address.city, address.region, *coordinates)

    logger.info(f"Geocoded {len(result.locations)} authors, excluded {dict(result.excluded)}")
    return result


def mercator(latitude, longitude) -> Tuple[float, float]:
    """Spherical Mercator in radians; latitude is clamped to +/-85 degrees."""
    phi = math.radians(max(-MAX_LATITUDE, min(MAX_LATITUDE, latitude)))
    return math.radians(longitude), math.log(math.tan(math.pi / 4 + phi / 2))


def top_cities(graph: nx.Graph, geocoding: GeocodeResult, n=None) -> List[Tuple[str, int]]:
    """Citations summed per city of the located authors, heaviest first."""
    totals = Counter()
    for author, location in geocoding.locations.items():
        if author in graph:
            totals[location.place] += graph.nodes[author].get("citations", 0)
    ranked = sorted(totals.items(), key=lambda kv: (-kv[1], kv[0]))
    return ranked[:n] if n is not None else ranked


def geo_network(graph: nx.Graph, geocoding: GeocodeResult) -> nx.Graph:
    """Subnetwork of located authors, with lat/lon/city attributes set."""
    located = [node for node in graph.nodes if node in geocoding.locations]
    sub = graph.subgraph(located).copy()
    for node in located:
        location = geocoding.locations[node]
        sub.nodes[node].update(lat=location.lat, lon=location.lon, city=location.place)
    return sub


# =============================================================================
# Tables
# =============================================================================

NODE_COLUMNS = ["label", "papers", "citations", "first_year", "lat", "lon", "component_id", "x", "y"]
EDGE_COLUMNS = ["source", "target", "weight"]


def node_table(graph: nx.Graph, membership=None, positions=None) -> pd.DataFrame:
    membership = membership or {}
    positions = positions or {}
    rows = []
    for node in sorted(graph.nodes):
        data = graph.nodes[node]
        x, y = positions.get(node, (None, None))
        rows.append({
            "label": data.get("label", node),
            "papers": data.get("papers", 0),
            "citations": data.get("citations", 0),
            "first_year": data.get("first_year"),
            "lat": data.get("lat"),
            "lon": data.get("lon"),
            "component_id": membership.get(node),
            "x": x,
            "y": y,
        })
    return pd.DataFrame(rows, columns=NODE_COLUMNS)


def edge_table(graph: nx.Graph) -> pd.DataFrame:
    rows = sorted((min(a, b), max(a, b), w) for a, b, w in graph.edges(data="weight", default=1))
    return pd.DataFrame(rows, columns=EDGE_COLUMNS)


def graph_from_tables(nodes: pd.DataFrame, edges: pd.DataFrame) -> nx.Graph:
    """Rebuild a network written by node_table/edge_table."""
    graph = nx.Graph()
    for row in nodes.to_dict("records"):
        attrs = {"label": row["label"], "papers": int(row["papers"]), "citations": int(row["citations"])}
        attrs["first_year"] = int(row["first_year"]) if row.get("first_year") not in (None, "") else None
        for key in ("lat", "lon"):
            if row.get(key) not in (None, ""):
                attrs[key] = float(row[key])
        graph.add_node(row["label"], **attrs)
    for row in edges.to_dict("records"):
        graph.add_edge(row["source"], row["target"], weight=int(row["weight"]))
    return graph


def positions_from_table(nodes: pd.DataFrame) -> Dict[str, Tuple[float, float]]:
    return {
        row["label"]: (float(row["x"]), float(row["y"]))
        for row in nodes.to_dict("records")
        if row.get("x") not in (None, "")
    }
