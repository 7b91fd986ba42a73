import math
import random
from collections import Counter
from itertools import combinations

import networkx as nx
import pytest

from coevo_mapper import network
from coevo_mapper.items import Address
from coevo_mapper.network import Gazetteer, mercator


@pytest.fixture
def gazetteer():
    return Gazetteer({
        ("Pittsburgh", "PA"): (40.4406, -79.9959),
        ("Austin", "TX"): (30.2672, -97.7431),
        ("Toronto", "ON"): (43.6532, -79.3832),
    })


def random_papers(publication, n, seed, authors=40):
    rng = random.Random(seed)
    names = [f"A{i:02d}" for i in range(authors)]
    return [
        publication(str(i), rng.randint(1998, 2017), authors=rng.sample(names, rng.randint(0, 5)),
                    times_cited=rng.randint(0, 20))
        for i in range(n)
    ]


def test_cooccurrence_of_toy_papers(toy_papers):
    graph = network.extract_cooccurrence(toy_papers)

    assert graph["A2"]["A6"]["weight"] == 2
    assert graph["A1"]["A2"]["weight"] == 1
    assert graph["A3"]["A4"]["weight"] == 1
    assert graph.degree("A5") == 0
    assert graph.number_of_edges() == 3
    assert graph.nodes["A2"]["papers"] == 3
    assert graph.nodes["A2"]["citations"] == 1 + 2 + 5
    assert graph.nodes["A6"]["first_year"] == 2001


def test_single_author_paper_is_an_isolate(publication):
    graph = network.extract_cooccurrence([publication("1", 2000, authors=["Solo, S"])])

    assert list(graph.nodes) == ["Solo, S"]
    assert graph.number_of_edges() == 0


def test_edge_weights_match_pair_counting(publication):
    papers = random_papers(publication, 1000, seed=3)

    graph = network.extract_cooccurrence(papers)

    pairs = Counter()
    for paper in papers:
        names = sorted(set(paper["authors"]))
        for i in range(len(names)):
            for j in range(i + 1, len(names)):
                pairs[(names[i], names[j])] += 1
    assert {(min(a, b), max(a, b)): w for a, b, w in graph.edges(data="weight")} == dict(pairs)
    assert sum(d for _, d in graph.degree()) == 2 * graph.number_of_edges()
    assert sum(w for _, _, w in graph.edges(data="weight")) == sum(
        math.comb(len(set(p["authors"])), 2) for p in papers
    )


def test_components_of_toy_network(toy_papers):
    graph = network.extract_cooccurrence(toy_papers)

    report, membership = network.components(graph)

    assert report.component_count == 3
    assert report.isolate_count == 1
    assert report.largest_component_size == 3
    assert report.avg_degree == 1.0
    assert membership["A1"] == membership["A2"] == membership["A6"] == 0
    assert sorted(Counter(membership.values()).values()) == [1, 2, 3]


@pytest.mark.parametrize("nodes, edges, expected", [(17316, 31476, 3.64), (30784, 96982, 6.30)])
def test_average_degree_rounding(nodes, edges, expected):
    graph = nx.empty_graph(nodes)
    graph.add_edges_from(_edge_list(nodes, edges))
    assert graph.number_of_edges() == edges
    assert network.average_degree(graph) == expected


def _edge_list(nodes, edges):
    count = 0
    step = 1
    while count < edges:
        for i in range(nodes - step):
            yield i, i + step
            count += 1
            if count == edges:
                return
        step += 1


def test_filter_thresholds(toy_papers):
    graph = network.extract_cooccurrence(toy_papers)

    assert nx.utils.graphs_equal(network.filter_network(graph), graph)

    # A1 has 1 citation
    filtered = network.filter_network(graph, min_node_citations=2)
    assert "A1" not in filtered
    assert not filtered.has_edge("A1", "A2")

    filtered = network.filter_network(graph, min_edge_weight=2, drop_isolates=True)
    assert sorted(filtered.nodes) == ["A2", "A6"]


def test_filter_matches_rebuilt_network(publication):
    graph = network.extract_cooccurrence(random_papers(publication, 60, seed=9, authors=50))

    filtered = network.filter_network(graph, 5, 2, drop_isolates=True)

    kept = {n for n, c in graph.nodes(data="citations") if c >= 5}
    edges = {frozenset((a, b)) for a, b, w in graph.edges(data="weight") if a in kept and b in kept and w >= 2}
    nodes = {n for edge in edges for n in edge}
    assert set(filtered.nodes) == nodes
    assert {frozenset(e) for e in filtered.edges} == edges
    assert set(filtered.nodes) <= set(graph.nodes)


def test_largest_component(toy_papers):
    graph = network.extract_cooccurrence(toy_papers)

    assert sorted(network.largest_component(graph).nodes) == ["A1", "A2", "A6"]
    assert network.largest_component(nx.Graph()).number_of_nodes() == 0

    single = nx.Graph()
    single.add_node("x")
    assert list(network.largest_component(single).nodes) == ["x"]

    tied = nx.Graph([("d", "e"), ("b", "c")])
    assert sorted(network.largest_component(tied).nodes) == ["b", "c"]


def test_productivity(toy_papers):
    graph = network.extract_cooccurrence(toy_papers)
    assert network.productivity_counts(graph, [1, 2, 3]) == {1: 2, 2: 1, 3: 0}


def test_layout_single_node():
    graph = nx.Graph()
    graph.add_node("x")
    assert network.force_layout(graph, seed=1, width=200, height=100) == {"x": (100.0, 50.0)}


def test_layout_is_deterministic_and_inside_the_canvas(publication):
    graph = network.extract_cooccurrence(random_papers(publication, 40, seed=4, authors=30))

    first = network.force_layout(graph, seed=7, iterations=30, width=500, height=400, margin=10)
    second = network.force_layout(graph, seed=7, iterations=30, width=500, height=400, margin=10)

    assert first == second
    for x, y in first.values():
        assert math.isfinite(x) and math.isfinite(y)
        assert 10 <= x <= 490
        assert 10 <= y <= 390


def test_layout_requires_seed_and_iterations():
    graph = nx.Graph([("a", "b")])
    with pytest.raises(ValueError):
        network.force_layout(graph, seed=None)
    with pytest.raises(ValueError):
        network.force_layout(graph, seed=1, iterations=0)


def _distance(positions, a, b):
    return math.dist(positions[a], positions[b])


def test_connected_pair_ends_closer():
    connected = nx.Graph([("a", "b")])
    apart = nx.Graph()
    apart.add_nodes_from(["a", "b"])

    near = network.force_layout(connected, seed=3, iterations=50)
    far = network.force_layout(apart, seed=3, iterations=50)

    assert _distance(near, "a", "b") < _distance(far, "a", "b")


def test_edges_are_shorter_than_non_edges():
    graph = nx.connected_watts_strogatz_graph(30, 4, 0.1, seed=2)
    graph = nx.relabel_nodes(graph, {n: f"n{n:02d}" for n in graph.nodes})

    positions = network.force_layout(graph, seed=5, iterations=100)

    edge_mean = sum(_distance(positions, a, b) for a, b in graph.edges) / graph.number_of_edges()
    others = [(a, b) for a, b in combinations(sorted(graph.nodes), 2) if not graph.has_edge(a, b)]
    other_mean = sum(_distance(positions, a, b) for a, b in others) / len(others)
    assert edge_mean < other_mean


def test_geocode_uses_most_recent_address(located_papers, gazetteer):
    result = network.geocode(located_papers, gazetteer)

    assert set(result.locations) == {"Smith, J"}
    assert result.locations["Smith, J"].city == "Austin"
    assert result.locations["Smith, J"].lat == pytest.approx(30.2672)
    assert result.excluded == Counter({"non_us": 1, "unknown_city": 1, "no_address": 1})
    assert result.excluded_count == 3


def test_gazetteer_lookup_ignores_case(gazetteer):
    assert gazetteer.lookup("austin", "tx") == (30.2672, -97.7431)
    assert gazetteer.lookup("Paris", "") is None
    with pytest.raises(ValueError):
        Gazetteer({("Nowhere", ""): (95.0, 0.0)})


@pytest.mark.parametrize("lat, lon, expected", [
    (0, 0, (0.0, 0.0)),
    (0, 180, (math.pi, 0.0)),
    (41.88, -87.63, (-1.5295, 0.8072)),
])
def test_mercator(lat, lon, expected):
    x, y = mercator(lat, lon)
    assert x == pytest.approx(expected[0], abs=1e-3)
    assert y == pytest.approx(expected[1], abs=1e-3)


def test_mercator_clamps_latitude():
    assert mercator(90, 0) == mercator(85, 0)
    assert math.isfinite(mercator(-90, 0)[1])


def test_top_cities(located_papers, gazetteer):
    graph = network.extract_cooccurrence(located_papers)
    result = network.geocode(located_papers, gazetteer)

    assert network.top_cities(graph, result) == [("Austin, TX", 7)]
    assert network.top_cities(nx.Graph(), network.GeocodeResult()) == []


def test_top_cities_matches_group_by(publication):
    rng = random.Random(8)
    cities = [("Pittsburgh", "PA"), ("Austin", "TX")]
    gazetteer = Gazetteer({cities[0]: (40.4, -80.0), cities[1]: (30.3, -97.7)})
    papers = []
    homes = {}
    for i in range(20):
        name = f"Author {i}"
        city, region = homes[name] = cities[rng.randint(0, 1)]
        papers.append(publication(str(i), 2010, authors=[name], times_cited=rng.randint(0, 50),
                                  addresses=[Address(name, "Org", city, region, "USA", 2010)]))

    graph = network.extract_cooccurrence(papers)
    ranked = network.top_cities(graph, network.geocode(papers, gazetteer))

    expected = Counter()
    for paper in papers:
        city, region = homes[paper["authors"][0]]
        expected[f"{city}, {region}"] += paper["times_cited"]
    assert dict(ranked) == dict(expected)
    assert [c for c, _ in ranked] == sorted(expected, key=lambda c: (-expected[c], c))


def test_geo_network_and_tables(located_papers, gazetteer):
    graph = network.extract_cooccurrence(located_papers)
    geo = network.geo_network(graph, network.geocode(located_papers, gazetteer))

    assert list(geo.nodes) == ["Smith, J"]
    assert geo.nodes["Smith, J"]["city"] == "Austin, TX"

    _, membership = network.components(graph)
    positions = network.force_layout(graph, seed=1, iterations=5)
    nodes = network.node_table(graph, membership, positions)
    edges = network.edge_table(graph)

    assert list(nodes.columns) == network.NODE_COLUMNS
    assert list(edges.itertuples(index=False, name=None)) == [("Lee, K", "Smith, J", 1)]
    rebuilt = network.graph_from_tables(nodes.fillna(""), edges)
    assert nx.utils.graphs_equal(rebuilt, graph)
    assert network.positions_from_table(nodes) == positions
