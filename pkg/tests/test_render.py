import xml.etree.ElementTree as ET

import networkx as nx
import pytest

from coevo_mapper.burst import CO_BURST, FUNDING, PUBLICATION, BurstBar
from coevo_mapper.convergence import CitationFlow
from coevo_mapper.exceptions import RenderError
from coevo_mapper.render import (
    Canvas,
    burst_layout,
    discipline_legend,
    legend_frame,
    render_burst_figure,
    render_convergence_arcs,
    render_network_map,
    render_science_overlay,
    svg_bytes,
    write_svg,
)
from coevo_mapper.sciencemap import OverlaySymbol

SVG = "{http://www.w3.org/2000/svg}"


@pytest.fixture
def canvas():
    return Canvas()


@pytest.fixture
def bars():
    return [
        BurstBar("cps", FUNDING, 2010, 2011, 2.0, FUNDING),
        BurstBar("cps", FUNDING, 2012, 2012, 6.0, FUNDING),
        BurstBar("rfid", PUBLICATION, 2006, 2006, 5.0, PUBLICATION),
        BurstBar("big data", PUBLICATION, 2014, 2017, 3.0, CO_BURST),
    ]


def patches_by_gid(fig, prefix):
    return {p.get_gid(): p for p in fig.axes[0].patches if (p.get_gid() or "").startswith(prefix)}


def svg_ids(data):
    root = ET.fromstring(data)
    return {el.get("id") for el in root.iter(f"{SVG}g") if el.get("id")}


def test_canvas_validation():
    with pytest.raises(ValueError):
        Canvas(width=0)
    with pytest.raises(ValueError):
        Canvas(width=100, height=100, margin=50)
    assert Canvas(width=100, height=80, margin=10).inner == (10, 10, 90, 70)


def test_burst_figure_is_deterministic(bars, canvas):
    first = svg_bytes(render_burst_figure(bars, canvas, years=(1998, 2017)), canvas)
    second = svg_bytes(render_burst_figure(bars, canvas, years=(1998, 2017)), canvas)

    assert first == second
    assert b"<dc:date>" not in first
    ids = svg_ids(first)
    assert {"burst-0-2010", "burst-0-2012", "burst-1-2006", "burst-2-2014"} <= ids


def test_burst_bar_area_follows_weight(bars, canvas):
    fig = render_burst_figure(bars, canvas, years=(1998, 2017))
    layout = burst_layout(bars, canvas, years=(1998, 2017))

    rects = patches_by_gid(fig, "burst-")

    assert len(rects) == len(bars)
    assert layout.height_scale == pytest.approx(0.8 * layout.row_height / 6.0)
    assert rects["burst-0-2012"].get_height() == pytest.approx(3 * rects["burst-0-2010"].get_height())
    big_data = rects["burst-2-2014"]
    assert big_data.get_width() == pytest.approx(4 * layout.column_width)
    assert big_data.get_height() == pytest.approx(3.0 * layout.height_scale)
    assert tuple(big_data.get_facecolor()[:3]) == pytest.approx((0x8C / 255,) * 3)


def test_empty_burst_figure_renders(canvas):
    ids = svg_ids(svg_bytes(render_burst_figure([], canvas, years=(1998, 2017)), canvas))
    assert not any(i.startswith("burst-") for i in ids)


def test_network_map_circles(canvas):
    graph = nx.Graph()
    graph.add_node("a", citations=1, first_year=2000, label="a")
    graph.add_node("b", citations=4, first_year=2010, label="b")
    graph.add_edge("a", "b", weight=2)
    positions = {"a": (0.0, 0.0), "b": (1.0, 1.0)}

    fig = render_network_map(graph, positions, canvas, radius_scale=0.01, label_min_citations=2)

    circles = patches_by_gid(fig, "node-")
    assert set(circles) == {"node-a", "node-b"}
    assert circles["node-a"].radius == pytest.approx(0.01 * canvas.width)
    assert circles["node-b"].radius == pytest.approx(2 * circles["node-a"].radius)
    texts = [t.get_text() for t in fig.axes[0].texts]
    assert texts == ["b"]
    ET.fromstring(svg_bytes(fig, canvas))


def test_network_map_requires_positions(canvas):
    graph = nx.Graph([("a", "b")])
    with pytest.raises(RenderError):
        render_network_map(graph, {"a": (0.0, 0.0)}, canvas)


def test_network_map_with_basemap(canvas):
    graph = nx.Graph()
    graph.add_node("a", citations=9)
    basemap = [[(-1.0, -1.0), (1.0, -1.0), (1.0, 1.0)]]

    fig = render_network_map(graph, {"a": (0.0, 0.0)}, canvas, basemap=basemap)

    center = patches_by_gid(fig, "node-")["node-a"].center
    assert center == pytest.approx((canvas.width / 2, canvas.height / 2))


def test_arc_width_follows_count(canvas):
    flows = [CitationFlow("AI", 2015, "robotics", 2010, 1), CitationFlow("IoT", 2016, "AI", 2012, 5)]

    fig = render_convergence_arcs(flows, canvas, topics=["AI", "robotics", "IoT"], years=(1998, 2017))

    arrows = patches_by_gid(fig, "flow-")
    thin = arrows["flow-AI-2015-robotics-2010"]
    thick = arrows["flow-IoT-2016-AI-2012"]
    assert thick.get_linewidth() == pytest.approx(5 * thin.get_linewidth())
    ET.fromstring(svg_bytes(fig, canvas))


def test_arcs_without_flows(canvas):
    fig = render_convergence_arcs([], canvas, topics=["AI"])
    assert patches_by_gid(fig, "flow-") == {}


def test_overlay_wraps_across_the_seam(classification, canvas):
    symbols = [
        OverlaySymbol("sd01", 2.0, 40.0, 4.0, 8.0),
        OverlaySymbol("sd06", 98.5, 50.0, 1.0, 4.0),
        OverlaySymbol("sd04", 60.0, 35.0, 1.0, 4.0),
    ]

    fig = render_science_overlay(symbols, classification, canvas, seam_margin=30.0)

    circles = patches_by_gid(fig, "symbol-")
    assert set(circles) == {"symbol-sd01-0", "symbol-sd01-1", "symbol-sd06-0", "symbol-sd06-1", "symbol-sd04-0"}
    assert circles["symbol-sd01-0"].radius == 8.0
    x0, _, x1, _ = canvas.inner
    assert circles["symbol-sd01-1"].center[0] == pytest.approx(circles["symbol-sd01-0"].center[0] + (x1 - x0))


def test_write_svg(tmp_path, classification, canvas):
    path = write_svg(render_science_overlay([], classification, canvas), tmp_path / "figs" / "map.svg", canvas)

    assert path.exists()
    assert ET.parse(path).getroot().tag == f"{SVG}svg"


def test_legends(classification, canvas):
    frame = legend_frame(canvas.burst_palette, "burst")
    assert list(frame["class"]) == [FUNDING, PUBLICATION, CO_BURST]
    assert len(discipline_legend(classification)) == len(classification.disciplines)


def test_labels_use_the_canvas_font(bars):
    canvas = Canvas(font_family="monospace")
    flows = [CitationFlow("IoT", 2016, "AI", 2012, 5)]

    figures = [
        render_burst_figure(bars, canvas, years=(1998, 2017)),
        render_convergence_arcs(flows, canvas, topics=["AI", "IoT"], years=(1998, 2017)),
    ]

    for fig in figures:
        texts = list(fig.axes[0].texts)
        legend = fig.axes[0].get_legend()
        if legend is not None:
            texts += legend.get_texts()
        assert texts
        assert all(t.get_fontfamily() == ["monospace"] for t in texts)
    assert b"monospace" in svg_bytes(figures[0], canvas)
