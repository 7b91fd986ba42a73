"""
SVG figures

Every figure is a matplotlib Figure with a single frameless axes whose data
coordinates are canvas units: (0, 0) bottom-left, (width, height) top-right.
write_svg pins the SVG id salt, keeps text as text and drops the date stamp,
so identical input gives byte-identical files.
"""

import io
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import matplotlib

matplotlib.use("Agg")

import networkx as nx  # noqa: E402
import pandas as pd  # noqa: E402
from matplotlib import colormaps, colors as mcolors  # noqa: E402
from matplotlib.collections import LineCollection  # noqa: E402
from matplotlib.figure import Figure  # noqa: E402
from matplotlib.patches import Circle, FancyArrowPatch, Patch, Rectangle  # noqa: E402

from coevo_mapper.burst import CO_BURST, FUNDING, PUBLICATION, BurstBar  # noqa: E402
from coevo_mapper.convergence import CitationFlow  # noqa: E402
from coevo_mapper.exceptions import RenderError  # noqa: E402
from coevo_mapper.sciencemap import Classification, OverlaySymbol  # noqa: E402

logger = logging.getLogger(__name__)

DPI = 100
FONT_SIZE = 8.0
BASEMAP_COLOR = "#c8c8c8"
EDGE_COLOR = "#7f7f7f"
AXIS_COLOR = "#404040"
FIRST_YEAR_CMAP = "Blues"


@dataclass
class Canvas:
    width: float = 800.0
    height: float = 600.0
    margin: float = 40.0
    burst_palette: Dict[str, str] = field(default_factory=lambda: {
        FUNDING: "#1f77b4", PUBLICATION: "#ff7f0e", CO_BURST: "#8c8c8c",
    })
    topic_palette: Dict[str, str] = field(default_factory=lambda: {
        "AI": "#e6c229", "robotics": "#d62728", "IoT": "#1f5fbf",
    })
    font_family: str = "sans-serif"
    hashsalt: str = "coevo_mapper"

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise ValueError("canvas width and height must be positive")
        if self.margin < 0 or 2 * self.margin >= min(self.width, self.height):
            raise ValueError(f"margin {self.margin} does not fit the canvas")

    @classmethod
    def from_settings(cls, settings):
        return cls(
            width=settings.getfloat("CANVAS_WIDTH"),
            height=settings.getfloat("CANVAS_HEIGHT"),
            margin=settings.getfloat("CANVAS_MARGIN"),
            burst_palette=settings.getdict("BURST_PALETTE"),
            topic_palette=settings.getdict("TOPIC_PALETTE"),
            font_family=settings.get("FONT_FAMILY"),
            hashsalt=settings.get("SVG_HASHSALT"),
        )

    @property
    def inner(self) -> Tuple[float, float, float, float]:
        """(x0, y0, x1, y1) of the drawable area."""
        return self.margin, self.margin, self.width - self.margin, self.height - self.margin

    def rc(self):
        return {
            "svg.hashsalt": self.hashsalt,
            "svg.fonttype": "none",
            "font.family": self.font_family,
            "font.size": FONT_SIZE,
        }

    def topic_color(self, label):
        return self.topic_palette.get(label, AXIS_COLOR)


def new_figure(canvas: Canvas):
    """Figure sized to the canvas with one axes in canvas units."""
    with matplotlib.rc_context(canvas.rc()):
        fig = Figure(figsize=(canvas.width / DPI, canvas.height / DPI), dpi=DPI)
        ax = fig.add_axes((0, 0, 1, 1))
    ax.set_xlim(0, canvas.width)
    ax.set_ylim(0, canvas.height)
    ax.set_axis_off()
    return fig, ax


def svg_bytes(fig: Figure, canvas: Canvas) -> bytes:
    buffer = io.BytesIO()
    with matplotlib.rc_context(canvas.rc()):
        fig.savefig(buffer, format="svg", metadata={"Date": None})
    return buffer.getvalue()


def write_svg(fig: Figure, path, canvas: Canvas):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(svg_bytes(fig, canvas))
    logger.info(f"Wrote {path}")
    return path


def _fit(points: Iterable[Tuple[float, float]], canvas: Canvas):
    """Uniform scale + offset taking the bounding box of `points` into the drawable area."""
    points = list(points)
    x0, y0, x1, y1 = canvas.inner
    if not points:
        return lambda x, y: (x, y)
    xs = [p[0] for p in points]
    ys = [p[1] for p in points]
    span_x = max(xs) - min(xs)
    span_y = max(ys) - min(ys)
    scale = min(
        (x1 - x0) / span_x if span_x > 0 else math.inf,
        (y1 - y0) / span_y if span_y > 0 else math.inf,
    )
    if math.isinf(scale):
        scale = 1.0
    cx = (min(xs) + max(xs)) / 2
    cy = (min(ys) + max(ys)) / 2
    mid_x = (x0 + x1) / 2
    mid_y = (y0 + y1) / 2
    return lambda x, y: (mid_x + (x - cx) * scale, mid_y + (y - cy) * scale)


# =============================================================================
# Bursts
# =============================================================================

@dataclass(frozen=True)
class BurstLayout:
    first_year: int
    last_year: int
    column_width: float
    row_height: float
    height_scale: float


def burst_layout(bars: Sequence[BurstBar], canvas: Canvas, years=None) -> BurstLayout:
    x0, y0, x1, y1 = canvas.inner
    if years is None:
        years = (min((b.start_year for b in bars), default=0), max((b.end_year for b in bars), default=0))
    first, last = years
    rows = len({(b.term, b.source) for b in bars}) or 1
    column_width = (x1 - x0) * 0.75 / (last - first + 1)
    row_height = (y1 - y0 - 2 * FONT_SIZE) / rows
    tallest = max((b.height for b in bars), default=0.0)
    height_scale = 0.8 * row_height / tallest if tallest > 0 else 0.0
    return BurstLayout(first, last, column_width, row_height, height_scale)


def render_burst_figure(bars: Sequence[BurstBar], canvas: Canvas, years=None) -> Figure:
    """
    Horizontal bars on a year axis, one row per (term, source).

    A bar spans its burst years; its drawn height is layout.height_scale times
    the per-year height, so its area is proportional to the burst weight.
    """
    bars = list(bars)
    layout = burst_layout(bars, canvas, years)
    fig, ax = new_figure(canvas)
    x0, y0, x1, y1 = canvas.inner
    label_width = (x1 - x0) * 0.25
    axis_y = y0 + FONT_SIZE * 2

    def year_x(year):
        return x0 + label_width + (year - layout.first_year) * layout.column_width

    ax.plot([year_x(layout.first_year), year_x(layout.last_year + 1)], [axis_y, axis_y],
            color=AXIS_COLOR, linewidth=0.8)
    if bars:
        for year in range(layout.first_year, layout.last_year + 1):
            ax.text(year_x(year) + layout.column_width / 2, axis_y - FONT_SIZE, str(year),
                    ha="center", va="top", fontsize=FONT_SIZE * 0.75, fontfamily=canvas.font_family, rotation=90)

    rows = []
    for bar in bars:
        if (bar.term, bar.source) not in rows:
            rows.append((bar.term, bar.source))
    for bar in bars:
        row = rows.index((bar.term, bar.source))
        base = y1 - (row + 1) * layout.row_height
        rect = Rectangle(
            (year_x(bar.start_year), base),
            bar.span * layout.column_width,
            bar.height * layout.height_scale,
            facecolor=canvas.burst_palette.get(bar.color_class, AXIS_COLOR),
            edgecolor="none",
        )
        rect.set_gid(f"burst-{row}-{bar.start_year}")
        ax.add_patch(rect)
    for row, (term, _) in enumerate(rows):
        ax.text(x0 + label_width - FONT_SIZE / 2, y1 - (row + 1) * layout.row_height, term,
                ha="right", va="bottom", fontsize=FONT_SIZE, fontfamily=canvas.font_family)

    handles = [
        Patch(facecolor=canvas.burst_palette[key], label=label)
        for key, label in ((FUNDING, "Funding"), (PUBLICATION, "Publications"), (CO_BURST, "Co-burst"))
        if key in canvas.burst_palette
    ]
    ax.legend(handles=handles, loc="upper right", frameon=False,
              prop={"family": canvas.font_family, "size": FONT_SIZE})
    return fig


# =============================================================================
# Networks
# =============================================================================

def project_basemap(paths, projection) -> List[List[Tuple[float, float]]]:
    """Apply `projection(lat, lon) -> (x, y)` to every base map path."""
    return [[projection(lat, lon) for lat, lon in path] for path in paths]


def first_year_colors(graph: nx.Graph) -> Dict[str, str]:
    """Darker fill for earlier first_year."""
    years = [y for _, y in graph.nodes(data="first_year") if y is not None]
    cmap = colormaps[FIRST_YEAR_CMAP]
    low, high = (min(years), max(years)) if years else (0, 0)
    result = {}
    for node, year in graph.nodes(data="first_year"):
        share = 0.0 if year is None or high == low else (high - year) / (high - low)
        result[node] = mcolors.to_hex(cmap(0.35 + 0.6 * share))
    return result


def _boxes_overlap(a, b):
    return a[0] < b[2] and b[0] < a[2] and a[1] < b[3] and b[1] < a[3]


def render_network_map(graph: nx.Graph, positions: Mapping[str, Tuple[float, float]], canvas: Canvas,
                       basemap: Optional[Sequence[Sequence[Tuple[float, float]]]] = None,
                       radius_scale=0.004, label_min_citations=100) -> Figure:
    """
    Base map, then edges (width by weight), then nodes (area by citations,
    darker for earlier first year), then labels for the most cited nodes.

    Positions and base map share one coordinate space, fitted to the canvas.
    Labels that would collide with an already placed label are skipped,
    most cited first.

    Raises:
        RenderError: a node has no position
    """
    for node in sorted(graph.nodes):
        if node not in positions:
            raise RenderError(f"node '{node}' has no position")
    basemap = [list(path) for path in basemap or []]
    to_canvas = _fit(list(positions[n] for n in graph.nodes) + [p for path in basemap for p in path], canvas)

    fig, ax = new_figure(canvas)
    if basemap:
        ax.add_collection(LineCollection(
            [[to_canvas(*p) for p in path] for path in basemap],
            colors=BASEMAP_COLOR, linewidths=0.6, zorder=1,
        ))

    edges = sorted((min(a, b), max(a, b), w) for a, b, w in graph.edges(data="weight", default=1))
    if edges:
        ax.add_collection(LineCollection(
            [[to_canvas(*positions[a]), to_canvas(*positions[b])] for a, b, _ in edges],
            colors=EDGE_COLOR, linewidths=[0.5 * w for _, _, w in edges], zorder=2,
        ))

    fills = first_year_colors(graph)
    unit = radius_scale * canvas.width
    for node in sorted(graph.nodes):
        citations = graph.nodes[node].get("citations", 0)
        circle = Circle(to_canvas(*positions[node]), unit * math.sqrt(citations),
                        facecolor=fills[node], edgecolor="white", linewidth=0.3, zorder=3)
        circle.set_gid(f"node-{node}")
        ax.add_patch(circle)

    placed = []
    candidates = sorted(
        (n for n in graph.nodes if graph.nodes[n].get("citations", 0) >= label_min_citations),
        key=lambda n: (-graph.nodes[n].get("citations", 0), n),
    )
    for node in candidates:
        label = graph.nodes[node].get("label", node)
        x, y = to_canvas(*positions[node])
        box = (x, y, x + 0.6 * FONT_SIZE * len(label), y + FONT_SIZE)
        if any(_boxes_overlap(box, other) for other in placed):
            continue
        placed.append(box)
        ax.text(x, y, label, fontsize=FONT_SIZE, fontfamily=canvas.font_family, ha="left", va="bottom", zorder=4)
    return fig


# =============================================================================
# Convergence
# =============================================================================

def render_convergence_arcs(flows: Sequence[CitationFlow], canvas: Canvas, topics: Sequence[str] = None,
                            years: Optional[Tuple[int, int]] = None, width_per_citation=0.5) -> Figure:
    """
    One vertical year axis per topic, later years higher up. Each flow is an
    arrow from (source topic, citing year) to (target topic, cited year),
    colored by the source topic, width proportional to its count.
    """
    flows = list(flows)
    topics = list(topics or sorted({f.source_topic for f in flows} | {f.target_topic for f in flows}))
    if years is None:
        all_years = [f.source_year for f in flows] + [f.target_year for f in flows]
        years = (min(all_years), max(all_years)) if all_years else (0, 1)
    first, last = years
    x0, y0, x1, y1 = canvas.inner
    axis_top = y1 - 2 * FONT_SIZE

    def year_y(year):
        if last == first:
            return (y0 + axis_top) / 2
        return y0 + (year - first) / (last - first) * (axis_top - y0)

    step = (x1 - x0) / max(len(topics), 1)
    axis_x = {topic: x0 + step * (i + 0.5) for i, topic in enumerate(topics)}

    fig, ax = new_figure(canvas)
    for topic in topics:
        ax.plot([axis_x[topic], axis_x[topic]], [y0, axis_top], color=canvas.topic_color(topic), linewidth=1.5)
        ax.text(axis_x[topic], y1 - FONT_SIZE, topic, ha="center", va="center",
                fontsize=FONT_SIZE, fontfamily=canvas.font_family)
    for year in (first, last):
        ax.text(x0, year_y(year), str(year), ha="left", va="center", fontsize=FONT_SIZE * 0.75,
                fontfamily=canvas.font_family)

    for flow in flows:
        start = (axis_x[flow.source_topic], year_y(flow.source_year))
        end = (axis_x[flow.target_topic], year_y(flow.target_year))
        arrow = FancyArrowPatch(
            start, end,
            connectionstyle="arc3,rad=0.2",
            arrowstyle="-|>",
            mutation_scale=6,
            linewidth=width_per_citation * flow.count,
            color=canvas.topic_color(flow.source_topic),
            alpha=0.8,
        )
        arrow.set_gid(f"flow-{flow.source_topic}-{flow.source_year}-{flow.target_topic}-{flow.target_year}")
        ax.add_patch(arrow)
    return fig


# =============================================================================
# Science map
# =============================================================================

def science_transform(classification: Classification, canvas: Canvas):
    return _fit([(s.x, s.y) for s in classification.subdisciplines.values()], canvas)


def render_science_overlay(symbols: Sequence[OverlaySymbol], classification: Classification, canvas: Canvas,
                           seam_margin=30.0) -> Figure:
    """
    Discipline-colored circles on the base map of all subdisciplines.

    The map wraps around horizontally: a circle within `seam_margin` of one
    side is drawn again just past the other side. Radii are used as given so
    a series of overlays shares one size scale.
    """
    to_canvas = science_transform(classification, canvas)
    x0, _, x1, _ = canvas.inner
    period = x1 - x0

    fig, ax = new_figure(canvas)
    base = sorted(classification.subdisciplines.values(), key=lambda s: s.id)
    for sub in base:
        ax.add_patch(Circle(to_canvas(sub.x, sub.y), 1.5, facecolor=BASEMAP_COLOR, edgecolor="none", zorder=1))

    for symbol in symbols:
        discipline = classification.disciplines[classification.discipline_of(symbol.subdiscipline)]
        x, y = to_canvas(symbol.x, symbol.y)
        copies = [x]
        if x1 - x <= seam_margin:
            copies.append(x - period)
        if x - x0 <= seam_margin:
            copies.append(x + period)
        for i, cx in enumerate(copies):
            circle = Circle((cx, y), symbol.radius, facecolor=discipline.color, edgecolor="none",
                            alpha=0.75, zorder=2, clip_on=True)
            circle.set_gid(f"symbol-{symbol.subdiscipline}-{i}")
            ax.add_patch(circle)
    return fig


# =============================================================================
# Legends
# =============================================================================

def legend_frame(palette: Mapping[str, str], kind: str) -> pd.DataFrame:
    return pd.DataFrame(
        [(kind, key, color) for key, color in palette.items()],
        columns=["legend", "class", "color"],
    )


def discipline_legend(classification: Classification) -> pd.DataFrame:
    return pd.DataFrame(
        [(d.id, d.name, d.color) for d in sorted(classification.disciplines.values(), key=lambda d: d.id)],
        columns=["discipline_id", "name", "color"],
    )
