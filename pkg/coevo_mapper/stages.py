"""
Pipeline stages

Each stage reads the artifacts of earlier stages from the output directory and
writes its own tables there. Missing inputs raise DependencyError naming the
stage that produces them.

    ingest -> keywords -> burst
                       -> network
                       -> sciencemap
                       -> converge
    burst, network, converge (+ sciencemap) -> render, report
"""

import logging
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Dict, List, Sequence, Tuple

import pandas as pd

from coevo_mapper import burst, convergence, corpus, lexicon, network, render, sciencemap
from coevo_mapper.config import PipelineConfig
from coevo_mapper.exceptions import ConfigError, DependencyError
from coevo_mapper.items import is_award, record_key, topic_slug
from coevo_mapper.parsers import parse_nsf_file, parse_wos_file
from coevo_mapper.parsers.tables import read_alias_map, read_pairs, read_polylines
from coevo_mapper.pipelines import PipelineRunner

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.10g"

# artifact -> stage writing it
PRODUCERS = {
    "publications.tsv": "ingest",
    "awards.tsv": "ingest",
    "ingest_errors.tsv": "ingest",
    "ingest_stats.tsv": "ingest",
    "keyword_clusters.tsv": "keywords",
    "record_terms.tsv": "keywords",
    "bursts.tsv": "burst",
    "burst_summary.tsv": "burst",
    "burst_bars.tsv": "burst",
    "burst_multiplicity.tsv": "burst",
    "network_stats.tsv": "network",
    "productivity.tsv": "network",
    "geocoding.tsv": "network",
    "top_cities.tsv": "network",
    "top_authors.tsv": "network",
    "science_locations.tsv": "sciencemap",
    "overlaps.tsv": "converge",
    "flows.tsv": "converge",
    "citation_stats.tsv": "converge",
    "trends.tsv": "converge",
    "annual_summary.tsv": "converge",
    "topic_statistics.tsv": "converge",
    "top_entities.tsv": "converge",
    "top_cited.tsv": "converge",
}

# per-topic artifacts, by file name prefix
PREFIX_PRODUCERS = {
    "nodes_": "network",
    "edges_": "network",
    "geo_": "network",
    "overlay_": "sciencemap",
    "disciplines_": "sciencemap",
}


def producer_of(name):
    name = Path(name).name
    if name in PRODUCERS:
        return PRODUCERS[name]
    for prefix, stage in PREFIX_PRODUCERS.items():
        if name.startswith(prefix):
            return stage
    return name


class StageContext:
    """Settings, validated config and artifact I/O shared by the stages."""

    def __init__(self, settings, config: PipelineConfig):
        self.settings = settings
        self.config = config
        self.out_dir = Path(config.output_dir)
        self.delimiter = settings.get("TABLE_DELIMITER", "\t")
        self.sep = settings.get("LIST_SEPARATOR", "|")
        self._records = {}

    def path(self, name) -> Path:
        return self.out_dir / name

    def require(self, *names):
        """
        Raises:
            DependencyError: for the first stage whose artifact is missing
        """
        for name in names:
            if not self.path(name).exists():
                raise DependencyError(producer_of(name), name)

    def write_frame(self, frame: pd.DataFrame, name):
        path = self.path(name)
        path.parent.mkdir(parents=True, exist_ok=True)
        frame.to_csv(path, sep=self.delimiter, index=False, lineterminator="\n", float_format=FLOAT_FORMAT)
        logger.debug(f"Wrote {path} ({len(frame)} rows)")
        return path

    def read_frame(self, name, dtype=None) -> pd.DataFrame:
        self.require(name)
        return pd.read_csv(self.path(name), sep=self.delimiter, keep_default_na=False, dtype=dtype)

    def raw_records(self, kind):
        self.require(f"{kind}s.tsv")
        return corpus.read_records(self.path(f"{kind}s.tsv"), kind, self.delimiter, self.sep)

    def records(self, kind):
        """Ingested records with keyword lists replaced by their normalized terms."""
        if kind not in self._records:
            self.require("record_terms.tsv")
            terms = {
                (row["kind"], row["id"]): [t for t in corpus.split_escaped(row["terms"], self.sep) if t]
                for row in self.read_frame("record_terms.tsv", dtype=str).to_dict("records")
            }
            field = "keywords" if kind == "award" else "author_keywords"
            records = []
            for item in self.raw_records(kind):
                item = item.copy()
                item[field] = terms.get((kind, item["id"]), [])
                records.append(item)
            self._records[kind] = records
        return self._records[kind]

    @property
    def labels(self):
        return self.config.labels

    @property
    def canvas(self):
        return render.Canvas.from_settings(self.settings)


# =============================================================================
# ingest
# =============================================================================

def run_ingest(ctx: StageContext):
    config = ctx.config
    if not config.publication_files and not config.award_files:
        raise ConfigError("no input files: set PUBLICATION_FILES or AWARD_FILES", key="PUBLICATION_FILES")

    settings = ctx.settings
    wos_kwargs = dict(
        continuation_indent=settings.getint("WOS_CONTINUATION_INDENT"),
        list_tags=settings.getlist("WOS_LIST_TAGS"),
        encoding=settings.get("WOS_ENCODING"),
    )
    nsf_kwargs = dict(
        copi_column=settings.get("AWARD_OPTIONAL_COPI_COLUMN"),
        date_format=settings.get("AWARD_DATE_FORMAT"),
    )
    jobs = [(parse_wos_file, path, wos_kwargs) for path in config.publication_files]
    jobs += [(parse_nsf_file, path, nsf_kwargs) for path in config.award_files]

    with ThreadPoolExecutor(max_workers=max(1, settings.getint("PARSE_WORKERS"))) as executor:
        results = list(executor.map(lambda job: job[0](job[1], **job[2]), jobs))

    parsed = [item for result in results for item in result.records]
    errors = [e for result in results for e in result.errors]

    runner = PipelineRunner.from_settings(settings)
    kept = runner.process(parsed)
    publications = [r for r in kept if not is_award(r)]
    awards = [r for r in kept if is_award(r)]

    ctx.out_dir.mkdir(parents=True, exist_ok=True)
    corpus.write_records(publications, ctx.path("publications.tsv"), "publication", ctx.delimiter, ctx.sep)
    corpus.write_records(awards, ctx.path("awards.tsv"), "award", ctx.delimiter, ctx.sep)
    ctx.write_frame(
        pd.DataFrame([(e.source, e.index, e.line, e.message) for e in errors],
                     columns=["source", "index", "line", "message"]),
        "ingest_errors.tsv",
    )
    stats = [("parsed", len(parsed)), ("parse_errors", len(errors)), ("kept", len(kept))]
    stats += [(f"dropped: {reason}", n) for reason, n in sorted(runner.stats["dropped"].items())]
    ctx.write_frame(pd.DataFrame(stats, columns=["statistic", "count"]), "ingest_stats.tsv")
    logger.info(f"Ingested {len(publications)} publications and {len(awards)} awards")


# =============================================================================
# keywords
# =============================================================================

def _unique(values):
    return list(dict.fromkeys(v for v in values if v))


def run_keywords(ctx: StageContext):
    publications = ctx.raw_records("publication")
    awards = ctx.raw_records("award")
    settings = ctx.settings

    frequencies = Counter(k for p in publications for k in p.get("author_keywords", []))
    clusters = lexicon.cluster_terms(
        frequencies, settings.get("FINGERPRINT_METHOD"), settings.getint("NGRAM_SIZE")
    )
    overrides_path = ctx.config.path("MERGE_OVERRIDES_FILE")
    if overrides_path:
        clusters = lexicon.apply_merge_overrides(clusters, read_pairs(overrides_path, ctx.delimiter))
    canonical = lexicon.canonical_map(clusters)

    vocabulary = [c.representative for c in clusters]
    vocabulary += [t for q in ctx.config.topic_queries for t in q.terms]
    terms_lexicon = lexicon.build_lexicon(vocabulary)

    rows = []
    for item in publications:
        terms = [lexicon.normalize_term(canonical.get(k, k)) for k in item.get("author_keywords", [])]
        rows.append(("publication", item["id"], corpus.join_escaped(_unique(terms), ctx.sep)))
    for item in awards:
        text = f"{item.get('title', '')} {item.get('abstract', '')}"
        terms = lexicon.maxmatch_extract(text, terms_lexicon)
        rows.append(("award", item["id"], corpus.join_escaped(_unique(terms), ctx.sep)))

    ctx.write_frame(
        pd.DataFrame(lexicon.cluster_report(clusters), columns=["representative", "variant", "frequency"]),
        "keyword_clusters.tsv",
    )
    ctx.write_frame(pd.DataFrame(rows, columns=["kind", "id", "terms"]), "record_terms.tsv")
    logger.info(f"{len(frequencies)} keywords in {len(clusters)} clusters; lexicon of {len(terms_lexicon)} terms")


# =============================================================================
# burst
# =============================================================================

def run_burst(ctx: StageContext):
    publications = ctx.records("publication")
    awards = ctx.records("award")
    config = ctx.config
    min_records = ctx.settings.getint("BURST_MIN_TERM_RECORDS")
    workers = ctx.settings.getint("BURST_WORKERS")

    burst_rows, summary_rows, bar_rows, multiplicity_rows = [], [], [], []
    for label in ctx.labels:
        found = {}
        summaries = {}
        for source, records in ((burst.FUNDING, corpus.records_with_topic(awards, label)),
                                (burst.PUBLICATION, corpus.records_with_topic(publications, label))):
            terms = burst.candidate_terms(records, min_records)
            found[source] = burst.detect_term_bursts(
                records, terms, config.window, config.burst_params, source, workers
            )
            summaries[source] = burst.summarize_and_rank(found[source], config.top_n)
            for k, n in burst.multiplicity_counts(found[source]).items():
                multiplicity_rows.append((label, source, k, n))

        cobursts = burst.find_cobursts(summaries[burst.FUNDING], summaries[burst.PUBLICATION])
        marked = []
        for source in burst.SOURCES:
            marked += burst.mark_cobursts(summaries[source], cobursts)
            for b in found[source]:
                burst_rows.append((label, b.term, b.source, b.start_year, b.end_year, b.weight,
                                   b.state_level, b.term.casefold() in cobursts))
        for s in marked:
            summary_rows.append((label, s.term, s.source, s.total_weight, len(s.bursts), s.co_burst))
        for bar in burst.layout_burst_bars(marked):
            bar_rows.append((label, bar.term, bar.source, bar.start_year, bar.end_year, bar.height, bar.color_class))

    ctx.write_frame(pd.DataFrame(burst_rows, columns=[
        "topic", "term", "source", "start_year", "end_year", "weight", "state_level", "co_burst"]), "bursts.tsv")
    ctx.write_frame(pd.DataFrame(summary_rows, columns=[
        "topic", "term", "source", "total_weight", "bursts", "co_burst"]), "burst_summary.tsv")
    ctx.write_frame(pd.DataFrame(bar_rows, columns=[
        "topic", "term", "source", "start_year", "end_year", "height", "color_class"]), "burst_bars.tsv")
    ctx.write_frame(pd.DataFrame(multiplicity_rows, columns=[
        "topic", "source", "bursts_per_term", "terms"]), "burst_multiplicity.tsv")


# =============================================================================
# network
# =============================================================================

def _stats_row(label, name, graph):
    report, _ = network.components(graph)
    return (label, name, report.node_count, report.edge_count, report.component_count,
            report.isolate_count, report.largest_component_size, report.avg_degree)


def _layout(graph, ctx: StageContext):
    settings = ctx.settings
    return network.force_layout(
        graph,
        seed=ctx.config.layout_seed,
        iterations=ctx.config.layout_iterations,
        width=settings.getfloat("LAYOUT_WIDTH"),
        height=settings.getfloat("LAYOUT_HEIGHT"),
        margin=settings.getfloat("LAYOUT_MARGIN"),
    )


def run_network(ctx: StageContext):
    publications = ctx.records("publication")
    config = ctx.config
    settings = ctx.settings
    thresholds = [int(t) for t in settings.getlist("PRODUCTIVITY_THRESHOLDS")]
    gazetteer_path = config.path("GAZETTEER_FILE")
    gazetteer = network.Gazetteer.from_file(gazetteer_path, ctx.delimiter) if gazetteer_path else None
    if gazetteer is None:
        logger.warning("GAZETTEER_FILE not set, skipping geospatial networks")

    stats, productivity, geocoding_rows, cities, authors = [], [], [], [], []
    graphs = {}
    for label in ctx.labels:
        graph = network.extract_cooccurrence(corpus.records_with_topic(publications, label))
        filtered = network.filter_network(graph, config.min_cited, config.min_edge_weight, config.drop_isolates)
        graphs[label] = (graph, filtered)
        stats.append(_stats_row(label, "full", graph))
        stats.append(_stats_row(label, "filtered", filtered))
        stats.append(_stats_row(label, "largest_component", network.largest_component(filtered)))
        for k, n in network.productivity_counts(graph, thresholds).items():
            productivity.append((label, k, n))
        for rank, (author, citations) in enumerate(
                network.top_nodes(graph, "citations", settings.getint("TOP_AUTHORS")), start=1):
            authors.append((label, rank, author, citations, graph.nodes[author]["papers"]))

    # layouts are independent per topic
    with ThreadPoolExecutor(max_workers=max(1, len(graphs))) as executor:
        layouts = dict(zip(graphs, executor.map(lambda g: _layout(g[1], ctx), graphs.values())))

    for label, (graph, filtered) in graphs.items():
        slug = topic_slug(label)
        _, membership = network.components(filtered)
        ctx.write_frame(network.node_table(filtered, membership, layouts[label]), f"nodes_{slug}.tsv")
        ctx.write_frame(network.edge_table(filtered), f"edges_{slug}.tsv")

        if gazetteer is None:
            continue
        geocoding = network.geocode(corpus.records_with_topic(publications, label), gazetteer,
                                    settings.get("GEOCODE_COUNTRY"))
        geocoding_rows.append((label, len(geocoding.locations), geocoding.excluded["no_address"],
                               geocoding.excluded["non_us"], geocoding.excluded["unknown_city"]))
        geo = network.geo_network(filtered, geocoding)
        positions = {n: network.mercator(d["lat"], d["lon"]) for n, d in geo.nodes(data=True)}
        _, geo_membership = network.components(geo)
        ctx.write_frame(network.node_table(geo, geo_membership, positions), f"geo_nodes_{slug}.tsv")
        ctx.write_frame(network.edge_table(geo), f"geo_edges_{slug}.tsv")
        for rank, (city, citations) in enumerate(
                network.top_cities(graph, geocoding, settings.getint("TOP_CITIES")), start=1):
            cities.append((label, rank, city, citations))

    ctx.write_frame(pd.DataFrame(stats, columns=[
        "topic", "network", "nodes", "edges", "components", "isolates", "largest_component", "avg_degree"]),
        "network_stats.tsv")
    ctx.write_frame(pd.DataFrame(productivity, columns=["topic", "more_than_papers", "authors"]), "productivity.tsv")
    ctx.write_frame(pd.DataFrame(geocoding_rows, columns=[
        "topic", "located", "no_address", "non_us", "unknown_city"]), "geocoding.tsv")
    ctx.write_frame(pd.DataFrame(cities, columns=["topic", "rank", "city", "citations"]), "top_cities.tsv")
    ctx.write_frame(pd.DataFrame(authors, columns=["topic", "rank", "author", "citations", "papers"]),
                    "top_authors.tsv")


# =============================================================================
# sciencemap
# =============================================================================

CLASSIFICATION_KEYS = (
    "CLASSIFICATION_VENUE_FILE", "CLASSIFICATION_SUBDISCIPLINE_FILE", "CLASSIFICATION_DISCIPLINE_FILE",
)


def has_classification(config: PipelineConfig):
    return all(config.path(key) for key in CLASSIFICATION_KEYS)


def load_classification(ctx: StageContext):
    for key in CLASSIFICATION_KEYS:
        if not ctx.config.path(key):
            raise ConfigError(f"{key} must be set for the science map", key=key)
    return sciencemap.load_classification(
        *(ctx.config.path(key) for key in CLASSIFICATION_KEYS),
        keyword_path=ctx.config.path("CLASSIFICATION_KEYWORD_FILE"),
        delimiter=ctx.delimiter,
    )


def overlay_name(label, year_slice):
    return f"overlay_{topic_slug(label)}_{year_slice[0]}_{year_slice[1]}.tsv"


def run_sciencemap(ctx: StageContext):
    classification = load_classification(ctx)
    publications = ctx.records("publication")
    awards = ctx.records("award")
    locations = sciencemap.code_records(publications + awards, classification)
    radius_scale = ctx.settings.getfloat("SCIENCE_RADIUS_SCALE")

    for label in ctx.labels:
        pubs = corpus.records_with_topic(publications, label)
        for year_slice in ctx.config.science_slices:
            symbols = sciencemap.aggregate_overlay(pubs, classification, year_slice, radius_scale, locations)
            ctx.write_frame(sciencemap.overlay_frame(symbols), overlay_name(label, year_slice))
        tables = []
        for kind, records in (("publication", pubs), ("award", corpus.records_with_topic(awards, label))):
            table = sciencemap.discipline_table(records, classification, locations)
            table.insert(0, "kind", kind)
            tables.append(table)
        ctx.write_frame(pd.concat(tables, ignore_index=True), f"disciplines_{topic_slug(label)}.tsv")

    rows = [
        (*record_key(item),
         ctx.sep.join(f"{sub}:{fraction:.10g}" for sub, fraction in locations[record_key(item)].shares))
        for item in publications + awards
    ]
    ctx.write_frame(pd.DataFrame(rows, columns=["kind", "id", "shares"]), "science_locations.tsv")


# =============================================================================
# converge
# =============================================================================

def run_converge(ctx: StageContext):
    publications = ctx.records("publication")
    awards = ctx.records("award")
    labels = ctx.labels

    overlap_frames = []
    for kind, records in (("publication", publications), ("award", awards)):
        report = convergence.set_overlaps(records, convergence.topic_keyword_sets(records, labels), labels)
        frame = report.to_frame()
        frame.insert(0, "kind", kind)
        overlap_frames.append(frame)
    ctx.write_frame(pd.concat(overlap_frames, ignore_index=True), "overlaps.tsv")

    flows = convergence.intercitation_matrix(publications)
    ctx.write_frame(flows.to_frame(), "flows.tsv")
    ctx.write_frame(
        pd.DataFrame([("unresolved", flows.unresolved), ("later_year", flows.later_year)],
                     columns=["statistic", "count"]),
        "citation_stats.tsv",
    )

    trends = []
    for label in labels:
        for kind, records in (("publication", publications), ("award", awards)):
            result = convergence.trend_test(convergence.annual_counts(records, label, ctx.config.window))
            trends.append((label, kind, result.slope, result.p_value, result.n_years))
    ctx.write_frame(pd.DataFrame(trends, columns=["topic", "kind", "slope", "p_value", "n_years"]), "trends.tsv")

    ctx.write_frame(corpus.annual_summary(publications, awards, *ctx.config.window), "annual_summary.tsv")
    ctx.write_frame(corpus.topic_statistics(publications, awards, labels), "topic_statistics.tsv")

    alias_path = ctx.config.path("ALIAS_FILE")
    aliases = read_alias_map(alias_path, ctx.delimiter) if alias_path else {}
    top_n = ctx.settings.getint("TOP_ENTITIES")
    entities = []
    for label in [None] + list(labels):
        pool = publications + awards
        if label is not None:
            pool = corpus.records_with_topic(pool, label)
        for selector in corpus.ENTITY_SELECTORS:
            ranked = corpus.rank_entities(pool, selector, aliases, top_n)
            for rank, (name, count) in enumerate(ranked, start=1):
                entities.append((label or "all", selector, rank, name, count))
    ctx.write_frame(pd.DataFrame(entities, columns=["topic", "entity", "rank", "name", "records"]),
                    "top_entities.tsv")

    cited = [
        (label, rank, p["id"], p["year"], p.get("times_cited", 0), p.get("title", ""))
        for label in labels
        for rank, p in enumerate(corpus.top_cited(publications, label, ctx.settings.getint("TOP_CITED")), start=1)
    ]
    ctx.write_frame(pd.DataFrame(cited, columns=["topic", "rank", "id", "year", "times_cited", "title"]),
                    "top_cited.tsv")


# =============================================================================
# render
# =============================================================================

def run_render(ctx: StageContext):
    ctx.require("burst_bars.tsv", "network_stats.tsv", "flows.tsv")
    canvas = ctx.canvas
    settings = ctx.settings
    figures = Path("figures")
    radius_scale = settings.getfloat("NODE_RADIUS_SCALE")
    label_min = settings.getint("LABEL_MIN_CITATIONS")

    bars = ctx.read_frame("burst_bars.tsv", dtype={"topic": str, "term": str})
    basemap_path = ctx.config.path("BASEMAP_FILE")
    basemap = read_polylines(basemap_path, ctx.delimiter) if basemap_path else []
    classification = load_classification(ctx) if has_classification(ctx.config) else None

    for label in ctx.labels:
        slug = topic_slug(label)
        rows = bars[bars["topic"] == label].to_dict("records")
        topic_bars = [
            burst.BurstBar(r["term"], r["source"], int(r["start_year"]), int(r["end_year"]),
                           float(r["height"]), r["color_class"])
            for r in rows
        ]
        fig = render.render_burst_figure(topic_bars, canvas, years=ctx.config.window)
        render.write_svg(fig, ctx.path(figures / f"bursts_{slug}.svg"), canvas)

        nodes = ctx.read_frame(f"nodes_{slug}.tsv", dtype={"label": str})
        edges = ctx.read_frame(f"edges_{slug}.tsv", dtype={"source": str, "target": str})
        graph = network.graph_from_tables(nodes, edges)
        fig = render.render_network_map(graph, network.positions_from_table(nodes), canvas,
                                        radius_scale=radius_scale, label_min_citations=label_min)
        render.write_svg(fig, ctx.path(figures / f"network_{slug}.svg"), canvas)

        if ctx.path(f"geo_nodes_{slug}.tsv").exists():
            geo_nodes = ctx.read_frame(f"geo_nodes_{slug}.tsv", dtype={"label": str})
            geo_edges = ctx.read_frame(f"geo_edges_{slug}.tsv", dtype={"source": str, "target": str})
            fig = render.render_network_map(
                network.graph_from_tables(geo_nodes, geo_edges),
                network.positions_from_table(geo_nodes),
                canvas,
                basemap=render.project_basemap(basemap, network.mercator),
                radius_scale=radius_scale,
                label_min_citations=label_min,
            )
            render.write_svg(fig, ctx.path(figures / f"geo_{slug}.svg"), canvas)

        if classification is not None:
            for year_slice in ctx.config.science_slices:
                name = overlay_name(label, year_slice)
                symbols = sciencemap.overlay_from_frame(ctx.read_frame(name, dtype={"subd_id": str}))
                fig = render.render_science_overlay(symbols, classification, canvas,
                                                    settings.getfloat("SCIENCE_SEAM_MARGIN"))
                render.write_svg(fig, ctx.path(figures / name.replace(".tsv", ".svg").replace("overlay_", "science_")),
                                 canvas)

    flows = [
        convergence.CitationFlow(r["source_topic"], int(r["source_year"]), r["target_topic"],
                                 int(r["target_year"]), int(r["count"]))
        for r in ctx.read_frame("flows.tsv", dtype={"source_topic": str, "target_topic": str}).to_dict("records")
    ]
    fig = render.render_convergence_arcs(flows, canvas, ctx.labels, ctx.config.window,
                                         settings.getfloat("ARROW_WIDTH_PER_CITATION"))
    render.write_svg(fig, ctx.path(figures / "convergence.svg"), canvas)

    ctx.write_frame(render.legend_frame(canvas.burst_palette, "bursts"), figures / "legend_bursts.tsv")
    ctx.write_frame(render.legend_frame(canvas.topic_palette, "topics"), figures / "legend_topics.tsv")
    if classification is not None:
        ctx.write_frame(render.discipline_legend(classification), figures / "legend_disciplines.tsv")


# =============================================================================
# report
# =============================================================================

def _section(lines, title):
    lines.extend(["", title, "-" * len(title)])


def run_report(ctx: StageContext):
    ctx.require("ingest_stats.tsv", "burst_summary.tsv", "network_stats.tsv", "trends.tsv", "overlaps.tsv")
    start, end = ctx.config.window
    lines = [f"Co-evolution report {start}-{end}"]

    _section(lines, "Ingest")
    for row in ctx.read_frame("ingest_stats.tsv", dtype={"statistic": str}).to_dict("records"):
        lines.append(f"{row['statistic']}: {row['count']}")

    _section(lines, "Topics")
    for row in ctx.read_frame("topic_statistics.tsv", dtype={"topic": str}).to_dict("records"):
        lines.append(
            f"{row['topic']}: {row['publications']} publications, {row['awards']} awards "
            f"(${row['award_amount']:,}), {row['unique_authors']} authors, "
            f"{row['unique_investigators']} investigators"
        )

    _section(lines, "Top organizations and funders")
    entities = ctx.read_frame("top_entities.tsv", dtype={"topic": str, "name": str})
    for entity, group in entities[entities["topic"] == "all"].groupby("entity", sort=True):
        top = ", ".join(f"{r['name']} ({r['records']})" for r in group.head(5).to_dict("records"))
        lines.append(f"{entity}: {top}")

    _section(lines, "Top cited")
    cited = ctx.read_frame("top_cited.tsv", dtype={"topic": str, "id": str, "title": str})
    for row in cited.to_dict("records"):
        lines.append(f"{row['topic']} {row['rank']}. {row['id']} ({row['year']}, {row['times_cited']} citations) "
                     f"{row['title']}")

    _section(lines, "Overlaps")
    for row in ctx.read_frame("overlaps.tsv", dtype={"topics": str}).to_dict("records"):
        lines.append(f"{row['kind']} {row['topics']}: {row['records']} records, {row['keywords']} keywords")

    _section(lines, "Top bursts")
    summary = ctx.read_frame("burst_summary.tsv", dtype={"topic": str, "term": str})
    for (topic, source), group in summary.groupby(["topic", "source"], sort=True):
        top = ", ".join(f"{r['term']} ({r['total_weight']:.2f}{', co-burst' if r['co_burst'] else ''})"
                        for r in group.head(5).to_dict("records"))
        lines.append(f"{topic} {source}: {top}")

    _section(lines, "Co-author networks")
    for row in ctx.read_frame("network_stats.tsv", dtype={"topic": str}).to_dict("records"):
        lines.append(
            f"{row['topic']} {row['network']}: {row['nodes']} nodes, {row['edges']} edges, "
            f"{row['components']} components ({row['isolates']} isolates), "
            f"largest {row['largest_component']}, average degree {row['avg_degree']:.2f}"
        )
    cities = ctx.read_frame("top_cities.tsv", dtype={"topic": str, "city": str})
    for topic, group in cities.groupby("topic", sort=True):
        top = ", ".join(f"{r['city']} ({r['citations']})" for r in group.head(3).to_dict("records"))
        lines.append(f"{topic} top cities: {top}")

    _section(lines, "Growth trends")
    for row in ctx.read_frame("trends.tsv", dtype={"topic": str}).to_dict("records"):
        lines.append(
            f"{row['topic']} {row['kind']}: slope {row['slope']:.3f}/year, p = {row['p_value']:.2g} "
            f"over {row['n_years']} years"
        )

    path = ctx.path("report.txt")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    logger.info(f"Wrote {path}")


# =============================================================================
# Registry
# =============================================================================

@dataclass(frozen=True)
class Stage:
    name: str
    run: Callable[[StageContext], None]
    requires: Tuple[str, ...] = ()


STAGES: Dict[str, Stage] = {
    stage.name: stage
    for stage in (
        Stage("ingest", run_ingest),
        Stage("keywords", run_keywords, ("publications.tsv", "awards.tsv")),
        Stage("burst", run_burst, ("record_terms.tsv",)),
        Stage("network", run_network, ("record_terms.tsv",)),
        Stage("sciencemap", run_sciencemap, ("record_terms.tsv",)),
        Stage("converge", run_converge, ("record_terms.tsv",)),
        Stage("render", run_render, ("burst_bars.tsv", "network_stats.tsv", "flows.tsv")),
        Stage("report", run_report, ("burst_summary.tsv", "network_stats.tsv", "trends.tsv")),
    )
}
ORDER: List[str] = list(STAGES)
SUBCOMMANDS: Sequence[str] = ORDER + ["all"]


def run_stage(name, ctx: StageContext):
    stage = STAGES[name]
    ctx.require(*stage.requires)
    logger.info(f"Running stage '{name}'")
    stage.run(ctx)


def run_all(ctx: StageContext):
    for name in ORDER:
        if name == "sciencemap" and not has_classification(ctx.config):
            logger.warning("Classification tables not configured, skipping stage 'sciencemap'")
            continue
        run_stage(name, ctx)
