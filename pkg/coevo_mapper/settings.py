# Settings for the coevo_mapper project
#
# Every tunable of the pipeline lives here as an UPPERCASE constant. Values are
# loaded through scrapy's settings machinery, so a flat key=value config file
# (see coevo_mapper.config) and command-line flags can override any of them.
#
#     https://docs.scrapy.org/en/latest/topics/settings.html

BOT_NAME = "coevo_mapper"

# =============================================================================
# INPUT FILES
# =============================================================================
# Tagged flat-file exports (one or more) and NSF award tables
PUBLICATION_FILES = []
AWARD_FILES = []

# Two-column tables: (id, reason), (variant, canonical), (variant, canonical)
EXCLUSION_FILE = None
ALIAS_FILE = None
MERGE_OVERRIDES_FILE = None

# (city, region, country, lat, lon) and base map polylines (path_id, lat, lon)
GAZETTEER_FILE = None
BASEMAP_FILE = None

# Classification tables for the science map
CLASSIFICATION_VENUE_FILE = None
CLASSIFICATION_SUBDISCIPLINE_FILE = None
CLASSIFICATION_DISCIPLINE_FILE = None
CLASSIFICATION_KEYWORD_FILE = None

OUTPUT_DIR = "output"

# =============================================================================
# PARSING
# =============================================================================
# Continuation lines of tagged exports start with exactly this many spaces
WOS_CONTINUATION_INDENT = 3
WOS_ENCODING = "utf-8-sig"

# Tags whose continuation lines are separate values rather than wrapped text
WOS_LIST_TAGS = ["AU", "C1", "CR"]

AWARD_DATE_FORMAT = "%m/%d/%Y"
AWARD_OPTIONAL_COPI_COLUMN = "Co-PIName(s)"

TABLE_DELIMITER = "\t"
LIST_SEPARATOR = "|"

# Parallel parsing of independent input files
PARSE_WORKERS = 4

# =============================================================================
# CORPUS
# =============================================================================
WINDOW_START = 1998
WINDOW_END = 2017

# label -> list of compound query terms
TOPIC_QUERIES = {
    "AI": ["artificial intelligence"],
    "IoT": ["internet of things", "IoT"],
    "robotics": ["robotics"],
}

# Record fields searched by the topic queries (keywords, title, abstract).
# Award keywords are only extracted after ingest, so awards match on text.
TOPIC_FIELDS = ["keywords", "title", "abstract"]

# Records outside the US are excluded from the geospatial network
GEOCODE_COUNTRY = "USA"

TOP_ENTITIES = 10
TOP_CITED = 5

# =============================================================================
# ITEM PIPELINES (ingest)
# =============================================================================
ITEM_PIPELINES = {
    "coevo_mapper.pipelines.ValidationPipeline": 100,
    "coevo_mapper.pipelines.WindowFilterPipeline": 200,
    "coevo_mapper.pipelines.ExclusionPipeline": 300,
    "coevo_mapper.pipelines.TopicTagPipeline": 400,
}

# =============================================================================
# LEXICON
# =============================================================================
# key_collision or ngram
FINGERPRINT_METHOD = "key_collision"
NGRAM_SIZE = 2

# =============================================================================
# BURST DETECTION
# =============================================================================
BURST_GAMMA = 1.0
BURST_SCALING = 2.0
BURST_STATES = 1
BURST_MIN_LENGTH = 1

# Terms occurring in fewer records than this are not tested for bursts
BURST_MIN_TERM_RECORDS = 2

BURST_TOP_N = 15
BURST_WORKERS = 4

# =============================================================================
# CO-AUTHOR NETWORKS
# =============================================================================
NETWORK_MIN_CITED = 1
NETWORK_MIN_EDGE_WEIGHT = 1
NETWORK_DROP_ISOLATES = True

# Layout randomness flows from this seed only; it must be set
LAYOUT_SEED = None
LAYOUT_ITERATIONS = 50
LAYOUT_WIDTH = 1000.0
LAYOUT_HEIGHT = 1000.0
LAYOUT_MARGIN = 20.0

PRODUCTIVITY_THRESHOLDS = [3, 4, 5]
TOP_CITIES = 10
TOP_AUTHORS = 10

# =============================================================================
# SCIENCE MAP
# =============================================================================
# Year slices as "start:end" strings
SCIENCE_SLICES = ["1998:2007", "2008:2017"]

# Symbol radius = scale * sqrt(value); shared by every slice of a series
SCIENCE_RADIUS_SCALE = 4.0
SCIENCE_SEAM_MARGIN = 30.0

# =============================================================================
# RENDERING
# =============================================================================
CANVAS_WIDTH = 800.0
CANVAS_HEIGHT = 600.0
CANVAS_MARGIN = 40.0

BURST_PALETTE = {
    "funding": "#1f77b4",
    "publication": "#ff7f0e",
    "co_burst": "#8c8c8c",
}

TOPIC_PALETTE = {
    "AI": "#e6c229",
    "robotics": "#d62728",
    "IoT": "#1f5fbf",
}

# Node radius = scale * sqrt(citations), in map units
NODE_RADIUS_SCALE = 0.004
LABEL_MIN_CITATIONS = 100
ARROW_WIDTH_PER_CITATION = 0.5
FONT_FAMILY = "sans-serif"
SVG_HASHSALT = "coevo_mapper"

# =============================================================================
# LOGGING
# =============================================================================
LOG_LEVEL = "INFO"
LOG_FORMAT = "%(asctime)s [%(name)s] %(levelname)s: %(message)s"
LOG_DATEFORMAT = "%Y-%m-%d %H:%M:%S"
LOG_FILE = None
