"""
Configuration loading

Defaults come from coevo_mapper.settings through scrapy's settings machinery.
A flat `key = value` file overrides them, command-line flags override the file:

    settings = load_settings("run.cfg")
    settings.set("BURST_GAMMA", 2.0, priority="cmdline")
    config = PipelineConfig.from_settings(settings)
"""

import json
import logging
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from scrapy.settings import Settings
from scrapy.utils.project import get_project_settings

from coevo_mapper import settings as default_settings
from coevo_mapper.burst import BurstParams
from coevo_mapper.exceptions import ConfigError
from coevo_mapper.items import TopicQuery, topic_queries_from_mapping
from coevo_mapper.sciencemap import parse_slice

logger = logging.getLogger(__name__)

CONFIG_ENV = "COEVO_CONFIG"
SETTINGS_MODULE = "coevo_mapper.settings"

# Between "project" (20) and "spider" (30): above the defaults, below flags
CONFIG_FILE_PRIORITY = 25

PATH_KEYS = {
    "PUBLICATION_FILES", "AWARD_FILES", "EXCLUSION_FILE", "ALIAS_FILE",
    "MERGE_OVERRIDES_FILE", "GAZETTEER_FILE", "BASEMAP_FILE",
    "CLASSIFICATION_VENUE_FILE", "CLASSIFICATION_SUBDISCIPLINE_FILE",
    "CLASSIFICATION_DISCIPLINE_FILE", "CLASSIFICATION_KEYWORD_FILE",
    "OUTPUT_DIR", "LOG_FILE",
}

# Optional inputs; the rest must exist when set
INPUT_KEYS = sorted(PATH_KEYS - {"OUTPUT_DIR", "LOG_FILE"})


def known_keys() -> Dict[str, object]:
    """Setting name -> default value, for every name defined in settings.py."""
    return {name: getattr(default_settings, name) for name in dir(default_settings) if name.isupper()}


def parse_topic_queries(value) -> Dict[str, List[str]]:
    """
    Topic queries from a config value: JSON, or `label: term, term; label: term`.
    """
    value = value.strip()
    if value.startswith("{"):
        try:
            return json.loads(value)
        except json.JSONDecodeError as e:
            raise ConfigError(f"TOPIC_QUERIES is not valid JSON: {e}", key="TOPIC_QUERIES") from e
    queries = {}
    for part in value.split(";"):
        if not part.strip():
            continue
        label, sep, terms = part.partition(":")
        if not sep:
            raise ConfigError(f"topic query '{part.strip()}' needs 'label: terms'", key="TOPIC_QUERIES")
        queries[label.strip()] = [t.strip() for t in terms.split(",") if t.strip()]
    return queries


def _convert(key, raw, default, base_dir: Path):
    if key in PATH_KEYS:
        if isinstance(default, list):
            return [str((base_dir / p.strip()).resolve()) for p in raw.split(",") if p.strip()]
        return str((base_dir / raw).resolve()) if raw else None
    if isinstance(default, dict):
        if key == "TOPIC_QUERIES":
            return parse_topic_queries(raw)
        try:
            return json.loads(raw)
        except json.JSONDecodeError as e:
            raise ConfigError(f"{key} must be a JSON object: {e}", key=key) from e
    if isinstance(default, list):
        return [v.strip() for v in raw.split(",") if v.strip()]
    # scalars stay strings; Settings.getint/getfloat/getbool convert on read
    return raw


def read_config_file(path) -> Dict[str, object]:
    """
    Parse a flat `key = value` file. Keys match settings.py names without
    regard to case; relative paths resolve against the file's directory.

    Raises:
        ConfigError: unknown key or malformed line
    """
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    defaults = known_keys()
    values = {}
    for number, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, raw = line.partition("=")
        if not sep:
            raise ConfigError(f"{path}:{number}: expected 'key = value'")
        key = key.strip().upper()
        if key not in defaults:
            raise ConfigError(f"{path}:{number}: unknown configuration key '{key.lower()}'", key=key)
        values[key] = _convert(key, raw.strip(), defaults[key], path.parent)
    logger.debug(f"Read {len(values)} settings from {path}")
    return values


def load_settings(config_path: Optional[str] = None) -> Settings:
    """Project defaults, overridden by the config file (argument or $COEVO_CONFIG)."""
    os.environ.setdefault("SCRAPY_SETTINGS_MODULE", SETTINGS_MODULE)
    settings = get_project_settings()
    config_path = config_path or os.environ.get(CONFIG_ENV)
    if config_path:
        settings.setdict(read_config_file(config_path), priority=CONFIG_FILE_PRIORITY)
    return settings


@dataclass(frozen=True)
class PipelineConfig:
    """Validated view of the merged settings."""

    publication_files: Tuple[str, ...]
    award_files: Tuple[str, ...]
    window: Tuple[int, int]
    topic_queries: Tuple[TopicQuery, ...]
    burst_params: BurstParams
    min_cited: int
    min_edge_weight: int
    drop_isolates: bool
    layout_seed: int
    layout_iterations: int
    science_slices: Tuple[Tuple[int, int], ...]
    output_dir: str
    top_n: int
    paths: Dict[str, Optional[str]] = field(default_factory=dict)

    @property
    def labels(self):
        return [q.label for q in self.topic_queries]

    def path(self, key):
        return self.paths.get(key)

    @classmethod
    def from_settings(cls, settings: Settings):
        """
        Raises:
            ConfigError: naming the first offending key
        """
        def number(key, getter):
            try:
                return getter(key)
            except (TypeError, ValueError) as e:
                raise ConfigError(f"{key}: not a number: {settings.get(key)!r}", key=key) from e

        paths = {key: settings.get(key) for key in INPUT_KEYS}
        for key, value in paths.items():
            for path in value if isinstance(value, list) else [value]:
                if path and not Path(path).exists():
                    raise ConfigError(f"{key}: path does not exist: {path}", key=key)

        start = number("WINDOW_START", settings.getint)
        end = number("WINDOW_END", settings.getint)
        if start > end:
            raise ConfigError(f"window start {start} is after end {end}", key="WINDOW_START")

        if settings.get("LAYOUT_SEED") in (None, ""):
            raise ConfigError("LAYOUT_SEED must be set; layouts are seeded explicitly", key="LAYOUT_SEED")
        seed = number("LAYOUT_SEED", settings.getint)

        try:
            queries = topic_queries_from_mapping(settings.getdict("TOPIC_QUERIES"), settings.getlist("TOPIC_FIELDS"))
        except ValueError as e:
            raise ConfigError(str(e), key="TOPIC_QUERIES") from e
        if not queries:
            raise ConfigError("no topic queries configured", key="TOPIC_QUERIES")

        try:
            params = BurstParams(
                gamma=number("BURST_GAMMA", settings.getfloat),
                s=number("BURST_SCALING", settings.getfloat),
                num_burst_states=number("BURST_STATES", settings.getint),
                min_burst_length=number("BURST_MIN_LENGTH", settings.getint),
            )
        except ValueError as e:
            raise ConfigError(f"burst parameters: {e}", key="BURST_GAMMA") from e

        try:
            slices = tuple(parse_slice(s) for s in settings.getlist("SCIENCE_SLICES"))
        except ValueError as e:
            raise ConfigError(f"SCIENCE_SLICES: {e}", key="SCIENCE_SLICES") from e

        min_cited = number("NETWORK_MIN_CITED", settings.getint)
        min_edge_weight = number("NETWORK_MIN_EDGE_WEIGHT", settings.getint)
        if min_cited < 0 or min_edge_weight < 0:
            raise ConfigError("network thresholds must be non-negative", key="NETWORK_MIN_CITED")
        iterations = number("LAYOUT_ITERATIONS", settings.getint)
        if iterations < 1:
            raise ConfigError("LAYOUT_ITERATIONS must be at least 1", key="LAYOUT_ITERATIONS")
        top_n = number("BURST_TOP_N", settings.getint)
        if top_n < 1:
            raise ConfigError("BURST_TOP_N must be at least 1", key="BURST_TOP_N")

        return cls(
            publication_files=tuple(settings.getlist("PUBLICATION_FILES")),
            award_files=tuple(settings.getlist("AWARD_FILES")),
            window=(start, end),
            topic_queries=tuple(queries),
            burst_params=params,
            min_cited=min_cited,
            min_edge_weight=min_edge_weight,
            drop_isolates=settings.getbool("NETWORK_DROP_ISOLATES"),
            layout_seed=seed,
            layout_iterations=iterations,
            science_slices=slices,
            output_dir=settings.get("OUTPUT_DIR"),
            top_n=top_n,
            paths={key: value for key, value in paths.items() if not isinstance(value, list)},
        )
