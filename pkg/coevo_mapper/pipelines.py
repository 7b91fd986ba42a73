"""
Ingest Pipelines

Item pipelines applied to every parsed record, in ITEM_PIPELINES order:
- Validation: required fields present, ids unique, award dates ordered
- Window filter: keep records inside the analysis window
- Exclusion: drop known false positives
- Topic tagging: label records by topic query

A pipeline rejects an item by raising DropItem; PipelineRunner counts the
reasons and passes the survivors on.
"""

import logging
from collections import Counter

from itemadapter import ItemAdapter
from scrapy.exceptions import DropItem
from scrapy.utils.misc import load_object

from coevo_mapper import corpus
from coevo_mapper.items import ExclusionList, is_award, topic_queries_from_mapping
from coevo_mapper.parsers.tables import read_exclusions

logger = logging.getLogger(__name__)


class ValidationPipeline:
    """
    Validate items have required fields before processing.
    Drops duplicates of an id already seen in this run.
    """

    REQUIRED_FIELDS = ["id"]

    def __init__(self):
        self.seen_ids = set()

    @classmethod
    def from_settings(cls, settings):
        return cls()

    def process_item(self, item, spider=None):
        adapter = ItemAdapter(item)

        for field in self.REQUIRED_FIELDS:
            if not adapter.get(field):
                raise DropItem(f"Missing required field: {field}")

        if is_award(item):
            if adapter.get("start_date") is None or adapter.get("end_date") is None:
                raise DropItem(f"Award {adapter['id']} without dates")
            if adapter["start_date"] > adapter["end_date"]:
                raise DropItem(f"Award {adapter['id']} ends before it starts")
            if adapter.get("amount", 0) < 0:
                raise DropItem(f"Award {adapter['id']} has a negative amount")
        elif adapter.get("year") is None:
            raise DropItem(f"Publication {adapter['id']} without year")

        key = (type(item).__name__, adapter["id"])
        if key in self.seen_ids:
            raise DropItem(f"Duplicate id: {adapter['id']}")
        self.seen_ids.add(key)
        return item


class WindowFilterPipeline:
    """Drop records outside [WINDOW_START, WINDOW_END]."""

    def __init__(self, window_start, window_end):
        if window_start > window_end:
            raise ValueError(f"window start {window_start} after end {window_end}")
        self.window_start = window_start
        self.window_end = window_end

    @classmethod
    def from_settings(cls, settings):
        return cls(settings.getint("WINDOW_START"), settings.getint("WINDOW_END"))

    def process_item(self, item, spider=None):
        if not corpus.in_window(item, self.window_start, self.window_end):
            raise DropItem(f"Outside window {self.window_start}-{self.window_end}")
        return item


class ExclusionPipeline:
    """Drop records listed in the exclusion table."""

    def __init__(self, exclusion_list=None):
        self.exclusion_list = exclusion_list or ExclusionList()

    @classmethod
    def from_settings(cls, settings):
        path = settings.get("EXCLUSION_FILE")
        if not path:
            return cls()
        return cls(read_exclusions(path, settings.get("TABLE_DELIMITER", "\t")))

    def process_item(self, item, spider=None):
        reason = self.exclusion_list.reasons.get(item["id"])
        if reason is not None:
            raise DropItem(f"Excluded: {reason or 'listed'}")
        return item


class TopicTagPipeline:
    """Set `topics` on each record from the configured topic queries."""

    def __init__(self, queries):
        self.matchers = [corpus.TopicMatcher(q) for q in queries]

    @classmethod
    def from_settings(cls, settings):
        queries = topic_queries_from_mapping(
            settings.getdict("TOPIC_QUERIES"), settings.getlist("TOPIC_FIELDS")
        )
        return cls(queries)

    def process_item(self, item, spider=None):
        item = item.copy()
        item["topics"] = corpus.topic_labels(item, self.matchers)
        return item


class PipelineRunner:
    """
    Run items through an ordered list of pipelines, outside a crawl.

    Mirrors how the crawler engine drives ITEM_PIPELINES: each pipeline's
    process_item gets the previous one's output, DropItem stops the item.
    """

    def __init__(self, pipelines):
        self.pipelines = list(pipelines)
        self.stats = {"processed": 0, "kept": 0, "dropped": Counter()}

    @classmethod
    def from_settings(cls, settings, **overrides):
        """Instantiate ITEM_PIPELINES by priority; `overrides` maps class path -> instance."""
        # a priority of None disables a pipeline
        enabled = {path: priority for path, priority in settings.getdict("ITEM_PIPELINES").items()
                   if priority is not None}
        pipelines = []
        for path, _ in sorted(enabled.items(), key=lambda kv: (kv[1], kv[0])):
            if path in overrides:
                pipelines.append(overrides[path])
                continue
            pipeline_cls = load_object(path)
            pipelines.append(pipeline_cls.from_settings(settings))
        return cls(pipelines)

    def process(self, items):
        kept = []
        for item in items:
            self.stats["processed"] += 1
            try:
                for pipeline in self.pipelines:
                    item = pipeline.process_item(item)
            except DropItem as e:
                self.stats["dropped"][str(e).split(":")[0]] += 1
                logger.debug(f"Dropped {item.get('id')}: {e}")
                continue
            kept.append(item)
        self.stats["kept"] += len(kept)
        logger.info(
            f"Pipeline stats: processed={self.stats['processed']} kept={self.stats['kept']} "
            f"dropped={dict(self.stats['dropped'])}"
        )
        return kept
