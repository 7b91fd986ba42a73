"""Readers for the small companion tables (exclusions, aliases, overrides, ...)."""

import logging
from collections import OrderedDict
from pathlib import Path
from typing import Dict, List, Sequence, Tuple

import pandas as pd

from coevo_mapper.exceptions import FormatError
from coevo_mapper.items import ExclusionList

logger = logging.getLogger(__name__)


def read_table(path, columns: Sequence[str], delimiter="\t") -> pd.DataFrame:
    """Read a delimited table with a header row holding at least `columns`."""
    path = Path(path)
    try:
        frame = pd.read_csv(path, sep=delimiter, dtype=str, keep_default_na=False)
    except pd.errors.EmptyDataError:
        frame = pd.DataFrame(columns=list(columns))
    frame.columns = [str(c).strip() for c in frame.columns]
    missing = [c for c in columns if c not in frame.columns]
    if missing:
        raise FormatError(f"{path}: missing columns {missing}")
    for column in columns:
        frame[column] = frame[column].str.strip()
    return frame


def read_exclusions(path, delimiter="\t") -> ExclusionList:
    frame = read_table(path, ["id", "reason"], delimiter)
    return ExclusionList(dict(zip(frame["id"], frame["reason"])))


def read_pairs(path, delimiter="\t") -> List[Tuple[str, str]]:
    """(variant, canonical) pairs in file order."""
    frame = read_table(path, ["variant", "canonical"], delimiter)
    return list(zip(frame["variant"], frame["canonical"]))


def read_alias_map(path, delimiter="\t") -> Dict[str, str]:
    aliases = {}
    for variant, canonical in read_pairs(path, delimiter):
        if aliases.get(variant, canonical) != canonical:
            logger.warning(f"{path}: alias '{variant}' mapped twice, keeping '{canonical}'")
        aliases[variant] = canonical
    return aliases


def read_polylines(path, delimiter="\t") -> List[List[Tuple[float, float]]]:
    """Base map paths as lists of (lat, lon), in file order."""
    frame = read_table(path, ["path_id", "lat", "lon"], delimiter)
    paths = OrderedDict()
    for path_id, lat, lon in zip(frame["path_id"], frame["lat"], frame["lon"]):
        try:
            paths.setdefault(path_id, []).append((float(lat), float(lon)))
        except ValueError as e:
            raise FormatError(f"{path}: bad coordinate in path {path_id}: {e}") from e
    return list(paths.values())
