"""
Keyword normalization and term extraction

- Fingerprints group spelling variants of a keyword: the key-collision
  fingerprint sorts the deduplicated word tokens, the n-gram fingerprint the
  deduplicated character n-grams.
- Clusters of colliding variants are represented by their most frequent
  variant; user overrides merge what fingerprints cannot.
- MaxMatch segments free text against a lexicon, preferring the longest term
  at each position.
"""

import logging
import re
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Mapping, Sequence, Tuple, Union

from unidecode import unidecode

from coevo_mapper.exceptions import ConfigError

logger = logging.getLogger(__name__)

KEY_COLLISION = "key_collision"
NGRAM = "ngram"

_NOT_WORD_OR_SPACE = re.compile(r"[^a-z0-9\s]")
_NOT_ALNUM = re.compile(r"[^a-z0-9]")
_TOKEN_SPLIT = re.compile(r"[^\w-]+|_+")


@dataclass(frozen=True)
class Fingerprint:
    value: str
    method: str = KEY_COLLISION
    n: int = 0


@dataclass
class TermCluster:
    representative: str
    variants: List[Tuple[str, int]] = field(default_factory=list)

    @property
    def frequency(self):
        return sum(f for _, f in self.variants)

    @property
    def terms(self):
        return [t for t, _ in self.variants]


@dataclass(frozen=True)
class Lexicon:
    terms: FrozenSet[str]
    max_term_length: int

    def __len__(self):
        return len(self.terms)

    def __contains__(self, term):
        return term in self.terms


def _ascii_lower(term):
    return unidecode(term or "").lower()


def key_collision_fingerprint(term: str) -> Fingerprint:
    cleaned = _NOT_WORD_OR_SPACE.sub("", _ascii_lower(term.strip() if term else ""))
    tokens = sorted(set(cleaned.split()))
    return Fingerprint(" ".join(tokens), KEY_COLLISION)


def ngram_fingerprint(term: str, n: int = 2) -> Fingerprint:
    if n < 1:
        raise ValueError("n-gram size must be at least 1")
    cleaned = _NOT_ALNUM.sub("", _ascii_lower(term))
    if n > len(cleaned):
        return Fingerprint(cleaned, NGRAM, n)
    grams = sorted({cleaned[i:i + n] for i in range(len(cleaned) - n + 1)})
    return Fingerprint("".join(grams), NGRAM, n)


def fingerprint(term, method=KEY_COLLISION, n=2) -> Fingerprint:
    if method == KEY_COLLISION:
        return key_collision_fingerprint(term)
    if method == NGRAM:
        return ngram_fingerprint(term, n)
    raise ValueError(f"unknown fingerprint method '{method}'")


def _as_pairs(terms) -> List[Tuple[str, int]]:
    if isinstance(terms, Mapping):
        return list(terms.items())
    return [(t, f) for t, f in terms]


def _make_cluster(variants, representative=None):
    variants = sorted(variants, key=lambda tf: (-tf[1], tf[0]))
    return TermCluster(representative or variants[0][0], variants)


def cluster_terms(terms: Union[Mapping[str, int], Iterable[Tuple[str, int]]], method=KEY_COLLISION, n=2):
    """
    Group terms by identical fingerprint.

    The representative is the most frequent variant, the lexicographically
    smaller one on ties. Clusters come back sorted by representative.
    """
    groups = defaultdict(list)
    for term, frequency in _as_pairs(terms):
        if frequency < 1:
            raise ValueError(f"frequency of '{term}' must be at least 1")
        groups[fingerprint(term, method, n).value].append((term, frequency))
    clusters = [_make_cluster(variants) for variants in groups.values()]
    clusters.sort(key=lambda c: c.representative)
    logger.debug(f"Clustered {sum(len(c.variants) for c in clusters)} terms into {len(clusters)} clusters")
    return clusters


def apply_merge_overrides(clusters: Sequence[TermCluster], overrides: Iterable[Tuple[str, str]]):
    """
    Merge every cluster holding a listed variant (or the canonical name itself)
    under the canonical representative.

    Raises:
        ConfigError: one variant is mapped to two different canonical names
    """
    targets: Dict[str, str] = {}
    for variant, canonical in overrides:
        if targets.get(variant, canonical) != canonical:
            raise ConfigError(
                f"conflicting overrides for '{variant}': '{targets[variant]}' and '{canonical}'",
                key=variant,
            )
        targets[variant] = canonical
    if not targets:
        return list(clusters)

    canonicals = set(targets.values())
    merged: Dict[str, List[Tuple[str, int]]] = {c: [] for c in sorted(canonicals)}
    untouched = []
    for cluster in clusters:
        hit = None
        for term in cluster.terms:
            if term in targets:
                hit = targets[term]
                break
            if term in canonicals:
                hit = term
                break
        if hit is None:
            untouched.append(cluster)
        else:
            merged[hit].extend(cluster.variants)

    result = list(untouched)
    for canonical, variants in merged.items():
        if canonical not in {t for t, _ in variants}:
            variants.append((canonical, 0))
        result.append(_make_cluster(variants, representative=canonical))
    result.sort(key=lambda c: c.representative)
    return result


def canonical_map(clusters: Iterable[TermCluster]) -> Dict[str, str]:
    """variant -> representative"""
    return {term: c.representative for c in clusters for term in c.terms}


def tokenize(text: str) -> List[str]:
    """Lowercase tokens split on anything that is not a letter, digit or hyphen."""
    return [t for t in _TOKEN_SPLIT.split((text or "").lower()) if t.strip("-")]


def normalize_term(term: str) -> str:
    return " ".join(tokenize(term))


def build_lexicon(terms: Iterable[str]) -> Lexicon:
    normalized = frozenset(t for t in (normalize_term(term) for term in terms) if t)
    longest = max((len(t.split()) for t in normalized), default=0)
    return Lexicon(normalized, longest)


def maxmatch_extract(text: str, lexicon: Lexicon) -> List[str]:
    """
    Greedy longest-match segmentation of `text` against `lexicon`.

    Emitted spans never overlap and appear in text order.
    """
    if not lexicon.terms:
        return []
    tokens = tokenize(text)
    found = []
    i = 0
    while i < len(tokens):
        for width in range(min(lexicon.max_term_length, len(tokens) - i), 0, -1):
            candidate = " ".join(tokens[i:i + width])
            if candidate in lexicon.terms:
                found.append(candidate)
                i += width
                break
        else:
            i += 1
    return found


def cluster_report(clusters: Iterable[TermCluster]):
    """Rows of (representative, variant, frequency)."""
    return [(c.representative, term, freq) for c in clusters for term, freq in c.variants]
