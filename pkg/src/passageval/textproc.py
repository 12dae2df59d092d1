"""Text preprocessing: tokens, stopword removal, stemming, unit bags.

A passage is reduced to a multiset of text units (unigram stems,
adjacent-stem bigrams, or gap-1 skip-gram pairs), optionally restricted
to the surface text of its anchor spans.
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources
from typing import Iterable, Mapping

from .corpus import Passage
from .porter import stem

# Reserved pair separator (U+241F SYMBOL FOR UNIT SEPARATOR): cannot
# collide with tokenizer output, which is alphanumeric only.
PAIR_SEPARATOR = "␟"

_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)


class Gram(Enum):
    """Shape of a text unit."""

    UNIGRAM = "unigram"
    BIGRAM = "bigram"
    SKIP_GAP1 = "skip_gap1"


@dataclass(frozen=True)
class UnitKind:
    """A unit shape plus whether units come from anchor text only."""

    gram: Gram
    entity_restricted: bool = False

    def label(self) -> str:
        suffix = ":entities" if self.entity_restricted else ""
        return f"{self.gram.value}{suffix}"


@dataclass(frozen=True)
class UnitBag:
    """Multiset of text units with their frequencies."""

    kind: UnitKind
    units: Mapping[str, int] = field(default_factory=dict)
    total: int = 0

    @classmethod
    def from_counts(cls, kind: UnitKind, counts: Mapping[str, int]) -> "UnitBag":
        units = {u: int(c) for u, c in counts.items() if c > 0}
        return cls(kind=kind, units=units, total=sum(units.values()))

    def support(self) -> int:
        """Number of distinct unit types."""
        return len(self.units)

    def is_empty(self) -> bool:
        return self.total == 0


def tokenize(text: str) -> list[str]:
    """Lowercase and split on maximal runs of non-alphanumeric characters."""
    return _TOKEN_RE.findall(text.lower())


def remove_stopwords(tokens: Iterable[str], stoplist: frozenset[str]) -> list[str]:
    return [t for t in tokens if t not in stoplist]


def pair_unit(a: str, b: str) -> str:
    return f"{a}{PAIR_SEPARATOR}{b}"


def extract_units(
    tokens: list[str],
    kind: UnitKind,
    *,
    strict_skipgrams: bool = False,
) -> UnitBag:
    """Build the unit bag of an already stopped+stemmed token list.

    SkipGap1 pairs tokens at distance 1 and 2 (adjacent pairs included);
    with strict_skipgrams only distance-2 pairs are kept.
    """
    counts: Counter[str] = Counter()
    n = len(tokens)
    if kind.gram is Gram.UNIGRAM:
        counts.update(tokens)
    elif kind.gram is Gram.BIGRAM:
        for i in range(n - 1):
            counts[pair_unit(tokens[i], tokens[i + 1])] += 1
    elif kind.gram is Gram.SKIP_GAP1:
        gaps = (2,) if strict_skipgrams else (1, 2)
        for gap in gaps:
            for i in range(n - gap):
                counts[pair_unit(tokens[i], tokens[i + gap])] += 1
    else:  # pragma: no cover - exhaustive enum
        raise ValueError(f"unknown gram kind: {kind.gram}")
    return UnitBag.from_counts(kind, counts)


def restrict_to_anchors(passage: Passage) -> list[str]:
    """Tokens of the anchor-span surface text only, in document order."""
    tokens: list[str] = []
    for span in sorted(passage.anchors, key=lambda s: s.start):
        tokens.extend(tokenize(passage.text[span.start:span.end]))
    return tokens


def sum_bags(kind: UnitKind, bags: Iterable[UnitBag]) -> UnitBag:
    """Multiset union (count sum) of bags that share a kind."""
    counts: Counter[str] = Counter()
    for bag in bags:
        if bag.kind != kind:
            raise ValueError(f"cannot sum bag of kind {bag.kind} into {kind}")
        counts.update(bag.units)
    return UnitBag.from_counts(kind, counts)


def load_stoplist(path) -> frozenset[str]:
    """Read a stoplist file: one lowercase token per line, '#' comments."""
    words = set()
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            word = line.strip()
            if word and not word.startswith("#"):
                words.add(word)
    return frozenset(words)


def default_stoplist() -> frozenset[str]:
    """The SMART English stopword list shipped with the package."""
    text = resources.files("passageval.data").joinpath("stopwords_smart.txt").read_text("utf-8")
    return frozenset(
        line.strip() for line in text.splitlines()
        if line.strip() and not line.startswith("#")
    )


class Preprocessor:
    """Tokenize -> remove stopwords -> stem, then bag extraction.

    Stateless apart from the stoplist and skip-gram mode, so instances
    are safe to share across threads.
    """

    def __init__(
        self,
        stoplist: frozenset[str] | None = None,
        *,
        strict_skipgrams: bool = False,
    ):
        self.stoplist = default_stoplist() if stoplist is None else stoplist
        self.strict_skipgrams = strict_skipgrams

    def tokens(self, text: str, *, stem_tokens: bool = True) -> list[str]:
        kept = remove_stopwords(tokenize(text), self.stoplist)
        if stem_tokens:
            return [stem(t) for t in kept]
        return kept

    def passage_tokens(
        self,
        passage: Passage,
        *,
        entity_restricted: bool = False,
        stem_tokens: bool = True,
    ) -> list[str]:
        if entity_restricted:
            raw = restrict_to_anchors(passage)
            kept = remove_stopwords(raw, self.stoplist)
            return [stem(t) for t in kept] if stem_tokens else kept
        return self.tokens(passage.text, stem_tokens=stem_tokens)

    def text_bag(self, text: str, kind: UnitKind) -> UnitBag:
        if kind.entity_restricted:
            raise ValueError("entity-restricted bags require a passage with anchors")
        return extract_units(
            self.tokens(text), kind, strict_skipgrams=self.strict_skipgrams
        )

    def passage_bag(self, passage: Passage, kind: UnitKind) -> UnitBag:
        tokens = self.passage_tokens(
            passage, entity_restricted=kind.entity_restricted
        )
        return extract_units(tokens, kind, strict_skipgrams=self.strict_skipgrams)
