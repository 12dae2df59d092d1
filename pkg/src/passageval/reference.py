"""Textual references for scoring passages.

Two flavors:

  * informativeness: per topic, the pooled unit bags of that topic's
    passages with a positive reference score;
  * interestingness: for a topic, the pooled unit bags of passages
    informative for any *other* topic whose fold differs from the
    topic's own fold (leave-fold-out, guarding against overfitting).

Topics are dealt into folds round-robin after a seeded shuffle, so all
passages of a topic share its fold.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from enum import Enum

from .corpus import Passage, Pool
from .metrics import BackgroundModel, ProbDist
from .textproc import Gram, Preprocessor, UnitBag, UnitKind, pair_unit


class EmptyReferenceError(ValueError):
    """The reference has no units (no informative source passages)."""


class Mode(Enum):
    INFORMATIVENESS = "informativeness"
    INTERESTINGNESS = "interestingness"


@dataclass(frozen=True)
class FoldAssignment:
    fold_count: int
    seed: int
    topic_to_fold: dict[str, int]

    def fold_of(self, topic_id: str) -> int:
        return self.topic_to_fold[topic_id]


def assign_folds(pool: Pool, fold_count: int, seed: int) -> FoldAssignment:
    """Deal topics round-robin into folds after a seeded shuffle."""
    topic_ids = sorted(pool.topics)
    if not 2 <= fold_count <= len(topic_ids):
        raise ValueError(
            f"fold_count {fold_count} out of range [2, {len(topic_ids)}]"
        )
    rng = random.Random(seed)
    rng.shuffle(topic_ids)
    mapping = {topic_id: i % fold_count for i, topic_id in enumerate(topic_ids)}
    return FoldAssignment(fold_count=fold_count, seed=seed, topic_to_fold=mapping)


@dataclass(frozen=True)
class Reference:
    mode: Mode
    topic_id: str
    unit_kind: UnitKind
    bag: UnitBag
    dist: ProbDist
    source_passage_ids: tuple[str, ...]
    excluded_fold: int | None = None

    @property
    def total_len(self) -> int:
        return self.bag.total


class ReferenceBuilder:
    """Builds and caches references, passage bags and background models.

    Passage bags are cached per (passage, kind); interestingness
    references are shared by all topics of a fold.  A builder instance
    is cheap to create; caches fill lazily.
    """

    def __init__(
        self,
        pool: Pool,
        pre: Preprocessor,
        folds: FoldAssignment | None = None,
    ):
        self.pool = pool
        self.pre = pre
        self.folds = folds
        self._passages_by_id = {p.passage_id: p for p in pool.passages}
        self._informative_by_topic: dict[str, list[Passage]] = {
            t: [] for t in pool.topics
        }
        for p in pool.passages:
            if p.ref_score > 0:
                self._informative_by_topic[p.topic_id].append(p)
        self._bag_cache: dict[tuple[str, UnitKind], UnitBag] = {}
        self._phi_cache: dict[tuple[str, UnitKind], Reference] = {}
        self._delta_cache: dict[tuple[int, UnitKind], tuple[UnitBag, tuple[str, ...]]] = {}
        self._informative_bag_cache: dict[UnitKind, UnitBag] = {}
        self._fold_bag_cache: dict[tuple[int, UnitKind], UnitBag] = {}
        self._background_cache: dict[UnitKind, BackgroundModel] = {}

    def passage_bag(self, passage: Passage, kind: UnitKind) -> UnitBag:
        key = (passage.passage_id, kind)
        bag = self._bag_cache.get(key)
        if bag is None:
            bag = self.pre.passage_bag(passage, kind)
            self._bag_cache[key] = bag
        return bag

    def background(self, kind: UnitKind) -> BackgroundModel:
        """Unit distribution over every passage of the pool, per kind."""
        model = self._background_cache.get(kind)
        if model is None:
            model = BackgroundModel.from_bags(
                kind, (self.passage_bag(p, kind) for p in self.pool.passages)
            )
            self._background_cache[kind] = model
        return model

    def _sum_counts(self, passages: list[Passage], kind: UnitKind) -> UnitBag:
        counts: dict[str, int] = {}
        for p in passages:
            for unit, c in self.passage_bag(p, kind).units.items():
                counts[unit] = counts.get(unit, 0) + c
        return UnitBag.from_counts(kind, counts)

    def informativeness(self, topic_id: str, kind: UnitKind) -> Reference:
        key = (topic_id, kind)
        ref = self._phi_cache.get(key)
        if ref is not None:
            return ref
        if topic_id not in self.pool.topics:
            raise KeyError(f"unknown topic {topic_id!r}")
        sources = self._informative_by_topic[topic_id]
        bag = self._sum_counts(sources, kind)
        if bag.is_empty():
            raise EmptyReferenceError(
                f"topic {topic_id!r} has no informative units for {kind.label()}"
            )
        ref = Reference(
            mode=Mode.INFORMATIVENESS,
            topic_id=topic_id,
            unit_kind=kind,
            bag=bag,
            dist=ProbDist.from_bag(bag),
            source_passage_ids=tuple(sorted(p.passage_id for p in sources)),
        )
        self._phi_cache[key] = ref
        return ref

    def _informative_bag(self, kind: UnitKind) -> UnitBag:
        bag = self._informative_bag_cache.get(kind)
        if bag is None:
            informative = [p for p in self.pool.passages if p.ref_score > 0]
            bag = self._sum_counts(informative, kind)
            self._informative_bag_cache[kind] = bag
        return bag

    def _fold_bag(self, fold: int, kind: UnitKind) -> UnitBag:
        key = (fold, kind)
        bag = self._fold_bag_cache.get(key)
        if bag is None:
            assert self.folds is not None
            members = [
                p
                for p in self.pool.passages
                if p.ref_score > 0 and self.folds.fold_of(p.topic_id) == fold
            ]
            bag = self._sum_counts(members, kind)
            self._fold_bag_cache[key] = bag
        return bag

    def interestingness(self, topic_id: str, kind: UnitKind) -> Reference:
        if self.folds is None:
            raise ValueError("interestingness references require a fold assignment")
        if topic_id not in self.pool.topics:
            raise KeyError(f"unknown topic {topic_id!r}")
        fold = self.folds.fold_of(topic_id)
        cached = self._delta_cache.get((fold, kind))
        if cached is None:
            total = self._informative_bag(kind)
            counts = dict(total.units)
            for unit, c in self._fold_bag(fold, kind).units.items():
                counts[unit] -= c
            bag = UnitBag.from_counts(kind, counts)
            sources = tuple(
                sorted(
                    p.passage_id
                    for p in self.pool.passages
                    if p.ref_score > 0 and self.folds.fold_of(p.topic_id) != fold
                )
            )
            cached = (bag, sources)
            self._delta_cache[(fold, kind)] = cached
        bag, sources = cached
        if bag.is_empty():
            raise EmptyReferenceError(
                f"no informative units outside fold {fold} for topic {topic_id!r}"
            )
        return Reference(
            mode=Mode.INTERESTINGNESS,
            topic_id=topic_id,
            unit_kind=kind,
            bag=bag,
            dist=ProbDist.from_bag(bag),
            source_passage_ids=sources,
            excluded_fold=fold,
        )

    def reference(self, mode: Mode, topic_id: str, kind: UnitKind) -> Reference:
        if mode is Mode.INFORMATIVENESS:
            return self.informativeness(topic_id, kind)
        return self.interestingness(topic_id, kind)

    def unit_sequence(
        self,
        mode: Mode,
        topic_id: str,
        gram: Gram,
        *,
        use_stems: bool = True,
    ) -> list[str]:
        """Concatenated unit sequences of a reference's source passages
        (passage_id ascending), for embedding document vectors."""
        ref = self.reference(mode, topic_id, UnitKind(gram))
        units: list[str] = []
        for passage_id in ref.source_passage_ids:
            passage = self._passages_by_id[passage_id]
            tokens = self.pre.passage_tokens(passage, stem_tokens=use_stems)
            if gram is Gram.UNIGRAM:
                units.extend(tokens)
            elif gram is Gram.BIGRAM:
                units.extend(
                    pair_unit(a, b) for a, b in zip(tokens, tokens[1:])
                )
            else:
                raise ValueError("embedding stores support unigrams and bigrams only")
        return units


def build_topic_reference(
    pool: Pool, topic_id: str, kind: UnitKind, pre: Preprocessor
) -> Reference:
    """Informativeness reference of one topic (pooled informative passages)."""
    return ReferenceBuilder(pool, pre).informativeness(topic_id, kind)


def build_interestingness_reference(
    pool: Pool,
    topic_id: str,
    folds: FoldAssignment,
    kind: UnitKind,
    pre: Preprocessor,
) -> Reference:
    """Leave-fold-out interestingness reference of one topic."""
    return ReferenceBuilder(pool, pre, folds=folds).interestingness(topic_id, kind)
