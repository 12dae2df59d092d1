"""Scoring, ranking and normalized Cumulative Gain curves.

Every passage is scored against the reference of its topic (or its
leave-fold-out reference in interestingness mode), passages are ranked
by decreasing goodness, and nCG at a cut-off k is the sum of the human
grades of the top-k passages divided by the best grade sum any k
passages could reach.
"""

from __future__ import annotations

import logging
import multiprocessing
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

from .corpus import Pool
from .embeddings import DocVector, EmbeddingStore, cosine, doc_vector
from .metrics import (
    Direction,
    kl_divergence,
    kl_reference_stats,
    f1,
    logsim,
    rouge_n,
)
from .reference import EmptyReferenceError, Mode, ReferenceBuilder
from .textproc import Gram, Preprocessor, UnitKind, pair_unit

logger = logging.getLogger(__name__)

DEFAULT_CUTOFF_GRID = (10, 25, 50, 100, 250, 500, 1000, 2500, 5000, 10000, 20000)


class MeasureId(Enum):
    F1_1 = "F1_1"
    F1_2 = "F1_2"
    F1_SK = "F1_sk"
    KL_1 = "KL_1"
    KL_2 = "KL_2"
    KL_SK = "KL_sk"
    LS_1 = "LS_1"
    LS_2 = "LS_2"
    LS_SK = "LS_sk"
    W2V_G = "W2V_g"
    W2V_C = "W2V_c"
    W2V_C_BI = "W2V_c_bi"
    W2V_WP_BI = "W2V_wp_bi"
    LEN_INV = "LEN_INV"
    ROUGE_1 = "ROUGE_1"
    ROUGE_2 = "ROUGE_2"


_GRAM_OF = {
    MeasureId.F1_1: Gram.UNIGRAM,
    MeasureId.F1_2: Gram.BIGRAM,
    MeasureId.F1_SK: Gram.SKIP_GAP1,
    MeasureId.KL_1: Gram.UNIGRAM,
    MeasureId.KL_2: Gram.BIGRAM,
    MeasureId.KL_SK: Gram.SKIP_GAP1,
    MeasureId.LS_1: Gram.UNIGRAM,
    MeasureId.LS_2: Gram.BIGRAM,
    MeasureId.LS_SK: Gram.SKIP_GAP1,
    MeasureId.W2V_G: Gram.UNIGRAM,
    MeasureId.W2V_C: Gram.UNIGRAM,
    MeasureId.W2V_C_BI: Gram.BIGRAM,
    MeasureId.W2V_WP_BI: Gram.BIGRAM,
    MeasureId.LEN_INV: Gram.UNIGRAM,
    MeasureId.ROUGE_1: Gram.UNIGRAM,
    MeasureId.ROUGE_2: Gram.BIGRAM,
}

# The nine discrete measures that also run restricted to anchor text.
RESTRICTABLE_MEASURES = frozenset(
    {
        MeasureId.F1_1, MeasureId.F1_2, MeasureId.F1_SK,
        MeasureId.KL_1, MeasureId.KL_2, MeasureId.KL_SK,
        MeasureId.LS_1, MeasureId.LS_2, MeasureId.LS_SK,
    }
)

EMBEDDING_MEASURES = frozenset(
    {MeasureId.W2V_G, MeasureId.W2V_C, MeasureId.W2V_C_BI, MeasureId.W2V_WP_BI}
)

# The thirteen measures evaluated in the source study.
PAPER_MEASURE_SET = tuple(
    m for m in MeasureId
    if m not in {MeasureId.LEN_INV, MeasureId.ROUGE_1, MeasureId.ROUGE_2}
)

DEFAULT_MEASURES = tuple(sorted(RESTRICTABLE_MEASURES, key=lambda m: m.value)) + (
    MeasureId.LEN_INV,
)

_MEASURE_ORDER = {m: i for i, m in enumerate(MeasureId)}


def measure_direction(measure: MeasureId) -> Direction:
    if measure in (MeasureId.KL_1, MeasureId.KL_2, MeasureId.KL_SK):
        return Direction.LOWER_IS_BETTER
    return Direction.HIGHER_IS_BETTER


@dataclass(frozen=True)
class MeasureKey:
    """A measure plus whether it runs on anchor text only."""

    measure: MeasureId
    entity_restricted: bool = False

    def __post_init__(self):
        if self.entity_restricted and self.measure not in RESTRICTABLE_MEASURES:
            raise ValueError(
                f"{self.measure.value} cannot be entity-restricted"
            )

    @property
    def gram(self) -> Gram:
        return _GRAM_OF[self.measure]

    @property
    def unit_kind(self) -> UnitKind:
        return UnitKind(self.gram, self.entity_restricted)

    @property
    def direction(self) -> Direction:
        return measure_direction(self.measure)

    def label(self) -> str:
        return self.measure.value + ("_ent" if self.entity_restricted else "")

    def sort_index(self) -> tuple[int, int]:
        return (_MEASURE_ORDER[self.measure], int(self.entity_restricted))


@dataclass(frozen=True)
class ScoredPassage:
    passage_id: str
    topic_id: str
    measure: MeasureKey
    value: float
    ref_score: float


@dataclass(frozen=True)
class NcgCurve:
    measure: MeasureKey
    mode: Mode
    points: tuple[tuple[int, float], ...]


@dataclass(frozen=True)
class EvalConfig:
    measures: tuple[MeasureKey, ...] = tuple(MeasureKey(m) for m in DEFAULT_MEASURES)
    unit_filter: tuple[Gram, ...] | None = None
    cutoffs: tuple[int, ...] | None = None  # None: default grid clipped to pool
    fold_count: int = 12
    fold_seed: int = 0
    tie_break: str = "passage_id"  # or "random"
    tie_seed: int = 0
    kl_min_length: int = 0  # 0 disables the minimum-length filter
    strict_skipgrams: bool = False
    workers: int = 1

    def __post_init__(self):
        if self.cutoffs is not None:
            if not self.cutoffs:
                raise ValueError("cut-off grid must not be empty")
            if any(k <= 0 for k in self.cutoffs):
                raise ValueError("cut-offs must be positive")
            if list(self.cutoffs) != sorted(set(self.cutoffs)):
                raise ValueError("cut-offs must be strictly increasing")
        if self.tie_break not in ("passage_id", "random"):
            raise ValueError(f"unknown tie-break rule {self.tie_break!r}")

    def active_measures(self) -> tuple[MeasureKey, ...]:
        keys = self.measures
        if self.unit_filter is not None:
            keys = tuple(k for k in keys if k.gram in self.unit_filter)
        return tuple(sorted(set(keys), key=MeasureKey.sort_index))


@dataclass
class EvalContext:
    pool: Pool
    pre: Preprocessor
    refs: ReferenceBuilder
    stores: dict[MeasureId, EmbeddingStore] = field(default_factory=dict)


def default_cutoffs(n: int) -> tuple[int, ...]:
    """The standard grid clipped to the pool size, always ending at n."""
    if n <= 0:
        raise ValueError("pool has no rankable passages")
    return tuple(sorted({k for k in DEFAULT_CUTOFF_GRID if k < n} | {n}))


def _passage_units(
    pre: Preprocessor, passage, gram: Gram, use_stems: bool
) -> list[str]:
    tokens = pre.passage_tokens(passage, stem_tokens=use_stems)
    if gram is Gram.UNIGRAM:
        return tokens
    if gram is Gram.BIGRAM:
        return [pair_unit(a, b) for a, b in zip(tokens, tokens[1:])]
    raise ValueError("embedding stores support unigrams and bigrams only")


def _score_discrete(ctx: EvalContext, key: MeasureKey, mode: Mode,
                    config: EvalConfig) -> list[ScoredPassage]:
    kind = key.unit_kind
    family = key.measure.value.split("_")[0]  # F1 / KL / LS / ROUGE
    background = ctx.refs.background(kind) if family == "KL" else None
    kl_stats_cache: dict[int, object] = {}
    empty_topics: set[str] = set()
    out: list[ScoredPassage] = []
    for passage in ctx.pool.passages:
        if passage.topic_id in empty_topics:
            continue
        try:
            ref = ctx.refs.reference(mode, passage.topic_id, kind)
        except EmptyReferenceError as exc:
            logger.warning("skipping topic %s for %s: %s",
                           passage.topic_id, key.label(), exc)
            empty_topics.add(passage.topic_id)
            continue
        bag = ctx.refs.passage_bag(passage, kind)
        if family == "KL":
            if config.kl_min_length > 0:
                n_tokens = len(ctx.pre.passage_tokens(passage))
                if n_tokens < config.kl_min_length:
                    continue
            stats = kl_stats_cache.get(id(ref.bag))
            if stats is None:
                stats = kl_reference_stats(ref.bag, background)
                kl_stats_cache[id(ref.bag)] = stats
            score = kl_divergence(ref.bag, bag, background, ref_stats=stats)
        elif family == "LS":
            score = logsim(bag, ref.bag)
        elif family == "F1":
            score = f1(bag, ref.bag)
        elif family == "ROUGE":
            score = rouge_n(bag, ref.bag)
        else:  # pragma: no cover
            raise ValueError(f"not a discrete measure: {key.measure}")
        out.append(ScoredPassage(passage.passage_id, passage.topic_id,
                                 key, score.value, passage.ref_score))
    return out


def _score_len_inv(ctx: EvalContext, key: MeasureKey) -> list[ScoredPassage]:
    out = []
    for passage in ctx.pool.passages:
        n = len(ctx.pre.passage_tokens(passage))
        value = 1.0 / n if n > 0 else 0.0
        out.append(ScoredPassage(passage.passage_id, passage.topic_id,
                                 key, value, passage.ref_score))
    return out


def _score_embedding(ctx: EvalContext, key: MeasureKey, mode: Mode) -> list[ScoredPassage]:
    store = ctx.stores.get(key.measure)
    if store is None:
        raise ValueError(
            f"no embedding store registered for measure {key.measure.value}"
        )
    ref_vectors: dict[str, DocVector] = {}
    empty_topics: set[str] = set()
    out: list[ScoredPassage] = []
    for passage in ctx.pool.passages:
        topic_id = passage.topic_id
        if topic_id in empty_topics:
            continue
        ref_vec = ref_vectors.get(topic_id)
        if ref_vec is None:
            try:
                units = ctx.refs.unit_sequence(
                    mode, topic_id, store.gram, use_stems=store.use_stems
                )
            except EmptyReferenceError as exc:
                logger.warning("skipping topic %s for %s: %s",
                               topic_id, key.label(), exc)
                empty_topics.add(topic_id)
                continue
            ref_vec = doc_vector(units, store)
            ref_vectors[topic_id] = ref_vec
        units = _passage_units(ctx.pre, passage, store.gram, store.use_stems)
        value = cosine(doc_vector(units, store), ref_vec).value
        out.append(ScoredPassage(passage.passage_id, passage.topic_id,
                                 key, value, passage.ref_score))
    return out


def score_pool(ctx: EvalContext, key: MeasureKey, mode: Mode,
               config: EvalConfig | None = None) -> list[ScoredPassage]:
    """Score every passage of the pool with one measure."""
    config = config or EvalConfig()
    if key.measure is MeasureId.LEN_INV:
        return _score_len_inv(ctx, key)
    if key.measure in EMBEDDING_MEASURES:
        return _score_embedding(ctx, key, mode)
    return _score_discrete(ctx, key, mode, config)


def rank(scored: list[ScoredPassage], *, tie_break: str = "passage_id",
         tie_seed: int = 0) -> list[ScoredPassage]:
    """Order by decreasing goodness; ties broken by ascending passage_id
    (or by a seeded shuffle with tie_break="random")."""
    if not scored:
        return []
    keys = {sp.measure for sp in scored}
    if len(keys) > 1:
        raise ValueError(f"mixed measures in ranking: {sorted(k.label() for k in keys)}")
    measure = next(iter(keys))
    sign = 1.0 if measure.direction is Direction.LOWER_IS_BETTER else -1.0
    if tie_break == "random":
        ids = sorted({sp.passage_id for sp in scored})
        rng = random.Random(tie_seed)
        rng.shuffle(ids)
        order = {pid: i for i, pid in enumerate(ids)}
        return sorted(scored, key=lambda sp: (sign * sp.value, order[sp.passage_id]))
    return sorted(scored, key=lambda sp: (sign * sp.value, sp.passage_id))


def ncg_curve(ranked: list[ScoredPassage], cutoffs: tuple[int, ...],
              mode: Mode) -> NcgCurve:
    """Normalized cumulative gain of a ranked list at each cut-off.

    Numerator: grade sum of the top min(k, n) passages.  Denominator:
    the k largest grades in the whole list (the ideal ranking); a zero
    denominator yields 0 by convention.
    """
    if not ranked:
        raise ValueError("cannot compute nCG of an empty ranking")
    measure = ranked[0].measure
    grades = [sp.ref_score for sp in ranked]
    ideal = sorted(grades, reverse=True)
    achieved_prefix = [0.0]
    ideal_prefix = [0.0]
    for g_a, g_i in zip(grades, ideal):
        achieved_prefix.append(achieved_prefix[-1] + g_a)
        ideal_prefix.append(ideal_prefix[-1] + g_i)
    n = len(grades)
    points = []
    for k in cutoffs:
        top = min(k, n)
        denom = ideal_prefix[top]
        value = achieved_prefix[top] / denom if denom > 0 else 0.0
        points.append((k, value))
    return NcgCurve(measure=measure, mode=mode, points=tuple(points))


# Parallel scoring state, inherited by forked workers.
_FORK_STATE: tuple | None = None


def _score_worker(label: str) -> tuple[str, list[ScoredPassage]]:
    ctx, mode, config, by_label = _FORK_STATE
    return label, score_pool(ctx, by_label[label], mode, config)


def _prebuild_references(ctx: EvalContext, keys, mode: Mode) -> None:
    """Materialize references and backgrounds up front so forked workers
    inherit warm caches (and warnings appear once)."""
    kinds = {k.unit_kind for k in keys if k.measure not in EMBEDDING_MEASURES
             and k.measure is not MeasureId.LEN_INV}
    kl_kinds = {k.unit_kind for k in keys
                if k.measure in (MeasureId.KL_1, MeasureId.KL_2, MeasureId.KL_SK)}
    for kind in sorted(kinds, key=lambda k: (k.gram.value, k.entity_restricted)):
        for topic_id in ctx.pool.topic_ids():
            try:
                ctx.refs.reference(mode, topic_id, kind)
            except EmptyReferenceError:
                pass
    for kind in sorted(kl_kinds, key=lambda k: (k.gram.value, k.entity_restricted)):
        ctx.refs.background(kind)


def score_all(ctx: EvalContext, config: EvalConfig, mode: Mode
              ) -> dict[MeasureKey, list[ScoredPassage]]:
    """Score the pool with every active measure, optionally in parallel."""
    global _FORK_STATE
    keys = config.active_measures()
    _prebuild_references(ctx, keys, mode)
    results: dict[MeasureKey, list[ScoredPassage]] = {}
    use_fork = (
        config.workers > 1
        and len(keys) > 1
        and "fork" in multiprocessing.get_all_start_methods()
    )
    if use_fork:
        by_label = {k.label(): k for k in keys}
        _FORK_STATE = (ctx, mode, config, by_label)
        try:
            with ProcessPoolExecutor(
                max_workers=min(config.workers, len(keys)),
                mp_context=multiprocessing.get_context("fork"),
            ) as executor:
                for label, scored in executor.map(_score_worker, sorted(by_label)):
                    results[by_label[label]] = scored
        finally:
            _FORK_STATE = None
    else:
        for key in keys:
            results[key] = score_pool(ctx, key, mode, config)
    return {k: results[k] for k in keys}


def run_experiment(
    ctx: EvalContext,
    config: EvalConfig,
    mode: Mode,
    out_dir: str | Path | None = None,
) -> list[NcgCurve]:
    """Score, rank and compute one nCG curve per active measure.

    With out_dir set, writes curves.csv and scores.csv there (UTF-8,
    LF endings; nCG with six decimals).
    """
    scored_by_key = score_all(ctx, config, mode)
    curves: list[NcgCurve] = []
    rankings: dict[MeasureKey, list[ScoredPassage]] = {}
    for key, scored in scored_by_key.items():
        if not scored:
            logger.warning("measure %s scored no passages; curve omitted", key.label())
            continue
        ranked = rank(scored, tie_break=config.tie_break, tie_seed=config.tie_seed)
        rankings[key] = ranked
        cutoffs = config.cutoffs or default_cutoffs(len(ranked))
        curves.append(ncg_curve(ranked, cutoffs, mode))
    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        write_curves_csv(curves, out_dir / "curves.csv")
        write_scores_csv(scored_by_key, out_dir / "scores.csv")
    return curves


def write_curves_csv(curves: list[NcgCurve], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("measure,mode,unit_kind,entity_restricted,k,ncg\n")
        for curve in curves:
            key = curve.measure
            restricted = "true" if key.entity_restricted else "false"
            for k, value in curve.points:
                fh.write(
                    f"{key.measure.value},{curve.mode.value},{key.gram.value},"
                    f"{restricted},{k},{value:.6f}\n"
                )


def write_scores_csv(scored_by_key: dict[MeasureKey, list[ScoredPassage]],
                     path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("measure,passage_id,topic_id,value,ref_score\n")
        for key in sorted(scored_by_key, key=MeasureKey.sort_index):
            for sp in scored_by_key[key]:
                fh.write(
                    f"{key.label()},{sp.passage_id},{sp.topic_id},"
                    f"{sp.value!r},{sp.ref_score!r}\n"
                )


def parse_measure(name: str) -> MeasureId:
    for measure in MeasureId:
        if measure.value.lower() == name.lower():
            return measure
    valid = ", ".join(m.value for m in MeasureId)
    raise ValueError(f"unknown measure {name!r}; valid measures: {valid}")


def parse_gram(name: str) -> Gram:
    aliases = {
        "unigram": Gram.UNIGRAM, "1": Gram.UNIGRAM, "uni": Gram.UNIGRAM,
        "bigram": Gram.BIGRAM, "2": Gram.BIGRAM, "bi": Gram.BIGRAM,
        "skip_gap1": Gram.SKIP_GAP1, "sk": Gram.SKIP_GAP1,
        "skipgram": Gram.SKIP_GAP1,
    }
    try:
        return aliases[name.lower()]
    except KeyError:
        raise ValueError(
            f"unknown unit kind {name!r}; valid: unigram, bigram, skip_gap1"
        ) from None
