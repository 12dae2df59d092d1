"""Passage informativeness / interestingness measures and nCG meta-evaluation."""

__version__ = "0.1.0"

from .corpus import (
    AnchorSpan,
    Passage,
    Pool,
    PoolFormatError,
    Topic,
    dedup,
    load_pool,
    pool_stats,
    save_pool,
)
from .embeddings import (
    DocVector,
    EmbeddingStore,
    StoreFormatError,
    cosine,
    doc_vector,
    inspect_store,
    load_store,
    save_store,
)
from .evaluation import (
    EvalConfig,
    EvalContext,
    MeasureId,
    MeasureKey,
    NcgCurve,
    ScoredPassage,
    default_cutoffs,
    ncg_curve,
    rank,
    run_experiment,
    score_pool,
)
from .metrics import (
    BackgroundModel,
    Direction,
    MetricError,
    ProbDist,
    Score,
    f1,
    kl_divergence,
    logsim,
    rouge_n,
)
from .porter import stem
from .reference import (
    EmptyReferenceError,
    FoldAssignment,
    Mode,
    Reference,
    ReferenceBuilder,
    assign_folds,
    build_interestingness_reference,
    build_topic_reference,
)
from .textproc import (
    Gram,
    PAIR_SEPARATOR,
    Preprocessor,
    UnitBag,
    UnitKind,
    default_stoplist,
    extract_units,
    load_stoplist,
    remove_stopwords,
    restrict_to_anchors,
    tokenize,
)
