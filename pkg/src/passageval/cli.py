"""Command-line front-end for ingestion, references, vectors and eval runs.

Setting precedence: command-line flags, then PASSAGEVAL_* environment
variables, then a key=value config file (--config), then defaults.
Exit codes: 0 success, 1 runtime error, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from . import __version__
from .corpus import PoolFormatError, dedup, load_pool, pool_stats, save_pool
from .embeddings import StoreFormatError, inspect_store, load_store
from .evaluation import (
    DEFAULT_MEASURES,
    EMBEDDING_MEASURES,
    RESTRICTABLE_MEASURES,
    EvalConfig,
    EvalContext,
    MeasureId,
    MeasureKey,
    parse_gram,
    parse_measure,
    run_experiment,
)
from .manifest import RunManifest, sha256_file
from .reference import EmptyReferenceError, Mode, ReferenceBuilder, assign_folds
from .selftest import run_selftest
from .textproc import Gram, Preprocessor, UnitKind, load_stoplist

ENV_PREFIX = "PASSAGEVAL_"

logger = logging.getLogger(__name__)


class UsageError(ValueError):
    """Invalid configuration reported with exit code 2."""


def load_config_file(path) -> dict[str, str]:
    """key=value file, one setting per line, '#' comments allowed."""
    settings: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise UsageError(f"{path}, line {lineno}: expected key=value")
            key, value = line.split("=", 1)
            settings[key.strip()] = value.strip()
    return settings


def _resolve(name: str, flag_value, file_cfg: dict[str, str], default):
    """flags > environment > config file > defaults."""
    if flag_value is not None:
        return flag_value
    env = os.environ.get(ENV_PREFIX + name.upper())
    if env is not None:
        return env
    if name in file_cfg:
        return file_cfg[name]
    return default


def _as_bool(value, name: str) -> bool:
    if isinstance(value, bool):
        return value
    text = str(value).lower()
    if text in ("1", "true", "yes", "on"):
        return True
    if text in ("0", "false", "no", "off"):
        return False
    raise UsageError(f"{name}: expected a boolean, got {value!r}")


def _as_int(value, name: str) -> int:
    try:
        return int(value)
    except (TypeError, ValueError):
        raise UsageError(f"{name}: expected an integer, got {value!r}") from None


def _parse_measures(text: str) -> tuple[MeasureId, ...]:
    names = [n for n in (part.strip() for part in text.split(",")) if n]
    if not names:
        raise UsageError("no measures given")
    try:
        return tuple(parse_measure(n) for n in names)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _parse_units(text: str) -> tuple[Gram, ...]:
    try:
        return tuple(parse_gram(n.strip()) for n in text.split(",") if n.strip())
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _parse_cutoffs(text: str, pool_size: int) -> tuple[int, ...]:
    values = set()
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if part.lower() == "all":
            values.add(pool_size)
        else:
            values.add(_as_int(part, "cutoffs"))
    if not values:
        raise UsageError("no cut-offs given")
    if any(v <= 0 for v in values):
        raise UsageError("cut-offs must be positive")
    return tuple(sorted(values))


def _parse_store_spec(spec: str):
    """NAME=PATH[:FORMAT[:stems|raw]] for --store."""
    if "=" not in spec:
        raise UsageError(f"--store {spec!r}: expected NAME=PATH[:format[:stems|raw]]")
    name, rest = spec.split("=", 1)
    parts = rest.split(":")
    path = parts[0]
    if not path:
        raise UsageError(f"--store {spec!r}: empty path")
    fmt = None
    use_stems = True
    for part in parts[1:]:
        if part in ("text", "binary"):
            fmt = part
        elif part == "stems":
            use_stems = True
        elif part == "raw":
            use_stems = False
        else:
            raise UsageError(f"--store {spec!r}: unknown option {part!r}")
    if fmt is None:
        fmt = "binary" if path.endswith(".bin") else "text"
    try:
        measure = parse_measure(name.strip())
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if measure not in EMBEDDING_MEASURES:
        raise UsageError(f"--store: {measure.value} does not take an embedding store")
    return measure, path, fmt, use_stems


def _load_pool_arg(args, *, apply_dedup: bool = True):
    if not args.passages or not args.topics:
        raise UsageError("--passages and --topics are required")
    pool = load_pool(args.passages, args.topics,
                     provenance=f"{args.passages}+{args.topics}")
    before = len(pool.passages)
    if apply_dedup and not getattr(args, "no_dedup", False):
        pool = dedup(pool, per_topic=not getattr(args, "global_dedup", False))
    return pool, before


def _preprocessor(args) -> Preprocessor:
    stoplist = load_stoplist(args.stoplist) if getattr(args, "stoplist", None) else None
    return Preprocessor(stoplist, strict_skipgrams=getattr(args, "strict_skipgrams", False))


def _add_pool_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--passages", help="passages JSONL file")
    parser.add_argument("--topics", help="topics TSV file")
    parser.add_argument("--no-dedup", action="store_true",
                        help="skip 25-character duplicate removal")
    parser.add_argument("--global-dedup", action="store_true",
                        help="deduplicate across topics instead of per topic")
    parser.add_argument("--stoplist", help="stopword list file (default: bundled SMART list)")
    parser.add_argument("--strict-skipgrams", action="store_true",
                        help="skip-grams use only distance-2 pairs (exclude adjacent)")


def _cmd_ingest(args) -> int:
    pool, before = _load_pool_arg(args)
    stats = pool_stats(pool)
    stats["duplicates_removed"] = before - len(pool.passages)
    if args.save_passages or args.save_topics:
        if not (args.save_passages and args.save_topics):
            raise UsageError("--save-passages and --save-topics go together")
        save_pool(pool, args.save_passages, args.save_topics)
    print(json.dumps(stats, ensure_ascii=False))
    return 0


def _reference_builder(args, pool, pre):
    mode = Mode(args.mode)
    folds = None
    if mode is Mode.INTERESTINGNESS:
        folds = assign_folds(pool, args.folds, args.seed)
    return ReferenceBuilder(pool, pre, folds=folds), mode


def _cmd_reference(args) -> int:
    pool, _ = _load_pool_arg(args)
    pre = _preprocessor(args)
    builder, mode = _reference_builder(args, pool, pre)
    kind = UnitKind(parse_gram(args.kind), args.entity_restricted)
    if args.action == "dump":
        if not args.topic:
            raise UsageError("reference dump requires --topic")
        ref = builder.reference(mode, args.topic, kind)
        for unit in sorted(ref.bag.units):
            print(f"{unit}\t{ref.bag.units[unit]}")
        return 0
    summary = {}
    for topic_id in pool.topic_ids():
        try:
            ref = builder.reference(mode, topic_id, kind)
        except EmptyReferenceError:
            summary[topic_id] = {"total": 0, "types": 0, "sources": 0, "empty": True}
            continue
        summary[topic_id] = {
            "total": ref.total_len,
            "types": ref.bag.support(),
            "sources": len(ref.source_passage_ids),
        }
    print(json.dumps({"mode": mode.value, "unit_kind": kind.label(),
                      "topics": summary}, ensure_ascii=False))
    return 0


def _cmd_vectors(args) -> int:
    fmt = args.format
    if fmt is None:
        fmt = "binary" if args.path.endswith(".bin") else "text"
    info = inspect_store(args.path, fmt)
    print(json.dumps(info))
    return 0


def _cmd_eval(args) -> int:
    file_cfg = load_config_file(args.config) if args.config else {}

    def setting(name, flag_value, default):
        return _resolve(name, flag_value, file_cfg, default)

    mode_name = str(setting("mode", args.mode, "informativeness")).lower()
    try:
        mode = Mode(mode_name)
    except ValueError:
        raise UsageError(
            f"unknown mode {mode_name!r}; valid: informativeness, interestingness"
        ) from None
    measures_text = setting("measures", args.measures, None)
    if measures_text is None:
        measure_ids = DEFAULT_MEASURES
    else:
        measure_ids = _parse_measures(str(measures_text))
    restricted_text = str(setting("entity_restricted", args.entity_restricted, "false"))
    if restricted_text.lower() == "both":
        restricted_modes = (False, True)
    else:
        restricted_modes = (_as_bool(restricted_text, "entity_restricted"),)
    keys = []
    for measure in measure_ids:
        for restricted in restricted_modes:
            if restricted and measure not in RESTRICTABLE_MEASURES:
                if restricted_modes == (True,):
                    logger.warning("%s cannot be entity-restricted; running full-text",
                                   measure.value)
                    keys.append(MeasureKey(measure, False))
                continue
            keys.append(MeasureKey(measure, restricted))
    if not keys:
        raise UsageError("no measures left to run")

    units_text = setting("units", args.units, None)
    unit_filter = _parse_units(str(units_text)) if units_text is not None else None
    seed = _as_int(setting("seed", args.seed, 0), "seed")
    fold_count = _as_int(setting("folds", args.folds, 12), "folds")
    kl_min_length = _as_int(setting("kl_min_length", args.kl_min_length, 0),
                            "kl_min_length")
    workers = _as_int(setting("workers", args.workers, os.cpu_count() or 1), "workers")
    tie_break = str(setting("tie_break", args.tie_break, "passage_id"))
    strict_skip = _as_bool(
        setting("strict_skipgrams", args.strict_skipgrams or None, False),
        "strict_skipgrams",
    )
    out_dir = Path(setting("out", args.out, "passageval-run"))

    pool, before = _load_pool_arg(args)
    if not pool.passages:
        raise UsageError("pool has no passages")

    cutoffs_text = setting("cutoffs", args.cutoffs, None)
    cutoffs = (
        _parse_cutoffs(str(cutoffs_text), len(pool.passages))
        if cutoffs_text is not None
        else None
    )

    stoplist_path = setting("stoplist", args.stoplist, None)
    pre = Preprocessor(
        load_stoplist(stoplist_path) if stoplist_path else None,
        strict_skipgrams=strict_skip,
    )

    stores = {}
    store_digests = {}
    for spec in args.store or []:
        measure, path, fmt, use_stems = _parse_store_spec(spec)
        gram = Gram.BIGRAM if measure in (MeasureId.W2V_C_BI, MeasureId.W2V_WP_BI) \
            else Gram.UNIGRAM
        stores[measure] = load_store(
            path, fmt, gram=gram, use_stems=use_stems,
            pair_separator=args.store_pair_sep,
        )
        store_digests[f"store:{measure.value}"] = sha256_file(path)
    missing = [k.measure.value for k in keys
               if k.measure in EMBEDDING_MEASURES and k.measure not in stores]
    if missing:
        raise UsageError(
            f"missing embedding store for: {', '.join(sorted(set(missing)))} "
            f"(pass --store NAME=PATH)"
        )

    folds = None
    if mode is Mode.INTERESTINGNESS:
        folds = assign_folds(pool, fold_count, seed)

    try:
        config = EvalConfig(
            measures=tuple(keys),
            unit_filter=unit_filter,
            cutoffs=cutoffs,
            fold_count=fold_count,
            fold_seed=seed,
            tie_break=tie_break,
            tie_seed=seed,
            kl_min_length=kl_min_length,
            strict_skipgrams=strict_skip,
            workers=workers,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None

    out_dir.mkdir(parents=True, exist_ok=True)
    digests = {
        "passages": sha256_file(args.passages),
        "topics": sha256_file(args.topics),
        **store_digests,
    }
    if stoplist_path:
        digests["stoplist"] = sha256_file(stoplist_path)
    manifest = RunManifest(
        artifact_version=__version__,
        command="eval",
        config={
            "mode": mode.value,
            "measures": [k.label() for k in config.active_measures()],
            "units": [g.value for g in unit_filter] if unit_filter else None,
            "cutoffs": list(cutoffs) if cutoffs else None,
            "folds": fold_count,
            "entity_restricted": restricted_text.lower(),
            "kl_min_length": kl_min_length,
            "tie_break": tie_break,
            "strict_skipgrams": strict_skip,
            "dedup": "none" if args.no_dedup else
                     ("global" if args.global_dedup else "per_topic"),
            "workers": workers,
        },
        input_digests=digests,
        seeds={"seed": seed},
        output_paths={
            "curves": str(out_dir / "curves.csv"),
            "scores": str(out_dir / "scores.csv"),
        },
    )
    manifest.write(out_dir / "manifest.json")

    ctx = EvalContext(pool=pool, pre=pre,
                      refs=ReferenceBuilder(pool, pre, folds=folds), stores=stores)
    curves = run_experiment(ctx, config, mode, out_dir=out_dir)
    print(f"wrote {out_dir / 'curves.csv'} ({len(curves)} curves), "
          f"{out_dir / 'scores.csv'}, {out_dir / 'manifest.json'}")
    return 0


def _cmd_selftest(args) -> int:
    failures = run_selftest(seed=args.seed)
    return 0 if failures == 0 else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="passageval",
        description="Passage informativeness/interestingness scoring and "
                    "nCG meta-evaluation.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true",
                        help="log progress details")
    sub = parser.add_subparsers(dest="command", required=True)

    p_ingest = sub.add_parser("ingest", help="validate, deduplicate and summarize a pool")
    _add_pool_flags(p_ingest)
    p_ingest.add_argument("--save-passages", help="write the deduplicated passages here")
    p_ingest.add_argument("--save-topics", help="write the topics here")
    p_ingest.set_defaults(func=_cmd_ingest)

    p_ref = sub.add_parser("reference", help="build or dump textual references")
    p_ref.add_argument("action", choices=["build", "dump"])
    _add_pool_flags(p_ref)
    p_ref.add_argument("--mode", choices=[m.value for m in Mode],
                       default="informativeness")
    p_ref.add_argument("--kind", default="unigram",
                       help="unit kind: unigram, bigram or skip_gap1")
    p_ref.add_argument("--entity-restricted", action="store_true",
                       help="restrict units to anchor text")
    p_ref.add_argument("--topic", help="topic id (for dump)")
    p_ref.add_argument("--folds", type=int, default=12)
    p_ref.add_argument("--seed", type=int, default=0)
    p_ref.set_defaults(func=_cmd_reference)

    p_vec = sub.add_parser("vectors", help="embedding store utilities")
    p_vec.add_argument("action", choices=["inspect"])
    p_vec.add_argument("--path", required=True)
    p_vec.add_argument("--format", choices=["text", "binary"],
                       help="default: binary for .bin files, else text")
    p_vec.set_defaults(func=_cmd_vectors)

    p_eval = sub.add_parser(
        "eval",
        help="score a pool, rank and emit nCG curves",
        epilog="Settings resolve as flags > PASSAGEVAL_<NAME> environment "
               "variables > --config file > defaults.",
    )
    _add_pool_flags(p_eval)
    p_eval.add_argument("--mode", choices=[m.value for m in Mode])
    p_eval.add_argument("--measures",
                        help="comma-separated measure ids "
                             "(default: the nine discrete measures + LEN_INV)")
    p_eval.add_argument("--units", help="restrict to these unit kinds (comma-separated)")
    p_eval.add_argument("--cutoffs", help="comma-separated cut-offs; 'all' = pool size")
    p_eval.add_argument("--folds", type=int, help="fold count for interestingness (default 12)")
    p_eval.add_argument("--seed", type=int, help="seed for folds and tie-breaking (default 0)")
    p_eval.add_argument("--entity-restricted", nargs="?", const="true",
                        help="true, false or both (default false)")
    p_eval.add_argument("--kl-min-length", type=int,
                        help="drop passages shorter than N tokens from KL rankings")
    p_eval.add_argument("--tie-break", choices=["passage_id", "random"])
    p_eval.add_argument("--workers", type=int,
                        help="parallel scoring processes (default: CPU count)")
    p_eval.add_argument("--store", action="append", metavar="NAME=PATH[:fmt[:stems|raw]]",
                        help="embedding store for a W2V_* measure (repeatable)")
    p_eval.add_argument("--store-pair-sep",
                        help="translate this pair separator in store keys "
                             "(e.g. '_' for externally trained bigram models)")
    p_eval.add_argument("--out", help="output directory (default: passageval-run)")
    p_eval.add_argument("--config", help="key=value settings file")
    p_eval.set_defaults(func=_cmd_eval)

    p_self = sub.add_parser("selftest", help="run the built-in oracle suite")
    p_self.add_argument("--seed", type=int, default=20120427)
    p_self.set_defaults(func=_cmd_selftest)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (PoolFormatError, StoreFormatError, EmptyReferenceError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: file not found: {exc.filename}", file=sys.stderr)
        return 1
    except (KeyError, ValueError) as exc:
        message = exc.args[0] if exc.args else exc
        print(f"error: {message}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
