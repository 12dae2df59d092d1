"""Built-in oracle suite: naive re-implementations checked against the
library on randomized inputs.

The naive versions below follow the defining equations literally, one
term at a time, with no shortcuts or shared code with the metrics
module; the selftest compares both on random small bags.
"""

from __future__ import annotations

import math
import random
import time

from .corpus import Passage, Pool, Topic
from .evaluation import MeasureId, MeasureKey, ScoredPassage, ncg_curve, rank
from .metrics import BackgroundModel, f1, kl_divergence, logsim, rouge_n
from .reference import Mode, ReferenceBuilder, assign_folds
from .textproc import Gram, Preprocessor, UnitBag, UnitKind


def _naive_kl(ref: dict[str, int], passage: dict[str, int], bg: dict[str, float]) -> float:
    ref_total = sum(ref.values())
    s_total = sum(passage.values())
    total = 0.0
    for unit, count in ref.items():
        p_r = count / ref_total
        p_s = (passage.get(unit, 0) / s_total) if s_total else 0.0
        total += math.log((p_r * (s_total + 1)) / (p_s * s_total + bg[unit])) * p_r
    return total


def _naive_logsim(passage: dict[str, int], ref: dict[str, int]) -> float:
    ref_total = sum(ref.values())
    s_total = sum(passage.values())
    total = 0.0
    for unit in set(passage) & set(ref):
        p_r = ref[unit] / ref_total
        p_s = passage[unit] / s_total
        l_s = math.log(1 + p_s * ref_total)
        l_r = math.log(1 + p_r * ref_total)
        total += math.exp(-abs(math.log(l_s / l_r))) * p_r
    return total


def _naive_f1(passage: dict[str, int], ref: dict[str, int]) -> float:
    inter = len(set(passage) & set(ref))
    denom = len(set(passage)) + len(set(ref))
    return 2 * inter / denom if denom else 0.0


def _naive_rouge(candidate: dict[str, int], ref: dict[str, int]) -> float:
    matched = sum(min(ref[u], candidate.get(u, 0)) for u in ref)
    return matched / sum(ref.values())


def _random_counts(rng: random.Random, vocab: list[str], *, allow_empty: bool = True) -> dict[str, int]:
    size = rng.randint(0 if allow_empty else 1, len(vocab))
    chosen = rng.sample(vocab, size)
    return {u: rng.randint(1, 5) for u in chosen}


def _check_metric_oracles(report, rng: random.Random, rounds: int = 200) -> bool:
    kind = UnitKind(Gram.UNIGRAM)
    vocab = [f"u{i}" for i in range(8)]
    worst = 0.0
    for _ in range(rounds):
        ref_counts = _random_counts(rng, vocab, allow_empty=False)
        pas_counts = _random_counts(rng, vocab)
        union = dict(ref_counts)
        for unit, c in pas_counts.items():
            union[unit] = union.get(unit, 0) + c
        union_total = sum(union.values())
        bg_probs = {u: c / union_total for u, c in union.items()}
        background = BackgroundModel(kind=kind, probs=bg_probs, total=union_total)
        ref_bag = UnitBag.from_counts(kind, ref_counts)
        pas_bag = UnitBag.from_counts(kind, pas_counts)
        diffs = [
            abs(kl_divergence(ref_bag, pas_bag, background).value
                - _naive_kl(ref_counts, pas_counts, bg_probs)),
            abs(logsim(pas_bag, ref_bag).value - _naive_logsim(pas_counts, ref_counts)),
            abs(f1(pas_bag, ref_bag).value - _naive_f1(pas_counts, ref_counts)),
            abs(rouge_n(pas_bag, ref_bag).value - _naive_rouge(pas_counts, ref_counts)),
        ]
        worst = max(worst, *diffs)
    return report(f"metric formula oracles, {rounds} random bag pairs "
                  f"(worst |diff| = {worst:.3e})", worst <= 1e-12)


def _check_identities(report, rng: random.Random, rounds: int = 100) -> bool:
    kind = UnitKind(Gram.UNIGRAM)
    vocab = [f"u{i}" for i in range(8)]
    ok = True
    for _ in range(rounds):
        counts = _random_counts(rng, vocab, allow_empty=False)
        bag = UnitBag.from_counts(kind, counts)
        ok = ok and abs(logsim(bag, bag).value - 1.0) <= 1e-12
        ok = ok and f1(bag, bag).value == 1.0
        ok = ok and rouge_n(bag, bag).value == 1.0
    return report(f"identity scores on {rounds} random bags", ok)


def _random_pool(rng: random.Random, n_topics: int, n_passages: int) -> Pool:
    words = ["alpha", "bravo", "crimson", "delta", "ember", "falcon",
             "granite", "harbor", "indigo", "juniper"]
    topics = {f"t{i}": Topic(f"t{i}", f"topic {i}") for i in range(n_topics)}
    passages = []
    for j in range(n_passages):
        text = " ".join(rng.choice(words) for _ in range(rng.randint(3, 10)))
        score = rng.choice([0.0, 0.0, round(rng.random(), 3), 1.0, 2.0])
        passages.append(Passage(f"p{j:03d}", f"t{rng.randrange(n_topics)}", text, score))
    return Pool(topics=topics, passages=passages)


def _check_ncg(report, rng: random.Random) -> bool:
    ok = True
    key = MeasureKey(MeasureId.LEN_INV)
    for _ in range(20):
        pool = _random_pool(rng, 3, rng.randint(4, 30))
        if all(p.ref_score == 0 for p in pool.passages):
            continue
        # Scoring each passage by its own human grade is the ideal ranking.
        scored = [ScoredPassage(p.passage_id, p.topic_id, key, p.ref_score, p.ref_score)
                  for p in pool.passages]
        ranked = rank(scored)
        cutoffs = tuple(range(1, len(ranked) + 1))
        ideal = ncg_curve(ranked, cutoffs, Mode.INFORMATIVENESS)
        ok = ok and all(abs(v - 1.0) <= 1e-12 for _, v in ideal.points)
        for _ in range(20):
            values = list(range(len(scored)))
            rng.shuffle(values)
            rescored = [
                ScoredPassage(sp.passage_id, sp.topic_id, key, float(v), sp.ref_score)
                for sp, v in zip(scored, values)
            ]
            curve = ncg_curve(rank(rescored), cutoffs, Mode.INFORMATIVENESS)
            ok = ok and all(v <= iv + 1e-12 for (_, v), (_, iv) in
                            zip(curve.points, ideal.points))
    return report("nCG: ideal ranking reaches 1.0 and no ranking beats it", ok)


def _check_fold_exclusion(report, rng: random.Random) -> bool:
    ok = True
    for _ in range(5):
        pool = _random_pool(rng, 8, 60)
        folds = assign_folds(pool, 4, rng.randrange(1 << 30))
        builder = ReferenceBuilder(pool, Preprocessor(frozenset()), folds=folds)
        topic_of = {p.passage_id: p.topic_id for p in pool.passages}
        for topic_id in pool.topics:
            try:
                ref = builder.interestingness(topic_id, UnitKind(Gram.UNIGRAM))
            except Exception:
                continue
            own_fold = folds.fold_of(topic_id)
            ok = ok and all(
                folds.fold_of(topic_of[pid]) != own_fold
                for pid in ref.source_passage_ids
            )
    return report("interestingness references exclude the topic's fold", ok)


def run_selftest(seed: int = 20120427, out=print) -> int:
    """Run all built-in checks; returns the number of failures."""
    rng = random.Random(seed)
    failures = 0

    def report(name: str, passed: bool) -> bool:
        nonlocal failures
        out(f"{'ok' if passed else 'FAIL'}: {name}")
        if not passed:
            failures += 1
        return passed

    started = time.perf_counter()
    _check_metric_oracles(report, rng)
    _check_identities(report, rng)
    _check_ncg(report, rng)
    _check_fold_exclusion(report, rng)
    elapsed = time.perf_counter() - started
    out(f"{'ok' if failures == 0 else 'FAIL'}: selftest finished in {elapsed:.2f}s "
        f"({failures} failure(s))")
    return failures
