"""Independent straight-from-the-equation oracles used by the tests.

Everything here is computed from plain dicts/lists, term by term, with
no code shared with the library: these are the second route of every
dual-route check, so they must stay naive and equation-shaped.
"""

from __future__ import annotations

import math

SEP = "␟"


# -- discrete measures ---------------------------------------------------

def oracle_kl(ref: dict[str, int], passage: dict[str, int],
              background: dict[str, float]) -> float:
    """sum over ref units of ln(P(w|R)(|S|+1) / (P(w|S)|S| + P(w|bg))) P(w|R)."""
    r_total = sum(ref.values())
    s_total = sum(passage.values())
    result = 0.0
    for w, c in ref.items():
        p_r = c / r_total
        p_s = passage.get(w, 0) / s_total if s_total > 0 else 0.0
        ratio = (p_r * (s_total + 1)) / (p_s * s_total + background[w])
        result += math.log(ratio) * p_r
    return result


def oracle_logsim(passage: dict[str, int], ref: dict[str, int]) -> float:
    """sum over shared units of exp(-|ln(L(w,S)/L(w,R))|) P(w|R)."""
    r_total = sum(ref.values())
    s_total = sum(passage.values())
    result = 0.0
    for w in ref:
        if w not in passage:
            continue
        p_r = ref[w] / r_total
        p_s = passage[w] / s_total
        l_s = math.log(1 + p_s * r_total)
        l_r = math.log(1 + p_r * r_total)
        result += math.exp(-abs(math.log(l_s / l_r))) * p_r
    return result


def oracle_f1(passage: dict[str, int], ref: dict[str, int]) -> float:
    s_types = set(passage)
    r_types = set(ref)
    if not s_types and not r_types:
        return 0.0
    return 2 * len(s_types & r_types) / (len(s_types) + len(r_types))


def oracle_rouge_n(candidate: dict[str, int], ref: dict[str, int]) -> float:
    matches = sum(min(c, candidate.get(w, 0)) for w, c in ref.items())
    return matches / sum(ref.values())


def oracle_cosine(u: list[float], v: list[float]) -> float:
    dot = sum(a * b for a, b in zip(u, v))
    nu = math.sqrt(sum(a * a for a in u))
    nv = math.sqrt(sum(b * b for b in v))
    if nu == 0 or nv == 0:
        return 0.0
    return dot / (nu * nv)


# -- unit extraction -----------------------------------------------------

def oracle_bigrams(tokens: list[str]) -> dict[str, int]:
    counts: dict[str, int] = {}
    for i in range(len(tokens) - 1):
        key = tokens[i] + SEP + tokens[i + 1]
        counts[key] = counts.get(key, 0) + 1
    return counts


def oracle_skipgrams_gap1(tokens: list[str]) -> dict[str, int]:
    """All pairs (t_i, t_j) with j - i in {1, 2}."""
    counts: dict[str, int] = {}
    for i in range(len(tokens)):
        for j in (i + 1, i + 2):
            if j < len(tokens):
                key = tokens[i] + SEP + tokens[j]
                counts[key] = counts.get(key, 0) + 1
    return counts


# -- nCG -----------------------------------------------------------------

def oracle_ncg(grades_ranked: list[float], k: int) -> float:
    """Grade sum of the first k against the best possible k-subset sum."""
    top = grades_ranked[:k]
    ideal = sorted(grades_ranked, reverse=True)[:k]
    denom = sum(ideal)
    if denom == 0:
        return 0.0
    return sum(top) / denom


def oracle_rank_ids(values: dict[str, float], higher_is_better: bool) -> list[str]:
    """Deterministic ranking: goodness first, then passage id."""
    sign = -1.0 if higher_is_better else 1.0
    return sorted(values, key=lambda pid: (sign * values[pid], pid))


# -- references ----------------------------------------------------------

def oracle_phi_sources(passages, topic_id: str) -> set[str]:
    """Eq.-style set comprehension: this topic's informative passages."""
    return {
        p.passage_id
        for p in passages
        if p.topic_id == topic_id and p.ref_score > 0
    }


def oracle_delta_sources(passages, topic_id: str, fold_of: dict[str, int]) -> set[str]:
    """Informative for some other topic whose fold differs from this one's."""
    return {
        p.passage_id
        for p in passages
        if p.ref_score > 0
        and p.topic_id != topic_id
        and fold_of[p.topic_id] != fold_of[topic_id]
    }
