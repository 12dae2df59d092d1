"""Discrete overlap measures over unit bags.

Four measures are provided, all written against a textual reference R
and a candidate passage S represented as unit bags:

  * kl_divergence: expectation over R of the log difference between the
    reference frequencies and smoothed passage probabilities,

        sum over units w of R of
            ln( P(w|R) * (|S|+1) / (P(w|S) * |S| + P(w|bg)) ) * P(w|R)

    with the smoothing mass fixed at one unit of the pool-wide
    background model.  Not normalized; lower is better.

  * logsim: expectation over R of a normalized log-ratio similarity,
    defined only on the shared units,

        sum over w in S intersect R of
            exp(-|ln(L(w,S) / L(w,R))|) * P(w|R),
        L(w,X) = ln(1 + P(w|X) * |R|)

  * f1: 2 * |supp(S) & supp(R)| / (|supp(S)| + |supp(R)|) over the unit
    type sets.

  * rouge_n: clipped co-occurrence recall,
    sum_w min(count_R(w), count_S(w)) / sum_w count_R(w).

Probabilities are maximum-likelihood within each bag: P(w|X) =
count(w) / total.  Logs of ratios are taken as differences of logs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Mapping

from .textproc import UnitBag, UnitKind, sum_bags


class MetricError(ValueError):
    """Raised when a measure's preconditions are violated."""


class Direction(Enum):
    HIGHER_IS_BETTER = "higher"
    LOWER_IS_BETTER = "lower"


@dataclass(frozen=True)
class Score:
    value: float
    direction: Direction


@dataclass(frozen=True)
class ProbDist:
    """Maximum-likelihood unit distribution of a bag; empty when the bag is."""

    probs: Mapping[str, float]

    @classmethod
    def from_bag(cls, bag: UnitBag) -> "ProbDist":
        if bag.total == 0:
            return cls(probs={})
        total = float(bag.total)
        return cls(probs={u: c / total for u, c in bag.units.items()})


@dataclass(frozen=True)
class BackgroundModel:
    """Pool-wide unit distribution used as KL smoothing mass."""

    kind: UnitKind
    probs: Mapping[str, float]
    total: int

    @classmethod
    def from_bags(cls, kind: UnitKind, bags: Iterable[UnitBag]) -> "BackgroundModel":
        union = sum_bags(kind, bags)
        if union.total == 0:
            raise MetricError("background model built from empty bags")
        total = float(union.total)
        probs = {u: c / total for u, c in union.units.items()}
        return cls(kind=kind, probs=probs, total=union.total)


@dataclass(frozen=True)
class KlReferenceStats:
    """Per-reference constants reused across many KL evaluations.

    sum_p_log_p   = sum_w P(w|R) * ln P(w|R)
    sum_p_log_bg  = sum_w P(w|R) * ln P(w|bg)
    """

    sum_p_log_p: float
    sum_p_log_bg: float


def _check_kinds(a: UnitBag, b: UnitBag) -> None:
    if a.kind != b.kind:
        raise MetricError(f"unit kind mismatch: {a.kind} vs {b.kind}")


def kl_reference_stats(ref: UnitBag, background: BackgroundModel) -> KlReferenceStats:
    if ref.is_empty():
        raise MetricError("empty reference")
    total = float(ref.total)
    sum_p_log_p = 0.0
    sum_p_log_bg = 0.0
    for unit, count in ref.units.items():
        p_ref = count / total
        p_bg = background.probs.get(unit)
        if p_bg is None:
            raise MetricError(f"background model missing reference unit {unit!r}")
        sum_p_log_p += p_ref * math.log(p_ref)
        sum_p_log_bg += p_ref * math.log(p_bg)
    return KlReferenceStats(sum_p_log_p=sum_p_log_p, sum_p_log_bg=sum_p_log_bg)


def kl_divergence(
    ref: UnitBag,
    passage: UnitBag,
    background: BackgroundModel,
    *,
    ref_stats: KlReferenceStats | None = None,
) -> Score:
    """Smoothed KL divergence of the passage from the reference (lower is better)."""
    if ref.is_empty():
        raise MetricError("empty reference")
    _check_kinds(ref, passage)
    s_total = passage.total
    if ref_stats is not None:
        # Same sum regrouped so only shared units need visiting.
        value = ref_stats.sum_p_log_p + math.log(s_total + 1) - ref_stats.sum_p_log_bg
        ref_total = float(ref.total)
        for unit, s_count in passage.units.items():
            r_count = ref.units.get(unit)
            if r_count is None:
                continue
            p_ref = r_count / ref_total
            p_bg = background.probs.get(unit)
            if p_bg is None:
                raise MetricError(f"background model missing reference unit {unit!r}")
            value += p_ref * (math.log(p_bg) - math.log(s_count + p_bg))
        return Score(value, Direction.LOWER_IS_BETTER)

    ref_total = float(ref.total)
    value = 0.0
    for unit, r_count in ref.units.items():
        p_ref = r_count / ref_total
        p_bg = background.probs.get(unit)
        if p_bg is None:
            raise MetricError(f"background model missing reference unit {unit!r}")
        # P(w|S) * |S| equals the raw passage count of the unit.
        denom = passage.units.get(unit, 0) + p_bg
        value += p_ref * (math.log(p_ref) + math.log(s_total + 1) - math.log(denom))
    return Score(value, Direction.LOWER_IS_BETTER)


def logsim(passage: UnitBag, ref: UnitBag) -> Score:
    """Log-ratio similarity over shared units, in [0, 1]."""
    if ref.is_empty():
        raise MetricError("empty reference")
    _check_kinds(ref, passage)
    ref_total = float(ref.total)
    s_total = float(passage.total)
    value = 0.0
    for unit, s_count in passage.units.items():
        r_count = ref.units.get(unit)
        if r_count is None:
            continue
        p_ref = r_count / ref_total
        p_s = s_count / s_total
        l_s = math.log1p(p_s * ref_total)
        l_r = math.log1p(p_ref * ref_total)
        value += math.exp(-abs(math.log(l_s) - math.log(l_r))) * p_ref
    return Score(value, Direction.HIGHER_IS_BETTER)


def f1(passage: UnitBag, ref: UnitBag) -> Score:
    """Set-theoretic F1 over unit types; 0 when both bags are empty."""
    _check_kinds(ref, passage)
    if passage.support() == 0 and ref.support() == 0:
        return Score(0.0, Direction.HIGHER_IS_BETTER)
    smaller, larger = passage.units, ref.units
    if len(smaller) > len(larger):
        smaller, larger = larger, smaller
    shared = sum(1 for unit in smaller if unit in larger)
    value = 2.0 * shared / (passage.support() + ref.support())
    return Score(value, Direction.HIGHER_IS_BETTER)


def rouge_n(candidate: UnitBag, ref: UnitBag) -> Score:
    """Clipped n-gram co-occurrence recall against the reference."""
    if ref.is_empty():
        raise MetricError("empty reference")
    _check_kinds(ref, candidate)
    matched = 0
    for unit, c_count in candidate.units.items():
        r_count = ref.units.get(unit)
        if r_count is not None:
            matched += min(r_count, c_count)
    return Score(matched / ref.total, Direction.HIGHER_IS_BETTER)
