"""Passage pool ingestion, validation, deduplication and persistence.

Input formats:
  * passages: JSON Lines, one object per line with passage_id, topic_id,
    text, ref_score and anchors ([{start, end, entity}, ...]);
  * topics: TSV with topic_id<TAB>text.

A passage's reference score lies in [0, 1] or equals 2 (both assessors
judged the whole passage informative).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace

DEDUP_KEY_LENGTH = 25


class PoolFormatError(ValueError):
    """Raised for malformed or inconsistent pool input files."""


def _valid_score(score: float) -> bool:
    return (0.0 <= score <= 1.0) or score == 2.0


@dataclass(frozen=True)
class Topic:
    topic_id: str
    text: str


@dataclass(frozen=True)
class AnchorSpan:
    """Character span of hyperlink anchor text, tagged with its entity."""

    start: int
    end: int
    entity: str


@dataclass(frozen=True)
class Passage:
    passage_id: str
    topic_id: str
    text: str
    ref_score: float
    anchors: tuple[AnchorSpan, ...] = ()


@dataclass(frozen=True)
class Pool:
    topics: dict[str, Topic]
    passages: list[Passage]
    provenance: str = ""

    def topic_ids(self) -> list[str]:
        return sorted(self.topics)


def _validate_passage(passage: Passage, where: str) -> None:
    if not passage.text:
        raise PoolFormatError(f"{where}: empty passage text")
    if not _valid_score(passage.ref_score):
        raise PoolFormatError(
            f"{where}: ref_score {passage.ref_score!r} out of domain [0,1] or 2"
        )
    for span in passage.anchors:
        if not (0 <= span.start < span.end <= len(passage.text)):
            raise PoolFormatError(
                f"{where}: anchor span ({span.start},{span.end}) outside text "
                f"of length {len(passage.text)}"
            )
    ordered = sorted(passage.anchors, key=lambda s: (s.start, s.end))
    for prev, cur in zip(ordered, ordered[1:]):
        if cur.start < prev.end:
            raise PoolFormatError(
                f"{where}: overlapping anchor spans "
                f"({prev.start},{prev.end}) and ({cur.start},{cur.end})"
            )


def _parse_passage_line(line: str, where: str) -> Passage:
    try:
        record = json.loads(line)
    except json.JSONDecodeError as exc:
        raise PoolFormatError(f"{where}: invalid JSON ({exc.msg})") from exc
    if not isinstance(record, dict):
        raise PoolFormatError(f"{where}: expected a JSON object")
    for name in ("passage_id", "topic_id", "text", "ref_score"):
        if name not in record:
            raise PoolFormatError(f"{where}: missing field {name!r}")
    anchors = []
    for i, raw in enumerate(record.get("anchors") or []):
        try:
            anchors.append(
                AnchorSpan(int(raw["start"]), int(raw["end"]), str(raw["entity"]))
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise PoolFormatError(f"{where}: bad anchor #{i}: {exc}") from exc
    try:
        score = float(record["ref_score"])
    except (TypeError, ValueError) as exc:
        raise PoolFormatError(f"{where}: ref_score is not a number") from exc
    passage = Passage(
        passage_id=str(record["passage_id"]),
        topic_id=str(record["topic_id"]),
        text=str(record["text"]),
        ref_score=score,
        anchors=tuple(anchors),
    )
    _validate_passage(passage, where)
    return passage


def load_topics(topics_path) -> dict[str, Topic]:
    topics: dict[str, Topic] = {}
    with open(topics_path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            where = f"{topics_path}, line {lineno}"
            parts = line.split("\t", 1)
            if len(parts) != 2 or not parts[1]:
                raise PoolFormatError(f"{where}: expected topic_id<TAB>text")
            topic_id, text = parts
            if topic_id in topics:
                raise PoolFormatError(f"{where}: duplicate topic_id {topic_id!r}")
            topics[topic_id] = Topic(topic_id=topic_id, text=text)
    return topics


def load_pool(passages_path, topics_path, provenance: str = "") -> Pool:
    """Parse and validate a passage pool; errors carry file and line."""
    topics = load_topics(topics_path)
    passages: list[Passage] = []
    seen_ids: set[str] = set()
    with open(passages_path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            where = f"{passages_path}, line {lineno}"
            passage = _parse_passage_line(line, where)
            if passage.passage_id in seen_ids:
                raise PoolFormatError(
                    f"{where}: duplicate passage_id {passage.passage_id!r}"
                )
            if passage.topic_id not in topics:
                raise PoolFormatError(
                    f"{where}: unknown topic_id {passage.topic_id!r}"
                )
            seen_ids.add(passage.passage_id)
            passages.append(passage)
    return Pool(topics=topics, passages=passages, provenance=provenance)


def save_pool(pool: Pool, passages_path, topics_path) -> None:
    """Write a pool back in the load_pool formats (UTF-8, LF endings)."""
    with open(topics_path, "w", encoding="utf-8", newline="\n") as fh:
        for topic_id in sorted(pool.topics):
            fh.write(f"{topic_id}\t{pool.topics[topic_id].text}\n")
    with open(passages_path, "w", encoding="utf-8", newline="\n") as fh:
        for p in pool.passages:
            record = {
                "passage_id": p.passage_id,
                "topic_id": p.topic_id,
                "text": p.text,
                "ref_score": p.ref_score,
                "anchors": [
                    {"start": a.start, "end": a.end, "entity": a.entity}
                    for a in p.anchors
                ],
            }
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")


def _dedup_key(text: str) -> tuple[str, str]:
    trimmed = text.strip()
    if len(trimmed) < DEDUP_KEY_LENGTH:
        return trimmed, trimmed
    return trimmed[:DEDUP_KEY_LENGTH], trimmed[-DEDUP_KEY_LENGTH:]


def dedup(pool: Pool, *, per_topic: bool = True) -> Pool:
    """Drop passages that start and end with the same 25 characters.

    Keys are computed on the raw text after trimming surrounding
    whitespace; passages shorter than 25 characters compare on their
    full text.  The first passage of each duplicate class survives.
    Scoped per topic by default; per_topic=False compares globally.
    """
    seen: set[tuple] = set()
    kept: list[Passage] = []
    for passage in pool.passages:
        head, tail = _dedup_key(passage.text)
        key = (passage.topic_id, head, tail) if per_topic else (head, tail)
        if key in seen:
            continue
        seen.add(key)
        kept.append(passage)
    return replace(pool, passages=kept)


def pool_stats(pool: Pool) -> dict:
    """Summary counts and a score histogram over {0}, (0,1), {1}, {2}."""
    histogram = {"0": 0, "(0,1)": 0, "1": 0, "2": 0}
    informative = 0
    for p in pool.passages:
        if p.ref_score > 0:
            informative += 1
        if p.ref_score == 0:
            histogram["0"] += 1
        elif p.ref_score == 1:
            histogram["1"] += 1
        elif p.ref_score == 2:
            histogram["2"] += 1
        else:
            histogram["(0,1)"] += 1
    return {
        "passages": len(pool.passages),
        "topics": len(pool.topics),
        "informative": informative,
        "score_histogram": histogram,
    }
