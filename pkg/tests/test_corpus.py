import json
import random

import pytest

from passageval.corpus import (
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

from conftest import make_random_pool, write_pool_files


def _write(tmp_path, passages_lines, topics_lines=("t1\tfirst topic", "t2\tsecond topic")):
    passages = tmp_path / "passages.jsonl"
    topics = tmp_path / "topics.tsv"
    passages.write_text("\n".join(passages_lines) + "\n", encoding="utf-8")
    topics.write_text("\n".join(topics_lines) + "\n", encoding="utf-8")
    return passages, topics


def _record(pid="p1", topic="t1", text="some text", score=1.0, anchors=None):
    return json.dumps({
        "passage_id": pid, "topic_id": topic, "text": text,
        "ref_score": score, "anchors": anchors or [],
    })


class TestLoadPool:
    def test_counts(self, tmp_path):
        paths = _write(tmp_path, [
            _record("p1", "t1"), _record("p2", "t1"), _record("p3", "t2"),
        ])
        pool = load_pool(*paths)
        assert len(pool.passages) == 3
        assert len(pool.topics) == 2

    def test_score_out_of_domain(self, tmp_path):
        paths = _write(tmp_path, [_record(score=1.5)])
        with pytest.raises(PoolFormatError, match="out of domain"):
            load_pool(*paths)

    def test_score_two_accepted(self, tmp_path):
        paths = _write(tmp_path, [_record(score=2)])
        pool = load_pool(*paths)
        assert pool.passages[0].ref_score == 2.0

    def test_negative_score_rejected(self, tmp_path):
        paths = _write(tmp_path, [_record(score=-0.25)])
        with pytest.raises(PoolFormatError, match="out of domain"):
            load_pool(*paths)

    def test_error_reports_line_number(self, tmp_path):
        paths = _write(tmp_path, [_record("p1"), "{broken json", _record("p3")])
        with pytest.raises(PoolFormatError, match="line 2"):
            load_pool(*paths)

    def test_missing_field_reported(self, tmp_path):
        record = json.dumps({"passage_id": "p1", "topic_id": "t1", "text": "x"})
        paths = _write(tmp_path, [record])
        with pytest.raises(PoolFormatError, match="ref_score"):
            load_pool(*paths)

    def test_unknown_topic(self, tmp_path):
        paths = _write(tmp_path, [_record(topic="t9")])
        with pytest.raises(PoolFormatError, match="unknown topic_id"):
            load_pool(*paths)

    def test_empty_text_rejected(self, tmp_path):
        paths = _write(tmp_path, [_record(text="")])
        with pytest.raises(PoolFormatError, match="empty passage text"):
            load_pool(*paths)

    def test_overlapping_anchors_rejected(self, tmp_path):
        anchors = [{"start": 0, "end": 5, "entity": "A"},
                   {"start": 3, "end": 8, "entity": "B"}]
        paths = _write(tmp_path, [_record(text="abcdefghij", anchors=anchors)])
        with pytest.raises(PoolFormatError, match="overlapping"):
            load_pool(*paths)

    def test_anchor_outside_text_rejected(self, tmp_path):
        anchors = [{"start": 0, "end": 99, "entity": "A"}]
        paths = _write(tmp_path, [_record(text="short", anchors=anchors)])
        with pytest.raises(PoolFormatError, match="anchor span"):
            load_pool(*paths)

    def test_duplicate_passage_id_rejected(self, tmp_path):
        paths = _write(tmp_path, [_record("p1"), _record("p1")])
        with pytest.raises(PoolFormatError, match="duplicate passage_id"):
            load_pool(*paths)

    def test_duplicate_topic_id_rejected(self, tmp_path):
        paths = _write(tmp_path, [_record()],
                       topics_lines=("t1\tone", "t1\ttwo"))
        with pytest.raises(PoolFormatError, match="duplicate topic_id"):
            load_pool(*paths)

    def test_malformed_topic_line(self, tmp_path):
        paths = _write(tmp_path, [_record()], topics_lines=("t1-no-tab",))
        with pytest.raises(PoolFormatError, match="topic_id<TAB>text"):
            load_pool(*paths)


class TestRoundTrip:
    def test_save_load_identity(self, tmp_path):
        pool = make_random_pool(random.Random(3), 4, 25)
        with_anchors = list(pool.passages)
        with_anchors[0] = Passage(
            "q0", "t00", "anchored text example", 1.0,
            anchors=(AnchorSpan(0, 8, "Anchored"),),
        )
        pool = Pool(topics=pool.topics, passages=with_anchors)
        p_path = tmp_path / "out.jsonl"
        t_path = tmp_path / "out.tsv"
        save_pool(pool, p_path, t_path)
        assert load_pool(p_path, t_path) == pool

    def test_unicode_round_trip(self, tmp_path):
        pool = Pool(
            topics={"t1": Topic("t1", "économie européenne")},
            passages=[Passage("p1", "t1", "zürich café — naïve", 0.5)],
        )
        save_pool(pool, tmp_path / "p.jsonl", tmp_path / "t.tsv")
        assert load_pool(tmp_path / "p.jsonl", tmp_path / "t.tsv") == pool


class TestDedup:
    def _pool(self, *passages):
        topics = {"t1": Topic("t1", "x"), "t2": Topic("t2", "y")}
        return Pool(topics=topics, passages=list(passages))

    def test_exact_duplicate(self):
        text = "z" * 100
        pool = self._pool(Passage("p1", "t1", text, 1.0),
                          Passage("p2", "t1", text, 0.0))
        survivors = dedup(pool).passages
        assert [p.passage_id for p in survivors] == ["p1"]

    def test_same_ends_different_middle(self):
        head, tail = "h" * 25, "t" * 25
        pool = self._pool(
            Passage("p1", "t1", head + " middle one " + tail, 1.0),
            Passage("p2", "t1", head + " another middle entirely " + tail, 0.0),
        )
        assert [p.passage_id for p in dedup(pool).passages] == ["p1"]

    def test_differing_third_character_both_survive(self):
        pool = self._pool(Passage("p1", "t1", "abXdefghij" * 6, 1.0),
                          Passage("p2", "t1", "abYdefghij" * 6, 1.0))
        assert len(dedup(pool).passages) == 2

    def test_short_passages_compare_full_text(self):
        pool = self._pool(Passage("p1", "t1", "short text", 1.0),
                          Passage("p2", "t1", "short text", 0.0),
                          Passage("p3", "t1", "short texts", 0.0))
        assert [p.passage_id for p in dedup(pool).passages] == ["p1", "p3"]

    def test_per_topic_scope(self):
        text = "w" * 60
        pool = self._pool(Passage("p1", "t1", text, 1.0),
                          Passage("p2", "t2", text, 1.0))
        assert len(dedup(pool).passages) == 2
        assert len(dedup(pool, per_topic=False).passages) == 1

    def test_whitespace_trimmed_before_keying(self):
        text = "q" * 50
        pool = self._pool(Passage("p1", "t1", text, 1.0),
                          Passage("p2", "t1", "  " + text + "\n", 1.0))
        assert len(dedup(pool).passages) == 1

    def test_idempotent_and_monotone(self):
        rng = random.Random(17)
        for _ in range(20):
            pool = make_random_pool(rng, 3, rng.randint(0, 40),
                                    vocab=["dup", "text", "spam"])
            once = dedup(pool)
            assert len(once.passages) <= len(pool.passages)
            assert dedup(once) == once

    def test_sole_member_never_removed(self):
        pool = self._pool(Passage("p1", "t1", "unique passage body", 1.0))
        assert dedup(pool).passages == pool.passages


class TestPoolStats:
    def test_empty(self):
        stats = pool_stats(Pool(topics={}, passages=[]))
        assert stats["passages"] == 0
        assert stats["topics"] == 0
        assert stats["informative"] == 0
        assert set(stats["score_histogram"]) == {"0", "(0,1)", "1", "2"}

    def test_informative_count(self):
        topics = {"t1": Topic("t1", "x")}
        passages = [Passage("p1", "t1", "a", 0.0),
                    Passage("p2", "t1", "b", 0.5),
                    Passage("p3", "t1", "c", 2.0)]
        stats = pool_stats(Pool(topics=topics, passages=passages))
        assert stats["informative"] == 2
        assert stats["score_histogram"] == {"0": 1, "(0,1)": 1, "1": 0, "2": 1}

    def test_counts_match_pool(self):
        rng = random.Random(5)
        pool = make_random_pool(rng, 6, 80)
        stats = pool_stats(pool)
        assert stats["passages"] == len(pool.passages)
        assert stats["topics"] == len(pool.topics)
        assert stats["informative"] == sum(
            1 for p in pool.passages if p.ref_score > 0
        )
        assert sum(stats["score_histogram"].values()) == len(pool.passages)
