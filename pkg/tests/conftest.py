import json
import random

import pytest

from passageval.corpus import AnchorSpan, Passage, Pool, Topic
from passageval.textproc import Preprocessor


def make_random_pool(rng: random.Random, n_topics: int, n_passages: int,
                     vocab=None) -> Pool:
    """Small synthetic pool; roughly half the passages are informative."""
    vocab = vocab or ["amber", "basalt", "cedar", "dune", "ferron",
                      "glade", "hollow", "iris", "jasper", "kestrel"]
    topics = {f"t{i:02d}": Topic(f"t{i:02d}", f"tweet number {i}")
              for i in range(n_topics)}
    passages = []
    for j in range(n_passages):
        words = [rng.choice(vocab) for _ in range(rng.randint(3, 12))]
        score = rng.choice([0.0, 0.0, 0.0, round(rng.random(), 3), 1.0, 2.0])
        passages.append(
            Passage(f"p{j:04d}", f"t{rng.randrange(n_topics):02d}",
                    " ".join(words), score)
        )
    return Pool(topics=topics, passages=passages)


def write_pool_files(pool: Pool, tmp_path):
    passages_path = tmp_path / "passages.jsonl"
    topics_path = tmp_path / "topics.tsv"
    with open(topics_path, "w", encoding="utf-8") as fh:
        for tid in sorted(pool.topics):
            fh.write(f"{tid}\t{pool.topics[tid].text}\n")
    with open(passages_path, "w", encoding="utf-8") as fh:
        for p in pool.passages:
            fh.write(json.dumps({
                "passage_id": p.passage_id,
                "topic_id": p.topic_id,
                "text": p.text,
                "ref_score": p.ref_score,
                "anchors": [{"start": a.start, "end": a.end, "entity": a.entity}
                            for a in p.anchors],
            }) + "\n")
    return passages_path, topics_path


@pytest.fixture
def plain_pre() -> Preprocessor:
    """Preprocessor with an empty stoplist (keeps hand examples simple)."""
    return Preprocessor(frozenset())


@pytest.fixture
def tiny_pool() -> Pool:
    """Two topics, four passages, one anchor-bearing passage."""
    topics = {
        "t1": Topic("t1", "volcanic eruptions in iceland"),
        "t2": Topic("t2", "marathon training plans"),
    }
    passages = [
        Passage("p1", "t1", "lava flows reached the ring road", 1.0),
        Passage("p2", "t1", "the eruption plume closed airports", 0.5,
                anchors=(AnchorSpan(4, 12, "Eruption"),)),
        Passage("p3", "t2", "long runs build aerobic endurance", 2.0),
        Passage("p4", "t2", "carbohydrate loading before race day", 0.0),
    ]
    return Pool(topics=topics, passages=passages)
