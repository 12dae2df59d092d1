"""Pre-trained word-vector stores, document vectors and cosine scoring.

Two on-disk formats share the header line "<vocab> <dim>":

  * text: one "<word> <float> ... <float>" line per word;
  * binary: per entry, the UTF-8 word, a single space, then dim
    little-endian 32-bit IEEE-754 floats.

Values are kept bit-exactly (widened to float64 for arithmetic).
Document vectors are the element-wise sum of the vectors of every
in-vocabulary unit occurrence; out-of-vocabulary units are skipped and
counted.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .metrics import Direction, Score
from .textproc import Gram, PAIR_SEPARATOR


class StoreFormatError(ValueError):
    """Raised for malformed vector files."""


@dataclass(frozen=True)
class EmbeddingStore:
    dim: int
    vectors: dict[str, np.ndarray]
    gram: Gram = Gram.UNIGRAM
    # Whether lookups use stems (locally trained models) or raw
    # lowercase words (general-purpose models).
    use_stems: bool = True

    def __len__(self) -> int:
        return len(self.vectors)


@dataclass(frozen=True)
class DocVector:
    components: np.ndarray
    oov_count: int = 0

    @property
    def dim(self) -> int:
        return int(self.components.shape[0])


def _parse_header(line: str, path) -> tuple[int, int]:
    parts = line.split()
    if len(parts) != 2:
        raise StoreFormatError(f"{path}: header must be '<vocab> <dim>'")
    try:
        vocab, dim = int(parts[0]), int(parts[1])
    except ValueError as exc:
        raise StoreFormatError(f"{path}: non-integer header fields") from exc
    if vocab < 0 or dim <= 0:
        raise StoreFormatError(f"{path}: header out of range: {vocab} {dim}")
    return vocab, dim


def _translate_key(word: str, pair_separator: str | None) -> str:
    if pair_separator:
        return word.replace(pair_separator, PAIR_SEPARATOR)
    return word


def _load_text(path, pair_separator: str | None) -> tuple[int, dict[str, np.ndarray]]:
    with open(path, encoding="utf-8") as fh:
        header = fh.readline()
        if not header:
            raise StoreFormatError(f"{path}: empty file")
        vocab, dim = _parse_header(header, path)
        vectors: dict[str, np.ndarray] = {}
        for lineno, line in enumerate(fh, start=2):
            if not line.strip():
                continue
            parts = line.split()
            if len(parts) != dim + 1:
                raise StoreFormatError(
                    f"{path}, line {lineno}: expected word + {dim} floats, "
                    f"got {len(parts)} fields"
                )
            word = _translate_key(parts[0], pair_separator)
            if word in vectors:
                raise StoreFormatError(f"{path}, line {lineno}: duplicate word {word!r}")
            vectors[word] = np.asarray([float(x) for x in parts[1:]], dtype=np.float64)
        if len(vectors) != vocab:
            raise StoreFormatError(
                f"{path}: header promises {vocab} words, file has {len(vectors)}"
            )
    return dim, vectors


def _load_binary(path, pair_separator: str | None) -> tuple[int, dict[str, np.ndarray]]:
    with open(path, "rb") as fh:
        header_bytes = bytearray()
        while True:
            b = fh.read(1)
            if not b:
                raise StoreFormatError(f"{path}: missing header")
            if b == b"\n":
                break
            header_bytes.extend(b)
        vocab, dim = _parse_header(header_bytes.decode("utf-8"), path)
        record = dim * 4
        vectors: dict[str, np.ndarray] = {}
        for i in range(vocab):
            word_bytes = bytearray()
            while True:
                b = fh.read(1)
                if not b:
                    raise StoreFormatError(
                        f"{path}: truncated at entry {i + 1} of {vocab}"
                    )
                if b == b" ":
                    break
                word_bytes.extend(b)
            raw = fh.read(record)
            if len(raw) != record:
                raise StoreFormatError(f"{path}: truncated vector at entry {i + 1}")
            word = _translate_key(word_bytes.decode("utf-8"), pair_separator)
            if word in vectors:
                raise StoreFormatError(f"{path}: duplicate word {word!r}")
            vectors[word] = np.frombuffer(raw, dtype="<f4").astype(np.float64)
        if fh.read(1):
            raise StoreFormatError(f"{path}: trailing bytes after {vocab} entries")
    return dim, vectors


def load_store(
    path,
    fmt: str = "text",
    *,
    gram: Gram = Gram.UNIGRAM,
    use_stems: bool = True,
    pair_separator: str | None = None,
) -> EmbeddingStore:
    """Load a vector store; pair_separator translates externally joined
    bigram keys (e.g. "new_york") to the internal pair serialization."""
    if fmt == "text":
        dim, vectors = _load_text(path, pair_separator)
    elif fmt == "binary":
        dim, vectors = _load_binary(path, pair_separator)
    else:
        raise ValueError(f"unknown vector format {fmt!r} (expected text or binary)")
    return EmbeddingStore(dim=dim, vectors=vectors, gram=gram, use_stems=use_stems)


def save_store(store: EmbeddingStore, path, fmt: str = "text") -> None:
    """Write a store in a load_store-compatible format.

    Binary entries are written as float32, so a binary round trip is
    bit-exact only for stores whose values are representable in
    float32 (as loaded ones are).
    """
    words = list(store.vectors)
    for word in words:
        if " " in word or "\n" in word:
            raise StoreFormatError(f"word {word!r} contains a separator character")
    if fmt == "text":
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(f"{len(words)} {store.dim}\n")
            for word in words:
                values = " ".join(repr(float(x)) for x in store.vectors[word])
                fh.write(f"{word} {values}\n")
    elif fmt == "binary":
        with open(path, "wb") as fh:
            fh.write(f"{len(words)} {store.dim}\n".encode("utf-8"))
            for word in words:
                fh.write(word.encode("utf-8") + b" ")
                fh.write(store.vectors[word].astype("<f4").tobytes())
    else:
        raise ValueError(f"unknown vector format {fmt!r} (expected text or binary)")


def inspect_store(path, fmt: str = "text") -> dict:
    """Header information (vocabulary size and dimension) of a store file."""
    if fmt == "text":
        with open(path, encoding="utf-8") as fh:
            header = fh.readline()
    elif fmt == "binary":
        with open(path, "rb") as fh:
            header = fh.readline().decode("utf-8", errors="replace")
    else:
        raise ValueError(f"unknown vector format {fmt!r} (expected text or binary)")
    if not header:
        raise StoreFormatError(f"{path}: empty file")
    vocab, dim = _parse_header(header, path)
    return {"path": str(path), "format": fmt, "vocab": vocab, "dim": dim}


def doc_vector(units: list[str], store: EmbeddingStore) -> DocVector:
    """Element-wise sum of unit vectors; every occurrence contributes once."""
    total = np.zeros(store.dim, dtype=np.float64)
    oov = 0
    vectors = store.vectors
    for unit in units:
        vec = vectors.get(unit)
        if vec is None:
            oov += 1
        else:
            total += vec
    return DocVector(components=total, oov_count=oov)


def cosine(u: DocVector, v: DocVector) -> Score:
    """Cosine similarity; 0 for a degenerate (zero-norm) input."""
    if u.dim != v.dim:
        raise ValueError(f"dimension mismatch: {u.dim} vs {v.dim}")
    norm_u = float(np.linalg.norm(u.components))
    norm_v = float(np.linalg.norm(v.components))
    if norm_u == 0.0 or norm_v == 0.0:
        return Score(0.0, Direction.HIGHER_IS_BETTER)
    value = float(np.dot(u.components, v.components)) / (norm_u * norm_v)
    return Score(value, Direction.HIGHER_IS_BETTER)
