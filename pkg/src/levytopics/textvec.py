"""Corpus ingestion and TF-IDF vectors."""
from __future__ import annotations

import json
import math
import re
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np
import scipy.sparse as sp

_TOKEN = re.compile(r"[^\W_]+")


class CorpusError(ValueError):
    pass


def tokenize(text: str) -> list[str]:
    return [t for t in _TOKEN.findall(text.lower()) if len(t) >= 2]


@dataclass(frozen=True)
class Document:
    id: str
    text: str
    label: str | None = None

    @property
    def tokens(self) -> list[str]:
        return tokenize(self.text)


@dataclass(frozen=True)
class Corpus:
    documents: tuple[Document, ...] = ()

    def __len__(self) -> int:
        return len(self.documents)

    def __iter__(self) -> Iterator[Document]:
        return iter(self.documents)

    def __getitem__(self, i: int) -> Document:
        return self.documents[i]

    @property
    def ids(self) -> list[str]:
        return [d.id for d in self.documents]

    @classmethod
    def from_documents(cls, docs: Sequence[Document]) -> "Corpus":
        seen: set[str] = set()
        for d in docs:
            if d.id in seen:
                raise CorpusError(f"duplicate document id {d.id!r}")
            seen.add(d.id)
        return cls(tuple(docs))


@dataclass(frozen=True)
class SparseVector:
    """L2-normalised term weights; ``norm`` is the length before normalisation."""

    indices: np.ndarray
    values: np.ndarray
    norm: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "indices", np.asarray(self.indices, dtype=np.int64))
        object.__setattr__(self, "values", np.asarray(self.values, dtype=np.float64))

    @property
    def entries(self) -> dict[int, float]:
        return dict(zip(self.indices.tolist(), self.values.tolist()))

    @classmethod
    def from_mapping(cls, entries: dict[int, float], normalize: bool = True) -> "SparseVector":
        items = sorted((int(k), float(v)) for k, v in entries.items() if v != 0.0)
        idx = np.array([k for k, _ in items], dtype=np.int64)
        val = np.array([v for _, v in items], dtype=np.float64)
        norm = float(np.sqrt(np.dot(val, val)))
        if normalize and norm > 0:
            val = val / norm
        return cls(idx, val, norm)

    def is_zero(self) -> bool:
        return self.values.size == 0


def ingest_jsonl(path: str | Path) -> Corpus:
    """Read a JSON Lines corpus (fields ``id``, ``text``, optional ``label``)."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"corpus file not found: {path}")
    docs: list[Document] = []
    first_line: dict[str, int] = {}
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"line {lineno}: invalid JSON ({exc.msg})") from None
            if not isinstance(obj, dict) or "id" not in obj or "text" not in obj:
                raise CorpusError(f"line {lineno}: expected an object with 'id' and 'text'")
            doc_id = str(obj["id"])
            if doc_id in first_line:
                raise CorpusError(
                    f"line {lineno}: duplicate document id {doc_id!r} (first seen on line {first_line[doc_id]})"
                )
            first_line[doc_id] = lineno
            label = obj.get("label")
            docs.append(Document(doc_id, str(obj["text"]), None if label is None else str(label)))
    return Corpus(tuple(docs))


def build_vocabulary(corpus: Corpus) -> dict[str, int]:
    terms = sorted({t for d in corpus for t in d.tokens})
    return {t: i for i, t in enumerate(terms)}


def tfidf(corpus: Corpus, vocabulary: dict[str, int] | None = None) -> list[SparseVector]:
    """weight(t, d) = tf(t, d) * ln(N / df(t)), then L2-normalise each row.

    Terms present in every document get weight 0 and are not stored.
    """
    if len(corpus) == 0:
        raise CorpusError("tfidf needs a non-empty corpus")
    vocab = vocabulary if vocabulary is not None else build_vocabulary(corpus)
    counts = [Counter(t for t in d.tokens if t in vocab) for d in corpus]
    df: Counter[str] = Counter()
    for c in counts:
        df.update(c.keys())
    n_docs = len(corpus)
    idf = {t: math.log(n_docs / df[t]) for t in df}
    out = []
    for c in counts:
        out.append(SparseVector.from_mapping({vocab[t]: tf * idf[t] for t, tf in c.items()}))
    return out


def similarity(u: SparseVector, v: SparseVector) -> float:
    """Dot product of two normalised vectors (cosine similarity), clipped to [0, 1]."""
    common, iu, iv = np.intersect1d(u.indices, v.indices, assume_unique=True, return_indices=True)
    if common.size == 0:
        return 0.0
    s = float(np.dot(u.values[iu], v.values[iv]))
    return min(max(s, 0.0), 1.0)


def to_csr(vectors: Sequence[SparseVector], n_terms: int | None = None) -> sp.csr_matrix:
    if n_terms is None:
        n_terms = 1 + max((int(v.indices.max()) for v in vectors if v.indices.size), default=-1)
    indptr = np.zeros(len(vectors) + 1, dtype=np.int64)
    np.cumsum([v.indices.size for v in vectors], out=indptr[1:])
    indices = np.concatenate([v.indices for v in vectors]) if vectors else np.zeros(0, np.int64)
    data = np.concatenate([v.values for v in vectors]) if vectors else np.zeros(0)
    return sp.csr_matrix((data, indices, indptr), shape=(len(vectors), max(n_terms, 0)))


def from_csr(mat: sp.csr_matrix, norms: Sequence[float] | None = None) -> list[SparseVector]:
    mat = sp.csr_matrix(mat)
    out = []
    for i in range(mat.shape[0]):
        lo, hi = mat.indptr[i], mat.indptr[i + 1]
        norm = 0.0 if norms is None else float(norms[i])
        out.append(SparseVector(mat.indices[lo:hi].copy(), mat.data[lo:hi].copy(), norm))
    return out


def save_vectors(path: str | Path, vectors: Sequence[SparseVector], ids: Sequence[str]) -> None:
    mat = to_csr(vectors)
    np.savez_compressed(
        path,
        indptr=mat.indptr,
        indices=mat.indices,
        data=mat.data,
        shape=np.array(mat.shape),
        norms=np.array([v.norm for v in vectors]),
        ids=np.array(list(ids), dtype=str),
    )


def load_vectors(path: str | Path) -> tuple[list[SparseVector], list[str]]:
    with np.load(path) as z:
        mat = sp.csr_matrix((z["data"], z["indices"], z["indptr"]), shape=tuple(z["shape"]))
        return from_csr(mat, z["norms"]), [str(s) for s in z["ids"]]
