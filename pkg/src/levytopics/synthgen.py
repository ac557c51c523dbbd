"""Planted-topic benchmark generator.

Topics are planted directly at the graph level: every pair inside a topic
gets a similarity drawn from a heavy-tailed law, while the remaining
"noise" nodes get a few weak random links. A text mode produces JSONL
documents from topic vocabularies for end-to-end runs.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .evalx import GroundTruth
from .simgraph import KnnGraph
from .textvec import Document

LAWS = ("exponentiated-weibull", "rayleigh", "weibull", "lognormal", "pareto", "power-law")


class SynthError(ValueError):
    pass


@dataclass(frozen=True)
class SynthSpec:
    n_nodes: int = 2000
    n_topics: int = 20
    topic_size_range: tuple[int, int] = (30, 60)
    member_fraction: float | None = None
    intra_law: str = "rayleigh"
    intra_params: dict = field(default_factory=lambda: {"sigma": 0.25})
    intra_shift: float = 0.5
    intra_drop: float = 0.0
    hub_strength: float = 0.7
    noise_edge_rate: float = 4.0
    noise_similarity_cap: float = 0.3
    k: int = 20
    rng_seed: int = 0

    def to_dict(self) -> dict:
        d = asdict(self)
        d["topic_size_range"] = list(self.topic_size_range)
        return d

    @classmethod
    def from_dict(cls, obj: dict) -> "SynthSpec":
        obj = dict(obj)
        if "topic_size_range" in obj:
            obj["topic_size_range"] = tuple(obj["topic_size_range"])
        return cls(**obj)


def sample_law(rng: np.random.Generator, law: str, params: dict, size: int) -> np.ndarray:
    """Draw from one of the heavy-tailed families by inverse CDF."""
    u = rng.random(size)
    p = params
    if law == "rayleigh":
        return p["sigma"] * np.sqrt(-2.0 * np.log1p(-u))
    if law == "lognormal":
        return np.exp(p["mu"] + p["sigma"] * rng.standard_normal(size))
    if law == "weibull":
        return p["lambda"] * (-np.log1p(-u)) ** (1.0 / p["k"])
    if law == "exponentiated-weibull":
        return p["lambda"] * (-np.log1p(-(u ** (1.0 / p["alpha"])))) ** (1.0 / p["k"])
    if law in ("pareto", "power-law"):
        return p["a"] * (1.0 - u) ** (-1.0 / p["alpha"])
    raise SynthError(f"unknown law {law!r}")


def sample_similarities(rng: np.random.Generator, spec: SynthSpec, size: int) -> np.ndarray:
    """Law samples shifted by ``intra_shift`` and truncated to (0, 1] by redrawing."""
    out = np.empty(size)
    filled = 0
    for _ in range(1000):
        if filled == size:
            break
        need = size - filled
        draw = spec.intra_shift + sample_law(rng, spec.intra_law, spec.intra_params, max(need * 2, 16))
        draw = draw[(draw > 0.0) & (draw <= 1.0)][:need]
        out[filled : filled + draw.size] = draw
        filled += draw.size
    if filled < size:
        raise SynthError("intra law puts almost no mass in (0, 1]")
    return out


def _topic_sizes(rng, spec: SynthSpec) -> np.ndarray:
    lo, hi = spec.topic_size_range
    T = spec.n_topics
    if spec.member_fraction is None:
        return rng.integers(lo, hi + 1, size=T)
    target = int(round(spec.member_fraction * spec.n_nodes))
    sizes = np.full(T, lo, dtype=np.int64)
    for _ in range(target - T * lo):
        open_ = np.flatnonzero(sizes < hi)
        sizes[open_[rng.integers(open_.size)]] += 1
    return sizes


def _assign_by_centrality(rng, sims, iu, ju, size, strength):
    """Reorder pair similarities so pairs of central nodes get the large values.

    The multiset of similarities (hence the intra law) is unchanged; only
    which pair receives which value depends on per-node centralities.
    """
    z = rng.standard_normal(size)
    key = strength * (z[iu] + z[ju]) / math.sqrt(2.0) + math.sqrt(1.0 - strength**2) * rng.standard_normal(iu.size)
    out = np.empty_like(sims)
    out[np.argsort(-key, kind="stable")] = np.sort(sims)[::-1]
    return out


def validate(spec: SynthSpec) -> None:
    lo, hi = spec.topic_size_range
    if spec.n_nodes < 1:
        raise SynthError("n_nodes must be >= 1")
    if spec.n_topics < 0:
        raise SynthError("n_topics must be >= 0")
    if not 2 <= lo <= hi:
        raise SynthError("topic_size_range must satisfy 2 <= min <= max")
    if spec.n_topics * lo > spec.n_nodes:
        raise SynthError(f"n_topics * min topic size ({spec.n_topics * lo}) exceeds n_nodes ({spec.n_nodes})")
    if spec.member_fraction is not None:
        members = spec.member_fraction * spec.n_nodes
        if members < spec.n_topics * lo:
            raise SynthError(
                f"member_fraction * n_nodes ({members:g}) < n_topics * min topic size ({spec.n_topics * lo})"
            )
        if members > spec.n_topics * hi:
            raise SynthError(
                f"member_fraction * n_nodes ({members:g}) > n_topics * max topic size ({spec.n_topics * hi})"
            )
    if spec.intra_law not in LAWS:
        raise SynthError(f"unknown intra law {spec.intra_law!r}")
    if not 0.0 <= spec.hub_strength < 1.0:
        raise SynthError("hub_strength must lie in [0, 1)")
    if not 0.0 <= spec.intra_drop < 1.0:
        raise SynthError("intra_drop must lie in [0, 1)")
    if spec.noise_edge_rate < 0:
        raise SynthError("noise_edge_rate must be >= 0")
    if not 0.0 < spec.noise_similarity_cap <= 1.0:
        raise SynthError("noise_similarity_cap must lie in (0, 1]")
    if spec.k < 1:
        raise SynthError("k must be >= 1")
    if spec.n_topics:
        probe = sample_similarities(np.random.Generator(np.random.PCG64(12345)), spec, 4001)
        if spec.noise_similarity_cap >= float(np.median(probe)):
            raise SynthError("noise_similarity_cap must stay below the median intra similarity")


@dataclass(frozen=True, eq=False)
class Planted:
    graph: KnnGraph
    truth: GroundTruth
    similarity: sp.csr_matrix  # symmetric, before top-k truncation


def generate(spec: SynthSpec) -> Planted:
    """Planted graph and its ground truth; identical output for identical specs."""
    validate(spec)
    rng = np.random.Generator(np.random.PCG64(spec.rng_seed))
    n = spec.n_nodes
    sizes = _topic_sizes(rng, spec)
    perm = rng.permutation(n)
    topics = []
    start = 0
    for s in sizes:
        topics.append(np.sort(perm[start : start + s]))
        start += s
    is_member = np.zeros(n, dtype=bool)
    for t in topics:
        is_member[t] = True

    rows, cols, vals = [], [], []
    for t in topics:
        iu, ju = np.triu_indices(t.size, k=1)
        sims = sample_similarities(rng, spec, iu.size)
        if spec.hub_strength > 0:
            sims = _assign_by_centrality(rng, sims, iu, ju, t.size, spec.hub_strength)
        keep = rng.random(iu.size) >= spec.intra_drop
        rows.append(t[iu[keep]])
        cols.append(t[ju[keep]])
        vals.append(sims[keep])

    noise = np.flatnonzero(~is_member)
    if spec.noise_edge_rate > 0 and noise.size and n > 1:
        deg = rng.poisson(spec.noise_edge_rate, size=noise.size)
        src = np.repeat(noise, deg)
        dst = rng.integers(0, n - 1, size=src.size)
        dst = dst + (dst >= src)  # uniform over the other n - 1 nodes
        w = spec.noise_similarity_cap * (1.0 - rng.random(src.size))
        a, b = np.minimum(src, dst), np.maximum(src, dst)
        rows.append(a)
        cols.append(b)
        vals.append(w)

    if rows:
        r = np.concatenate(rows).astype(np.int64)
        c = np.concatenate(cols).astype(np.int64)
        v = np.concatenate(vals)
    else:
        r = c = np.zeros(0, np.int64)
        v = np.zeros(0)
    # a repeated noise pair keeps its strongest draw
    order = np.lexsort((-v, c, r))
    r, c, v = r[order], c[order], v[order]
    first = np.ones(r.size, dtype=bool)
    first[1:] = (r[1:] != r[:-1]) | (c[1:] != c[:-1])
    r, c, v = r[first], c[first], v[first]
    upper = sp.coo_matrix((v, (r, c)), shape=(n, n))
    sim = (upper + upper.T).tocsr()
    graph = KnnGraph.from_similarity(sim, spec.k)
    truth = GroundTruth(tuple(t.tolist() for t in topics), tuple(f"gt{i}" for i in range(len(topics))), n)
    return Planted(graph, truth, sim)


def intra_samples(planted: Planted, topic: int) -> np.ndarray:
    """The drawn intra-topic similarities of one planted topic (one per pair)."""
    members = np.array(sorted(planted.truth.topics[topic]))
    block = planted.similarity[members][:, members]
    return sp.triu(block, k=1).tocoo().data


def write_ground_truth(path: str | Path, truth: GroundTruth) -> None:
    Path(path).write_text(json.dumps(truth.to_dict(), separators=(",", ":")) + "\n", encoding="utf-8")


def read_ground_truth(path: str | Path) -> GroundTruth:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"ground truth file not found: {path}")
    return GroundTruth.from_dict(json.loads(path.read_text(encoding="utf-8")))


# -- text mode --------------------------------------------------------------

def generate_corpus(
    n_docs: int = 400,
    n_topics: int = 8,
    topic_size_range: tuple[int, int] = (10, 20),
    topic_vocab: int = 12,
    background_vocab: int = 2000,
    doc_length: int = 20,
    topic_word_share: float = 0.6,
    rng_seed: int = 0,
) -> tuple[list[Document], GroundTruth]:
    """Short documents: topic documents mix their topic's vocabulary into background words."""
    rng = np.random.Generator(np.random.PCG64(rng_seed))
    lo, hi = topic_size_range
    sizes = rng.integers(lo, hi + 1, size=n_topics)
    if sizes.sum() > n_docs:
        raise SynthError("topics need more documents than n_docs")
    perm = rng.permutation(n_docs)
    label = np.full(n_docs, -1)
    start = 0
    for t, s in enumerate(sizes):
        label[perm[start : start + s]] = t
        start += s
    background = [f"w{i:05d}" for i in range(background_vocab)]
    docs = []
    for i in range(n_docs):
        t = int(label[i])
        n_topic = int(round(topic_word_share * doc_length)) if t >= 0 else 0
        words = [f"t{t}x{j}" for j in rng.integers(0, topic_vocab, size=n_topic)]
        words += [background[j] for j in rng.integers(0, background_vocab, size=doc_length - n_topic)]
        rng.shuffle(words)
        docs.append(Document(f"d{i:06d}", " ".join(words), None if t < 0 else f"topic{t}"))
    truth = GroundTruth(
        tuple(np.flatnonzero(label == t).tolist() for t in range(n_topics)),
        tuple(f"topic{t}" for t in range(n_topics)),
        n_docs,
    )
    return docs, truth


def write_corpus(path: str | Path, docs) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for d in docs:
            obj = {"id": d.id, "text": d.text}
            if d.label is not None:
                obj["label"] = d.label
            fh.write(json.dumps(obj) + "\n")
