"""Topic generation by explore-exploit growth from seeds across a threshold cascade.

Every seed starts a topic with threshold 1.0. Non-seed nodes arrive in SER
order and join their ``topk`` most similar live topics. When joining would
pull a topic's mean internal affinity below its threshold, the topic is
first emitted as a snapshot and the threshold drops to the next tenth
below the new mean, so one seed yields a nested chain of topics.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import kernels
from .seeds import SeedSelection, select_seeds
from .simgraph import KnnGraph

DEFAULT_D = (2, 3, 4)
DEFAULT_TOPK = 2


@dataclass(frozen=True)
class Topic:
    members: tuple[int, ...]
    seed: int
    granularity_d: int
    threshold: float
    is_final: bool

    def __post_init__(self):
        object.__setattr__(self, "members", tuple(sorted(int(m) for m in self.members)))

    def __len__(self) -> int:
        return len(self.members)

    @property
    def member_set(self) -> frozenset[int]:
        return frozenset(self.members)

    def to_dict(self) -> dict:
        return {
            "members": list(self.members),
            "seed": self.seed,
            "d": self.granularity_d,
            "threshold": self.threshold,
            "is_final": self.is_final,
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "Topic":
        return cls(tuple(obj["members"]), int(obj["seed"]), int(obj["d"]), float(obj["threshold"]), bool(obj["is_final"]))


@dataclass(eq=False)
class TopicSet:
    topics: list[Topic] = field(default_factory=list)
    source_graph: KnnGraph | None = None

    def __len__(self) -> int:
        return len(self.topics)

    def __iter__(self):
        return iter(self.topics)

    def __getitem__(self, i):
        return self.topics[i]


# -- scalar definitions ---------------------------------------------------

def avg_internal(members: Iterable[int], graph: KnnGraph) -> float:
    """Mean affinity over existing directed edges inside ``members``.

    A singleton scores 1.0; two or more members without internal edges score 0.
    """
    mem = set(int(m) for m in members)
    if not mem:
        raise ValueError("members must be non-empty")
    if len(mem) == 1:
        return 1.0
    total = 0.0
    count = 0
    for i in mem:
        for j, w in graph.neighbors(i):
            if j in mem:
                total += w
                count += 1
    return total / count if count else 0.0


def topic_similarity(members: Iterable[int] | Topic, x: int, graph: KnnGraph) -> float:
    """Mean two-way affinity between ``x`` and the topic, relative to its internal mean."""
    mem = members.member_set if isinstance(members, Topic) else set(int(m) for m in members)
    if x in mem:
        raise ValueError("candidate already belongs to the topic")
    link = sum(graph.affinity(m, x) + graph.affinity(x, m) for m in mem) / len(mem)
    base = avg_internal(mem, graph)
    return link / base if base > 0 else 0.0


def should_snapshot(avg_after_add: float, th: float) -> bool:
    return avg_after_add < th


def next_threshold(avg_after_add: float, th: float) -> float:
    """Threshold after a drop: floor to tenths, at least 0.1 below ``th``, floored at 0.1."""
    tenths = int(math.floor(avg_after_add * 10.0 + kernels._FLOOR_EPS))
    tenths = min(tenths, int(round(th * 10)) - 1)
    return max(kernels.TH_FLOOR, tenths) / 10.0


# -- growth ---------------------------------------------------------------

def grow_topics(graph: KnnGraph, selection: SeedSelection, topk: int = DEFAULT_TOPK) -> TopicSet:
    """Grow one topic per seed over the SER-ordered stream of non-seed nodes.

    Snapshots come first in emission order, then each live topic with at
    least two members as a final topic.
    """
    if topk < 1:
        raise ValueError("topk must be >= 1")
    seeds = np.asarray(selection.seeds, dtype=np.int64)
    if seeds.size == 0:
        raise ValueError("need at least one seed")
    is_seed = np.zeros(graph.n, dtype=bool)
    is_seed[seeds] = True
    order = np.asarray(selection.sorted_order, dtype=np.int64)
    stream = order[~is_seed[order]]
    rptr, ridx, rw = graph.reverse()
    add_t, add_n, snap_t, snap_s, snap_th, size, th = kernels.grow_stream(
        graph.n, graph.indptr, graph.indices, graph.weights, rptr, ridx, rw, seeds, stream, int(topk)
    )
    by_topic = np.argsort(add_t, kind="stable")
    starts = np.searchsorted(add_t[by_topic], np.arange(seeds.size + 1))
    history = [add_n[by_topic[starts[t] : starts[t + 1]]] for t in range(seeds.size)]

    d = selection.d
    out = []
    for t, s, h in zip(snap_t.tolist(), snap_s.tolist(), snap_th.tolist()):
        out.append(Topic(tuple(history[t][:s].tolist()), int(seeds[t]), d, h / 10.0, False))
    for t in range(seeds.size):
        if size[t] >= 2:
            out.append(Topic(tuple(history[t].tolist()), int(seeds[t]), d, int(th[t]) / 10.0, True))
    return TopicSet(out, graph)


def dedup(topics: TopicSet | Sequence[Topic]) -> TopicSet:
    """Drop topics whose member set already appeared earlier."""
    src = topics.topics if isinstance(topics, TopicSet) else list(topics)
    seen: set[tuple[int, ...]] = set()
    out = []
    for t in src:
        if t.members in seen:
            continue
        seen.add(t.members)
        out.append(t)
    return TopicSet(out, getattr(topics, "source_graph", None))


def multi_granularity(graph: KnnGraph, ser, D: Iterable[int] = DEFAULT_D, topk: int = DEFAULT_TOPK) -> TopicSet:
    """Union of growth runs over several seed cover sizes, deduplicated."""
    ds = sorted(set(int(d) for d in D))
    if not ds:
        raise ValueError("D must be non-empty")
    merged: list[Topic] = []
    for d in ds:
        merged.extend(grow_topics(graph, select_seeds(graph, ser, d), topk).topics)
    return dedup(TopicSet(merged, graph))


def write_topics(path: str | Path, topics: TopicSet | Sequence[Topic]) -> None:
    rows = [t.to_dict() for t in topics]
    Path(path).write_text(json.dumps(rows, separators=(",", ":")) + "\n", encoding="utf-8")


def read_topics(path: str | Path) -> TopicSet:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"topics file not found: {path}")
    return TopicSet([Topic.from_dict(o) for o in json.loads(path.read_text(encoding="utf-8"))])
