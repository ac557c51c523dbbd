"""Directed k-nearest-neighbour similarity graph."""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np
import scipy.sparse as sp

from . import kernels
from ._accel import USE_NUMBA
from .textvec import SparseVector, to_csr


class GraphError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class KnnGraph:
    """CSR adjacency; each row is sorted by affinity descending, ties by lower target.

    Attributes
    ----------
    n : int
        Node count.
    k : int
        Maximum out-degree kept per node.
    indptr, indices, weights : numpy.ndarray
        Row pointers, targets and affinities in (0, 1].
    """

    n: int
    k: int
    indptr: np.ndarray
    indices: np.ndarray
    weights: np.ndarray
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "indptr", np.ascontiguousarray(self.indptr, dtype=np.int64))
        object.__setattr__(self, "indices", np.ascontiguousarray(self.indices, dtype=np.int64))
        object.__setattr__(self, "weights", np.ascontiguousarray(self.weights, dtype=np.float64))
        if self.indptr.shape != (self.n + 1,):
            raise GraphError("indptr must have n + 1 entries")

    @classmethod
    def from_edges(cls, n: int, edges, k: int | None = None) -> "KnnGraph":
        """Build from ``(src, dst, weight)`` triples, re-sorting rows.

        When ``k`` is given rows are truncated to their ``k`` strongest edges.
        """
        edges = list(edges)
        if edges:
            src, dst, w = (np.array(c) for c in zip(*edges))
        else:
            src = dst = np.zeros(0, np.int64)
            w = np.zeros(0)
        mat = sp.csr_matrix((w.astype(float), (src.astype(np.int64), dst.astype(np.int64))), shape=(n, n))
        if k is None:
            k = int(np.diff(mat.indptr).max()) if n else 0
            k = max(k, 1)
        return cls.from_similarity(mat, k)

    @classmethod
    def from_similarity(cls, sim: sp.spmatrix, k: int) -> "KnnGraph":
        """Top-``k`` truncation of a (possibly asymmetric) sparse similarity matrix."""
        if k < 1:
            raise GraphError("k must be >= 1")
        sim = sp.csr_matrix(sim)
        sim.sum_duplicates()
        fn = kernels.topk_rows if USE_NUMBA else kernels.topk_rows_numpy
        ptr, idx, val = fn(
            sim.indptr.astype(np.int64), sim.indices.astype(np.int64), sim.data.astype(np.float64), int(k)
        )
        return cls(sim.shape[0], int(k), ptr, idx, np.minimum(val, 1.0))

    # -- access -----------------------------------------------------------
    @property
    def n_edges(self) -> int:
        return int(self.indices.size)

    def out_degree(self) -> np.ndarray:
        return np.diff(self.indptr)

    def neighbors(self, i: int) -> list[tuple[int, float]]:
        lo, hi = self.indptr[i], self.indptr[i + 1]
        return list(zip(self.indices[lo:hi].tolist(), self.weights[lo:hi].tolist()))

    def edges(self) -> Iterator[tuple[int, int, float]]:
        for i in range(self.n):
            for j, w in self.neighbors(i):
                yield i, j, w

    def edge_arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        src = np.repeat(np.arange(self.n, dtype=np.int64), self.out_degree())
        return src, self.indices, self.weights

    def to_scipy(self) -> sp.csr_matrix:
        return sp.csr_matrix((self.weights, self.indices, self.indptr), shape=(self.n, self.n))

    @cached_property
    def _lookup(self) -> dict[tuple[int, int], float]:
        return {(i, j): w for i, j, w in self.edges()}

    def affinity(self, i: int, j: int) -> float:
        return self._lookup.get((i, j), 0.0)

    def reverse(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """In-edges as CSR: for node j, sources i with weight a_ij."""
        if "rev" not in self._cache:
            t = self.to_scipy().T.tocsr()
            t.sort_indices()
            self._cache["rev"] = (
                t.indptr.astype(np.int64),
                t.indices.astype(np.int64),
                t.data.astype(np.float64),
            )
        return self._cache["rev"]

    def scaled(self, c: float) -> "KnnGraph":
        return KnnGraph(self.n, self.k, self.indptr, self.indices, self.weights * c)


def build_knn_graph(vectors: Sequence[SparseVector], k: int, block: int = 2048) -> KnnGraph:
    """Brute-force k-N^2 graph: every node keeps its ``k`` most similar others.

    Only strictly positive similarities become edges; ties go to the lower id.
    """
    if k < 1:
        raise GraphError("k must be >= 1")
    if len(vectors) == 0:
        raise GraphError("need at least one vector")
    x = to_csr(vectors)
    n = x.shape[0]
    xt = x.T.tocsc()
    rows = []
    for start in range(0, n, block):
        s = (x[start : start + block] @ xt).tocsr()
        s.data = np.clip(s.data, 0.0, 1.0)
        rows.append(s)
    return KnnGraph.from_similarity(sp.vstack(rows).tocsr(), k)


def symmetrize(graph: KnnGraph) -> list[tuple[int, int, float]]:
    """Undirected edge list ``(i, j, (a_ij + a_ji) / 2)`` with ``i < j``."""
    src, dst, w = symmetric_arrays(graph)
    return list(zip(src.tolist(), dst.tolist(), w.tolist()))


def symmetric_arrays(graph: KnnGraph) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    a = graph.to_scipy()
    s = sp.triu((a + a.T) * 0.5, k=1).tocoo()
    keep = s.data > 0
    order = np.lexsort((s.col[keep], s.row[keep]))
    return (
        s.row[keep][order].astype(np.int64),
        s.col[keep][order].astype(np.int64),
        s.data[keep][order].astype(np.float64),
    )


def write_graph(graph: KnnGraph, csv_path: str | Path, meta_path: str | Path | None = None) -> None:
    csv_path = Path(csv_path)
    meta_path = Path(meta_path) if meta_path else csv_path.with_suffix(".json")
    with csv_path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["src", "dst", "weight"])
        for i, j, a in graph.edges():
            w.writerow([i, j, repr(float(a))])
    meta_path.write_text(json.dumps({"n": graph.n, "k": graph.k}) + "\n", encoding="utf-8")


def read_graph(csv_path: str | Path, meta_path: str | Path | None = None) -> KnnGraph:
    csv_path = Path(csv_path)
    meta_path = Path(meta_path) if meta_path else csv_path.with_suffix(".json")
    for p in (csv_path, meta_path):
        if not p.exists():
            raise FileNotFoundError(f"graph file not found: {p}")
    meta = json.loads(meta_path.read_text(encoding="utf-8"))
    with csv_path.open(encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["src", "dst", "weight"]:
            raise GraphError(f"{csv_path}: expected header src,dst,weight")
        edges = [(int(s), int(d), float(w)) for s, d, w in reader]
    return KnnGraph.from_edges(int(meta["n"]), edges, k=int(meta["k"]))
