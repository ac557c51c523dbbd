"""Poisson deconvolution ranking of candidate topics.

The symmetrised affinity ``a'_ij`` of every edge is treated as a Poisson
observation whose rate is ``w_ij = sum_k mu_k C_k(i, j)``, with ``C_k`` the
indicator that both endpoints lie in topic ``k``. Topic weights ``mu`` are
the maximum-likelihood solution, found by Richardson-Lucy style
multiplicative updates, and a topic's interestingness is ``mu_k * |C_k|``.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from .lwtg import Topic, TopicSet
from .simgraph import KnnGraph, symmetric_arrays

DEFAULT_MAX_ITER = 500
DEFAULT_TOL = 1e-8


class PdError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class PdProblem:
    src: np.ndarray
    dst: np.ndarray
    a: np.ndarray
    cover: sp.csr_matrix  # K x E, 1 where topic k covers edge e
    sizes: np.ndarray  # member counts |C_k|

    @property
    def K(self) -> int:
        return self.cover.shape[0]

    @property
    def edges(self) -> list[tuple[int, int, float]]:
        return list(zip(self.src.tolist(), self.dst.tolist(), self.a.tolist()))

    @property
    def indicators(self) -> list[list[int]]:
        c = self.cover
        return [c.indices[c.indptr[k] : c.indptr[k + 1]].tolist() for k in range(self.K)]

    @property
    def edge_counts(self) -> np.ndarray:
        return np.diff(self.cover.indptr)

    @property
    def degenerate(self) -> np.ndarray:
        return self.edge_counts == 0

    @classmethod
    def from_arrays(cls, edges, indicators: Sequence[Sequence[int]], sizes=None) -> "PdProblem":
        """Direct construction, mostly for small hand-made instances."""
        edges = list(edges)
        src = np.array([e[0] for e in edges], dtype=np.int64)
        dst = np.array([e[1] for e in edges], dtype=np.int64)
        a = np.array([e[2] for e in edges], dtype=np.float64)
        rows = np.repeat(np.arange(len(indicators)), [len(ind) for ind in indicators])
        cols = np.array([e for ind in indicators for e in ind], dtype=np.int64)
        if cols.size and (cols.min() < 0 or cols.max() >= len(edges)):
            raise PdError("indicator references a missing edge")
        cover = sp.csr_matrix((np.ones(cols.size), (rows, cols)), shape=(len(indicators), len(edges)))
        cover.sum_duplicates()
        cover.data[:] = 1.0
        if sizes is None:
            sizes = [len(set(src[list(ind)].tolist()) | set(dst[list(ind)].tolist())) for ind in indicators]
        return cls(src, dst, a, cover, np.asarray(sizes, dtype=np.int64))


@dataclass(frozen=True, eq=False)
class PdResult:
    mu: np.ndarray
    interestingness: np.ndarray
    ranking: np.ndarray
    loglik_trace: list[float]
    iterations: int
    converged: bool

    def to_dict(self) -> dict:
        return {
            "mu": self.mu.tolist(),
            "interestingness": self.interestingness.tolist(),
            "ranking": self.ranking.tolist(),
        }


def build_problem(topics: TopicSet | Sequence[Topic], graph: KnnGraph) -> PdProblem:
    """Covered edges of each topic: symmetric edges with both endpoints inside it."""
    topics = list(topics)
    if not topics:
        raise PdError("empty topic set")
    src, dst, a = symmetric_arrays(graph)
    rows = np.repeat(np.arange(len(topics)), [len(t) for t in topics])
    cols = np.fromiter((m for t in topics for m in t.members), dtype=np.int64, count=rows.size)
    incid = sp.csc_matrix((np.ones(rows.size), (rows, cols)), shape=(len(topics), graph.n))
    cover = incid[:, src].multiply(incid[:, dst]).tocsr()
    cover.eliminate_zeros()
    cover.sort_indices()
    return PdProblem(src, dst, a, cover, np.array([len(t) for t in topics], dtype=np.int64))


def poisson_loglik(problem: PdProblem, mu) -> float:
    """sum over covered edges of a * ln(w) - w, with w = C^T mu.

    Edges no topic covers have a rate fixed at zero whatever ``mu`` is, so
    they are left out of the objective.
    """
    mu = np.asarray(mu, dtype=np.float64)
    if np.any(mu < 0):
        raise PdError("mu must be non-negative")
    covered = np.asarray(problem.cover.sum(axis=0)).ravel() > 0
    w = (problem.cover.T @ mu)[covered]
    a = problem.a[covered]
    if np.any((w <= 0) & (a > 0)):
        return -math.inf
    pos = a > 0
    return float(np.sum(a[pos] * np.log(w[pos])) - np.sum(w))


def fit_weights(problem: PdProblem, max_iter: int = DEFAULT_MAX_ITER, tol: float = DEFAULT_TOL, mu0=None) -> PdResult:
    """Multiplicative updates mu_k <- mu_k * mean over covered edges of a / w."""
    if max_iter < 1 or tol <= 0:
        raise PdError("max_iter must be >= 1 and tol > 0")
    counts = problem.edge_counts.astype(np.float64)
    live = counts > 0
    if not live.any():
        raise PdError("every topic is degenerate (covers no edge)")
    K = problem.K
    if mu0 is None:
        mu = np.where(live, 1.0 / K, 0.0)
    else:
        mu = np.where(live, np.asarray(mu0, dtype=np.float64), 0.0)
    covered = np.asarray(problem.cover.sum(axis=0)).ravel() > 0
    C = problem.cover[:, covered].tocsr()
    Ct = C.T.tocsr()
    a = problem.a[covered]
    safe = np.where(live, counts, 1.0)

    def loglik(w):
        if np.any((w <= 0) & (a > 0)):
            return -math.inf
        pos = a > 0
        return float(np.sum(a[pos] * np.log(w[pos])) - np.sum(w))

    w = Ct @ mu
    trace = [loglik(w)]
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        ratio = np.divide(a, w, out=np.zeros_like(a), where=w > 0)
        mu = mu * (C @ ratio) / safe
        w = Ct @ mu
        ll = loglik(w)
        prev = trace[-1]
        trace.append(ll)
        if math.isfinite(prev) and abs(ll - prev) <= tol * max(abs(prev), 1e-300):
            converged = True
            break
    inter = mu * problem.sizes
    return PdResult(mu, inter, rank_by(inter), trace, it, converged)


def rank_by(score) -> np.ndarray:
    score = np.asarray(score, dtype=np.float64)
    return np.lexsort((np.arange(score.size), -score)).astype(np.int64)


def interestingness(result: PdResult, topics: TopicSet | Sequence[Topic]) -> list[tuple[Topic, float]]:
    """Topics paired with mu_k * |C_k|, best first (ties by lower index)."""
    topics = list(topics)
    if len(topics) != result.mu.size:
        raise PdError("result and topics are not aligned")
    score = result.mu * np.array([len(t) for t in topics])
    return [(topics[k], float(score[k])) for k in rank_by(score)]


def rank_topics(topics: TopicSet | Sequence[Topic], graph: KnnGraph, max_iter: int = DEFAULT_MAX_ITER, tol: float = DEFAULT_TOL) -> PdResult:
    return fit_weights(build_problem(topics, graph), max_iter, tol)


def write_result(path: str | Path, result: PdResult) -> None:
    Path(path).write_text(json.dumps(result.to_dict(), separators=(",", ":")) + "\n", encoding="utf-8")


def read_ranking(path: str | Path) -> dict:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"ranking file not found: {path}")
    return json.loads(path.read_text(encoding="utf-8"))
