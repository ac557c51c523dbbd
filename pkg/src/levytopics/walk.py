"""Random-walk statistics on the k-N^2 graph: PageRank and site entropy rate."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .simgraph import KnnGraph

DEFAULT_ALPHA = 0.85
DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 200


@dataclass(frozen=True, eq=False)
class RowStochastic:
    n: int
    indptr: np.ndarray
    indices: np.ndarray
    probs: np.ndarray
    dangling: np.ndarray

    def row(self, i: int) -> list[tuple[int, float]]:
        lo, hi = self.indptr[i], self.indptr[i + 1]
        return list(zip(self.indices[lo:hi].tolist(), self.probs[lo:hi].tolist()))

    def to_scipy(self) -> sp.csr_matrix:
        return sp.csr_matrix((self.probs, self.indices, self.indptr), shape=(self.n, self.n))


@dataclass(frozen=True, eq=False)
class StationaryDistribution:
    pi: np.ndarray
    alpha: float
    iterations: int
    residual: float
    converged: bool


def transition_matrix(graph: KnnGraph) -> RowStochastic:
    """P_ij = a_ij / sum_j a_ij. Zero out-degree rows are left empty and listed."""
    counts = graph.out_degree()
    row_of = np.repeat(np.arange(graph.n), counts)
    deg = np.bincount(row_of, weights=graph.weights, minlength=graph.n)
    probs = graph.weights / deg[row_of]
    dangling = np.flatnonzero(counts == 0)
    return RowStochastic(graph.n, graph.indptr, graph.indices, probs, dangling)


def stationary_distribution(
    P: RowStochastic,
    alpha: float = DEFAULT_ALPHA,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> StationaryDistribution:
    """Power iteration for pi_j = alpha * sum_i pi_i P_ij + (1 - alpha) / N.

    Mass sitting on dangling nodes is spread uniformly each sweep.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    if tol <= 0 or max_iter < 1:
        raise ValueError("tol must be > 0 and max_iter >= 1")
    n = P.n
    if n == 0:
        return StationaryDistribution(np.zeros(0), alpha, 0, 0.0, True)
    pt = P.to_scipy().T.tocsr()
    pi = np.full(n, 1.0 / n)
    teleport = (1.0 - alpha) / n
    residual = math.inf
    it = 0
    for it in range(1, max_iter + 1):
        dmass = pi[P.dangling].sum()
        nxt = alpha * (pt @ pi + dmass / n) + teleport
        nxt /= nxt.sum()
        residual = float(np.abs(nxt - pi).sum())
        pi = nxt
        if residual < tol:
            break
    return StationaryDistribution(pi, alpha, it, residual, residual < tol)


def _row_entropy(P: RowStochastic) -> np.ndarray:
    p = P.probs
    terms = np.zeros_like(p)
    pos = p > 0
    terms[pos] = -p[pos] * np.log(p[pos])
    counts = np.diff(P.indptr)
    h = np.bincount(np.repeat(np.arange(P.n), counts), weights=terms, minlength=P.n)
    # a single-entry row is exactly 1 * ln 1
    h[counts == 1] = 0.0
    return h


def site_entropy_rate(pi: StationaryDistribution, P: RowStochastic) -> np.ndarray:
    """SER_i = pi_i * sum_j -P_ij ln P_ij (natural log)."""
    if pi.pi.shape[0] != P.n:
        raise ValueError("dimension mismatch between pi and P")
    return np.maximum(pi.pi * _row_entropy(P), 0.0)


def entropy_rate(pi: StationaryDistribution, P: RowStochastic) -> float:
    return math.fsum(site_entropy_rate(pi, P).tolist())


def ser_scores(graph: KnnGraph, alpha: float = DEFAULT_ALPHA, tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER):
    P = transition_matrix(graph)
    pi = stationary_distribution(P, alpha, tol, max_iter)
    return site_entropy_rate(pi, P), pi
