import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from levytopics.simgraph import KnnGraph
from levytopics.walk import (
    entropy_rate,
    site_entropy_rate,
    stationary_distribution,
    transition_matrix,
)


def _random_graph(rng, n, k, p_dangling=0.0):
    edges = []
    for i in range(n):
        if rng.random() < p_dangling:
            continue
        others = [j for j in range(n) if j != i]
        for j in rng.choice(others, size=min(k, n - 1), replace=False):
            edges.append((i, int(j), float(rng.uniform(0.05, 1.0))))
    return KnnGraph.from_edges(n, edges, k=max(k, 1))


def test_row_normalisation_example():
    P = transition_matrix(KnnGraph.from_edges(3, [(0, 1, 0.2), (0, 2, 0.6)]))
    assert dict(P.row(0)) == {2: pytest.approx(0.75), 1: pytest.approx(0.25)}


def test_dangling_row_listed():
    P = transition_matrix(KnnGraph.from_edges(3, [(0, 1, 0.5), (1, 0, 0.5)]))
    assert P.row(2) == []
    assert P.dangling.tolist() == [2]


def test_random_rows_sum_to_one(rng):
    P = transition_matrix(_random_graph(rng, 10, 4))
    for i in range(10):
        assert sum(p for _, p in P.row(i)) == pytest.approx(1.0, abs=1e-12)


def test_two_node_symmetric():
    P = transition_matrix(KnnGraph.from_edges(2, [(0, 1, 0.3), (1, 0, 0.3)]))
    for alpha in (0.1, 0.5, 0.85, 0.99):
        pi = stationary_distribution(P, alpha)
        assert pi.pi.tolist() == pytest.approx([0.5, 0.5], abs=1e-12)


def test_pure_teleport_limit(rng):
    P = transition_matrix(_random_graph(rng, 7, 3))
    pi = stationary_distribution(P, alpha=1e-12)
    assert np.allclose(pi.pi, 1 / 7, atol=1e-10)


def test_three_cycle_uniform():
    # a permutation matrix is doubly stochastic: the fixed point is exactly 1/3 each
    P = transition_matrix(KnnGraph.from_edges(3, [(0, 1, 1.0), (1, 2, 1.0), (2, 0, 1.0)]))
    pi = stationary_distribution(P, 0.85)
    assert pi.pi.tolist() == pytest.approx([1 / 3] * 3, abs=1e-8)
    assert pi.converged


def test_non_convergence_flagged(rng):
    P = transition_matrix(_random_graph(rng, 20, 3))
    pi = stationary_distribution(P, 0.99, tol=1e-15, max_iter=3)
    assert not pi.converged and pi.iterations == 3


def test_bad_arguments():
    P = transition_matrix(KnnGraph.from_edges(2, [(0, 1, 1.0)]))
    with pytest.raises(ValueError):
        stationary_distribution(P, alpha=1.0)
    with pytest.raises(ValueError):
        stationary_distribution(P, tol=0.0)


def test_deterministic_cycle_zero_entropy():
    P = transition_matrix(KnnGraph.from_edges(3, [(0, 1, 0.4), (1, 2, 0.7), (2, 0, 0.2)]))
    assert entropy_rate(stationary_distribution(P), P) == 0.0


def test_uniform_rows_entropy_ln_m():
    m = 4
    edges = [(i, j, 0.5) for i in range(m + 1) for j in range(m + 1) if i != j]
    P = transition_matrix(KnnGraph.from_edges(m + 1, edges))
    pi = stationary_distribution(P)
    assert entropy_rate(pi, P) == pytest.approx(math.log(m), abs=1e-12)
    assert site_entropy_rate(pi, P) == pytest.approx(pi.pi * math.log(m), abs=1e-15)


def test_entropy_rate_is_ser_sum(rng):
    P = transition_matrix(_random_graph(rng, 6, 3))
    pi = stationary_distribution(P)
    assert entropy_rate(pi, P) == math.fsum(site_entropy_rate(pi, P).tolist())


def test_single_out_edge_zero_ser():
    P = transition_matrix(KnnGraph.from_edges(3, [(0, 1, 0.9), (1, 0, 0.3), (1, 2, 0.3), (2, 0, 0.5)]))
    ser = site_entropy_rate(stationary_distribution(P), P)
    assert ser[0] == 0.0 and ser[2] == 0.0 and ser[1] > 0


def test_star_center_highest_ser():
    leaves = range(1, 7)
    edges = [(0, j, 0.5) for j in leaves] + [(j, 0, 0.5) for j in leaves]
    P = transition_matrix(KnnGraph.from_edges(7, edges))
    ser = site_entropy_rate(stationary_distribution(P), P)
    assert ser[0] > ser[1:].max()


def test_matches_dense_solve(rng):
    for n in (5, 17, 50):
        g = _random_graph(rng, n, 4, p_dangling=0.1)
        pi = stationary_distribution(transition_matrix(g), 0.85)
        oracle = oracles.dense_pagerank(n, {i: g.neighbors(i) for i in range(n)}, 0.85)
        assert np.max(np.abs(pi.pi - oracle)) <= 1e-8


graphs = st.builds(
    lambda n, seed, p: _random_graph(np.random.Generator(np.random.PCG64(seed)), n, 3, p),
    st.integers(2, 30),
    st.integers(0, 2**32 - 1),
    st.sampled_from([0.0, 0.2]),
)


@given(graphs, st.floats(0.05, 0.95))
def test_pi_is_a_distribution(g, alpha):
    pi = stationary_distribution(transition_matrix(g), alpha)
    assert abs(pi.pi.sum() - 1.0) <= 1e-9
    assert np.all(pi.pi >= (1 - alpha) / g.n - 1e-12)


@given(graphs)
def test_fixed_point_within_10_tol(g):
    P = transition_matrix(g)
    pi = stationary_distribution(P, 0.85, tol=1e-10)
    step = 0.85 * (P.to_scipy().T @ pi.pi + pi.pi[P.dangling].sum() / g.n) + 0.15 / g.n
    assert np.abs(step - pi.pi).sum() <= 10 * 1e-10


@given(graphs, st.floats(0.01, 100.0))
def test_scaling_invariance(g, c):
    P1, P2 = transition_matrix(g), transition_matrix(g.scaled(c))
    assert np.allclose(P1.probs, P2.probs, rtol=1e-12)
    s1 = site_entropy_rate(stationary_distribution(P1), P1)
    s2 = site_entropy_rate(stationary_distribution(P2), P2)
    assert np.allclose(s1, s2, rtol=1e-9, atol=1e-15)


@given(graphs)
def test_ser_zero_iff_dangling_or_single(g):
    P = transition_matrix(g)
    ser = site_entropy_rate(stationary_distribution(P), P)
    deg = g.out_degree()
    assert np.all(ser >= 0)
    assert np.array_equal(ser == 0, deg <= 1)
