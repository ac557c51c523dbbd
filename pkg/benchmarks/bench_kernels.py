"""Compiled vs pure-Python timings of the hot kernels.

Runs each kernel on the same inputs through its numba-compiled form and its
uncompiled ``py_func`` and checks that both return identical arrays.

    python3 benchmarks/bench_kernels.py --nodes 2000 8000 --repeats 3
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from levytopics import kernels, synthgen
from levytopics._accel import USE_NUMBA, python_impl
from levytopics.seeds import select_seeds
from levytopics.walk import ser_scores


def best_of(fn, args, repeats):
    out = fn(*args)
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, out


def same(a, b) -> bool:
    if isinstance(a, tuple):
        return all(np.array_equal(x, y) for x, y in zip(a, b))
    return np.array_equal(a, b)


def cases(n):
    n_topics = max(1, n // 100)
    planted = synthgen.generate(synthgen.SynthSpec(n_nodes=n, n_topics=n_topics, rng_seed=1))
    g, sim = planted.graph, planted.similarity
    ser, _ = ser_scores(g)
    sel = select_seeds(g, ser, 2)
    rp, ri, rw = g.reverse()
    is_seed = np.zeros(g.n, dtype=bool)
    is_seed[sel.seeds] = True
    stream = sel.sorted_order[~is_seed[sel.sorted_order]]
    sim = sim.tocsr()
    return {
        "topk_rows": (kernels.topk_rows, (sim.indptr.astype(np.int64), sim.indices.astype(np.int64), sim.data, 20)),
        "seed_scan": (kernels.seed_scan, (sel.sorted_order, g.indptr, g.indices, g.n, 2)),
        "grow_stream": (kernels.grow_stream, (g.n, g.indptr, g.indices, g.weights, rp, ri, rw, sel.seeds, stream, 2)),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--nodes", type=int, nargs="+", default=[2000, 8000])
    ap.add_argument("--repeats", type=int, default=3)
    args = ap.parse_args(argv)
    if not USE_NUMBA:
        print("numba disabled (LEVYTOPICS_DISABLE_NUMBA or not installed): both columns are pure Python")
    print(f"{'kernel':<12} {'nodes':>6} {'numba s':>10} {'python s':>10} {'speedup':>8}  equal")
    for n in args.nodes:
        for name, (fn, a) in cases(n).items():
            t_fast, out_fast = best_of(fn, a, args.repeats)
            t_py, out_py = best_of(python_impl(fn), a, args.repeats)
            print(f"{name:<12} {n:>6} {t_fast:>10.4f} {t_py:>10.4f} {t_py / t_fast:>8.1f}  {same(out_fast, out_py)}")


if __name__ == "__main__":
    main()
