"""Greedy selection of high-SER seed nodes with a d-neighbour cover."""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import kernels
from .simgraph import KnnGraph


@dataclass(frozen=True, eq=False)
class SeedSelection:
    seeds: np.ndarray
    sorted_order: np.ndarray
    d: int


def ser_order(ser) -> np.ndarray:
    """Node ids by SER descending, ties to the lower id."""
    ser = np.asarray(ser, dtype=np.float64)
    return np.lexsort((np.arange(ser.size), -ser)).astype(np.int64)


def select_seeds(graph: KnnGraph, ser, d: int) -> SeedSelection:
    """Scan nodes by SER; a node becomes a seed when neither it nor its ``d``
    strongest out-neighbours has been covered yet, then all of them are covered."""
    if d < 1:
        raise ValueError("d must be >= 1")
    ser = np.asarray(ser, dtype=np.float64)
    if ser.shape[0] != graph.n:
        raise ValueError(f"ser has {ser.shape[0]} entries, graph has {graph.n} nodes")
    order = ser_order(ser)
    seeds = kernels.seed_scan(order, graph.indptr, graph.indices, graph.n, int(d))
    return SeedSelection(np.asarray(seeds, dtype=np.int64), order, int(d))


def write_seeds(path: str | Path, selection: SeedSelection, ser) -> None:
    ser = np.asarray(ser, dtype=np.float64)
    rows = [{"id": int(s), "ser": float(ser[s])} for s in selection.seeds]
    Path(path).write_text(json.dumps({"d": selection.d, "seeds": rows}, indent=1) + "\n", encoding="utf-8")


def read_seeds(path: str | Path) -> tuple[int, list[int]]:
    obj = json.loads(Path(path).read_text(encoding="utf-8"))
    return int(obj["d"]), [int(r["id"]) for r in obj["seeds"]]
