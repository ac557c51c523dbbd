"""Detection metrics: top-10 F1 vs NDT, accuracy vs FPPT, scalability."""
from __future__ import annotations

import csv
import json
from fractions import Fraction
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

DEFAULT_NIR_THRESHOLD = 0.5
TOP_N = 10


@dataclass(frozen=True)
class GroundTruth:
    topics: tuple[frozenset[int], ...]
    ids: tuple[str, ...] = ()
    n: int | None = None

    def __post_init__(self):
        topics = tuple(frozenset(int(m) for m in t) for t in self.topics)
        object.__setattr__(self, "topics", topics)
        if not self.ids:
            object.__setattr__(self, "ids", tuple(f"gt{i}" for i in range(len(topics))))
        seen: set[int] = set()
        for t in topics:
            if len(t) < 2:
                raise ValueError("ground-truth topics need at least 2 members")
            if seen & t:
                raise ValueError("ground-truth topics must be pairwise disjoint")
            seen |= t

    def __len__(self) -> int:
        return len(self.topics)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "topics": [{"id": i, "members": sorted(t)} for i, t in zip(self.ids, self.topics)],
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "GroundTruth":
        rows = obj["topics"]
        return cls(tuple(r["members"] for r in rows), tuple(str(r["id"]) for r in rows), obj.get("n"))


@dataclass
class EvalReport:
    top10_f1_by_ndt: list[tuple[int, float]]
    accuracy_fppt: list[tuple[float, float]]
    successes: list[tuple[int, int]] = field(default_factory=list)
    false_positives: int = 0
    nir_threshold: float = DEFAULT_NIR_THRESHOLD

    def accuracy_at(self, max_fppt: float) -> float:
        return accuracy_within(self.accuracy_fppt, max_fppt)

    def top10_at(self, ndt: int) -> float:
        for k, v in self.top10_f1_by_ndt:
            if k == ndt:
                return v
        raise KeyError(ndt)

    def to_dict(self) -> dict:
        return {
            "nir_threshold": self.nir_threshold,
            "accuracy_at_fppt10": self.accuracy_at(10),
            "top10_f1_by_ndt": [[k, v] for k, v in self.top10_f1_by_ndt],
            "accuracy_fppt": [[f, a] for f, a in self.accuracy_fppt],
            "successes": [[d, g] for d, g in self.successes],
            "false_positives": self.false_positives,
        }


def f1(dt: Iterable[int], gt: Iterable[int]) -> float:
    dt, gt = set(dt), set(gt)
    if not gt:
        raise ValueError("ground-truth topic is empty")
    if not dt:
        return 0.0
    inter = len(dt & gt)
    if inter == 0:
        return 0.0
    # 2PR / (P + R) with P = inter/|DT|, R = inter/|GT|, in one rounding
    return 2.0 * inter / (len(dt) + len(gt))


def nir(dt: Iterable[int], gt: Iterable[int]) -> float:
    """|DT & GT| / |DT | GT| (Jaccard)."""
    dt, gt = set(dt), set(gt)
    union = len(dt | gt)
    if union == 0:
        raise ValueError("both sets are empty")
    return len(dt & gt) / union


def _sizes_and_overlap(ranked: Sequence[Iterable[int]], gts: GroundTruth):
    det = [np.fromiter(set(t), dtype=np.int64) for t in ranked]
    gtl = [np.fromiter(t, dtype=np.int64) for t in gts.topics]
    n = 1 + max([int(a.max()) for a in det + gtl if a.size] + [-1])
    d_sizes = np.array([a.size for a in det], dtype=np.int64)
    g_sizes = np.array([a.size for a in gtl], dtype=np.int64)
    if not det or not gtl:
        return d_sizes, g_sizes, np.zeros((len(det), len(gtl)), dtype=np.int64)

    def incidence(sets):
        rows = np.repeat(np.arange(len(sets)), [a.size for a in sets])
        cols = np.concatenate(sets)
        return sp.csr_matrix((np.ones(rows.size, dtype=np.int64), (rows, cols)), shape=(len(sets), n))

    overlap = (incidence(det) @ incidence(gtl).T).toarray()
    return d_sizes, g_sizes, overlap


def _f1_matrix(d_sizes, g_sizes, overlap):
    with np.errstate(divide="ignore", invalid="ignore"):
        out = 2.0 * overlap / (d_sizes[:, None] + g_sizes[None, :])
    return np.where(overlap > 0, out, 0.0)


def _best_exact(f, d_sizes, g_sizes, overlap, k: int) -> list[Fraction]:
    """Per ground truth, the exact best F1 over the first ``k`` detections.

    Rounding is monotone, so the exact maximum is among the entries whose
    float value equals the float maximum.
    """
    out = []
    top = f[:k].max(axis=0)
    for j in range(f.shape[1]):
        rows = np.flatnonzero(f[:k, j] == top[j])
        out.append(max(Fraction(2 * int(overlap[r, j]), int(d_sizes[r] + g_sizes[j])) for r in rows))
    return out


def _mean_top(per_gt: list[Fraction]) -> float:
    best = sorted(per_gt, reverse=True)[:TOP_N]
    return float(sum(best) / len(best)) if best else 0.0


def top10_f1(ranked: Sequence[Iterable[int]], gts: GroundTruth, ndt: int) -> float:
    """Mean of the 10 best per-ground-truth F1 scores over the first ``ndt`` detections."""
    if ndt > len(ranked):
        raise ValueError("ndt exceeds the number of ranked topics")
    if ndt <= 0 or len(gts) == 0:
        return 0.0
    parts = _sizes_and_overlap(ranked[:ndt], gts)
    return _mean_top(_best_exact(_f1_matrix(*parts), *parts, ndt))


def top10_curve(ranked: Sequence[Iterable[int]], gts: GroundTruth, ndts: Iterable[int]) -> list[tuple[int, float]]:
    ndts = sorted(set(int(k) for k in ndts if 0 <= k <= len(ranked)))
    if not ndts or len(gts) == 0:
        return [(k, 0.0) for k in ndts]
    parts = _sizes_and_overlap(ranked[: ndts[-1]], gts)
    f = _f1_matrix(*parts)
    return [(k, _mean_top(_best_exact(f, *parts, k)) if k else 0.0) for k in ndts]


def match_ranking(ranked: Sequence[Iterable[int]], gts: GroundTruth, nir_threshold: float = DEFAULT_NIR_THRESHOLD):
    """Walk the ranking once; returns the curve, matched pairs and false-positive count.

    A detection succeeds when its best NIR against a still-unmatched ground
    truth reaches the threshold (ties to the lower ground-truth index).
    """
    if not 0.0 < nir_threshold <= 1.0:
        raise ValueError("nir_threshold must lie in (0, 1]")
    d_sizes, g_sizes, overlap = _sizes_and_overlap(ranked, gts)
    with np.errstate(divide="ignore", invalid="ignore"):
        nirs = overlap / (d_sizes[:, None] + g_sizes[None, :] - overlap)
    nirs = np.nan_to_num(nirs)
    open_gt = np.ones(len(gts), dtype=bool)
    succ: list[tuple[int, int]] = []
    fp = 0
    curve = []
    n_gt = len(gts)
    for r in range(len(ranked)):
        row = np.where(open_gt, nirs[r], -1.0) if n_gt else np.zeros(0)
        g = int(np.argmax(row)) if n_gt else -1
        if n_gt and row[g] >= nir_threshold:
            open_gt[g] = False
            succ.append((r, g))
        else:
            fp += 1
        curve.append((fp / max(1, len(succ)), len(succ) / n_gt if n_gt else 0.0))
    return curve, succ, fp


def accuracy_fppt_curve(ranked: Sequence[Iterable[int]], gts: GroundTruth, nir_threshold: float = DEFAULT_NIR_THRESHOLD) -> list[tuple[float, float]]:
    return match_ranking(ranked, gts, nir_threshold)[0]


def accuracy_within(curve: Sequence[tuple[float, float]], max_fppt: float) -> float:
    """Best accuracy reached at any ranking prefix whose FPPT stays within ``max_fppt``."""
    best = 0.0
    for fppt, acc in curve:
        if fppt <= max_fppt and acc > best:
            best = acc
    return best


def scalability(m: float, t_m: float, n: float, t_n: float) -> float:
    """(M * T_N) / (N * T_M); 1 means linear growth of run time with size."""
    if not (n >= m > 0) or t_m <= 0 or t_n <= 0:
        raise ValueError("need n >= m > 0 and positive times")
    return (m * t_n) / (n * t_m)


def evaluate(
    ranked: Sequence[Iterable[int]],
    gts: GroundTruth,
    nir_threshold: float = DEFAULT_NIR_THRESHOLD,
    ndts: Iterable[int] | None = None,
) -> EvalReport:
    ranked = [tuple(t) for t in ranked]
    if ndts is None:
        ndts = sorted({k for k in (10, 20, 50, 100, 200, 400, len(ranked)) if k <= len(ranked)})
    curve, succ, fp = match_ranking(ranked, gts, nir_threshold)
    return EvalReport(top10_curve(ranked, gts, ndts), curve, succ, fp, nir_threshold)


def write_report(report: EvalReport, json_path: str | Path, csv_prefix: str | Path | None = None) -> None:
    json_path = Path(json_path)
    json_path.write_text(json.dumps(report.to_dict(), indent=1) + "\n", encoding="utf-8")
    prefix = Path(csv_prefix) if csv_prefix else json_path.with_suffix("")
    with open(f"{prefix}_fppt.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["fppt", "accuracy"])
        w.writerows(report.accuracy_fppt)
    with open(f"{prefix}_ndt.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["ndt", "top10f1"])
        w.writerows(report.top10_f1_by_ndt)
