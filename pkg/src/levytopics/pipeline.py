"""End-to-end orchestration with per-stage timing."""
from __future__ import annotations

import json
import time
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator


from . import evalx, lwtg, pd, simgraph, synthgen, textvec, walk
from ._accel import set_threads


class StageError(RuntimeError):
    def __init__(self, stage: str, exc: BaseException):
        super().__init__(f"[{stage}] {exc}")
        self.stage = stage
        self.__cause__ = exc


@dataclass
class PipelineConfig:
    out_dir: str = "run"
    input: str | None = None  # JSONL corpus; labels become ground truth
    truth: str | None = None
    synth: synthgen.SynthSpec | None = None
    k: int = 20
    D: tuple[int, ...] = lwtg.DEFAULT_D
    topk: int = lwtg.DEFAULT_TOPK
    alpha: float = walk.DEFAULT_ALPHA
    tol: float = walk.DEFAULT_TOL
    max_iter: int = walk.DEFAULT_MAX_ITER
    pd_max_iter: int = pd.DEFAULT_MAX_ITER
    pd_tol: float = pd.DEFAULT_TOL
    nir_threshold: float = evalx.DEFAULT_NIR_THRESHOLD
    threads: int | None = None

    def validate(self) -> None:
        if (self.input is None) == (self.synth is None):
            raise ValueError("give exactly one of an input corpus or a synthetic spec")
        if self.input is not None and not Path(self.input).exists():
            raise FileNotFoundError(f"input not found: {self.input}")
        if self.truth is not None and not Path(self.truth).exists():
            raise FileNotFoundError(f"ground truth not found: {self.truth}")
        if self.k < 1 or self.topk < 1 or not self.D or min(self.D) < 1:
            raise ValueError("k, topk and every d must be >= 1")


@dataclass
class PipelineReport:
    timings: dict[str, float] = field(default_factory=dict)
    total: float = 0.0
    paths: dict[str, str] = field(default_factory=dict)
    n_topics: int = 0
    evaluation: evalx.EvalReport | None = None

    def to_dict(self) -> dict:
        out = {"timings": self.timings, "total": self.total, "paths": self.paths, "n_topics": self.n_topics}
        if self.evaluation is not None:
            ev = self.evaluation
            out["accuracy_at_fppt10"] = ev.accuracy_at(10)
            out["top10_f1_by_ndt"] = ev.top10_f1_by_ndt
        return out


@contextmanager
def _stage(report: PipelineReport, name: str) -> Iterator[None]:
    t0 = time.perf_counter()
    try:
        yield
    except StageError:
        raise
    except Exception as exc:
        raise StageError(name, exc) from exc
    finally:
        report.timings[name] = report.timings.get(name, 0.0) + time.perf_counter() - t0


def detect_topics(graph: simgraph.KnnGraph, D=lwtg.DEFAULT_D, topk=lwtg.DEFAULT_TOPK, alpha=walk.DEFAULT_ALPHA, tol=walk.DEFAULT_TOL, max_iter=walk.DEFAULT_MAX_ITER):
    """SER scores followed by multi-granularity growth."""
    ser, _ = walk.ser_scores(graph, alpha, tol, max_iter)
    return lwtg.multi_granularity(graph, ser, D, topk), ser


def ground_truth_from_labels(corpus: textvec.Corpus) -> evalx.GroundTruth | None:
    groups: dict[str, list[int]] = {}
    for i, d in enumerate(corpus):
        if d.label is not None:
            groups.setdefault(d.label, []).append(i)
    labels = sorted(k for k, v in groups.items() if len(v) >= 2)
    if not labels:
        return None
    return evalx.GroundTruth(tuple(groups[k] for k in labels), tuple(labels), len(corpus))


def run_pipeline(config: PipelineConfig) -> PipelineReport:
    """Corpus (or synthetic graph) to ranked topics, writing every artifact."""
    report = PipelineReport()
    t_start = time.perf_counter()
    with _stage(report, "setup"):
        config.validate()
        set_threads(config.threads)
        out = Path(config.out_dir)
        out.mkdir(parents=True, exist_ok=True)
    paths = report.paths
    truth = None

    if config.synth is not None:
        with _stage(report, "synth"):
            planted = synthgen.generate(config.synth)
            graph, truth = planted.graph, planted.truth
            paths["truth"] = str(out / "truth.json")
            synthgen.write_ground_truth(paths["truth"], truth)
            (out / "synth.json").write_text(json.dumps(config.synth.to_dict(), sort_keys=True) + "\n", encoding="utf-8")
    else:
        with _stage(report, "ingest"):
            corpus = textvec.ingest_jsonl(config.input)
            if config.truth is not None:
                truth = synthgen.read_ground_truth(config.truth)
            else:
                truth = ground_truth_from_labels(corpus)
            if truth is not None:
                paths["truth"] = str(out / "truth.json")
                synthgen.write_ground_truth(paths["truth"], truth)
        with _stage(report, "tfidf"):
            vectors = textvec.tfidf(corpus)
            paths["vectors"] = str(out / "vectors.npz")
            textvec.save_vectors(paths["vectors"], vectors, corpus.ids)
        with _stage(report, "graph"):
            graph = simgraph.build_knn_graph(vectors, config.k)
    with _stage(report, "graph"):
        paths["graph"] = str(out / "graph.csv")
        simgraph.write_graph(graph, paths["graph"])

    with _stage(report, "walk"):
        P = walk.transition_matrix(graph)
        pi = walk.stationary_distribution(P, config.alpha, config.tol, config.max_iter)
        ser = walk.site_entropy_rate(pi, P)
        paths["ser"] = str(out / "ser.json")
        Path(paths["ser"]).write_text(json.dumps(ser.tolist()) + "\n", encoding="utf-8")
    with _stage(report, "detect"):
        topics = lwtg.multi_granularity(graph, ser, config.D, config.topk)
        paths["topics"] = str(out / "topics.json")
        lwtg.write_topics(paths["topics"], topics)
    with _stage(report, "rank"):
        result = pd.rank_topics(topics, graph, config.pd_max_iter, config.pd_tol)
        paths["ranking"] = str(out / "ranking.json")
        pd.write_result(paths["ranking"], result)
    report.n_topics = len(topics)

    if truth is not None:
        with _stage(report, "eval"):
            ranked = [topics[i].members for i in result.ranking]
            report.evaluation = evalx.evaluate(ranked, truth, config.nir_threshold)
            paths["eval"] = str(out / "eval.json")
            evalx.write_report(report.evaluation, paths["eval"])
    report.total = time.perf_counter() - t_start
    (out / "timings.json").write_text(json.dumps({"stages": report.timings, "total": report.total}, indent=1) + "\n", encoding="utf-8")
    return report
