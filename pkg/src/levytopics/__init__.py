"""Hot topic detection in noisy document collections.

Documents become a directed k-nearest-neighbour similarity graph. High
entropy-rate nodes seed topics that grow by explore-exploit assignment
across a cascade of similarity thresholds, and Poisson deconvolution
ranks the resulting candidates.
"""
__version__ = "0.1.0"

from .evalx import EvalReport, GroundTruth
from .lwtg import Topic, TopicSet, multi_granularity
from .pd import PdResult, rank_topics
from .pipeline import PipelineConfig, run_pipeline
from .simgraph import KnnGraph, build_knn_graph
from .synthgen import SynthSpec, generate
from .tailfit import FitResult, best_fit
from .textvec import Corpus, Document, SparseVector, ingest_jsonl, tfidf

__all__ = [
    "Corpus",
    "Document",
    "EvalReport",
    "FitResult",
    "GroundTruth",
    "KnnGraph",
    "PdResult",
    "PipelineConfig",
    "SparseVector",
    "SynthSpec",
    "Topic",
    "TopicSet",
    "best_fit",
    "build_knn_graph",
    "generate",
    "ingest_jsonl",
    "multi_granularity",
    "rank_topics",
    "run_pipeline",
    "tfidf",
]
