"""Command-line entry point.

Every subcommand reads the artifacts written by the previous one, so the
pipeline can be run stage by stage or all at once with ``pipeline``.
Options may also come from a ``key = value`` file given with ``--config``;
command-line flags win over the file.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__, evalx, lwtg, pd, seeds, simgraph, synthgen, tailfit, textvec, walk
from ._accel import set_threads
from .pipeline import PipelineConfig, StageError, detect_topics, ground_truth_from_labels, run_pipeline


class CliError(Exception):
    pass


# -- config files -----------------------------------------------------------

def read_config(path: str | Path) -> dict[str, str]:
    """``key = value`` lines; ``#`` starts a comment, blank lines are ignored."""
    path = Path(path)
    if not path.exists():
        raise CliError(f"config file not found: {path}")
    out: dict[str, str] = {}
    for lineno, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise CliError(f"{path}:{lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise CliError(f"{path}:{lineno}: empty key")
        out[key.replace("_", "-")] = value
    return out


def config_tokens(cfg: dict[str, str], parser: argparse.ArgumentParser) -> list[str]:
    """Turn config entries into flags understood by ``parser``."""
    actions = {}
    for act in parser._actions:
        for opt in act.option_strings:
            if opt.startswith("--"):
                actions[opt[2:]] = act
    tokens: list[str] = []
    for key, value in cfg.items():
        act = actions.get(key)
        if act is None or key == "config":
            raise CliError(f"unknown config key {key!r} for this command")
        if act.nargs == 0:
            if value.lower() in ("1", "true", "yes", "on"):
                tokens.append(f"--{key}")
            elif value.lower() not in ("0", "false", "no", "off"):
                raise CliError(f"config key {key!r} expects true or false")
        else:
            tokens += [f"--{key}", value]
    return tokens


# -- argument types ---------------------------------------------------------

def _int_set(text: str) -> tuple[int, ...]:
    try:
        vals = tuple(sorted({int(s) for s in text.replace(" ", "").split(",") if s}))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not vals or min(vals) < 1:
        raise argparse.ArgumentTypeError("values must be positive integers")
    return vals


def _int_pair(text: str) -> tuple[int, int]:
    vals = [int(s) for s in text.split(",")]
    if len(vals) != 2:
        raise argparse.ArgumentTypeError("expected MIN,MAX")
    return vals[0], vals[1]


def _params(text: str) -> dict[str, float]:
    out = {}
    for part in filter(None, text.replace(" ", "").split(";")):
        name, _, val = part.partition("=")
        if not val:
            raise argparse.ArgumentTypeError(f"expected name=value pairs, got {part!r}")
        out[name] = float(val)
    return out


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


# -- parser -----------------------------------------------------------------

def _walk_args(p):
    p.add_argument("--alpha", type=float, default=walk.DEFAULT_ALPHA, help="PageRank damping factor")
    p.add_argument("--tol", type=float, default=walk.DEFAULT_TOL, help="power-iteration L1 tolerance")
    p.add_argument("--max-iter", type=_positive_int, default=walk.DEFAULT_MAX_ITER)


def _synth_args(p):
    d = synthgen.SynthSpec()
    p.add_argument("--n-nodes", type=_positive_int, default=d.n_nodes)
    p.add_argument("--n-topics", type=int, default=d.n_topics)
    p.add_argument("--topic-size", type=_int_pair, default=d.topic_size_range, metavar="MIN,MAX")
    p.add_argument("--member-fraction", type=float, default=None)
    p.add_argument("--intra-law", choices=synthgen.LAWS, default=d.intra_law)
    p.add_argument("--intra-params", type=_params, default=d.intra_params, metavar="NAME=V;...")
    p.add_argument("--intra-shift", type=float, default=d.intra_shift)
    p.add_argument("--intra-drop", type=float, default=d.intra_drop)
    p.add_argument("--hub-strength", type=float, default=d.hub_strength)
    p.add_argument("--noise-rate", type=float, default=d.noise_edge_rate, help="mean noise edges per noise node")
    p.add_argument("--noise-cap", type=float, default=d.noise_similarity_cap)
    p.add_argument("--seed", type=int, default=d.rng_seed, help="generator seed")


def _synth_spec(args, k: int) -> synthgen.SynthSpec:
    return synthgen.SynthSpec(
        n_nodes=args.n_nodes,
        n_topics=args.n_topics,
        topic_size_range=tuple(args.topic_size),
        member_fraction=args.member_fraction,
        intra_law=args.intra_law,
        intra_params=dict(args.intra_params),
        intra_shift=args.intra_shift,
        intra_drop=args.intra_drop,
        hub_strength=args.hub_strength,
        noise_edge_rate=args.noise_rate,
        noise_similarity_cap=args.noise_cap,
        k=k,
        rng_seed=args.seed,
    )


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value file; command-line flags override it")
    common.add_argument("--threads", type=_positive_int, default=None, help="cap on worker threads")

    parser = argparse.ArgumentParser(prog="levytopics", description="Hot topic detection on k-NN similarity graphs.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("synth", parents=[common], help="generate a planted-topic graph or corpus")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--k", type=_positive_int, default=20)
    p.add_argument("--text", action="store_true", help="write a JSONL corpus instead of a graph")
    p.add_argument("--n-docs", type=_positive_int, default=400, help="corpus size in text mode")
    _synth_args(p)

    p = sub.add_parser("ingest", parents=[common], help="JSONL corpus to TF-IDF vectors")
    p.add_argument("--input", required=True)
    p.add_argument("--out", required=True, help="vectors .npz")
    p.add_argument("--truth-out", help="write labels as ground-truth JSON")

    p = sub.add_parser("graph", parents=[common], help="vectors to k-N^2 graph CSV")
    p.add_argument("--vectors", required=True)
    p.add_argument("--k", type=_positive_int, default=20)
    p.add_argument("--out", required=True, help="graph CSV (a .json sidecar is written next to it)")

    p = sub.add_parser("seeds", parents=[common], help="SER scores and seed selection")
    p.add_argument("--graph", required=True)
    p.add_argument("--d", type=_positive_int, default=2, help="neighbours covered per seed")
    p.add_argument("--out", required=True)
    _walk_args(p)

    p = sub.add_parser("detect", parents=[common], help="multi-granularity topic growth")
    p.add_argument("--graph", required=True)
    p.add_argument("--d-set", type=_int_set, default=lwtg.DEFAULT_D, metavar="D1,D2,...")
    p.add_argument("--topk", type=_positive_int, default=lwtg.DEFAULT_TOPK)
    p.add_argument("--out", required=True)
    _walk_args(p)

    p = sub.add_parser("rank", parents=[common], help="Poisson deconvolution ranking")
    p.add_argument("--graph", required=True)
    p.add_argument("--topics", required=True)
    p.add_argument("--pd-max-iter", type=_positive_int, default=pd.DEFAULT_MAX_ITER)
    p.add_argument("--pd-tol", type=float, default=pd.DEFAULT_TOL)
    p.add_argument("--out", required=True)

    p = sub.add_parser("fit", parents=[common], help="heavy-tail fits of topic similarity spectra")
    p.add_argument("--graph", required=True)
    p.add_argument("--topics", required=True)
    p.add_argument("--ranking", help="fit the best-ranked topics first")
    p.add_argument("--top", type=_positive_int, default=10, help="number of topics to fit")
    p.add_argument("--values", choices=("all", "intra", "inter"), default="all",
                   help="edges touching the topic (all), inside it, or on its boundary")
    p.add_argument("--out", required=True, help="CSV output")

    p = sub.add_parser("eval", parents=[common], help="accuracy/FPPT and top-10 F1 against ground truth")
    p.add_argument("--topics", required=True)
    p.add_argument("--ranking", required=True)
    p.add_argument("--truth", required=True)
    p.add_argument("--nir-threshold", type=float, default=evalx.DEFAULT_NIR_THRESHOLD)
    p.add_argument("--out", required=True, help="report JSON; curves go to <out>_fppt.csv and <out>_ndt.csv")

    p = sub.add_parser("pipeline", parents=[common], help="run every stage and record timings")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--input", help="JSONL corpus")
    src.add_argument("--synth", action="store_true", help="use a generated planted-topic graph")
    p.add_argument("--truth", help="ground-truth JSON (defaults to corpus labels)")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--k", type=_positive_int, default=20)
    p.add_argument("--d-set", type=_int_set, default=lwtg.DEFAULT_D, metavar="D1,D2,...")
    p.add_argument("--topk", type=_positive_int, default=lwtg.DEFAULT_TOPK)
    p.add_argument("--pd-max-iter", type=_positive_int, default=pd.DEFAULT_MAX_ITER)
    p.add_argument("--pd-tol", type=float, default=pd.DEFAULT_TOL)
    p.add_argument("--nir-threshold", type=float, default=evalx.DEFAULT_NIR_THRESHOLD)
    _walk_args(p)
    _synth_args(p)
    return parser


# -- commands ---------------------------------------------------------------

def _load_graph(path):
    return simgraph.read_graph(path)


def cmd_synth(args) -> None:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.text:
        docs, truth = synthgen.generate_corpus(
            n_docs=args.n_docs, n_topics=args.n_topics, topic_size_range=tuple(args.topic_size), rng_seed=args.seed
        )
        synthgen.write_corpus(out / "corpus.jsonl", docs)
    else:
        spec = _synth_spec(args, args.k)
        planted = synthgen.generate(spec)
        simgraph.write_graph(planted.graph, out / "graph.csv")
        truth = planted.truth
        (out / "synth.json").write_text(json.dumps(spec.to_dict(), sort_keys=True) + "\n", encoding="utf-8")
    synthgen.write_ground_truth(out / "truth.json", truth)
    print(f"wrote {out}")


def cmd_ingest(args) -> None:
    corpus = textvec.ingest_jsonl(args.input)
    vectors = textvec.tfidf(corpus)
    textvec.save_vectors(args.out, vectors, corpus.ids)
    if args.truth_out:
        truth = ground_truth_from_labels(corpus)
        if truth is None:
            raise CliError("corpus has no labels to turn into ground truth")
        synthgen.write_ground_truth(args.truth_out, truth)
    print(f"{len(corpus)} documents -> {args.out}")


def cmd_graph(args) -> None:
    vectors, _ = textvec.load_vectors(args.vectors)
    graph = simgraph.build_knn_graph(vectors, args.k)
    simgraph.write_graph(graph, args.out)
    print(f"{graph.n} nodes, {graph.n_edges} edges -> {args.out}")


def cmd_seeds(args) -> None:
    graph = _load_graph(args.graph)
    ser, _ = walk.ser_scores(graph, args.alpha, args.tol, args.max_iter)
    sel = seeds.select_seeds(graph, ser, args.d)
    seeds.write_seeds(args.out, sel, ser)
    print(f"{sel.seeds.size} seeds -> {args.out}")


def cmd_detect(args) -> None:
    graph = _load_graph(args.graph)
    topics, _ = detect_topics(graph, args.d_set, args.topk, args.alpha, args.tol, args.max_iter)
    lwtg.write_topics(args.out, topics)
    print(f"{len(topics)} topics -> {args.out}")


def cmd_rank(args) -> None:
    graph = _load_graph(args.graph)
    topics = lwtg.read_topics(args.topics)
    result = pd.rank_topics(topics, graph, args.pd_max_iter, args.pd_tol)
    pd.write_result(args.out, result)
    print(f"ranked {len(topics)} topics in {result.iterations} iterations -> {args.out}")


def _fmt_params(params: dict[str, float]) -> str:
    return ";".join(f"{k}={v!r}" for k, v in params.items())


def cmd_fit(args) -> None:
    graph = _load_graph(args.graph)
    topics = lwtg.read_topics(args.topics)
    order = list(range(len(topics)))
    if args.ranking:
        order = [int(i) for i in pd.read_ranking(args.ranking)["ranking"]]
    skipped = 0
    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["topic_id", "family", "params", "aic", "akaike_weight"])
        for tid in order[: args.top]:
            spec = tailfit.spectrum(topics[tid], graph, tid)
            if args.values == "intra":
                x = spec.values
            elif args.values == "inter":
                x = spec.inter_values
            else:
                x = np.concatenate([spec.values, spec.inter_values])
            if x.size < tailfit.MIN_SAMPLES:
                skipped += 1
                continue
            res = tailfit.best_fit(x)
            for r in res.ranked:
                w.writerow([tid, r.family, _fmt_params(r.params), repr(r.aic), repr(r.akaike_weight)])
    note = f" ({skipped} topics with too few values skipped)" if skipped else ""
    print(f"fits -> {args.out}{note}")


def cmd_eval(args) -> None:
    topics = lwtg.read_topics(args.topics)
    ranking = pd.read_ranking(args.ranking)["ranking"]
    if sorted(ranking) != list(range(len(topics))):
        raise CliError("ranking does not match the topics file")
    truth = synthgen.read_ground_truth(args.truth)
    report = evalx.evaluate([topics[i].members for i in ranking], truth, args.nir_threshold)
    evalx.write_report(report, args.out)
    print(f"accuracy within FPPT 10: {report.accuracy_at(10):.3f}")
    for ndt, v in report.top10_f1_by_ndt:
        print(f"top-10 F1 @ NDT {ndt}: {v:.3f}")


def cmd_pipeline(args) -> None:
    cfg = PipelineConfig(
        out_dir=args.out,
        input=args.input,
        truth=args.truth,
        synth=_synth_spec(args, args.k) if args.synth else None,
        k=args.k,
        D=args.d_set,
        topk=args.topk,
        alpha=args.alpha,
        tol=args.tol,
        max_iter=args.max_iter,
        pd_max_iter=args.pd_max_iter,
        pd_tol=args.pd_tol,
        nir_threshold=args.nir_threshold,
        threads=args.threads,
    )
    report = run_pipeline(cfg)
    for name, t in report.timings.items():
        print(f"{name:>8s} {t:8.3f} s")
    print(f"{'total':>8s} {report.total:8.3f} s, {report.n_topics} topics")
    if report.evaluation is not None:
        print(f"accuracy within FPPT 10: {report.evaluation.accuracy_at(10):.3f}")


COMMANDS = {
    "synth": cmd_synth,
    "ingest": cmd_ingest,
    "graph": cmd_graph,
    "seeds": cmd_seeds,
    "detect": cmd_detect,
    "rank": cmd_rank,
    "fit": cmd_fit,
    "eval": cmd_eval,
    "pipeline": cmd_pipeline,
}


def parse_args(argv: list[str]) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        sub = parser._subparsers._group_actions[0].choices[args.command]
        try:
            tokens = config_tokens(read_config(args.config), sub)
        except CliError as exc:
            parser.exit(2, f"levytopics: error [config]: {exc}\n")
        pos = argv.index(args.command)
        args = parser.parse_args(argv[: pos + 1] + tokens + argv[pos + 1 :])
    return args


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    args = parse_args(argv)
    set_threads(args.threads)
    try:
        COMMANDS[args.command](args)
    except StageError as exc:
        print(f"levytopics: error [{args.command}:{exc.stage}]: {exc.__cause__}", file=sys.stderr)
        return 1
    except Exception as exc:  # any stage failure becomes a tagged message
        print(f"levytopics: error [{args.command}]: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
