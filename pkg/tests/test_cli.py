import csv
import json

import pytest

from levytopics.cli import main

SMALL = ["--n-nodes", "300", "--n-topics", "4", "--topic-size", "15,25", "--seed", "7"]


@pytest.fixture(scope="module")
def chain(tmp_path_factory):
    """Every subcommand run on the artifacts of the one before it."""
    d = tmp_path_factory.mktemp("chain")
    assert main(["synth", "--out", str(d / "text"), "--text", "--n-docs", "200", "--n-topics", "5",
                 "--topic-size", "10,15", "--seed", "2"]) == 0
    assert main(["ingest", "--input", str(d / "text" / "corpus.jsonl"), "--out", str(d / "vec.npz"),
                 "--truth-out", str(d / "truth.json")]) == 0
    assert main(["graph", "--vectors", str(d / "vec.npz"), "--k", "10", "--out", str(d / "graph.csv")]) == 0
    assert main(["seeds", "--graph", str(d / "graph.csv"), "--d", "3", "--out", str(d / "seeds.json")]) == 0
    assert main(["detect", "--graph", str(d / "graph.csv"), "--out", str(d / "topics.json")]) == 0
    assert main(["rank", "--graph", str(d / "graph.csv"), "--topics", str(d / "topics.json"),
                 "--out", str(d / "ranking.json")]) == 0
    assert main(["fit", "--graph", str(d / "graph.csv"), "--topics", str(d / "topics.json"),
                 "--ranking", str(d / "ranking.json"), "--top", "3", "--out", str(d / "fits.csv")]) == 0
    assert main(["eval", "--topics", str(d / "topics.json"), "--ranking", str(d / "ranking.json"),
                 "--truth", str(d / "truth.json"), "--out", str(d / "eval.json")]) == 0
    return d


def test_chain_writes_every_artifact(chain):
    for name in ("vec.npz", "graph.csv", "seeds.json", "topics.json", "ranking.json", "fits.csv", "eval.json"):
        assert (chain / name).stat().st_size > 0


def test_text_chain_recovers_topics(chain):
    rep = json.loads((chain / "eval.json").read_text())
    assert rep["accuracy_at_fppt10"] >= 0.8


def test_fit_csv_layout(chain):
    with open(chain / "fits.csv", newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["topic_id", "family", "params", "aic", "akaike_weight"]
    by_topic = {}
    for r in rows[1:]:
        by_topic.setdefault(r[0], []).append(float(r[4]))
    assert by_topic
    for weights in by_topic.values():
        assert sum(weights) == pytest.approx(1.0, abs=1e-9)


def test_synth_graph_mode(tmp_path):
    assert main(["synth", "--out", str(tmp_path), *SMALL]) == 0
    assert (tmp_path / "graph.csv").exists() and (tmp_path / "truth.json").exists()
    spec = json.loads((tmp_path / "synth.json").read_text())
    assert spec["n_nodes"] == 300 and spec["rng_seed"] == 7


def test_missing_input_names_path(tmp_path, capsys):
    missing = tmp_path / "nope.jsonl"
    assert main(["pipeline", "--input", str(missing), "--out", str(tmp_path / "o")]) != 0
    err = capsys.readouterr().err
    assert str(missing) in err and "pipeline:setup" in err


def test_missing_graph_is_tagged(tmp_path, capsys):
    assert main(["detect", "--graph", str(tmp_path / "g.csv"), "--out", str(tmp_path / "t.json")]) == 1
    assert "[detect]" in capsys.readouterr().err


def test_bad_flag_value_exits_2(tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["detect", "--graph", "g.csv", "--out", "t.json", "--topk", "0"])
    assert exc.value.code == 2


def _run(out, *extra):
    assert main(["pipeline", "--synth", *SMALL, "--out", str(out), *extra]) == 0


def test_pipeline_is_deterministic(tmp_path):
    _run(tmp_path / "a")
    _run(tmp_path / "b")
    for name in ("topics.json", "ranking.json", "graph.csv", "eval.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_stage_timings_cover_total(tmp_path):
    _run(tmp_path)
    t = json.loads((tmp_path / "timings.json").read_text())
    assert {"synth", "walk", "detect", "rank", "eval"} <= set(t["stages"])
    assert abs(sum(t["stages"].values()) - t["total"]) <= 0.05 * t["total"]


def test_config_file_and_override(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# small run\nn_nodes = 300\nn-topics = 4\ntopic_size = 15,25\nseed = 7\ntopk = 1\n")
    _run(tmp_path / "plain", "--topk", "1")
    assert main(["pipeline", "--synth", "--config", str(cfg), "--out", str(tmp_path / "cfg")]) == 0
    a = (tmp_path / "plain" / "topics.json").read_bytes()
    assert (tmp_path / "cfg" / "topics.json").read_bytes() == a
    # command line beats the file
    assert main(["pipeline", "--synth", "--config", str(cfg), "--topk", "2", "--out", str(tmp_path / "over")]) == 0
    _run(tmp_path / "two", "--topk", "2")
    assert (tmp_path / "over" / "topics.json").read_bytes() == (tmp_path / "two" / "topics.json").read_bytes()


def test_unknown_config_key(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("frobnicate = 3\n")
    with pytest.raises(SystemExit) as exc:
        main(["detect", "--graph", "g.csv", "--out", "t.json", "--config", str(cfg)])
    assert exc.value.code == 2
    assert "frobnicate" in capsys.readouterr().err
