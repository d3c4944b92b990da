import csv
import json

import pytest

from memestream.cli import main
from memestream.synth import SynthConfig, follower_graph, write_jsonl


def rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


@pytest.fixture(scope="module")
def stream(tmp_path_factory):
    d = tmp_path_factory.mktemp("data")
    c = SynthConfig(duration_hours=4, rng_seed=2, noise_tweet_fraction=0.2, user_overlap=0.1)
    write_jsonl(c, d / "s.jsonl")
    follower_graph(c).dump(d / "g.txt")
    return d


def test_reference_configuration(stream, tmp_path):
    out = tmp_path / "o"
    rc = main(["run", "--input", str(stream / "s.jsonl"), "--out", str(out), "--algorithm", "psc",
               "--delta-t", "3600", "--ell", "6", "--n-sigmas", "2", "--k", "11", "--similarity", "max"])
    assert rc == 0
    m = json.loads((out / "manifest.json").read_text())
    assert m["config"]["k"] == 11 and m["config"]["window"] == {
        "delta_t": 3600, "ell": 6, "lam": 1.0, "model": "sliding"}
    assert m["lfk_variant"]
    snaps = [json.loads(x) for x in (out / "snapshots.jsonl").read_text().splitlines()]
    assert [s["window_end"] for s in snaps] == [3600, 7200, 10800, 14400]
    metrics = rows(out / "metrics.csv")
    assert len(metrics) == 4
    running = 0.0
    for r in metrics:
        running += float(r["nmi"])
        assert float(r["cum_nmi"]) == pytest.approx(running)
    assert rows(out / "mcr.csv")
    assert len((out / "confusion.jsonl").read_text().splitlines()) == 4


def test_b1_single_tweet(tmp_path):
    f = tmp_path / "one.jsonl"
    f.write_text('{"id":"1","timestamp":5,"author_id":"u","text":"just one"}\n')
    assert main(["run", "--algorithm", "b1", "--input", str(f), "--out", str(tmp_path / "o")]) == 0
    snaps = (tmp_path / "o" / "snapshots.jsonl").read_text().splitlines()
    assert len(snaps) == 1 and len(json.loads(snaps[0])["clusters"]) == 1
    assert not (tmp_path / "o" / "metrics.csv").exists()


def test_blind_labels(tmp_path):
    f = tmp_path / "s.jsonl"
    f.write_text("\n".join(json.dumps({"id": str(i), "timestamp": i + 1, "author_id": "u",
                                       "text": f"#Secret #open word{i}"}) for i in range(5)))
    (tmp_path / "labels.txt").write_text("#secret\n")
    assert main(["run", "--input", str(f), "--out", str(tmp_path / "o"),
                 "--blind-labels", str(tmp_path / "labels.txt")]) == 0
    text = (tmp_path / "o" / "snapshots.jsonl").read_text()
    assert "#secret" not in text.lower() and "hashtag:#open" in text


def test_manifest_rerun_is_byte_identical(stream, tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["run", "--input", str(stream / "s.jsonl"), "--out", str(a), "--seed", "3"]) == 0
    assert main(["run", "--manifest", str(a / "manifest.json"), "--out", str(b)]) == 0
    for name in ("snapshots.jsonl", "metrics.csv", "mcr.csv", "confusion.jsonl", "manifest.json"):
        assert (a / name).read_bytes() == (b / name).read_bytes(), name


def test_eval_matches_run(stream, tmp_path):
    assert main(["run", "--input", str(stream / "s.jsonl"), "--out", str(tmp_path / "r")]) == 0
    assert main(["eval", "--snapshots", str(tmp_path / "r" / "snapshots.jsonl"),
                 "--truth", str(stream / "s.jsonl"), "--out", str(tmp_path / "e")]) == 0
    assert (tmp_path / "r" / "metrics.csv").read_bytes() == (tmp_path / "e" / "metrics.csv").read_bytes()


def test_eval_perfect_and_skipped_window(tmp_path):
    tweets = [{"id": str(i), "timestamp": i, "author_id": "u", "text": "x", "labels": [lab]}
              for i, lab in [(1, "#a"), (2, "#a"), (3, "#b")]]
    (tmp_path / "t.jsonl").write_text("\n".join(map(json.dumps, tweets)))
    snaps = [
        {"window_end": 10, "clusters": [{"id": 0, "tweet_ids": ["1", "2"]}, {"id": 1, "tweet_ids": ["3"]}],
         "retired": []},
        {"window_end": 20, "clusters": [{"id": 0, "tweet_ids": ["zz"]}], "retired": []},
        {"window_end": 30, "clusters": [{"id": 0, "tweet_ids": ["1"]}, {"id": 2, "tweet_ids": ["3"]}],
         "retired": []},
    ]
    (tmp_path / "s.jsonl").write_text("\n".join(map(json.dumps, snaps)))
    assert main(["eval", "--snapshots", str(tmp_path / "s.jsonl"), "--truth", str(tmp_path / "t.jsonl"),
                 "--out", str(tmp_path / "e")]) == 0
    m = rows(tmp_path / "e" / "metrics.csv")
    assert [r["window_end"] for r in m] == ["10", "30"]
    assert all(float(r["lfk_nmi"]) == 1.0 for r in m)
    assert float(m[-1]["cum_nmi"]) == 2.0


def test_sweep_one_cell_matches_run(stream, tmp_path, monkeypatch):
    monkeypatch.setenv("MEMESTREAM_THREADS", "1")
    assert main(["sweep", "--input", str(stream / "s.jsonl"), "--out", str(tmp_path / "g.csv"),
                 "--ell", "3", "--delta-t", "1800"]) == 0
    assert main(["run", "--input", str(stream / "s.jsonl"), "--out", str(tmp_path / "r"),
                 "--ell", "3", "--delta-t", "1800"]) == 0
    (cell,) = rows(tmp_path / "g.csv")
    m = rows(tmp_path / "r" / "metrics.csv")
    assert float(cell["mean_lfk_nmi"]) == pytest.approx(sum(float(r["lfk_nmi"]) for r in m) / len(m), abs=1e-12)
    assert float(cell["mean_nmi"]) == pytest.approx(sum(float(r["nmi"]) for r in m) / len(m), abs=1e-12)
    assert int(cell["n_windows"]) == len(m)


def test_sweep_grid_parallel_deterministic(stream, tmp_path, monkeypatch):
    monkeypatch.setenv("MEMESTREAM_THREADS", "2")
    args = ["sweep", "--input", str(stream / "s.jsonl"), "--ell", "2,8", "--delta-t", "1800,3600"]
    assert main(args + ["--out", str(tmp_path / "a.csv")]) == 0
    assert main(args + ["--out", str(tmp_path / "b.csv")]) == 0
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
    cells = {(r["ell"], r["delta_t"]): r for r in rows(tmp_path / "a.csv")}
    assert cells[("8", "1800")]["window_seconds"] == str(4 * 3600)
    assert len(cells) == 4


def test_synth_command(tmp_path):
    assert main(["synth", "--out", str(tmp_path / "s.jsonl"), "--hours", "1", "--noise", "0.3",
                 "--follower-graph", str(tmp_path / "g.txt")]) == 0
    assert (tmp_path / "s.jsonl").read_text().count("\n") > 100
    assert (tmp_path / "g.txt").stat().st_size > 0


@pytest.mark.parametrize("argv", [
    ["run", "--algorithm", "b2", "--input", "x", "--out", "o"],
    ["run", "--window-model", "damped", "--input", "x", "--out", "o"],
    ["run", "--weights", "1,0,0,0", "--input", "x", "--out", "o"],
    ["run", "--similarity", "linear", "--weights", "1,1,0,0", "--input", "x", "--out", "o"],
    ["run", "--out", "o"],
    ["run", "--k", "nope", "--input", "x", "--out", "o"],
    ["frobnicate"],
])
def test_usage_errors_exit_64(argv, tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    try:
        rc = main(argv)
    except SystemExit as e:
        rc = e.code
    assert rc == 64


def test_io_errors_exit_2(tmp_path, stream):
    assert main(["run", "--input", str(tmp_path / "missing"), "--out", str(tmp_path / "o")]) == 2
    bad = tmp_path / "bad.jsonl"
    bad.write_text('{"id":"1","timestamp":1,"author_id":"a","text":"x"}\nnot json\n')
    assert main(["run", "--input", str(bad), "--out", str(tmp_path / "o")]) == 2
    assert main(["run", "--algorithm", "b2", "--follower-graph", str(tmp_path / "nope"),
                 "--input", str(stream / "s.jsonl"), "--out", str(tmp_path / "o")]) == 2
