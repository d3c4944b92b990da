"""memestream command line: run, eval, synth, sweep.

Exit codes: 0 success, 2 unreadable or malformed input, 64 bad usage.
"""

import argparse
import csv
import itertools
import json
import logging
import os
import sys
from collections import deque
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from memestream import __version__
from memestream.engine import ALGORITHMS, EngineConfig, FollowerGraph, Snapshot, make_engine
from memestream.evaluate import LFK_VARIANT, GroundTruth, evaluate_snapshot
from memestream.ingest import Analyzer, ParseError, load_labels, read_tweets
from memestream.simil import MAX, SimilarityMode, SimilarityWeights
from memestream.synth import SynthConfig, follower_graph, write_jsonl
from memestream.window import WindowConfig, WindowModel, expiry_cutoff

EX_OK, EX_IO, EX_USAGE = 0, 2, 64

METRIC_FIELDS = ["window_end", "lfk_nmi", "nmi", "n_clusters", "n_retired", "n_tweets",
                 "cum_lfk_nmi", "cum_nmi"]
MCR_FIELDS = ["window_end", "label", "mcr", "n_label_tweets"]


class UsageError(Exception):
    pass


class InputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EX_USAGE, f"{self.prog}: error: {message}\n")


def _csv_ints(text):
    return [int(x) for x in text.split(",") if x.strip()]


# --------------------------------------------------------------------------
# shared pieces

def _add_engine_flags(p):
    p.add_argument("--algorithm", choices=ALGORITHMS, default="psc")
    p.add_argument("--similarity", choices=("max", "linear"), default="max")
    p.add_argument("--weights", help="w_u,w_c,w_t,w_n for --similarity linear")
    p.add_argument("--n-sigmas", type=float, default=2.0)
    p.add_argument("--k", type=int, default=11)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--window-model", choices=[m.value for m in WindowModel], default="sliding")
    p.add_argument("--lambda", dest="lam", type=float, default=1.0,
                   help="decay rate of the damped model")
    p.add_argument("--b2-alpha", type=float, default=0.5)
    p.add_argument("--blind-labels", help="file of hashtags withheld from analysis")
    p.add_argument("--follower-graph", help="edge list for --algorithm b2")


def _engine_config(args, ell, delta_t):
    if args.weights and args.similarity != "linear":
        raise UsageError("--weights requires --similarity linear")
    if args.similarity == "linear":
        try:
            w = SimilarityWeights.parse(args.weights) if args.weights else SimilarityWeights()
        except ValueError as e:
            raise UsageError(f"--weights: {e}") from e
        sim = SimilarityMode.linear(w)
    else:
        sim = MAX
    if args.algorithm == "b2" and not args.follower_graph:
        raise UsageError("--algorithm b2 needs --follower-graph")
    if args.follower_graph and args.algorithm != "b2":
        raise UsageError("--follower-graph only applies to --algorithm b2")
    try:
        window = WindowConfig(delta_t=delta_t, ell=ell, lam=args.lam,
                              model=WindowModel(args.window_model))
        return EngineConfig(k=args.k, n_sigmas=args.n_sigmas, window=window, similarity=sim,
                            algorithm=args.algorithm, b2_alpha=args.b2_alpha, seed=args.seed)
    except ValueError as e:
        raise UsageError(str(e)) from e


def _read_file(path, what):
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise InputError(f"cannot read {what} {path}: {e.strerror or e}") from e


def _load_blind(path):
    if not path:
        return frozenset()
    _read_file(path, "label file")
    return load_labels(path)


def _load_graph(path):
    if not path:
        return None
    _read_file(path, "follower graph")
    try:
        return FollowerGraph.load(path)
    except ValueError as e:
        raise InputError(str(e)) from e


def _open_input(path):
    try:
        return open(path, encoding="utf-8")
    except OSError as e:
        raise InputError(f"cannot read input {path}: {e.strerror or e}") from e


def _dump(obj):
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def _fmt(x):
    return repr(float(x))


class MetricsWriter:
    """Per-window metrics, MCR rows and confusion matrices, plus running sums."""

    def __init__(self, out_dir):
        out_dir = Path(out_dir)
        self._files = [
            open(out_dir / "metrics.csv", "w", newline="", encoding="utf-8"),
            open(out_dir / "mcr.csv", "w", newline="", encoding="utf-8"),
            open(out_dir / "confusion.jsonl", "w", encoding="utf-8"),
        ]
        self.metrics = csv.writer(self._files[0], lineterminator="\n")
        self.mcr = csv.writer(self._files[1], lineterminator="\n")
        self.confusion = self._files[2]
        self.metrics.writerow(METRIC_FIELDS)
        self.mcr.writerow(MCR_FIELDS)
        self.cum_lfk = 0.0
        self.cum_nmi = 0.0
        self.scores = []

    def add(self, score):
        self.cum_lfk += score.lfk_nmi
        self.cum_nmi += score.nmi
        self.scores.append(score)
        self.metrics.writerow([score.window_end, _fmt(score.lfk_nmi), _fmt(score.nmi),
                               score.n_clusters, score.n_retired, score.n_tweets,
                               _fmt(self.cum_lfk), _fmt(self.cum_nmi)])
        for lab, v in score.mcr.items():
            self.mcr.writerow([score.window_end, lab, _fmt(v), score.label_counts[lab]])
        self.confusion.write(_dump({
            "window_end": score.window_end,
            **score.confusion.to_json(),
            "jaccard": score.jaccard.tolist(),
        }) + "\n")

    def close(self):
        for f in self._files:
            f.close()


class _LabelTap:
    """Passes tweets through while recording labels of those still inside the window."""

    def __init__(self, tweets, window: WindowConfig):
        self.tweets = tweets
        self.window = window
        self.truth = GroundTruth()
        self._order = deque()
        self.seen_labels = False

    def __iter__(self):
        for t in self.tweets:
            if t.labels:
                self.seen_labels = True
                self.truth.add(t.id, t.labels)
                self._order.append((t.timestamp, t.id))
            yield t

    def prune(self, T):
        cutoff = expiry_cutoff(T, self.window)
        if cutoff is None:
            return
        while self._order and self._order[0][0] <= cutoff:
            self.truth.discard(self._order.popleft()[1])


def _tweets_from(fh):
    try:
        yield from read_tweets(fh)
    except ParseError as e:
        raise InputError(f"{getattr(fh, 'name', 'input')}: {e}") from e


# --------------------------------------------------------------------------
# run

def _manifest(cfg: EngineConfig, args):
    return {
        "version": __version__,
        "config": cfg.to_dict(),
        "rng_seed": cfg.seed,
        "input": args.input,
        "blind_labels": args.blind_labels,
        "follower_graph": args.follower_graph,
        "outputs": {
            "snapshots": "snapshots.jsonl",
            "metrics": "metrics.csv",
            "mcr": "mcr.csv",
            "confusion": "confusion.jsonl",
        },
        "lfk_variant": LFK_VARIANT,
    }


def _apply_manifest(args):
    text = _read_file(args.manifest, "manifest")
    try:
        m = json.loads(text)
        cfg = EngineConfig.from_dict(m["config"])
    except (ValueError, KeyError, TypeError) as e:
        raise InputError(f"bad manifest {args.manifest}: {e}") from e
    args.input = m.get("input")
    args.blind_labels = m.get("blind_labels")
    args.follower_graph = m.get("follower_graph")
    if args.out is None:
        args.out = str(Path(args.manifest).parent)
    if cfg.algorithm == "b2" and not args.follower_graph:
        raise UsageError("manifest selects b2 without a follower graph")
    return cfg


def execute_run(cfg: EngineConfig, input_path, out_dir, blind_path=None, graph_path=None,
                manifest=None, evaluate=True):
    """Cluster one input file and write snapshots (and metrics when labels exist)."""
    blind = _load_blind(blind_path)
    graph = _load_graph(graph_path)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    engine = make_engine(cfg, analyzer=Analyzer(blind=blind), graph=graph)
    writer = None
    n_snap = 0
    with _open_input(input_path) as fh, open(out / "snapshots.jsonl", "w", encoding="utf-8") as snap_fh:
        tap = _LabelTap(_tweets_from(fh), cfg.window)
        for snap in engine.run(tap):
            n_snap += 1
            snap_fh.write(_dump(snap.to_json()) + "\n")
            if evaluate and tap.seen_labels:
                if writer is None:
                    writer = MetricsWriter(out)
                score = evaluate_snapshot(snap, tap.truth)
                if score is not None:
                    writer.add(score)
            tap.prune(snap.window_end)
    if writer is not None:
        writer.close()
    if manifest is not None:
        (out / "manifest.json").write_text(json.dumps(manifest, sort_keys=True, indent=2) + "\n",
                                           encoding="utf-8")
    return n_snap, (writer.scores if writer else [])


def cmd_run(args):
    if args.manifest:
        cfg = _apply_manifest(args)
    else:
        if not args.input:
            raise UsageError("run needs --input (or --manifest)")
        cfg = _engine_config(args, args.ell, args.delta_t)
    if not args.out:
        raise UsageError("run needs --out")
    manifest = _manifest(cfg, args)
    n, scores = execute_run(cfg, args.input, args.out, args.blind_labels, args.follower_graph,
                            manifest=manifest)
    msg = f"{n} snapshot(s) written to {args.out}"
    if scores:
        msg += f"; mean LFK-NMI {sum(s.lfk_nmi for s in scores) / len(scores):.4f}"
    print(msg)
    return EX_OK


# --------------------------------------------------------------------------
# eval

def cmd_eval(args):
    truth = GroundTruth()
    with _open_input(args.truth) as fh:
        for t in _tweets_from(fh):
            truth.add(t.id, t.labels)
    if not len(truth):
        raise InputError(f"{args.truth}: no labeled tweets")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    writer = MetricsWriter(out)
    with _open_input(args.snapshots) as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                snap = Snapshot.from_json(json.loads(line))
            except (ValueError, KeyError, TypeError) as e:
                raise InputError(f"{args.snapshots}: line {lineno}: {e}") from e
            score = evaluate_snapshot(snap, truth)
            if score is not None:
                writer.add(score)
    writer.close()
    print(f"{len(writer.scores)} window(s) scored; metrics in {out / 'metrics.csv'}")
    return EX_OK


# --------------------------------------------------------------------------
# synth

def cmd_synth(args):
    try:
        cfg = SynthConfig(
            n_memes=args.n_memes,
            tweets_per_meme_per_hour=args.rate,
            shared_vocab=args.shared_vocab,
            user_overlap=args.user_overlap,
            noise_tweet_fraction=args.noise,
            duration_hours=args.hours,
            rng_seed=args.seed,
        )
    except ValueError as e:
        raise UsageError(str(e)) from e
    try:
        n = write_jsonl(cfg, args.out)
        if args.follower_graph:
            follower_graph(cfg).dump(args.follower_graph)
    except OSError as e:
        raise InputError(f"cannot write: {e}") from e
    print(f"{n} tweets written to {args.out}")
    return EX_OK


# --------------------------------------------------------------------------
# sweep

def _sweep_cell(job):
    cfg, input_path, blind, graph = job
    with _open_input(input_path) as fh:
        engine = make_engine(cfg, analyzer=Analyzer(blind=blind), graph=graph)
        tap = _LabelTap(_tweets_from(fh), cfg.window)
        lfk, nm = [], []
        for snap in engine.run(tap):
            s = evaluate_snapshot(snap, tap.truth)
            if s is not None:
                lfk.append(s.lfk_nmi)
                nm.append(s.nmi)
            tap.prune(snap.window_end)
    n = len(lfk)
    return (sum(lfk) / n if n else float("nan"), sum(nm) / n if n else float("nan"), n)


def _workers():
    raw = os.environ.get("MEMESTREAM_THREADS")
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            raise UsageError("MEMESTREAM_THREADS must be an integer") from None
    return os.cpu_count() or 1


def cmd_sweep(args):
    try:
        ells, dts = _csv_ints(args.ell), _csv_ints(args.delta_t)
    except ValueError as e:
        raise UsageError(f"bad grid: {e}") from e
    if not ells or not dts:
        raise UsageError("--ell and --delta-t need at least one value each")
    cells = [(e, d, _engine_config(args, e, d)) for e, d in itertools.product(ells, dts)]
    _read_file(args.input, "input")
    blind = _load_blind(args.blind_labels)
    graph = _load_graph(args.follower_graph)
    jobs = [(cfg, args.input, blind, graph) for _, _, cfg in cells]
    workers = min(_workers(), len(jobs))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(_sweep_cell, jobs))
    else:
        results = [_sweep_cell(j) for j in jobs]
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["algorithm", "ell", "delta_t", "window_seconds", "mean_lfk_nmi", "mean_nmi",
                    "n_windows"])
        for (e, d, cfg), (lfk, nm, n) in zip(cells, results):
            w.writerow([cfg.algorithm, e, d, e * d, _fmt(lfk), _fmt(nm), n])
    print(f"{len(cells)} cell(s) written to {out}")
    return EX_OK


# --------------------------------------------------------------------------

def build_parser():
    p = _Parser(prog="memestream", description="Streaming meme clustering on tweet JSONL.")
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    r = sub.add_parser("run", help="cluster a tweet stream")
    r.add_argument("--input", help="JSONL tweets in timestamp order")
    r.add_argument("--out", help="output directory")
    r.add_argument("--manifest", help="re-run from a manifest.json")
    r.add_argument("--delta-t", type=int, default=3600, help="step length in seconds")
    r.add_argument("--ell", type=int, default=6, help="window length in steps")
    _add_engine_flags(r)
    r.set_defaults(func=cmd_run)

    e = sub.add_parser("eval", help="score snapshots against labeled tweets")
    e.add_argument("--snapshots", required=True)
    e.add_argument("--truth", required=True, help="JSONL tweets carrying 'labels'")
    e.add_argument("--out", required=True, help="output directory")
    e.set_defaults(func=cmd_eval)

    s = sub.add_parser("synth", help="generate a labeled synthetic stream")
    s.add_argument("--out", required=True)
    s.add_argument("--n-memes", type=int, default=10)
    s.add_argument("--rate", type=float, default=20.0, help="tweets per meme per hour")
    s.add_argument("--shared-vocab", type=float, default=0.0)
    s.add_argument("--user-overlap", type=float, default=0.0)
    s.add_argument("--noise", type=float, default=0.0, help="fraction of unlabeled noise tweets")
    s.add_argument("--hours", type=float, default=6.0)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--follower-graph", help="also write a community-aligned follower graph here")
    s.set_defaults(func=cmd_synth)

    w = sub.add_parser("sweep", help="grid over window length and step size")
    w.add_argument("--input", required=True)
    w.add_argument("--out", required=True, help="CSV path")
    w.add_argument("--ell", required=True, help="comma-separated window lengths in steps")
    w.add_argument("--delta-t", required=True, help="comma-separated step lengths in seconds")
    _add_engine_flags(w)
    w.set_defaults(func=cmd_sweep)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as e:
        print(f"memestream: error: {e}", file=sys.stderr)
        return EX_USAGE
    except InputError as e:
        print(f"memestream: {e}", file=sys.stderr)
        return EX_IO


if __name__ == "__main__":
    sys.exit(main())
