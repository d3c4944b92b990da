"""Tweets per second through each clusterer on a large synthetic stream.

    python scripts/throughput.py --tweets 100000
"""

import argparse
import time

from memestream.engine import EngineConfig, make_engine
from memestream.synth import SynthConfig, follower_graph, generate_tweets


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--tweets", type=int, default=100_000)
    ap.add_argument("--rate", type=float, default=250, help="tweets per meme per hour")
    ap.add_argument("--algorithms", default="psc,b1,b2")
    args = ap.parse_args()

    n_memes = 11
    synth = SynthConfig(n_memes=n_memes, tweets_per_meme_per_hour=args.rate,
                        duration_hours=args.tweets / (n_memes * args.rate) + 1,
                        noise_tweet_fraction=0.2, user_overlap=0.1, shared_vocab=0.2, rng_seed=3)
    tweets = generate_tweets(synth)[: args.tweets]
    print(f"{len(tweets)} tweets over {tweets[-1].timestamp / 3600:.1f}h")
    for algo in args.algorithms.split(","):
        graph = follower_graph(synth) if algo == "b2" else None
        engine = make_engine(EngineConfig(algorithm=algo, k=11), graph=graph)
        t0 = time.perf_counter()
        steps = sum(1 for _ in engine.run(tweets))
        dt = time.perf_counter() - t0
        print(f"{algo:>3}: {dt:6.1f}s  {len(tweets) / dt:8.0f} tweets/s  {steps} steps  "
              f"{engine.n_replaced} replacements")


if __name__ == "__main__":
    main()
