import pytest
from hypothesis import given, settings, strategies as st

from memestream.ingest import Analyzer
from memestream.synth import SynthConfig, follower_graph, generate, generate_tweets, write_jsonl


def test_deterministic(tmp_path):
    c = SynthConfig(rng_seed=4, duration_hours=1, noise_tweet_fraction=0.2)
    write_jsonl(c, tmp_path / "a.jsonl")
    write_jsonl(c, tmp_path / "b.jsonl")
    assert (tmp_path / "a.jsonl").read_bytes() == (tmp_path / "b.jsonl").read_bytes()
    assert list(generate(c)) != list(generate(SynthConfig(rng_seed=5, duration_hours=1)))


def test_single_meme_single_label():
    ts = generate_tweets(SynthConfig(n_memes=1, duration_hours=1))
    assert ts and len({lab for t in ts for lab in t.labels}) == 1


def test_clean_memes_feature_disjoint():
    ts = generate_tweets(SynthConfig(duration_hours=2, rng_seed=1))
    a = Analyzer()
    feats = {}
    for t in ts:
        (lab,) = t.labels
        tf = a(t)
        f = feats.setdefault(lab, set())
        f |= {("term", k) for k in tf.terms} | {("user", u) for u in tf.diffusion}
        f |= {("entity", e) for e in tf.entities}
    labs = sorted(feats)
    for i, x in enumerate(labs):
        for y in labs[i + 1:]:
            assert not feats[x] & feats[y], (x, y)


def test_labels_never_in_text():
    for t in generate_tweets(SynthConfig(duration_hours=1, noise_tweet_fraction=0.3)):
        for lab in t.labels:
            assert lab not in t.text


def test_timestamps_sorted_and_in_range():
    c = SynthConfig(duration_hours=2, start_time=1000)
    ts = [t.timestamp for t in generate_tweets(c)]
    assert ts == sorted(ts)
    assert min(ts) >= 1001 and max(ts) <= 1000 + 7200


def test_noise_fraction_roughly_right():
    ts = generate_tweets(SynthConfig(duration_hours=6, noise_tweet_fraction=0.3))
    frac = sum(not t.labels for t in ts) / len(ts)
    assert abs(frac - 0.3) < 0.04


@pytest.mark.parametrize("kw", [dict(user_overlap=1.5), dict(noise_tweet_fraction=1.0),
                                dict(n_memes=0), dict(words_min=5, words_max=3)])
def test_config_validation(kw):
    with pytest.raises(ValueError):
        SynthConfig(**kw)


def test_follower_graph_aligned():
    c = SynthConfig(n_users_per_meme=20)
    g = follower_graph(c)
    inside = across = 0
    for a, nbrs in g.adj.items():
        if not a.startswith("u"):
            continue
        for b in nbrs:
            if b.startswith("u"):
                if a[:4] == b[:4]:
                    inside += 1
                else:
                    across += 1
    assert inside > 10 * across


@settings(max_examples=15)
@given(st.integers(0, 10**6), st.floats(0, 0.9), st.floats(0, 1), st.floats(0, 1))
def test_ground_truth_consistent(seed, noise, overlap, shared):
    c = SynthConfig(rng_seed=seed, duration_hours=0.5, noise_tweet_fraction=noise,
                    user_overlap=overlap, shared_vocab=shared)
    ts = generate_tweets(c)
    assert len({t.id for t in ts}) == len(ts)
    for t in ts:
        assert len(t.labels) <= 1
        assert t.author_id.startswith("z") == (not t.labels)
