"""Synthetic labeled tweet streams with planted memes.

Each meme owns a hidden label (emitted only in ``labels``), a vocabulary, a
few visible hashtags and URLs, and a user community that mentions and
retweets itself. Noise tweets draw from a separate vocabulary and user pool
and carry no label. Arrivals are Poisson at the configured rates.
"""

from dataclasses import asdict, dataclass
from typing import Iterator, List

import numpy as np

from memestream.engine import FollowerGraph
from memestream.ingest import Tweet, load_stopwords, tweet_to_json
from memestream.porter import stem


@dataclass(frozen=True)
class SynthConfig:
    n_memes: int = 10
    tweets_per_meme_per_hour: float = 20.0
    vocab_per_meme: int = 100
    # probability that a content word comes from the vocabulary all memes share
    shared_vocab: float = 0.0
    shared_vocab_size: int = 60
    n_users_per_meme: int = 30
    # probability that an author or mention target comes from another meme's community
    user_overlap: float = 0.0
    mention_prob: float = 0.3
    retweet_prob: float = 0.2
    url_prob: float = 0.2
    hashtag_prob: float = 0.5
    hashtags_per_meme: int = 3
    urls_per_meme: int = 3
    words_min: int = 3
    words_max: int = 6
    # rank-frequency exponent for words, hashtags and user activity (0 = uniform)
    zipf_exponent: float = 1.0
    noise_tweet_fraction: float = 0.0
    noise_vocab_size: int = 3000
    noise_users: int = 2000
    duration_hours: float = 6.0
    start_time: int = 0
    rng_seed: int = 0

    def __post_init__(self):
        for name in ("shared_vocab", "user_overlap", "mention_prob", "retweet_prob",
                     "url_prob", "hashtag_prob"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")
        if not 0.0 <= self.noise_tweet_fraction < 1.0:
            raise ValueError("noise_tweet_fraction must lie in [0, 1)")
        for name in ("n_memes", "vocab_per_meme", "n_users_per_meme", "hashtags_per_meme",
                     "urls_per_meme", "words_min", "shared_vocab_size", "noise_vocab_size",
                     "noise_users"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        if self.words_max < self.words_min:
            raise ValueError("words_max < words_min")
        if self.tweets_per_meme_per_hour <= 0 or self.duration_hours <= 0:
            raise ValueError("rates and duration must be positive")

    def to_dict(self):
        return asdict(self)


_CONS = "bdfgklmnprtvz"
_VOW = "aeiou"


class _Zipf:
    """Draws from ``items`` with probability proportional to rank**-s."""

    def __init__(self, items, s, rng):
        self.items = list(items)
        w = np.arange(1, len(self.items) + 1, dtype=float) ** -s
        self.cum = np.cumsum(w / w.sum())
        self.rng = rng

    def __call__(self):
        i = int(np.searchsorted(self.cum, self.rng.random(), side="right"))
        return self.items[min(i, len(self.items) - 1)]


class _Lexicon:
    """Unique pseudo-words that are their own Porter stem and not stopwords."""

    def __init__(self, rng):
        self.rng = rng
        self.used = set()
        self.stop = load_stopwords()

    def word(self):
        while True:
            n = int(self.rng.integers(2, 4))
            w = "".join(
                _CONS[self.rng.integers(len(_CONS))] + _VOW[self.rng.integers(len(_VOW))]
                for _ in range(n)
            ) + _CONS[self.rng.integers(len(_CONS))]
            if w not in self.used and w not in self.stop and stem(w) == w:
                self.used.add(w)
                return w

    def words(self, n):
        return [self.word() for _ in range(n)]


@dataclass
class _Meme:
    label: str
    vocab: List[str]
    hashtags: List[str]
    urls: List[str]
    users: List[str]


class _World:
    def __init__(self, cfg: SynthConfig):
        self.cfg = cfg
        rng = np.random.default_rng(cfg.rng_seed)
        self.rng = rng
        lex = _Lexicon(rng)
        self.memes = []
        for m in range(cfg.n_memes):
            self.memes.append(_Meme(
                label="#" + lex.word(),
                vocab=lex.words(cfg.vocab_per_meme),
                hashtags=["#" + w for w in lex.words(cfg.hashtags_per_meme)],
                urls=[f"http://t.co/{lex.word()}{m}" for _ in range(cfg.urls_per_meme)],
                users=[f"u{m:03d}n{i:04d}" for i in range(cfg.n_users_per_meme)],
            ))
        self.shared = lex.words(cfg.shared_vocab_size)
        self.noise_vocab = lex.words(cfg.noise_vocab_size)
        self.noise_tags = ["#" + w for w in lex.words(max(1, cfg.noise_vocab_size // 20))]
        self.noise_users = [f"z{i:05d}" for i in range(cfg.noise_users)]
        z = cfg.zipf_exponent
        self._samplers = {}
        for meme in self.memes:
            for seq in (meme.vocab, meme.hashtags, meme.urls, meme.users):
                self._samplers[id(seq)] = _Zipf(seq, z, rng)
        for seq in (self.shared, self.noise_vocab, self.noise_tags, self.noise_users):
            self._samplers[id(seq)] = _Zipf(seq, z, rng)

    def _pick(self, seq):
        return self._samplers[id(seq)]()

    def _community(self, m):
        cfg = self.cfg
        if cfg.n_memes > 1 and self.rng.random() < cfg.user_overlap:
            other = int(self.rng.integers(cfg.n_memes - 1))
            m = other if other < m else other + 1
        return self.memes[m].users

    def _n_words(self):
        return int(self.rng.integers(self.cfg.words_min, self.cfg.words_max + 1))

    def meme_tweet(self, m):
        cfg, meme, rng = self.cfg, self.memes[m], self.rng
        author = self._pick(self._community(m))
        parts, rt = [], None
        if rng.random() < cfg.retweet_prob:
            rt = self._pick(self._community(m))
            if rt != author:
                parts.append(f"RT @{rt}:")
            else:
                rt = None
        for _ in range(self._n_words()):
            pool = self.shared if rng.random() < cfg.shared_vocab else meme.vocab
            parts.append(self._pick(pool))
        extras = []
        if rng.random() < cfg.hashtag_prob:
            extras.append(self._pick(meme.hashtags))
        if rng.random() < cfg.mention_prob:
            extras.append("@" + self._pick(self._community(m)))
        if rng.random() < cfg.url_prob:
            extras.append(self._pick(meme.urls))
        rng.shuffle(extras)
        return author, " ".join(parts + extras), rt, (meme.label,)

    def noise_tweet(self):
        cfg, rng = self.cfg, self.rng
        author = self._pick(self.noise_users)
        parts = [self._pick(self.noise_vocab) for _ in range(self._n_words())]
        if rng.random() < cfg.hashtag_prob:
            parts.append(self._pick(self.noise_tags))
        if rng.random() < cfg.mention_prob:
            parts.append("@" + self._pick(self.noise_users))
        return author, " ".join(parts), None, ()

    def arrivals(self, rate_per_hour):
        cfg = self.cfg
        span = int(round(cfg.duration_hours * 3600))
        n = int(self.rng.poisson(rate_per_hour * cfg.duration_hours))
        # conditional on the count, Poisson arrival times are uniform
        return np.sort(cfg.start_time + 1 + self.rng.integers(0, span, size=n))


def generate_tweets(cfg: SynthConfig) -> List[Tweet]:
    world = _World(cfg)
    events = []
    for m in range(cfg.n_memes):
        for ts in world.arrivals(cfg.tweets_per_meme_per_hour):
            events.append((int(ts), m))
    nf = cfg.noise_tweet_fraction
    if nf > 0:
        noise_rate = cfg.n_memes * cfg.tweets_per_meme_per_hour * nf / (1.0 - nf)
        for ts in world.arrivals(noise_rate):
            events.append((int(ts), -1))
    events.sort()

    out = []
    for i, (ts, m) in enumerate(events):
        if m >= 0:
            author, text, rt, labels = world.meme_tweet(m)
        else:
            author, text, rt, labels = world.noise_tweet()
        out.append(Tweet(f"t{i:07d}", ts, author, text, rt, frozenset(labels)))
    return out


def generate(cfg: SynthConfig) -> Iterator[str]:
    """JSONL lines in the ingest schema, plus ``labels`` for meme tweets."""
    for t in generate_tweets(cfg):
        yield tweet_to_json(t)


def write_jsonl(cfg: SynthConfig, path):
    n = 0
    with open(path, "w", encoding="utf-8") as fh:
        for line in generate(cfg):
            fh.write(line + "\n")
            n += 1
    return n


def follower_graph(cfg: SynthConfig, p_in=0.2, p_out=0.002, seed_offset=1) -> FollowerGraph:
    """Follower edges dense inside each meme community and sparse across them."""
    world = _World(cfg)
    rng = np.random.default_rng(cfg.rng_seed + seed_offset)
    users = [u for meme in world.memes for u in meme.users]
    community = {u: m for m, meme in enumerate(world.memes) for u in meme.users}
    g = FollowerGraph()
    for i, a in enumerate(users):
        for b in users[i + 1:]:
            p = p_in if community[a] == community[b] else p_out
            if rng.random() < p:
                g.add_edge(a, b)
    noise = world.noise_users
    n_noise_edges = len(noise) * 3
    for _ in range(n_noise_edges):
        a = noise[rng.integers(len(noise))]
        b = noise[rng.integers(len(noise))] if rng.random() < 0.9 else users[rng.integers(len(users))]
        if a != b:
            g.add_edge(a, b)
    return g
